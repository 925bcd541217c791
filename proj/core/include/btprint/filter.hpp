#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "btprint/packet.hpp"

namespace btprint {

/// The packet-length thresholds of the filter grid; 0 stands for "all".
inline constexpr std::array<std::uint32_t, 7> kGridLengths{0, 10, 200, 400, 600, 800, 1000};

/// A (protocol, minimum length) predicate, named "<protocol>-<min_length>"
/// with "all" for the unconstrained slot, e.g. "RFCOMM-10" or "all-all".
struct FilterSpec {
    std::optional<Protocol> protocol;     // nullopt = all protocols
    std::uint32_t min_length_bytes = 0;   // 0 = all lengths; match is strictly greater

    std::string name() const;
    static FilterSpec from_name(std::string_view name);

    /// Protocol matching is hierarchical: an L2CAP filter admits RFCOMM and
    /// SDP records, an HCI_ACL filter admits every ACL-borne record.
    bool matches(const PacketRecord& r) const;

    friend bool operator==(const FilterSpec&, const FilterSpec&) = default;
};

/// Keeps records matching the filter, order preserved.
std::vector<PacketRecord> apply_filter(std::span<const PacketRecord> session,
                                       const FilterSpec& f);

/// The full 5 x 7 protocol-by-length grid (35 filters).
std::vector<FilterSpec> default_filter_grid();

}  // namespace btprint
