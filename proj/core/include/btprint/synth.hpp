#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "btprint/packet.hpp"

namespace btprint {

/// One lognormal mixture component over inter-arrival times; mu and sigma
/// are in log-seconds.
struct LognormalComponent {
    double weight = 0.0;
    double mu = 0.0;
    double sigma = 0.0;
};

/// A byte-length bucket; generated lengths are uniform in [min, max].
struct LengthBucket {
    double weight = 0.0;
    std::uint32_t min_bytes = 0;
    std::uint32_t max_bytes = 0;
};

struct ProtocolWeight {
    Protocol protocol = Protocol::L2CAP;
    double weight = 0.0;
};

/// A synthetic device: its IAT mixture, packet-length model and protocol
/// mix. Stands in for the hardware diversity of a real fleet.
struct DeviceProfile {
    std::string name;
    std::vector<LognormalComponent> iat_model;
    std::vector<LengthBucket> length_model;
    std::vector<ProtocolWeight> protocol_mix;

    /// Throws InvalidProfile when either weight set does not sum to 1
    /// (within 1e-9), a sigma is nonpositive, or a length bucket cannot
    /// carry the L2CAP framing (min_bytes < 8).
    void validate() const;
};

/// Emits n_messages records with IATs drawn from the profile's mixture,
/// lengths and protocols from the categorical models, alternating
/// directions, timestamps cumulative from 0. Fully determined by the seed.
std::vector<PacketRecord> generate_session(const DeviceProfile& p, std::size_t n_messages,
                                           std::uint64_t seed);

/// Serializes a session to a btsnoop v1 file whose L2CAP signaling preamble
/// establishes the CID/PSM mappings, so that parsing and demultiplexing the
/// output reproduces each record's (timestamp, protocol, length) exactly.
std::vector<std::uint8_t> emit_btsnoop(std::span<const PacketRecord> session);

/// The default 7-profile fleet with overlapping-but-distinct mixtures.
std::vector<DeviceProfile> default_fleet();

/// Fleet file: {"profiles":[{name, iat_model, length_model, protocol_mix}]}.
std::vector<DeviceProfile> fleet_from_json(std::string_view text);
std::string fleet_to_json(std::span<const DeviceProfile> profiles);

}  // namespace btprint
