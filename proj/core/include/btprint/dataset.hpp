#pragma once

#include <string>
#include <vector>

#include "btprint/features.hpp"
#include "btprint/packet.hpp"

namespace btprint {

/// A raw labeled capture: one session's packet records plus its class.
struct LabeledSession {
    std::string session_id;
    std::string label;
    std::vector<PacketRecord> packets;
};

/// Labeled signatures sharing one filter and t_max, ready for fitting.
struct Dataset {
    std::vector<Signature> signatures;
    std::vector<std::string> class_names;  // unique, defines class index order

    /// Throws Error if a signature is unlabeled, a label is outside
    /// class_names, or filter/t_max are not uniform.
    void validate() const;

    std::size_t class_index(const std::string& name) const;
    std::vector<std::size_t> class_supports() const;
};

}  // namespace btprint
