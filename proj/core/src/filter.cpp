#include "btprint/filter.hpp"

#include <charconv>

namespace btprint {

std::string FilterSpec::name() const {
    std::string n = protocol ? std::string(to_string(*protocol)) : "all";
    n += '-';
    n += min_length_bytes == 0 ? "all" : std::to_string(min_length_bytes);
    return n;
}

FilterSpec FilterSpec::from_name(std::string_view name) {
    const std::size_t dash = name.rfind('-');
    if (dash == std::string_view::npos || dash == 0 || dash + 1 >= name.size())
        throw Error("bad filter name: " + std::string(name));
    const std::string_view proto = name.substr(0, dash);
    const std::string_view len = name.substr(dash + 1);

    FilterSpec f;
    if (proto != "all") f.protocol = protocol_from_string(proto);
    if (len != "all") {
        std::uint32_t v = 0;
        auto [ptr, ec] = std::from_chars(len.data(), len.data() + len.size(), v);
        if (ec != std::errc{} || ptr != len.data() + len.size())
            throw Error("bad filter length: " + std::string(name));
        f.min_length_bytes = v;
    }
    return f;
}

bool FilterSpec::matches(const PacketRecord& r) const {
    if (r.length_bytes <= min_length_bytes && min_length_bytes != 0) return false;
    if (!protocol) return true;
    switch (*protocol) {
        case Protocol::RFCOMM: return r.protocol == Protocol::RFCOMM;
        case Protocol::SDP: return r.protocol == Protocol::SDP;
        case Protocol::L2CAP:
            return r.protocol == Protocol::L2CAP || r.protocol == Protocol::RFCOMM ||
                   r.protocol == Protocol::SDP;
        case Protocol::HCI_ACL: return r.protocol != Protocol::OTHER;
        case Protocol::OTHER: return r.protocol == Protocol::OTHER;
    }
    return false;
}

std::vector<PacketRecord> apply_filter(std::span<const PacketRecord> session,
                                       const FilterSpec& f) {
    std::vector<PacketRecord> out;
    for (const PacketRecord& r : session)
        if (f.matches(r)) out.push_back(r);
    return out;
}

std::vector<FilterSpec> default_filter_grid() {
    std::vector<FilterSpec> grid;
    const std::optional<Protocol> protocols[] = {std::nullopt, Protocol::HCI_ACL,
                                                 Protocol::L2CAP, Protocol::RFCOMM,
                                                 Protocol::SDP};
    for (const auto& p : protocols)
        for (std::uint32_t len : kGridLengths) grid.push_back(FilterSpec{p, len});
    return grid;
}

}  // namespace btprint
