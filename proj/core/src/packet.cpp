#include "btprint/packet.hpp"

namespace btprint {

std::string_view to_string(Direction d) {
    return d == Direction::sent ? "sent" : "received";
}

std::string_view to_string(Protocol p) {
    switch (p) {
        case Protocol::HCI_ACL: return "HCI_ACL";
        case Protocol::L2CAP: return "L2CAP";
        case Protocol::RFCOMM: return "RFCOMM";
        case Protocol::SDP: return "SDP";
        case Protocol::OTHER: return "OTHER";
    }
    return "OTHER";
}

Direction direction_from_string(std::string_view s) {
    if (s == "sent") return Direction::sent;
    if (s == "received") return Direction::received;
    throw Error("unknown direction: " + std::string(s));
}

Protocol protocol_from_string(std::string_view s) {
    if (s == "HCI_ACL") return Protocol::HCI_ACL;
    if (s == "L2CAP") return Protocol::L2CAP;
    if (s == "RFCOMM") return Protocol::RFCOMM;
    if (s == "SDP") return Protocol::SDP;
    if (s == "OTHER") return Protocol::OTHER;
    throw Error("unknown protocol: " + std::string(s));
}

}  // namespace btprint
