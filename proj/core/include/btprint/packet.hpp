#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "btprint/errors.hpp"

namespace btprint {

enum class Direction : std::uint8_t { sent, received };

/// HCI packet indicator, matching the H4 transport type octets.
enum class HciPacketType : std::uint8_t {
    command = 0x01,
    acl_data = 0x02,
    sco_data = 0x03,
    event = 0x04,
};

/// Protocol label assigned by the demultiplexer. Labels are hierarchical for
/// filtering purposes: RFCOMM and SDP ride on L2CAP, which rides on HCI ACL.
enum class Protocol : std::uint8_t { HCI_ACL, L2CAP, RFCOMM, SDP, OTHER };

std::string_view to_string(Direction d);
std::string_view to_string(Protocol p);
Direction direction_from_string(std::string_view s);
Protocol protocol_from_string(std::string_view s);

/// One HCI-level record as it appears in a capture file.
struct RawHciRecord {
    std::int64_t timestamp_us = 0;  // microseconds since Unix epoch
    Direction direction = Direction::sent;
    HciPacketType hci_packet_type = HciPacketType::acl_data;
    std::vector<std::uint8_t> payload;
};

/// One protocol-labeled packet observation, the unit everything downstream
/// consumes. length_bytes is the HCI payload length enclosing the labeled
/// layer (what a capture tool reports for the record).
struct PacketRecord {
    std::int64_t timestamp_us = 0;
    Direction direction = Direction::sent;
    Protocol protocol = Protocol::OTHER;
    std::uint32_t length_bytes = 0;
    std::string session_id;

    friend bool operator==(const PacketRecord&, const PacketRecord&) = default;
};

}  // namespace btprint
