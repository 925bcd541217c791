#include "btprint/btsnoop.hpp"

#include <cstring>

namespace btprint {
namespace {

constexpr std::uint8_t kMagic[8] = {'b', 't', 's', 'n', 'o', 'o', 'p', '\0'};
constexpr std::size_t kHeaderSize = 16;
constexpr std::size_t kRecordHeaderSize = 24;

std::uint32_t read_u32_be(const std::uint8_t* p) {
    return (std::uint32_t(p[0]) << 24) | (std::uint32_t(p[1]) << 16) |
           (std::uint32_t(p[2]) << 8) | std::uint32_t(p[3]);
}

std::int64_t read_i64_be(const std::uint8_t* p) {
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v = (v << 8) | p[i];
    return static_cast<std::int64_t>(v);
}

void append_u32_be(std::vector<std::uint8_t>& out, std::uint32_t v) {
    out.push_back(std::uint8_t(v >> 24));
    out.push_back(std::uint8_t(v >> 16));
    out.push_back(std::uint8_t(v >> 8));
    out.push_back(std::uint8_t(v));
}

void append_i64_be(std::vector<std::uint8_t>& out, std::int64_t v) {
    auto u = static_cast<std::uint64_t>(v);
    for (int i = 7; i >= 0; --i) out.push_back(std::uint8_t(u >> (8 * i)));
}

}  // namespace

std::vector<RawHciRecord> parse_btsnoop(std::span<const std::uint8_t> bytes) {
    if (bytes.size() < kHeaderSize) throw BadMagic("not a btsnoop file: shorter than the header");
    if (std::memcmp(bytes.data(), kMagic, sizeof(kMagic)) != 0)
        throw BadMagic("not a btsnoop file: bad magic");

    const std::uint32_t version = read_u32_be(bytes.data() + 8);
    if (version != 1) throw UnsupportedVersion("btsnoop version " + std::to_string(version));
    const std::uint32_t datalink = read_u32_be(bytes.data() + 12);
    if (datalink != kDatalinkHciRaw && datalink != kDatalinkHciH4)
        throw UnsupportedDatalink("btsnoop datalink " + std::to_string(datalink));

    std::vector<RawHciRecord> records;
    std::size_t off = kHeaderSize;
    while (off < bytes.size()) {
        if (bytes.size() - off < kRecordHeaderSize)
            throw TruncatedRecord("record header cut short", off);
        const std::uint8_t* h = bytes.data() + off;
        const std::uint32_t incl_len = read_u32_be(h + 4);
        const std::uint32_t flags = read_u32_be(h + 8);
        const std::int64_t ts = read_i64_be(h + 16);
        // Bound by the remaining bytes before allocating anything.
        if (incl_len > bytes.size() - off - kRecordHeaderSize)
            throw TruncatedRecord("record payload cut short", off);

        RawHciRecord rec;
        rec.timestamp_us = ts - kBtsnoopEpochDeltaUs;
        rec.direction = (flags & 0x1) ? Direction::received : Direction::sent;

        const std::uint8_t* payload = h + kRecordHeaderSize;
        std::uint32_t payload_len = incl_len;
        if (datalink == kDatalinkHciH4) {
            if (payload_len == 0) throw TruncatedRecord("H4 record without a type octet", off);
            switch (payload[0]) {
                case 0x01: rec.hci_packet_type = HciPacketType::command; break;
                case 0x02: rec.hci_packet_type = HciPacketType::acl_data; break;
                case 0x03: rec.hci_packet_type = HciPacketType::sco_data; break;
                case 0x04: rec.hci_packet_type = HciPacketType::event; break;
                default:
                    // Unknown H4 type: keep the record, downstream labels it OTHER.
                    rec.hci_packet_type = HciPacketType::command;
                    break;
            }
            ++payload;
            --payload_len;
        } else {
            // Datalink 1001 has no type octet; flags bit 1 separates
            // command/event frames from data frames.
            if (flags & 0x2)
                rec.hci_packet_type = rec.direction == Direction::sent ? HciPacketType::command
                                                                       : HciPacketType::event;
            else
                rec.hci_packet_type = HciPacketType::acl_data;
        }
        rec.payload.assign(payload, payload + payload_len);
        records.push_back(std::move(rec));
        off += kRecordHeaderSize + incl_len;
    }
    return records;
}

std::vector<std::uint8_t> write_btsnoop(std::span<const RawHciRecord> records) {
    std::vector<std::uint8_t> out;
    out.reserve(kHeaderSize + records.size() * (kRecordHeaderSize + 16));
    out.insert(out.end(), kMagic, kMagic + sizeof(kMagic));
    append_u32_be(out, 1);
    append_u32_be(out, kDatalinkHciH4);

    for (const RawHciRecord& rec : records) {
        const std::uint32_t len = static_cast<std::uint32_t>(rec.payload.size()) + 1;  // H4 octet
        append_u32_be(out, len);
        append_u32_be(out, len);
        append_u32_be(out, rec.direction == Direction::received ? 0x1 : 0x0);
        append_u32_be(out, 0);  // drops
        append_i64_be(out, rec.timestamp_us + kBtsnoopEpochDeltaUs);
        out.push_back(static_cast<std::uint8_t>(rec.hci_packet_type));
        out.insert(out.end(), rec.payload.begin(), rec.payload.end());
    }
    return out;
}

}  // namespace btprint
