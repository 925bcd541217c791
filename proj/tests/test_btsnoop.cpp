#include <doctest.h>

#include <vector>

#include "btprint/btsnoop.hpp"

using namespace btprint;

namespace {

void push_u32_be(std::vector<std::uint8_t>& v, std::uint32_t x) {
    v.push_back(std::uint8_t(x >> 24));
    v.push_back(std::uint8_t(x >> 16));
    v.push_back(std::uint8_t(x >> 8));
    v.push_back(std::uint8_t(x));
}

void push_i64_be(std::vector<std::uint8_t>& v, std::int64_t x) {
    auto u = static_cast<std::uint64_t>(x);
    for (int i = 7; i >= 0; --i) v.push_back(std::uint8_t(u >> (8 * i)));
}

std::vector<std::uint8_t> header(std::uint32_t datalink = kDatalinkHciH4,
                                 std::uint32_t version = 1) {
    std::vector<std::uint8_t> v = {'b', 't', 's', 'n', 'o', 'o', 'p', '\0'};
    push_u32_be(v, version);
    push_u32_be(v, datalink);
    return v;
}

void push_record(std::vector<std::uint8_t>& v, std::uint32_t flags, std::int64_t unix_ts_us,
                 const std::vector<std::uint8_t>& payload) {
    push_u32_be(v, std::uint32_t(payload.size()));
    push_u32_be(v, std::uint32_t(payload.size()));
    push_u32_be(v, flags);
    push_u32_be(v, 0);
    push_i64_be(v, unix_ts_us + kBtsnoopEpochDeltaUs);
    v.insert(v.end(), payload.begin(), payload.end());
}

}  // namespace

TEST_CASE("header-only file parses to an empty list") {
    const auto bytes = header();
    CHECK(parse_btsnoop(bytes).empty());
}

TEST_CASE("one H4 ACL record decodes type, direction, payload") {
    // Hand-built per the v1 layout: incl_len=4, flags=0 (sent), H4 octet
    // 0x02 (ACL) followed by 3 payload bytes.
    auto bytes = header();
    push_record(bytes, 0x0, 12345, {0x02, 0xaa, 0xbb, 0xcc});

    const auto records = parse_btsnoop(bytes);
    REQUIRE(records.size() == 1);
    CHECK(records[0].direction == Direction::sent);
    CHECK(records[0].hci_packet_type == HciPacketType::acl_data);
    CHECK(records[0].payload.size() == 3);
    CHECK(records[0].timestamp_us == 12345);
}

TEST_CASE("flags decode: bit 0 is the direction") {
    auto bytes = header();
    push_record(bytes, 0x1, 0, {0x04, 0x00});
    const auto records = parse_btsnoop(bytes);
    REQUIRE(records.size() == 1);
    CHECK(records[0].direction == Direction::received);
    CHECK(records[0].hci_packet_type == HciPacketType::event);
}

TEST_CASE("datalink 1001 uses flags bit 1 for the frame kind") {
    auto bytes = header(kDatalinkHciRaw);
    push_record(bytes, 0x0, 0, {0x01, 0x02, 0x03, 0x04});  // data frame, sent
    push_record(bytes, 0x3, 7, {0x05});                    // command/event, received
    const auto records = parse_btsnoop(bytes);
    REQUIRE(records.size() == 2);
    CHECK(records[0].hci_packet_type == HciPacketType::acl_data);
    CHECK(records[0].payload.size() == 4);  // no H4 octet consumed
    CHECK(records[1].hci_packet_type == HciPacketType::event);
}

TEST_CASE("corrupted magic raises BadMagic") {
    auto bytes = header();
    bytes[6] = 'X';
    CHECK_THROWS_AS(parse_btsnoop(bytes), BadMagic);
}

TEST_CASE("unsupported version and datalink are rejected") {
    CHECK_THROWS_AS(parse_btsnoop(header(kDatalinkHciH4, 2)), UnsupportedVersion);
    CHECK_THROWS_AS(parse_btsnoop(header(2001)), UnsupportedDatalink);
}

TEST_CASE("truncated record reports the byte offset") {
    auto bytes = header();
    push_u32_be(bytes, 100);  // orig_len
    push_u32_be(bytes, 100);  // incl_len larger than what follows
    push_u32_be(bytes, 0);
    push_u32_be(bytes, 0);
    push_i64_be(bytes, kBtsnoopEpochDeltaUs);
    bytes.push_back(0x02);

    try {
        parse_btsnoop(bytes);
        FAIL("expected TruncatedRecord");
    } catch (const TruncatedRecord& e) {
        CHECK(e.byte_offset == 16);
    }
}

TEST_CASE("write_btsnoop round-trips through parse_btsnoop") {
    std::vector<RawHciRecord> records;
    RawHciRecord r;
    r.timestamp_us = 1700000000000000LL;
    r.direction = Direction::received;
    r.hci_packet_type = HciPacketType::acl_data;
    r.payload = {0x01, 0x20, 0x04, 0x00, 0x00, 0x00, 0x40, 0x00};
    records.push_back(r);
    r.timestamp_us += 250;
    r.direction = Direction::sent;
    r.hci_packet_type = HciPacketType::command;
    r.payload = {0x03, 0x0c, 0x00};
    records.push_back(r);

    const auto parsed = parse_btsnoop(write_btsnoop(records));
    REQUIRE(parsed.size() == records.size());
    for (std::size_t i = 0; i < parsed.size(); ++i) {
        CHECK(parsed[i].timestamp_us == records[i].timestamp_us);
        CHECK(parsed[i].direction == records[i].direction);
        CHECK(parsed[i].hci_packet_type == records[i].hci_packet_type);
        CHECK(parsed[i].payload == records[i].payload);
    }
}
