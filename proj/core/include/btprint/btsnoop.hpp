#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "btprint/packet.hpp"

namespace btprint {

// btsnoop v1 file layout, all integers big-endian:
//   header  { magic "btsnoop\0", version u32 = 1, datalink u32 }
//   record  { orig_len u32, incl_len u32, flags u32, drops u32,
//             timestamp i64 (microseconds since 0 AD), payload[incl_len] }
// flags bit 0: 0 = sent (host to controller), 1 = received.
// flags bit 1 (datalink 1001 only): 0 = data frame, 1 = command/event frame.

inline constexpr std::uint32_t kDatalinkHciRaw = 1001;  // un-encapsulated HCI
inline constexpr std::uint32_t kDatalinkHciH4 = 1002;   // H4/UART, leading type octet

/// Offset between the btsnoop epoch (year 0 AD) and the Unix epoch.
inline constexpr std::int64_t kBtsnoopEpochDeltaUs = 0x00DCDDB30F2F8000LL;

/// Parses a btsnoop v1 byte stream into HCI records. Timestamps are rebased
/// to microseconds since the Unix epoch. For datalink 1002 the leading H4
/// type octet is consumed into hci_packet_type.
///
/// Throws BadMagic, UnsupportedVersion, UnsupportedDatalink or
/// TruncatedRecord (with the byte offset where parsing stopped).
std::vector<RawHciRecord> parse_btsnoop(std::span<const std::uint8_t> bytes);

/// Serializes HCI records back to a btsnoop v1 file (datalink 1002).
std::vector<std::uint8_t> write_btsnoop(std::span<const RawHciRecord> records);

}  // namespace btprint
