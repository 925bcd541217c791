#pragma once

#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "btprint/packet.hpp"

namespace btprint {

// Canonical JSONL: one object per line, LF-terminated, UTF-8, with keys
//   ts_us (int >= 0), dir ("sent"|"received"), proto (protocol enum name),
//   len (int >= 0), session (string).

/// Parses canonical JSONL. Lines failing schema validation raise
/// SchemaError carrying the 1-based line number.
std::vector<PacketRecord> read_canonical(std::string_view text);

std::string write_canonical(std::span<const PacketRecord> records);

}  // namespace btprint
