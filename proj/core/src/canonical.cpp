#include "btprint/canonical.hpp"

#include <json.hpp>

namespace btprint {

using nlohmann::json;

std::vector<PacketRecord> read_canonical(std::string_view text) {
    std::vector<PacketRecord> records;
    std::size_t line_no = 0;
    std::size_t pos = 0;
    while (pos < text.size()) {
        std::size_t eol = text.find('\n', pos);
        std::string_view line =
            text.substr(pos, eol == std::string_view::npos ? std::string_view::npos : eol - pos);
        pos = eol == std::string_view::npos ? text.size() : eol + 1;
        ++line_no;
        if (line.empty()) continue;

        json j = json::parse(line, nullptr, false);
        if (j.is_discarded() || !j.is_object()) throw SchemaError("not a JSON object", line_no);
        for (const char* key : {"ts_us", "dir", "proto", "len", "session"})
            if (!j.contains(key)) throw SchemaError(std::string("missing key ") + key, line_no);

        if (!j["ts_us"].is_number_integer() || j["ts_us"].get<std::int64_t>() < 0)
            throw SchemaError("ts_us must be a non-negative integer", line_no);
        if (!j["len"].is_number_integer() || j["len"].get<std::int64_t>() < 0)
            throw SchemaError("len must be a non-negative integer", line_no);
        if (!j["dir"].is_string() || !j["proto"].is_string() || !j["session"].is_string())
            throw SchemaError("dir, proto and session must be strings", line_no);

        PacketRecord rec;
        rec.timestamp_us = j["ts_us"].get<std::int64_t>();
        rec.length_bytes = static_cast<std::uint32_t>(j["len"].get<std::int64_t>());
        rec.session_id = j["session"].get<std::string>();
        try {
            rec.direction = direction_from_string(j["dir"].get<std::string>());
            rec.protocol = protocol_from_string(j["proto"].get<std::string>());
        } catch (const Error& e) {
            throw SchemaError(e.what(), line_no);
        }
        records.push_back(std::move(rec));
    }
    return records;
}

std::string write_canonical(std::span<const PacketRecord> records) {
    std::string out;
    for (const PacketRecord& r : records) {
        json j;
        j["ts_us"] = r.timestamp_us;
        j["dir"] = to_string(r.direction);
        j["proto"] = to_string(r.protocol);
        j["len"] = r.length_bytes;
        j["session"] = r.session_id;
        out += j.dump();
        out += '\n';
    }
    return out;
}

}  // namespace btprint
