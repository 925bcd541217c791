#include "btprint/synth.hpp"

#include <cmath>

#include <json.hpp>

#include "btprint/btsnoop.hpp"
#include "btprint/demux.hpp"
#include "btprint/jsonutil.hpp"
#include "learner_impl.hpp"

namespace btprint {

using nlohmann::json;

namespace {

constexpr double kWeightTolerance = 1e-9;

double mixture_weight_sum(const DeviceProfile& p, bool iat) {
    double sum = 0.0;
    if (iat)
        for (const auto& c : p.iat_model) sum += c.weight;
    else
        for (const auto& b : p.length_model) sum += b.weight;
    return sum;
}

/// Standard normal via Box-Muller on explicit uniform bits, so draws are a
/// pure function of the generator state.
double draw_normal(detail::Rng& rng) {
    const double u1 = 1.0 - rng.uniform();  // (0, 1]
    const double u2 = rng.uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
}

std::size_t draw_categorical(detail::Rng& rng, std::span<const double> weights) {
    const double u = rng.uniform();
    double acc = 0.0;
    for (std::size_t i = 0; i < weights.size(); ++i) {
        acc += weights[i];
        if (u < acc) return i;
    }
    return weights.size() - 1;
}

// Fixed CID plan for emitted captures. Data PDUs the host sends carry the
// peer's CID, received ones carry the host's.
struct CidPair {
    std::uint16_t local;
    std::uint16_t remote;
};
constexpr CidPair kRfcommCids{0x0040, 0x0041};
constexpr CidPair kSdpCids{0x0042, 0x0043};
constexpr CidPair kPlainL2capCids{0x0060, 0x0061};  // never negotiated

void append_u16_le(std::vector<std::uint8_t>& v, std::uint16_t x) {
    v.push_back(std::uint8_t(x & 0xff));
    v.push_back(std::uint8_t(x >> 8));
}

std::vector<std::uint8_t> acl_payload(unsigned pb_flag, std::uint16_t cid,
                                      std::span<const std::uint8_t> l2cap_payload) {
    std::vector<std::uint8_t> out;
    out.reserve(8 + l2cap_payload.size());
    const std::uint16_t handle_flags = static_cast<std::uint16_t>(0x0001 | (pb_flag << 12));
    append_u16_le(out, handle_flags);
    append_u16_le(out, static_cast<std::uint16_t>(4 + l2cap_payload.size()));
    append_u16_le(out, static_cast<std::uint16_t>(l2cap_payload.size()));
    append_u16_le(out, cid);
    out.insert(out.end(), l2cap_payload.begin(), l2cap_payload.end());
    return out;
}

RawHciRecord acl_record(std::int64_t ts, Direction dir, unsigned pb_flag, std::uint16_t cid,
                        std::span<const std::uint8_t> l2cap_payload) {
    RawHciRecord r;
    r.timestamp_us = ts;
    r.direction = dir;
    r.hci_packet_type = HciPacketType::acl_data;
    r.payload = acl_payload(pb_flag, cid, l2cap_payload);
    return r;
}

void append_handshake(std::vector<RawHciRecord>& out, std::int64_t ts, std::uint16_t psm,
                      const CidPair& cids) {
    std::vector<std::uint8_t> req;
    req.push_back(0x02);  // Connection Request
    req.push_back(0x01);  // identifier
    append_u16_le(req, 4);
    append_u16_le(req, psm);
    append_u16_le(req, cids.local);
    out.push_back(acl_record(ts, Direction::sent, 0x2, kCidSignaling, req));

    std::vector<std::uint8_t> rsp;
    rsp.push_back(0x03);  // Connection Response
    rsp.push_back(0x01);
    append_u16_le(rsp, 8);
    append_u16_le(rsp, cids.remote);  // DCID: allocated by the responder
    append_u16_le(rsp, cids.local);   // SCID: echo of the request
    append_u16_le(rsp, 0);            // success
    append_u16_le(rsp, 0);
    out.push_back(acl_record(ts, Direction::received, 0x2, kCidSignaling, rsp));
}

}  // namespace

void DeviceProfile::validate() const {
    if (iat_model.empty() || length_model.empty() || protocol_mix.empty())
        throw InvalidProfile(name + ": every model needs at least one component");
    if (std::abs(mixture_weight_sum(*this, true) - 1.0) > kWeightTolerance)
        throw InvalidProfile(name + ": iat_model weights must sum to 1");
    if (std::abs(mixture_weight_sum(*this, false) - 1.0) > kWeightTolerance)
        throw InvalidProfile(name + ": length_model weights must sum to 1");
    double proto_sum = 0.0;
    for (const auto& pw : protocol_mix) {
        proto_sum += pw.weight;
        if (pw.protocol != Protocol::L2CAP && pw.protocol != Protocol::RFCOMM &&
            pw.protocol != Protocol::SDP)
            throw InvalidProfile(name + ": protocol_mix entries must be L2CAP, RFCOMM or SDP");
    }
    if (std::abs(proto_sum - 1.0) > kWeightTolerance)
        throw InvalidProfile(name + ": protocol_mix weights must sum to 1");
    for (const auto& c : iat_model)
        if (!(c.sigma > 0.0)) throw InvalidProfile(name + ": sigma must be positive");
    for (const auto& b : length_model) {
        if (b.min_bytes > b.max_bytes)
            throw InvalidProfile(name + ": length bucket with min > max");
        if (b.min_bytes < 8)
            throw InvalidProfile(name + ": lengths below 8 bytes cannot carry L2CAP framing");
    }
}

std::vector<PacketRecord> generate_session(const DeviceProfile& p, std::size_t n_messages,
                                           std::uint64_t seed) {
    p.validate();
    if (n_messages < 2) throw Error("a session needs at least 2 messages");

    detail::Rng rng(seed);
    std::vector<double> iat_weights, len_weights, proto_weights;
    for (const auto& c : p.iat_model) iat_weights.push_back(c.weight);
    for (const auto& b : p.length_model) len_weights.push_back(b.weight);
    for (const auto& pw : p.protocol_mix) proto_weights.push_back(pw.weight);

    std::vector<PacketRecord> session;
    session.reserve(n_messages);
    const std::string session_id = p.name + "-" + std::to_string(seed);
    std::int64_t t_us = 0;
    for (std::size_t i = 0; i < n_messages; ++i) {
        if (i > 0) {
            const auto& comp = p.iat_model[draw_categorical(rng, iat_weights)];
            const double iat = std::exp(comp.mu + comp.sigma * draw_normal(rng));
            t_us += std::llround(iat * 1e6);
        }
        const auto& bucket = p.length_model[draw_categorical(rng, len_weights)];
        const std::uint32_t span = bucket.max_bytes - bucket.min_bytes + 1;
        PacketRecord rec;
        rec.timestamp_us = t_us;
        rec.direction = i % 2 == 0 ? Direction::sent : Direction::received;
        rec.protocol = p.protocol_mix[draw_categorical(rng, proto_weights)].protocol;
        rec.length_bytes = bucket.min_bytes + static_cast<std::uint32_t>(rng.u64() % span);
        rec.session_id = session_id;
        session.push_back(std::move(rec));
    }
    return session;
}

std::vector<std::uint8_t> emit_btsnoop(std::span<const PacketRecord> session) {
    std::vector<RawHciRecord> records;
    if (!session.empty()) {
        const std::int64_t t0 = session.front().timestamp_us;
        bool wants_rfcomm = false, wants_sdp = false;
        for (const PacketRecord& r : session) {
            wants_rfcomm |= r.protocol == Protocol::RFCOMM;
            wants_sdp |= r.protocol == Protocol::SDP;
        }
        if (wants_sdp) append_handshake(records, t0, kPsmSdp, kSdpCids);
        if (wants_rfcomm) append_handshake(records, t0, kPsmRfcomm, kRfcommCids);

        for (const PacketRecord& r : session) {
            switch (r.protocol) {
                case Protocol::RFCOMM:
                case Protocol::SDP:
                case Protocol::L2CAP: {
                    if (r.length_bytes < 8)
                        throw Error("cannot frame a " + std::to_string(r.length_bytes) +
                                    "-byte record as an L2CAP PDU");
                    const CidPair& cids = r.protocol == Protocol::RFCOMM ? kRfcommCids
                                          : r.protocol == Protocol::SDP ? kSdpCids
                                                                        : kPlainL2capCids;
                    const std::uint16_t cid =
                        r.direction == Direction::sent ? cids.remote : cids.local;
                    std::vector<std::uint8_t> payload(r.length_bytes - 8, 0x00);
                    records.push_back(
                        acl_record(r.timestamp_us, r.direction, 0x2, cid, payload));
                    break;
                }
                case Protocol::HCI_ACL: {
                    // An orphan continuation fragment labels back as HCI_ACL.
                    if (r.length_bytes < 4)
                        throw Error("HCI_ACL records need at least 4 bytes");
                    RawHciRecord rec;
                    rec.timestamp_us = r.timestamp_us;
                    rec.direction = r.direction;
                    rec.hci_packet_type = HciPacketType::acl_data;
                    const std::uint16_t handle_flags =
                        static_cast<std::uint16_t>(0x0001 | (0x1u << 12));
                    append_u16_le(rec.payload, handle_flags);
                    append_u16_le(rec.payload, static_cast<std::uint16_t>(r.length_bytes - 4));
                    rec.payload.resize(r.length_bytes, 0x00);
                    records.push_back(std::move(rec));
                    break;
                }
                case Protocol::OTHER: {
                    RawHciRecord rec;
                    rec.timestamp_us = r.timestamp_us;
                    rec.direction = r.direction;
                    rec.hci_packet_type = HciPacketType::event;
                    rec.payload.assign(r.length_bytes, 0x00);
                    records.push_back(std::move(rec));
                    break;
                }
            }
        }
    }
    return write_btsnoop(records);
}

std::vector<DeviceProfile> default_fleet() {
    auto lognormal = [](double weight, double median_s, double sigma) {
        return LognormalComponent{weight, std::log(median_s), sigma};
    };
    std::vector<DeviceProfile> fleet;

    // Three devices share near-identical silicon and sit close together;
    // the rest spread out, so filters and classifiers have real work to do.
    fleet.push_back({"SonySmartWatch",
                     {lognormal(0.55, 0.012, 0.35), lognormal(0.33, 0.15, 0.45),
                      lognormal(0.12, 1.20, 0.40)},
                     {{0.50, 20, 120}, {0.32, 150, 600}, {0.18, 700, 1400}},
                     {{Protocol::L2CAP, 0.25}, {Protocol::RFCOMM, 0.65}, {Protocol::SDP, 0.10}}});
    fleet.push_back({"ZenWatch",
                     {lognormal(0.50, 0.015, 0.38), lognormal(0.36, 0.19, 0.48),
                      lognormal(0.14, 1.05, 0.42)},
                     {{0.46, 20, 140}, {0.36, 160, 640}, {0.18, 720, 1400}},
                     {{Protocol::L2CAP, 0.30}, {Protocol::RFCOMM, 0.60}, {Protocol::SDP, 0.10}}});
    fleet.push_back({"GWatchR",
                     {lognormal(0.46, 0.019, 0.40), lognormal(0.40, 0.24, 0.50),
                      lognormal(0.14, 0.90, 0.38)},
                     {{0.42, 24, 150}, {0.40, 170, 680}, {0.18, 740, 1400}},
                     {{Protocol::L2CAP, 0.20}, {Protocol::RFCOMM, 0.70}, {Protocol::SDP, 0.10}}});
    fleet.push_back({"Moto360",
                     {lognormal(0.45, 0.035, 0.30), lognormal(0.45, 0.45, 0.35),
                      lognormal(0.10, 2.40, 0.30)},
                     {{0.55, 30, 200}, {0.30, 220, 800}, {0.15, 820, 1400}},
                     {{Protocol::L2CAP, 0.35}, {Protocol::RFCOMM, 0.55}, {Protocol::SDP, 0.10}}});
    fleet.push_back({"LGUrbane",
                     {lognormal(0.62, 0.006, 0.25), lognormal(0.28, 0.08, 0.40),
                      lognormal(0.10, 0.70, 0.50)},
                     {{0.60, 20, 100}, {0.25, 120, 500}, {0.15, 600, 1300}},
                     {{Protocol::L2CAP, 0.15}, {Protocol::RFCOMM, 0.75}, {Protocol::SDP, 0.10}}});
    fleet.push_back({"GearLive",
                     {lognormal(0.38, 0.022, 0.45), lognormal(0.47, 0.28, 0.45),
                      lognormal(0.15, 1.60, 0.35)},
                     {{0.44, 26, 160}, {0.38, 180, 700}, {0.18, 760, 1400}},
                     {{Protocol::L2CAP, 0.30}, {Protocol::RFCOMM, 0.62}, {Protocol::SDP, 0.08}}});
    fleet.push_back({"GalaxyS5",
                     {lognormal(0.66, 0.009, 0.52), lognormal(0.24, 0.12, 0.60),
                      lognormal(0.10, 0.95, 0.55)},
                     {{0.40, 20, 180}, {0.35, 200, 900}, {0.25, 920, 1400}},
                     {{Protocol::L2CAP, 0.40}, {Protocol::RFCOMM, 0.50}, {Protocol::SDP, 0.10}}});
    for (const DeviceProfile& p : fleet) p.validate();
    return fleet;
}

std::vector<DeviceProfile> fleet_from_json(std::string_view text) {
    json doc = json::parse(text);
    std::vector<DeviceProfile> fleet;
    for (const json& jp : doc.at("profiles")) {
        DeviceProfile p;
        p.name = jp.at("name").get<std::string>();
        for (const json& c : jp.at("iat_model"))
            p.iat_model.push_back({c.at("weight").get<double>(), c.at("mu").get<double>(),
                                   c.at("sigma").get<double>()});
        for (const json& b : jp.at("length_model"))
            p.length_model.push_back({b.at("weight").get<double>(),
                                      b.at("min_bytes").get<std::uint32_t>(),
                                      b.at("max_bytes").get<std::uint32_t>()});
        for (const json& pw : jp.at("protocol_mix"))
            p.protocol_mix.push_back(
                {protocol_from_string(pw.at("protocol").get<std::string>()),
                 pw.at("weight").get<double>()});
        p.validate();
        fleet.push_back(std::move(p));
    }
    return fleet;
}

std::string fleet_to_json(std::span<const DeviceProfile> profiles) {
    json doc;
    json arr = json::array();
    for (const DeviceProfile& p : profiles) {
        json jp;
        jp["name"] = p.name;
        json iat = json::array();
        for (const auto& c : p.iat_model)
            iat.push_back({{"weight", c.weight}, {"mu", c.mu}, {"sigma", c.sigma}});
        jp["iat_model"] = std::move(iat);
        json lens = json::array();
        for (const auto& b : p.length_model)
            lens.push_back({{"weight", b.weight},
                            {"min_bytes", b.min_bytes},
                            {"max_bytes", b.max_bytes}});
        jp["length_model"] = std::move(lens);
        json protos = json::array();
        for (const auto& pw : p.protocol_mix)
            protos.push_back({{"protocol", to_string(pw.protocol)}, {"weight", pw.weight}});
        jp["protocol_mix"] = std::move(protos);
        arr.push_back(std::move(jp));
    }
    doc["profiles"] = std::move(arr);
    return doc.dump(2) + "\n";
}

}  // namespace btprint
