#include "btprint/demux.hpp"

#include <algorithm>

namespace btprint {
namespace {

Direction flip(Direction d) {
    return d == Direction::sent ? Direction::received : Direction::sent;
}

std::uint16_t read_u16_le(const std::uint8_t* p) {
    return static_cast<std::uint16_t>(p[0] | (std::uint16_t(p[1]) << 8));
}

// L2CAP signaling command codes.
constexpr std::uint8_t kConnectionRequest = 0x02;
constexpr std::uint8_t kConnectionResponse = 0x03;
constexpr std::uint8_t kDisconnectionResponse = 0x07;

constexpr std::uint16_t kConnectionResultSuccess = 0x0000;
constexpr std::uint16_t kConnectionResultPending = 0x0001;

}  // namespace

void L2capChannelTable::on_connection_request(Direction dir, std::uint16_t psm,
                                              std::uint16_t scid) {
    pending_[{static_cast<std::uint8_t>(dir), scid}] = psm;
}

void L2capChannelTable::on_connection_response(Direction dir, std::uint16_t dcid,
                                               std::uint16_t scid, std::uint16_t result) {
    const Direction initiator = flip(dir);
    auto it = pending_.find({static_cast<std::uint8_t>(initiator), scid});
    if (it == pending_.end()) return;
    if (result == kConnectionResultPending) return;
    const std::uint16_t psm = it->second;
    pending_.erase(it);
    if (result != kConnectionResultSuccess) return;

    L2capChannelState ch;
    ch.psm = psm;
    ch.open = true;
    if (initiator == Direction::sent) {
        ch.cid_local = scid;   // host allocated the SCID
        ch.cid_remote = dcid;  // peer allocated the DCID
    } else {
        ch.cid_local = dcid;
        ch.cid_remote = scid;
    }
    // A CID maps to at most one PSM at any instant.
    std::erase_if(channels_, [&](const L2capChannelState& c) {
        return c.cid_local == ch.cid_local || c.cid_remote == ch.cid_remote;
    });
    channels_.push_back(ch);
}

void L2capChannelTable::on_disconnection_response(Direction dir, std::uint16_t dcid,
                                                  std::uint16_t scid) {
    // The response echoes the request's CIDs: DCID belongs to the device
    // that received the request, i.e. the device sending this response.
    std::uint16_t cid_local = 0;
    std::uint16_t cid_remote = 0;
    if (dir == Direction::received) {
        cid_remote = dcid;
        cid_local = scid;
    } else {
        cid_local = dcid;
        cid_remote = scid;
    }
    std::erase_if(channels_, [&](const L2capChannelState& c) {
        return c.cid_local == cid_local && c.cid_remote == cid_remote;
    });
}

std::optional<std::uint16_t> L2capChannelTable::resolve(Direction dir, std::uint16_t cid) const {
    for (const L2capChannelState& c : channels_) {
        const std::uint16_t key = dir == Direction::sent ? c.cid_remote : c.cid_local;
        if (key == cid) return c.psm;
    }
    return std::nullopt;
}

void ProtocolDemuxer::emit(std::int64_t ts, Direction dir, Protocol proto, std::size_t length) {
    PacketRecord rec;
    rec.timestamp_us = ts;
    rec.direction = dir;
    rec.protocol = proto;
    rec.length_bytes = static_cast<std::uint32_t>(length);
    rec.session_id = session_id_;
    out_.push_back(std::move(rec));
}

void ProtocolDemuxer::handle_signaling(std::span<const std::uint8_t> commands, Direction dir) {
    std::size_t off = 0;
    while (commands.size() - off >= 4) {
        const std::uint8_t code = commands[off];
        const std::uint16_t len = read_u16_le(commands.data() + off + 2);
        off += 4;
        if (len > commands.size() - off) break;  // truncated command, stop
        const std::uint8_t* d = commands.data() + off;
        switch (code) {
            case kConnectionRequest:
                if (len >= 4)
                    channels_.on_connection_request(dir, read_u16_le(d), read_u16_le(d + 2));
                break;
            case kConnectionResponse:
                if (len >= 6)
                    channels_.on_connection_response(dir, read_u16_le(d), read_u16_le(d + 2),
                                                     read_u16_le(d + 4));
                break;
            case kDisconnectionResponse:
                if (len >= 4)
                    channels_.on_disconnection_response(dir, read_u16_le(d), read_u16_le(d + 2));
                break;
            default:
                break;  // other commands do not affect CID/PSM state
        }
        off += len;
    }
}

void ProtocolDemuxer::complete_pdu(Reassembly& r, Direction dir) {
    // r.pdu starts with the 4-byte L2CAP header.
    const std::uint16_t cid = read_u16_le(r.pdu.data() + 2);
    if (cid == kCidSignaling) {
        ++stats_.signaling_pdus;
        handle_signaling(std::span(r.pdu).subspan(4, r.expected_pdu_bytes - 4), dir);
    } else {
        Protocol proto = Protocol::L2CAP;
        if (auto psm = channels_.resolve(dir, cid)) {
            if (*psm == kPsmRfcomm)
                proto = Protocol::RFCOMM;
            else if (*psm == kPsmSdp)
                proto = Protocol::SDP;
        }
        emit(r.first_timestamp_us, dir, proto, r.hci_payload_bytes);
    }
    r = Reassembly{};
}

void ProtocolDemuxer::feed(const RawHciRecord& record) {
    if (record.hci_packet_type != HciPacketType::acl_data) {
        emit(record.timestamp_us, record.direction, Protocol::OTHER, record.payload.size());
        return;
    }

    Reassembly& pend = pending_[static_cast<std::size_t>(record.direction)];

    if (record.payload.size() < 4) {
        // Too short for the ACL header.
        ++stats_.malformed_l2cap;
        emit(record.timestamp_us, record.direction, Protocol::OTHER, record.payload.size());
        return;
    }
    const std::uint16_t handle_flags = read_u16_le(record.payload.data());
    const unsigned pb_flag = (handle_flags >> 12) & 0x3;
    const std::uint8_t* data = record.payload.data() + 4;
    const std::size_t data_len = record.payload.size() - 4;

    if (pb_flag == 0x1) {  // continuation fragment
        ++stats_.continuation_fragments;
        if (!pend.active) {
            // Continuation with no start in sight: ACL-borne, upper layer unknowable.
            ++stats_.abandoned_reassemblies;
            emit(record.timestamp_us, record.direction, Protocol::HCI_ACL,
                 record.payload.size());
            return;
        }
        pend.pdu.insert(pend.pdu.end(), data, data + data_len);
        pend.hci_payload_bytes += record.payload.size();
    } else {  // start of a new PDU
        if (pend.active) abandon(pend, record.direction);
        pend.active = true;
        pend.first_timestamp_us = record.timestamp_us;
        pend.hci_payload_bytes = record.payload.size();
        pend.pdu.assign(data, data + data_len);
    }

    if (pend.expected_pdu_bytes == 0 && pend.pdu.size() >= 4)
        pend.expected_pdu_bytes = std::size_t{read_u16_le(pend.pdu.data())} + 4;
    if (pend.expected_pdu_bytes != 0 && pend.pdu.size() >= pend.expected_pdu_bytes)
        complete_pdu(pend, record.direction);
}

void ProtocolDemuxer::abandon(Reassembly& r, Direction dir) {
    if (r.pdu.size() < 4) {
        // Never reached a full L2CAP header.
        ++stats_.malformed_l2cap;
        emit(r.first_timestamp_us, dir, Protocol::OTHER, r.hci_payload_bytes);
    } else {
        ++stats_.abandoned_reassemblies;
        emit(r.first_timestamp_us, dir, Protocol::HCI_ACL, r.hci_payload_bytes);
    }
    r = Reassembly{};
}

std::vector<PacketRecord> ProtocolDemuxer::finish() {
    for (auto dir : {Direction::sent, Direction::received}) {
        Reassembly& pend = pending_[static_cast<std::size_t>(dir)];
        if (pend.active) abandon(pend, dir);
    }
    std::stable_sort(out_.begin(), out_.end(),
                     [](const PacketRecord& a, const PacketRecord& b) {
                         return a.timestamp_us < b.timestamp_us;
                     });
    return std::move(out_);
}

std::vector<PacketRecord> demux_protocols(std::span<const RawHciRecord> records,
                                          const std::string& session_id, DemuxStats* stats) {
    ProtocolDemuxer demuxer(session_id);
    for (const RawHciRecord& r : records) demuxer.feed(r);
    auto out = demuxer.finish();
    if (stats) *stats = demuxer.stats();
    return out;
}

}  // namespace btprint
