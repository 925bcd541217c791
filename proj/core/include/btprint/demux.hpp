#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "btprint/packet.hpp"

namespace btprint {

inline constexpr std::uint16_t kPsmSdp = 0x0001;
inline constexpr std::uint16_t kPsmRfcomm = 0x0003;
inline constexpr std::uint16_t kCidSignaling = 0x0001;
inline constexpr std::uint16_t kFirstDynamicCid = 0x0040;

/// One negotiated L2CAP channel. cid_local lives in the capturing host's CID
/// space, cid_remote in the peer's. A CID maps to at most one PSM at a time;
/// the entry is dropped when the Disconnection Response is seen.
struct L2capChannelState {
    std::uint16_t cid_local = 0;
    std::uint16_t cid_remote = 0;
    std::uint16_t psm = 0;
    bool open = false;
};

/// CID -> PSM resolution driven by signaling-channel traffic. The two CID
/// spaces are tracked separately: a data PDU the host sends carries the
/// remote endpoint's CID, a received PDU carries the host's own.
class L2capChannelTable {
   public:
    void on_connection_request(Direction dir, std::uint16_t psm, std::uint16_t scid);
    void on_connection_response(Direction dir, std::uint16_t dcid, std::uint16_t scid,
                                std::uint16_t result);
    void on_disconnection_response(Direction dir, std::uint16_t dcid, std::uint16_t scid);

    /// PSM of the channel a data PDU belongs to, keyed by the PDU's
    /// direction and its CID field.
    std::optional<std::uint16_t> resolve(Direction dir, std::uint16_t cid) const;

    bool empty() const { return channels_.empty() && pending_.empty(); }
    const std::vector<L2capChannelState>& open_channels() const { return channels_; }

   private:
    std::vector<L2capChannelState> channels_;
    // Requests awaiting their response, keyed by (initiator direction, SCID).
    std::map<std::pair<std::uint8_t, std::uint16_t>, std::uint16_t> pending_;
};

/// Non-fatal anomalies tallied while demultiplexing.
struct DemuxStats {
    std::size_t malformed_l2cap = 0;  // PDU shorter than its 4-byte header
    std::size_t signaling_pdus = 0;   // control PDUs consumed into channel state
    std::size_t continuation_fragments = 0;
    std::size_t abandoned_reassemblies = 0;

    friend bool operator==(const DemuxStats&, const DemuxStats&) = default;
};

/// Streaming ACL -> L2CAP -> RFCOMM/SDP demultiplexer. Feed records in file
/// order; continuation fragments are reassembled before labeling, signaling
/// PDUs update the channel table and produce no output record.
class ProtocolDemuxer {
   public:
    explicit ProtocolDemuxer(std::string session_id) : session_id_(std::move(session_id)) {}

    void feed(const RawHciRecord& record);
    /// Flushes any dangling reassembly and returns all labeled records,
    /// sorted by timestamp (stable).
    std::vector<PacketRecord> finish();

    const L2capChannelTable& channels() const { return channels_; }
    const DemuxStats& stats() const { return stats_; }

   private:
    struct Reassembly {
        bool active = false;
        std::int64_t first_timestamp_us = 0;
        std::size_t expected_pdu_bytes = 0;  // L2CAP length + 4; 0 while unknown
        std::size_t hci_payload_bytes = 0;   // summed across fragments
        std::vector<std::uint8_t> pdu;       // L2CAP header + payload
    };

    void complete_pdu(Reassembly& r, Direction dir);
    void abandon(Reassembly& r, Direction dir);
    void handle_signaling(std::span<const std::uint8_t> commands, Direction dir);
    void emit(std::int64_t ts, Direction dir, Protocol proto, std::size_t length);

    std::string session_id_;
    L2capChannelTable channels_;
    DemuxStats stats_;
    std::vector<PacketRecord> out_;
    Reassembly pending_[2];  // indexed by Direction
};

/// Convenience wrapper: demultiplexes a whole record list at once.
std::vector<PacketRecord> demux_protocols(std::span<const RawHciRecord> records,
                                          const std::string& session_id,
                                          DemuxStats* stats = nullptr);

}  // namespace btprint
