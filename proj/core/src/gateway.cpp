#include "greenmon/gateway.hpp"

#include <algorithm>
#include <stdexcept>

#include "greenmon/trace.hpp"

namespace greenmon {

std::string_view reject_reason_name(RejectReason r) {
  switch (r) {
    case RejectReason::kBadLength: return "bad_length";
    case RejectReason::kBadChecksum: return "bad_checksum";
    case RejectReason::kReservedBitsSet: return "reserved_bits_set";
    case RejectReason::kUnknownChannel: return "unknown_channel";
    case RejectReason::kDuplicate: return "duplicate";
  }
  return "unknown";
}

std::variant<MotePacket, Rejection> decode_packet(std::span<const std::uint8_t> bytes) {
  const auto reject = [&](RejectReason r) {
    return Rejection{r, std::vector<std::uint8_t>(bytes.begin(), bytes.end())};
  };
  if (bytes.size() != kPacketSize) return reject(RejectReason::kBadLength);
  if (xor_checksum(bytes.first(kPacketSize - 1)) != bytes[kPacketSize - 1]) {
    return reject(RejectReason::kBadChecksum);
  }
  if ((bytes[5] & 0xFC) != 0) return reject(RejectReason::kReservedBitsSet);
  const auto channel = channel_from_code(bytes[2]);
  if (!channel) return reject(RejectReason::kUnknownChannel);

  MotePacket p;
  p.node_id = static_cast<NodeId>((bytes[0] << 8) | bytes[1]);
  p.channel = *channel;
  p.seq = static_cast<std::uint16_t>((bytes[3] << 8) | bytes[4]);
  p.adc_counts = static_cast<std::uint16_t>((bytes[5] << 8) | bytes[6]);
  p.sample_t = (std::uint32_t{bytes[7]} << 24) | (std::uint32_t{bytes[8]} << 16) |
               (std::uint32_t{bytes[9]} << 8) | std::uint32_t{bytes[10]};
  p.battery_pct = bytes[11];
  return p;
}

double to_engineering(std::uint16_t counts, Channel channel, const CalibrationMap& cal) {
  if (counts > kMaxAdcCounts) throw std::out_of_range("adc counts exceed 10 bits");
  const auto& r = cal.range(channel);
  // Multiply before dividing so integral ranges map counts exactly.
  return r.lo + static_cast<double>(counts) * (r.hi - r.lo) / kMaxAdcCounts;
}

bool DedupWindow::contains(NodeId node, std::uint16_t seq) const {
  const auto it = rings_.find(node);
  if (it == rings_.end()) return false;
  const auto& seqs = it->second.seqs;
  return std::find(seqs.begin(), seqs.end(), seq) != seqs.end();
}

void DedupWindow::insert(NodeId node, std::uint16_t seq) {
  if (capacity_ == 0) return;
  auto& ring = rings_[node];
  if (ring.seqs.size() < capacity_) {
    ring.seqs.push_back(seq);
    return;
  }
  ring.seqs[ring.head] = seq;
  ring.head = (ring.head + 1) % capacity_;
}

Gateway::Gateway(CalibrationMap cal, std::size_t dedup_window)
    : cal_(cal), dedup_(dedup_window) {}

Gateway::~Gateway() = default;

void Gateway::set_quarantine(std::unique_ptr<TraceWriter> writer) { quarantine_ = std::move(writer); }

IngestResult Gateway::reject(Rejection r, VirtualTime arrival_t) {
  ++rejected_[static_cast<std::size_t>(r.reason)];
  if (quarantine_) quarantine_->write(arrival_t, r.raw_bytes);
  return r;
}

IngestResult Gateway::ingest(const MotePacket& packet, VirtualTime arrival_t) {
  if (dedup_.contains(packet.node_id, packet.seq)) {
    const auto bytes = encode_packet(packet);
    return reject(Rejection{RejectReason::kDuplicate, {bytes.begin(), bytes.end()}}, arrival_t);
  }
  dedup_.insert(packet.node_id, packet.seq);
  ++accepted_;

  Reading r;
  r.node_id = packet.node_id;
  r.channel = packet.channel;
  r.value = to_engineering(packet.adc_counts, packet.channel, cal_);
  r.sample_t = packet.sample_t;
  r.arrival_t = arrival_t;
  r.seq = packet.seq;
  r.battery_pct = packet.battery_pct;
  return r;
}

IngestResult Gateway::accept(std::span<const std::uint8_t> bytes, VirtualTime arrival_t) {
  auto decoded = decode_packet(bytes);
  if (auto* rej = std::get_if<Rejection>(&decoded)) return reject(std::move(*rej), arrival_t);
  return ingest(std::get<MotePacket>(decoded), arrival_t);
}

}  // namespace greenmon
