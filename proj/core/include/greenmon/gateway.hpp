#pragma once

// Base-station ingest: decode, validate, calibrate, deduplicate.

#include <array>
#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <string_view>
#include <variant>
#include <vector>

#include "greenmon/channel.hpp"
#include "greenmon/mote.hpp"

namespace greenmon {

class TraceWriter;

/// A decoded, calibrated sample. sample_t comes from the mote, arrival_t from
/// the gateway; neither overwrites the other.
struct Reading {
  NodeId node_id = 0;
  Channel channel = Channel::kTemperature;
  double value = 0.0;
  VirtualTime sample_t = 0.0;
  VirtualTime arrival_t = 0.0;
  std::uint16_t seq = 0;
  std::uint8_t battery_pct = 0;

  bool operator==(const Reading&) const = default;
};

/// Listed in check order; a frame is rejected for the first check it fails.
enum class RejectReason : std::uint8_t {
  kBadLength,
  kBadChecksum,
  kReservedBitsSet,
  kUnknownChannel,
  kDuplicate,
};
inline constexpr std::size_t kRejectReasonCount = 5;

std::string_view reject_reason_name(RejectReason r);

struct Rejection {
  RejectReason reason = RejectReason::kBadLength;
  std::vector<std::uint8_t> raw_bytes;
};

/// Never throws; every malformed frame becomes a Rejection.
std::variant<MotePacket, Rejection> decode_packet(std::span<const std::uint8_t> bytes);

/// lo + counts * (hi - lo) / 1023. Throws std::out_of_range for counts > 1023.
double to_engineering(std::uint16_t counts, Channel channel, const CalibrationMap& cal);

/// Recently seen sequence numbers per node; the oldest entry is evicted once
/// `capacity` are held.
class DedupWindow {
 public:
  explicit DedupWindow(std::size_t capacity = 64) : capacity_(capacity) {}

  bool contains(NodeId node, std::uint16_t seq) const;
  void insert(NodeId node, std::uint16_t seq);
  std::size_t capacity() const { return capacity_; }

 private:
  struct Ring {
    std::vector<std::uint16_t> seqs;
    std::size_t head = 0;  // next slot to overwrite once full
  };
  std::size_t capacity_;
  std::map<NodeId, Ring> rings_;
};

using IngestResult = std::variant<Reading, Rejection>;

/// Stateless apart from the dedup window and rejection counters. Single
/// writer: callers serialize access in arrival order.
class Gateway {
 public:
  explicit Gateway(CalibrationMap cal, std::size_t dedup_window = 64);
  ~Gateway();

  /// Duplicate check, then calibration. The window only changes on acceptance.
  IngestResult ingest(const MotePacket& packet, VirtualTime arrival_t);
  /// decode_packet followed by ingest.
  IngestResult accept(std::span<const std::uint8_t> bytes, VirtualTime arrival_t);

  /// Rejected frames are appended to this trace (optional).
  void set_quarantine(std::unique_ptr<TraceWriter> writer);

  const CalibrationMap& calibration() const { return cal_; }
  const std::array<std::uint64_t, kRejectReasonCount>& rejected() const { return rejected_; }
  std::uint64_t accepted() const { return accepted_; }

 private:
  IngestResult reject(Rejection r, VirtualTime arrival_t);

  CalibrationMap cal_;
  DedupWindow dedup_;
  std::array<std::uint64_t, kRejectReasonCount> rejected_{};
  std::uint64_t accepted_ = 0;
  std::unique_ptr<TraceWriter> quarantine_;
};

}  // namespace greenmon
