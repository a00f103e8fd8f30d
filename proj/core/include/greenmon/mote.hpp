#pragma once

// Sensor node model: periodic sampling, 10-bit quantization, the 13-byte
// on-air packet, sequence numbering and battery drain.

#include <array>
#include <cstdint>
#include <functional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "greenmon/channel.hpp"

namespace greenmon {

inline constexpr std::size_t kPacketSize = 13;
inline constexpr std::uint16_t kMaxAdcCounts = 1023;

using PacketBytes = std::array<std::uint8_t, kPacketSize>;

/// Big-endian on-air layout:
///   [0..1] node_id  [2] channel  [3..4] seq  [5..6] adc_counts (top 6 bits zero)
///   [7..10] sample_t  [11] battery_pct  [12] XOR of bytes 0..11
struct MotePacket {
  NodeId node_id = 0;
  Channel channel = Channel::kTemperature;
  std::uint16_t seq = 0;
  std::uint16_t adc_counts = 0;
  std::uint32_t sample_t = 0;
  std::uint8_t battery_pct = 0;

  bool operator==(const MotePacket&) const = default;
};

class EncodeError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// XOR over the given bytes.
std::uint8_t xor_checksum(std::span<const std::uint8_t> bytes);

/// Throws EncodeError if adc_counts > 1023 or battery_pct > 100.
PacketBytes encode_packet(const MotePacket& p);

/// clamp(round_half_up((value - lo) / (hi - lo) * 1023), 0, 1023).
/// Throws ConfigError when hi <= lo.
std::uint16_t quantize_sample(double value, double lo, double hi);

/// Per-node simulation state. Owned by the event loop.
struct NodeState {
  NodeId node_id = 1;
  std::string location;
  std::uint32_t sampling_interval_s = 30;
  std::array<bool, kChannelCount> channels_enabled = {true, true, true};
  /// Next due sampling instant per channel.
  std::array<std::uint32_t, kChannelCount> next_due_t{};
  /// Shared across channels; wraps 65535 -> 0.
  std::uint16_t seq = 0;
  double battery_pct = 100.0;
  double drain_per_packet = 0.01;
  VirtualTime last_tick_t = 0.0;

  bool dead() const { return battery_pct <= 0.0; }
  /// Earliest due instant over enabled channels, or +inf for a dead or idle node.
  double next_due() const;

  /// Fresh node whose first sample on every channel falls at t = interval.
  static NodeState create(NodeId id, std::string location, std::uint32_t interval_s = 30);
};

/// Physical value of `channel` at `t`; the environment access used by node_tick.
using EnvSampler = std::function<double(Channel, VirtualTime)>;

/// Emits one packet per due instant <= t (in due-time order, channel code
/// breaking ties) with sample_t set to the due instant. Missed instants are
/// caught up in a burst. Each packet drains `drain_per_packet`; a node whose
/// battery reaches zero emits nothing afterwards.
std::vector<MotePacket> node_tick(NodeState& state, VirtualTime t, const EnvSampler& env,
                                  const CalibrationMap& cal);

}  // namespace greenmon
