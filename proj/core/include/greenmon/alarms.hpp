#pragma once

// Out-of-range, rapid-change and silent-node detection with an
// active -> acknowledged -> cleared lifecycle.

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "greenmon/store.hpp"

namespace greenmon {

struct ThresholdConfig {
  Channel channel = Channel::kTemperature;
  double min_ok = 0.0;
  double max_ok = 1.0;
  /// Physical units per minute.
  double rate_limit = 1.0;
  double hysteresis = 0.0;
  std::uint32_t clear_count = 3;

  /// Throws ConfigError naming the first violated field.
  void validate() const;
  bool operator==(const ThresholdConfig&) const = default;
};

/// Hysteresis defaults 0.5 degC / 2 %RH / 20 lux, clear_count 3.
ThresholdConfig default_thresholds(Channel c);

enum class AlarmKind : std::uint8_t { kLow, kHigh, kRapidChange, kNodeSilent };
inline constexpr std::size_t kAlarmKindCount = 4;
enum class AlarmState : std::uint8_t { kActive, kAcknowledged, kCleared };

std::string_view alarm_kind_name(AlarmKind k);
std::string_view alarm_state_name(AlarmState s);

using AlarmId = std::uint64_t;

struct Alarm {
  AlarmId alarm_id = 0;
  AlarmKind kind = AlarmKind::kHigh;
  NodeId node_id = 0;
  /// Absent for node_silent.
  std::optional<Channel> channel;
  VirtualTime raised_t = 0.0;
  AlarmState state = AlarmState::kActive;
  double peak_value = 0.0;
  std::optional<std::string> ack_by;
  std::optional<VirtualTime> ack_t;
  std::optional<VirtualTime> cleared_t;

  bool operator==(const Alarm&) const = default;
};

enum class TransitionType : std::uint8_t { kRaised, kAcknowledged, kCleared };

std::string_view transition_event_name(TransitionType t);

struct AlarmTransition {
  TransitionType type = TransitionType::kRaised;
  /// Snapshot of the alarm after the transition.
  Alarm alarm;
};

enum class RateCheck : std::uint8_t { kWithin, kExceeded, kDegenerate };

/// |curr - prev| / (dt / 60) > rate_limit, strictly. dt <= 0 is degenerate.
RateCheck check_rate(const Reading& prev, const Reading& curr, const ThresholdConfig& cfg);

class AlarmError : public std::runtime_error {
 public:
  enum class Kind { kNotFound, kInvalidState };
  AlarmError(Kind kind, const std::string& message) : std::runtime_error(message), kind_(kind) {}
  Kind kind() const { return kind_; }

 private:
  Kind kind_;
};

/// The alarm registry plus the per-series detector state feeding it. Not
/// internally synchronized: the owner serializes ingest and acknowledgements.
class AlarmEngine {
 public:
  /// Starts with default_thresholds() for every channel.
  AlarmEngine();

  /// Validates, then applies to every later evaluation.
  void set_threshold(const ThresholdConfig& cfg);
  const ThresholdConfig& threshold(Channel c) const { return thresholds_[channel_index(c)]; }

  /// Range check only: raise low/high, refresh peaks, clear after clear_count
  /// consecutive readings inside [min_ok + hysteresis, max_ok - hysteresis].
  std::vector<AlarmTransition> evaluate_reading(const Reading& reading);

  /// Full per-reading pipeline: clears node_silent for the sender, then the
  /// range check, then the rate check against the previous accepted reading
  /// of the same series.
  std::vector<AlarmTransition> process(const Reading& reading);

  /// Registers a node for silence supervision.
  void watch_node(NodeId node, VirtualTime last_heard, std::uint32_t interval_s);
  /// Raises node_silent for each watched node with now - last_heard >
  /// silent_after * interval that has no open node_silent alarm.
  std::vector<AlarmTransition> check_silence(VirtualTime now);
  /// Earliest time at which check_silence could raise something new, or +inf.
  VirtualTime next_silence_deadline() const;

  /// Throws AlarmError(kNotFound) or AlarmError(kInvalidState).
  AlarmTransition acknowledge(AlarmId id, const std::string& who, VirtualTime t);

  /// Non-cleared alarms ordered by (raised_t, alarm_id).
  std::vector<Alarm> list_active() const;
  std::optional<Alarm> find(AlarmId id) const;
  std::size_t size() const { return alarms_.size(); }

  std::uint64_t degenerate_pairs() const { return degenerate_pairs_; }
  void set_silent_after(double multiplier) { silent_after_ = multiplier; }
  double silent_after() const { return silent_after_; }

 private:
  struct SeriesState {
    std::array<std::optional<AlarmId>, 3> open{};  // low, high, rapid_change
    std::array<std::uint32_t, 2> clear_run{};      // low, high
    std::optional<Reading> prev;
  };
  struct NodeWatch {
    VirtualTime last_heard = 0.0;
    std::uint32_t interval_s = 30;
    std::optional<AlarmId> open;
  };

  AlarmTransition raise(AlarmKind kind, NodeId node, std::optional<Channel> ch, VirtualTime t,
                        double peak);
  AlarmTransition clear(AlarmId id, VirtualTime t);
  std::vector<AlarmTransition> evaluate_rate(const Reading& reading, SeriesState& st);

  std::array<ThresholdConfig, kChannelCount> thresholds_;
  std::map<AlarmId, Alarm> alarms_;
  std::map<SeriesKey, SeriesState> series_;
  std::map<NodeId, NodeWatch> nodes_;
  AlarmId next_id_ = 1;
  std::uint64_t degenerate_pairs_ = 0;
  double silent_after_ = 3.0;
};

}  // namespace greenmon
