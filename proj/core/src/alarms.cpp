#include "greenmon/alarms.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace greenmon {

namespace {

constexpr std::size_t kLowSlot = 0;
constexpr std::size_t kHighSlot = 1;
constexpr std::size_t kRateSlot = 2;

}  // namespace

void ThresholdConfig::validate() const {
  const auto finite = [](double v) { return std::isfinite(v); };
  if (!finite(min_ok) || !finite(max_ok)) throw ConfigError("min_ok", "must be finite");
  if (!(min_ok < max_ok)) throw ConfigError("min_ok", "must be less than max_ok");
  if (!(rate_limit > 0.0) || !finite(rate_limit)) throw ConfigError("rate_limit", "must be > 0");
  if (!(hysteresis >= 0.0) || !finite(hysteresis)) throw ConfigError("hysteresis", "must be >= 0");
  if (clear_count < 1) throw ConfigError("clear_count", "must be >= 1");
}

ThresholdConfig default_thresholds(Channel c) {
  switch (c) {
    case Channel::kTemperature: return {c, 10.0, 35.0, 2.0, 0.5, 3};
    case Channel::kHumidity: return {c, 30.0, 90.0, 10.0, 2.0, 3};
    case Channel::kLight: return {c, 20.0, 950.0, 300.0, 20.0, 3};
  }
  return {};
}

std::string_view alarm_kind_name(AlarmKind k) {
  switch (k) {
    case AlarmKind::kLow: return "low";
    case AlarmKind::kHigh: return "high";
    case AlarmKind::kRapidChange: return "rapid_change";
    case AlarmKind::kNodeSilent: return "node_silent";
  }
  return "unknown";
}

std::string_view alarm_state_name(AlarmState s) {
  switch (s) {
    case AlarmState::kActive: return "active";
    case AlarmState::kAcknowledged: return "acknowledged";
    case AlarmState::kCleared: return "cleared";
  }
  return "unknown";
}

std::string_view transition_event_name(TransitionType t) {
  switch (t) {
    case TransitionType::kRaised: return "alarm_raised";
    case TransitionType::kAcknowledged: return "alarm_acked";
    case TransitionType::kCleared: return "alarm_cleared";
  }
  return "unknown";
}

RateCheck check_rate(const Reading& prev, const Reading& curr, const ThresholdConfig& cfg) {
  const double dt = curr.sample_t - prev.sample_t;
  if (!(dt > 0.0)) return RateCheck::kDegenerate;
  const double per_minute = std::abs(curr.value - prev.value) / (dt / 60.0);
  return per_minute > cfg.rate_limit ? RateCheck::kExceeded : RateCheck::kWithin;
}

AlarmEngine::AlarmEngine() {
  for (Channel c : kAllChannels) thresholds_[channel_index(c)] = default_thresholds(c);
}

void AlarmEngine::set_threshold(const ThresholdConfig& cfg) {
  cfg.validate();
  thresholds_[channel_index(cfg.channel)] = cfg;
}

AlarmTransition AlarmEngine::raise(AlarmKind kind, NodeId node, std::optional<Channel> ch,
                                   VirtualTime t, double peak) {
  Alarm a;
  a.alarm_id = next_id_++;
  a.kind = kind;
  a.node_id = node;
  a.channel = ch;
  a.raised_t = t;
  a.state = AlarmState::kActive;
  a.peak_value = peak;
  alarms_.emplace(a.alarm_id, a);
  return {TransitionType::kRaised, a};
}

AlarmTransition AlarmEngine::clear(AlarmId id, VirtualTime t) {
  auto& a = alarms_.at(id);
  a.state = AlarmState::kCleared;
  a.cleared_t = std::max(t, a.ack_t.value_or(a.raised_t));
  return {TransitionType::kCleared, a};
}

std::vector<AlarmTransition> AlarmEngine::evaluate_reading(const Reading& reading) {
  std::vector<AlarmTransition> out;
  const auto& cfg = threshold(reading.channel);
  auto& st = series_[SeriesKey{reading.node_id, reading.channel}];
  const double v = reading.value;
  const VirtualTime t = reading.arrival_t;
  const bool in_clear_band = v >= cfg.min_ok + cfg.hysteresis && v <= cfg.max_ok - cfg.hysteresis;

  for (const std::size_t slot : {kLowSlot, kHighSlot}) {
    const bool high = slot == kHighSlot;
    const bool violating = high ? v > cfg.max_ok : v < cfg.min_ok;
    auto& open = st.open[slot];
    auto& run = st.clear_run[slot];
    if (violating) {
      run = 0;
      if (open) {
        auto& a = alarms_.at(*open);
        a.peak_value = high ? std::max(a.peak_value, v) : std::min(a.peak_value, v);
      } else {
        auto tr = raise(high ? AlarmKind::kHigh : AlarmKind::kLow, reading.node_id, reading.channel, t, v);
        open = tr.alarm.alarm_id;
        out.push_back(std::move(tr));
      }
    } else if (open) {
      if (!in_clear_band) {
        run = 0;
      } else if (++run >= cfg.clear_count) {
        out.push_back(clear(*open, t));
        open.reset();
        run = 0;
      }
    }
  }
  return out;
}

std::vector<AlarmTransition> AlarmEngine::evaluate_rate(const Reading& reading, SeriesState& st) {
  std::vector<AlarmTransition> out;
  if (!st.prev) {
    st.prev = reading;
    return out;
  }
  const auto result = check_rate(*st.prev, reading, threshold(reading.channel));
  if (result == RateCheck::kDegenerate) {
    ++degenerate_pairs_;
    return out;
  }
  auto& open = st.open[kRateSlot];
  if (result == RateCheck::kExceeded) {
    if (open) {
      auto& a = alarms_.at(*open);
      a.peak_value = reading.value > st.prev->value ? std::max(a.peak_value, reading.value)
                                                    : std::min(a.peak_value, reading.value);
    } else {
      auto tr = raise(AlarmKind::kRapidChange, reading.node_id, reading.channel, reading.arrival_t,
                      reading.value);
      open = tr.alarm.alarm_id;
      out.push_back(std::move(tr));
    }
  } else if (open) {
    out.push_back(clear(*open, reading.arrival_t));
    open.reset();
  }
  st.prev = reading;
  return out;
}

std::vector<AlarmTransition> AlarmEngine::process(const Reading& reading) {
  std::vector<AlarmTransition> out;
  if (auto it = nodes_.find(reading.node_id); it != nodes_.end()) {
    auto& w = it->second;
    w.last_heard = std::max(w.last_heard, reading.arrival_t);
    if (w.open) {
      out.push_back(clear(*w.open, reading.arrival_t));
      w.open.reset();
    }
  }
  auto range = evaluate_reading(reading);
  out.insert(out.end(), range.begin(), range.end());
  auto rate = evaluate_rate(reading, series_[SeriesKey{reading.node_id, reading.channel}]);
  out.insert(out.end(), rate.begin(), rate.end());
  return out;
}

void AlarmEngine::watch_node(NodeId node, VirtualTime last_heard, std::uint32_t interval_s) {
  auto& w = nodes_[node];
  w.last_heard = last_heard;
  w.interval_s = interval_s;
}

std::vector<AlarmTransition> AlarmEngine::check_silence(VirtualTime now) {
  std::vector<AlarmTransition> out;
  for (auto& [node, w] : nodes_) {
    const double silent_for = now - w.last_heard;
    if (w.open || !(silent_for > silent_after_ * w.interval_s)) continue;
    // peak_value carries the silence length (seconds) at the time of raising.
    auto tr = raise(AlarmKind::kNodeSilent, node, std::nullopt, now, silent_for);
    w.open = tr.alarm.alarm_id;
    out.push_back(std::move(tr));
  }
  return out;
}

VirtualTime AlarmEngine::next_silence_deadline() const {
  VirtualTime best = std::numeric_limits<double>::infinity();
  for (const auto& [node, w] : nodes_) {
    if (!w.open) best = std::min(best, w.last_heard + silent_after_ * w.interval_s);
  }
  return best;
}

AlarmTransition AlarmEngine::acknowledge(AlarmId id, const std::string& who, VirtualTime t) {
  const auto it = alarms_.find(id);
  if (it == alarms_.end()) {
    throw AlarmError(AlarmError::Kind::kNotFound, "no alarm with id " + std::to_string(id));
  }
  auto& a = it->second;
  if (a.state != AlarmState::kActive) {
    throw AlarmError(AlarmError::Kind::kInvalidState,
                     "alarm " + std::to_string(id) + " is " + std::string(alarm_state_name(a.state)));
  }
  a.state = AlarmState::kAcknowledged;
  a.ack_by = who;
  a.ack_t = std::max(t, a.raised_t);
  return {TransitionType::kAcknowledged, a};
}

std::vector<Alarm> AlarmEngine::list_active() const {
  std::vector<Alarm> out;
  for (const auto& [id, a] : alarms_) {
    if (a.state != AlarmState::kCleared) out.push_back(a);
  }
  std::stable_sort(out.begin(), out.end(),
                   [](const Alarm& x, const Alarm& y) { return x.raised_t < y.raised_t; });
  return out;
}

std::optional<Alarm> AlarmEngine::find(AlarmId id) const {
  const auto it = alarms_.find(id);
  if (it == alarms_.end()) return std::nullopt;
  return it->second;
}

}  // namespace greenmon
