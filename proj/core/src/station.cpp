#include "greenmon/station.hpp"

#include <bit>
#include <type_traits>

#include "greenmon/trace.hpp"

namespace greenmon {

void EventLogHash::bytes(const void* p, std::size_t n) {
  const auto* b = static_cast<const unsigned char*>(p);
  for (std::size_t i = 0; i < n; ++i) {
    h_ ^= b[i];
    h_ *= 0x100000001b3ULL;
  }
}

template <typename T>
void EventLogHash::put(T v) {
  if constexpr (std::is_floating_point_v<T>) {
    put(std::bit_cast<std::uint64_t>(static_cast<double>(v)));
  } else {
    // Little-endian byte order regardless of host.
    unsigned char buf[sizeof(T)];
    for (std::size_t i = 0; i < sizeof(T); ++i) {
      buf[i] = static_cast<unsigned char>(static_cast<std::uint64_t>(v) >> (8 * i));
    }
    bytes(buf, sizeof(T));
  }
}

void EventLogHash::add_reading(const Reading& r) {
  put<std::uint8_t>('R');
  put(r.node_id);
  put(channel_code(r.channel));
  put(r.seq);
  put(r.battery_pct);
  put(r.value);
  put(r.sample_t);
  put(r.arrival_t);
}

void EventLogHash::add_transition(const AlarmTransition& t) {
  const auto& a = t.alarm;
  put<std::uint8_t>('A');
  put(static_cast<std::uint8_t>(t.type));
  put(a.alarm_id);
  put(static_cast<std::uint8_t>(a.kind));
  put(a.node_id);
  put<std::uint8_t>(a.channel ? channel_code(*a.channel) : 0xFF);
  put(a.raised_t);
  put(a.peak_value);
  put(a.ack_t.value_or(-1.0));
  put(a.cleared_t.value_or(-1.0));
}

Station::Station(StationOptions options, std::shared_ptr<Store> store)
    : store_(std::move(store)),
      gateway_(options.calibration, options.dedup_window),
      bus_(options.refresh_interval) {
  for (const auto& cfg : options.thresholds) alarms_.set_threshold(cfg);
  alarms_.set_silent_after(options.silent_after);
}

void Station::record(const std::vector<AlarmTransition>& transitions) {
  for (const auto& t : transitions) {
    hash_.add_transition(t);
    log_.push_back(t);
    if (t.type == TransitionType::kRaised) ++raised_[static_cast<std::size_t>(t.alarm.kind)];
    bus_.publish_transition(t);
  }
}

void Station::handle(IngestResult result) {
  const auto* reading = std::get_if<Reading>(&result);
  if (!reading) return;
  store_->append(*reading);
  ++stored_;
  hash_.add_reading(*reading);
  bus_.publish_reading(*reading);
  record(alarms_.process(*reading));
}

void Station::receive(const DeliveryEvent& delivery) {
  receive_frame(delivery.packet_bytes, delivery.arrival_t);
}

void Station::receive_frame(std::span<const std::uint8_t> frame, VirtualTime arrival_t) {
  std::lock_guard lock(mu_);
  advance_clock(arrival_t);
  handle(gateway_.accept(frame, arrival_t));
}

void Station::check_silence(VirtualTime now) {
  std::lock_guard lock(mu_);
  advance_clock(now);
  record(alarms_.check_silence(now));
}

VirtualTime Station::next_silence_deadline() const {
  std::lock_guard lock(mu_);
  return alarms_.next_silence_deadline();
}

void Station::watch_node(NodeId node, VirtualTime last_heard, std::uint32_t interval_s) {
  std::lock_guard lock(mu_);
  alarms_.watch_node(node, last_heard, interval_s);
}

void Station::set_quarantine(std::unique_ptr<TraceWriter> writer) {
  std::lock_guard lock(mu_);
  gateway_.set_quarantine(std::move(writer));
}

void Station::advance_clock(VirtualTime now) {
  VirtualTime cur = now_.load();
  while (now > cur && !now_.compare_exchange_weak(cur, now)) {
  }
}

std::vector<Reading> Station::current() const {
  std::vector<Reading> out;
  for (const auto& key : store_->series()) {
    if (auto rec = store_->latest(key)) out.push_back(rec->reading);
  }
  return out;
}

std::vector<Bucket> Station::history(const SeriesKey& key, VirtualTime t0, VirtualTime t1,
                                     double bucket_s) const {
  return store_->aggregate(key, t0, t1, bucket_s);
}

std::vector<Alarm> Station::active_alarms() const {
  std::lock_guard lock(mu_);
  return alarms_.list_active();
}

Alarm Station::acknowledge(AlarmId id, const std::string& who) {
  std::lock_guard lock(mu_);
  auto t = alarms_.acknowledge(id, who, now());
  record({t});
  return t.alarm;
}

ThresholdConfig Station::set_threshold(const ThresholdConfig& cfg) {
  std::lock_guard lock(mu_);
  alarms_.set_threshold(cfg);
  return alarms_.threshold(cfg.channel);
}

std::vector<ThresholdConfig> Station::thresholds() const {
  std::lock_guard lock(mu_);
  std::vector<ThresholdConfig> out;
  for (Channel c : kAllChannels) out.push_back(alarms_.threshold(c));
  return out;
}

std::array<std::uint64_t, kRejectReasonCount> Station::rejected() const {
  std::lock_guard lock(mu_);
  return gateway_.rejected();
}

std::uint64_t Station::readings_stored() const {
  std::lock_guard lock(mu_);
  return stored_;
}

std::array<std::uint64_t, kAlarmKindCount> Station::alarms_raised() const {
  std::lock_guard lock(mu_);
  return raised_;
}

std::uint64_t Station::degenerate_rate_pairs() const {
  std::lock_guard lock(mu_);
  return alarms_.degenerate_pairs();
}

std::uint64_t Station::event_log_hash() const {
  std::lock_guard lock(mu_);
  return hash_.value();
}

std::vector<AlarmTransition> Station::transition_log() const {
  std::lock_guard lock(mu_);
  return log_;
}

}  // namespace greenmon
