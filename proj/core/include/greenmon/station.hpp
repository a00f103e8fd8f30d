#pragma once

// The base station: gateway ingest feeding the store and alarm engine, the
// ordered event log and the push bus. Every mutation (ingest, silence checks,
// acknowledgements, threshold updates) goes through one mutex, so the
// simulation loop and API handlers observe a single serialized history.

#include <array>
#include <atomic>
#include <chrono>
#include <cstdint>
#include <memory>
#include <mutex>
#include <span>
#include <vector>

#include "greenmon/alarms.hpp"
#include "greenmon/events.hpp"
#include "greenmon/gateway.hpp"
#include "greenmon/radio.hpp"
#include "greenmon/store.hpp"

namespace greenmon {

/// FNV-1a 64 over a canonical binary encoding of ingested readings and alarm
/// transitions, in processing order.
class EventLogHash {
 public:
  void add_reading(const Reading& r);
  void add_transition(const AlarmTransition& t);
  std::uint64_t value() const { return h_; }

 private:
  void bytes(const void* p, std::size_t n);
  template <typename T>
  void put(T v);

  std::uint64_t h_ = 0xcbf29ce484222325ULL;
};

struct StationOptions {
  CalibrationMap calibration;
  std::size_t dedup_window = 64;
  std::vector<ThresholdConfig> thresholds;
  double silent_after = 3.0;
  std::chrono::milliseconds refresh_interval{1000};
};

class Station {
 public:
  Station(StationOptions options, std::shared_ptr<Store> store);

  // Ingest side (simulation loop).
  void receive(const DeliveryEvent& delivery);
  void receive_frame(std::span<const std::uint8_t> frame, VirtualTime arrival_t);
  void check_silence(VirtualTime now);
  VirtualTime next_silence_deadline() const;
  void watch_node(NodeId node, VirtualTime last_heard, std::uint32_t interval_s);
  void set_quarantine(std::unique_ptr<TraceWriter> writer);
  void advance_clock(VirtualTime now);
  VirtualTime now() const { return now_.load(); }

  // Client side (API handlers).
  std::vector<Reading> current() const;
  std::vector<Bucket> history(const SeriesKey& key, VirtualTime t0, VirtualTime t1,
                              double bucket_s) const;
  std::vector<Alarm> active_alarms() const;
  /// Acknowledges at the current virtual time.
  Alarm acknowledge(AlarmId id, const std::string& who);
  ThresholdConfig set_threshold(const ThresholdConfig& cfg);
  std::vector<ThresholdConfig> thresholds() const;

  std::array<std::uint64_t, kRejectReasonCount> rejected() const;
  std::uint64_t readings_stored() const;
  std::array<std::uint64_t, kAlarmKindCount> alarms_raised() const;
  std::uint64_t degenerate_rate_pairs() const;
  std::uint64_t event_log_hash() const;
  /// Every alarm transition so far, in order.
  std::vector<AlarmTransition> transition_log() const;

  EventBus& events() { return bus_; }
  Store& store() { return *store_; }
  const Store& store() const { return *store_; }

 private:
  void record(const std::vector<AlarmTransition>& transitions);
  void handle(IngestResult result);

  mutable std::mutex mu_;
  std::shared_ptr<Store> store_;
  Gateway gateway_;
  AlarmEngine alarms_;
  EventBus bus_;
  EventLogHash hash_;
  std::vector<AlarmTransition> log_;
  std::array<std::uint64_t, kAlarmKindCount> raised_{};
  std::uint64_t stored_ = 0;
  std::atomic<VirtualTime> now_{0.0};
};

}  // namespace greenmon
