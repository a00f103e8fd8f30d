#pragma once

// In-process fan-out of readings and alarm transitions to push-stream
// subscribers. Delivery is at-most-once: a subscriber only sees events
// published while it is subscribed.

#include <chrono>
#include <condition_variable>
#include <cstdint>
#include <deque>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <variant>
#include <vector>

#include "greenmon/alarms.hpp"

namespace greenmon {

enum class EventType : std::uint8_t { kReading, kAlarmRaised, kAlarmAcked, kAlarmCleared };

std::string_view event_type_name(EventType t);
EventType event_type_for(TransitionType t);

struct ApiEvent {
  EventType event_type = EventType::kReading;
  /// Strictly increasing within one subscription, starting at 1.
  std::uint64_t event_seq = 0;
  std::variant<Reading, Alarm> payload;
};

class EventBus;

class Subscription {
 public:
  /// Waits up to `timeout` for the next event.
  std::optional<ApiEvent> next(std::chrono::milliseconds timeout);
  /// Drains without waiting.
  std::vector<ApiEvent> poll();
  bool closed() const;

 private:
  friend class EventBus;
  using Clock = std::chrono::steady_clock;

  void push(EventType type, std::variant<Reading, Alarm> payload);

  mutable std::mutex mu_;
  std::condition_variable cv_;
  std::deque<ApiEvent> queue_;
  std::uint64_t next_seq_ = 1;
  std::map<SeriesKey, Clock::time_point> last_reading_;
  bool closed_ = false;
};

class EventBus {
 public:
  using Clock = std::chrono::steady_clock;
  using ClockFn = std::function<Clock::time_point()>;

  explicit EventBus(std::chrono::milliseconds refresh_interval = std::chrono::seconds(1),
                    ClockFn clock = [] { return Clock::now(); });
  ~EventBus();

  std::shared_ptr<Subscription> subscribe();
  void unsubscribe(const std::shared_ptr<Subscription>& sub);

  /// Forwarded to a subscriber at most once per series per refresh interval.
  void publish_reading(const Reading& r);
  /// Always forwarded.
  void publish_transition(const AlarmTransition& t);

  std::size_t subscriber_count() const;

 private:
  std::chrono::milliseconds refresh_;
  ClockFn clock_;
  mutable std::mutex mu_;
  std::vector<std::shared_ptr<Subscription>> subs_;
};

}  // namespace greenmon
