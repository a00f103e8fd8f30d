#include "greenmon/events.hpp"

#include <algorithm>

namespace greenmon {

std::string_view event_type_name(EventType t) {
  switch (t) {
    case EventType::kReading: return "reading";
    case EventType::kAlarmRaised: return "alarm_raised";
    case EventType::kAlarmAcked: return "alarm_acked";
    case EventType::kAlarmCleared: return "alarm_cleared";
  }
  return "unknown";
}

EventType event_type_for(TransitionType t) {
  switch (t) {
    case TransitionType::kRaised: return EventType::kAlarmRaised;
    case TransitionType::kAcknowledged: return EventType::kAlarmAcked;
    case TransitionType::kCleared: return EventType::kAlarmCleared;
  }
  return EventType::kAlarmRaised;
}

void Subscription::push(EventType type, std::variant<Reading, Alarm> payload) {
  {
    std::lock_guard lock(mu_);
    if (closed_) return;
    queue_.push_back(ApiEvent{type, next_seq_++, std::move(payload)});
  }
  cv_.notify_one();
}

std::optional<ApiEvent> Subscription::next(std::chrono::milliseconds timeout) {
  std::unique_lock lock(mu_);
  cv_.wait_for(lock, timeout, [&] { return !queue_.empty() || closed_; });
  if (queue_.empty()) return std::nullopt;
  ApiEvent ev = std::move(queue_.front());
  queue_.pop_front();
  return ev;
}

std::vector<ApiEvent> Subscription::poll() {
  std::lock_guard lock(mu_);
  std::vector<ApiEvent> out(std::make_move_iterator(queue_.begin()),
                            std::make_move_iterator(queue_.end()));
  queue_.clear();
  return out;
}

bool Subscription::closed() const {
  std::lock_guard lock(mu_);
  return closed_;
}

EventBus::EventBus(std::chrono::milliseconds refresh_interval, ClockFn clock)
    : refresh_(refresh_interval), clock_(std::move(clock)) {}

EventBus::~EventBus() {
  std::lock_guard lock(mu_);
  for (auto& s : subs_) {
    {
      std::lock_guard sl(s->mu_);
      s->closed_ = true;
    }
    s->cv_.notify_all();
  }
}

std::shared_ptr<Subscription> EventBus::subscribe() {
  auto sub = std::make_shared<Subscription>();
  std::lock_guard lock(mu_);
  subs_.push_back(sub);
  return sub;
}

void EventBus::unsubscribe(const std::shared_ptr<Subscription>& sub) {
  {
    std::lock_guard lock(mu_);
    subs_.erase(std::remove(subs_.begin(), subs_.end(), sub), subs_.end());
  }
  {
    std::lock_guard sl(sub->mu_);
    sub->closed_ = true;
  }
  sub->cv_.notify_all();
}

void EventBus::publish_reading(const Reading& r) {
  std::lock_guard lock(mu_);
  if (subs_.empty()) return;
  const auto now = clock_();
  const SeriesKey key{r.node_id, r.channel};
  for (auto& s : subs_) {
    {
      std::lock_guard sl(s->mu_);
      const auto it = s->last_reading_.find(key);
      if (it != s->last_reading_.end() && now - it->second < refresh_) continue;
      s->last_reading_[key] = now;
    }
    s->push(EventType::kReading, r);
  }
}

void EventBus::publish_transition(const AlarmTransition& t) {
  std::lock_guard lock(mu_);
  for (auto& s : subs_) s->push(event_type_for(t.type), t.alarm);
}

std::size_t EventBus::subscriber_count() const {
  std::lock_guard lock(mu_);
  return subs_.size();
}

}  // namespace greenmon
