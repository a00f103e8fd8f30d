#pragma once

// Minimal text/event-stream reader for tests: connects on a background
// thread and accumulates the raw stream.

#include <atomic>
#include <chrono>
#include <condition_variable>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

namespace greenmon::testing {

struct SseMessage {
  std::string id;
  std::string event;
  std::string data;
};

class SseClient {
 public:
  SseClient(std::string host, int port, std::string path = "/api/v1/stream");
  ~SseClient();

  /// Blocks until the server's greeting arrived (the subscription exists).
  bool wait_connected(std::chrono::milliseconds timeout);
  /// Blocks until `pred(raw)` holds or the timeout passes.
  template <typename Pred>
  bool wait_for(Pred pred, std::chrono::milliseconds timeout) {
    std::unique_lock lock(mu_);
    return cv_.wait_for(lock, timeout, [&] { return pred(raw_); });
  }
  std::string raw() const;
  /// Parsed event messages (comments skipped).
  std::vector<SseMessage> messages() const;
  void close();

 private:
  std::string host_;
  int port_;
  std::string path_;
  std::atomic<bool> stop_{false};
  mutable std::mutex mu_;
  std::condition_variable cv_;
  std::string raw_;
  std::thread thread_;
};

std::vector<SseMessage> parse_sse(const std::string& raw);

}  // namespace greenmon::testing
