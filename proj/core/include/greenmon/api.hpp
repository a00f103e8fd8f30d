#pragma once

// HTTP/1.1 client interface of the base station.
//
//   GET  /api/v1/current                         latest Reading per series
//   GET  /api/v1/history?node&channel&from&to&bucket
//                                                Bucket list for one series
//   GET  /api/v1/alarms                          non-cleared alarms
//   POST /api/v1/alarms/{id}/ack   {"who": ...}  acknowledge
//   GET  /api/v1/thresholds                      all ThresholdConfigs
//   GET  /api/v1/thresholds/{channel}            one ThresholdConfig
//   PUT  /api/v1/thresholds/{channel}            replace one ThresholdConfig
//   POST /api/v1/sim/fault         FaultEvent    inject a fault
//   GET  /api/v1/report                          live counters
//   GET  /api/v1/stream                          text/event-stream push
//
// Errors carry {"error": "<reason>"} with a machine-readable reason.

#include <chrono>
#include <functional>
#include <map>
#include <memory>
#include <string>

#include "greenmon/envmodel.hpp"
#include "greenmon/station.hpp"

namespace greenmon {

struct ApiRequest {
  std::string method;
  std::string path;
  std::map<std::string, std::string> query;
  std::string body;
};

struct ApiResponse {
  int status = 200;
  std::string content_type = "application/json";
  std::string body;
};

/// Extra counters for /api/v1/report, supplied by whoever owns the run.
using ReportProvider = std::function<std::string()>;

/// Request handling independent of any socket. All handlers are safe to call
/// concurrently with the simulation loop.
class ApiRouter {
 public:
  /// `faults` may be null when no simulation is attached (fault injection then
  /// answers 409).
  ApiRouter(Station& station, FaultRegistry* faults, ReportProvider report = {});

  ApiResponse handle(const ApiRequest& req) const;

 private:
  ApiResponse current() const;
  ApiResponse history(const ApiRequest& req) const;
  ApiResponse alarms() const;
  ApiResponse ack(const std::string& id, const std::string& body) const;
  ApiResponse get_thresholds(const std::string* channel) const;
  ApiResponse put_threshold(const std::string& channel, const std::string& body) const;
  ApiResponse post_fault(const std::string& body) const;
  ApiResponse report() const;

  Station& station_;
  FaultRegistry* faults_;
  ReportProvider report_;
};

/// Formats one push event as a text/event-stream message.
std::string format_sse_event(const ApiEvent& ev);

struct ApiServerOptions {
  std::string host = "127.0.0.1";
  /// 0 picks a free port.
  int port = 8080;
  std::chrono::milliseconds heartbeat{15000};
};

/// Splits "host:port"; throws ConfigError("listen_address") when malformed.
ApiServerOptions parse_listen_address(const std::string& address);

class ApiServer {
 public:
  ApiServer(Station& station, FaultRegistry* faults, ApiServerOptions options,
            ReportProvider report = {});
  ~ApiServer();

  ApiServer(const ApiServer&) = delete;
  ApiServer& operator=(const ApiServer&) = delete;

  /// Binds and starts serving on a background thread. Returns the bound port.
  /// Throws std::runtime_error if the address cannot be bound.
  int start();
  void stop();
  int port() const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace greenmon
