#pragma once

// Scenario files, the discrete-event loop that drives motes, radio and base
// station over virtual time, and the run report.

#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "greenmon/envmodel.hpp"
#include "greenmon/json_codec.hpp"
#include "greenmon/mote.hpp"
#include "greenmon/radio.hpp"
#include "greenmon/station.hpp"
#include "greenmon/trace.hpp"

namespace greenmon {

struct NodeSpec {
  NodeId node_id = 1;
  std::string location;
  std::uint32_t sampling_interval_s = 30;
  double battery_pct = 100.0;
  double drain_per_packet = 0.01;
};

struct ScenarioConfig {
  std::uint64_t seed = 0;
  double duration_s = 0.0;
  /// 0 = batch; k > 0 = live, k virtual seconds per wall second.
  double speedup = 0.0;
  std::vector<NodeSpec> nodes;
  RadioParams radio;
  /// When false the radio seed is derived from `seed`.
  bool radio_seed_set = false;
  std::vector<EnvSignalSpec> env;
  std::vector<ThresholdConfig> thresholds;
  CalibrationMap calibration;
  std::vector<FaultEvent> faults;
  std::string store_path;
  std::string listen_address = "127.0.0.1:8080";
  std::string trace_path;
  std::string quarantine_path;
  std::size_t dedup_window = 64;
  double silent_after = 3.0;

  /// Throws ConfigError naming the offending field.
  void validate() const;
};

class ConfigLoadError : public std::runtime_error {
 public:
  enum class Kind { kMissingFile, kParse, kInvalid };
  ConfigLoadError(Kind kind, std::string field, const std::string& message)
      : std::runtime_error(message), kind_(kind), field_(std::move(field)) {}
  Kind kind() const { return kind_; }
  const std::string& field() const { return field_; }

 private:
  Kind kind_;
  std::string field_;
};

/// Applies defaults and validates. Throws ConfigError.
ScenarioConfig parse_config(const Json& j);
/// Throws ConfigLoadError with a distinct kind per failure class.
ScenarioConfig load_config(const std::filesystem::path& path);
Json to_json(const ScenarioConfig& cfg);

struct RunReport {
  std::uint64_t transmitted = 0;
  std::uint64_t delivered = 0;
  std::uint64_t duplicated = 0;
  std::uint64_t lost = 0;
  std::map<std::string, std::uint64_t> rejected_by_reason;
  std::uint64_t readings_stored = 0;
  std::map<std::string, std::uint64_t> alarms_by_kind;
  std::uint64_t event_log_hash = 0;
  std::uint64_t degenerate_rate_pairs = 0;
  double duration_s = 0.0;

  std::uint64_t duplicates_rejected() const;
  std::uint64_t total_rejected() const;
  /// delivered = readings_stored + rejections, and
  /// transmitted = delivered + lost - duplicated.
  bool conservation_holds() const;
};

Json to_json(const RunReport& r);
RunReport report_from_json(const Json& j);

/// Owns one run: environment, motes (or a recorded trace), radio and station.
/// step_to() is called from a single driver thread; API handlers talk to the
/// station and the fault registry, both of which are synchronized. report()
/// may be called from any thread.
class Simulation {
 public:
  explicit Simulation(const ScenarioConfig& cfg);
  /// Replay: frames come from the trace instead of the motes. The config still
  /// supplies radio, calibration, thresholds and the node list.
  Simulation(const ScenarioConfig& cfg, TraceContents trace);

  /// Processes every event with time <= t. Node ticks and silence checks stop
  /// at duration_s; deliveries in flight keep draining.
  void step_to(VirtualTime t);
  /// step_to(duration_s), then drains everything still in flight.
  void run_to_end();
  bool finished() const;

  RunReport report() const;
  VirtualTime now() const { return now_; }

  Station& station() { return *station_; }
  Environment& environment() { return env_; }
  const std::vector<NodeState>& nodes() const { return nodes_; }
  const ScenarioConfig& config() const { return cfg_; }

 private:
  void init();
  VirtualTime next_event_time() const;
  void process_at(VirtualTime t);

  ScenarioConfig cfg_;
  Environment env_;
  std::vector<NodeState> nodes_;
  Radio radio_;
  std::shared_ptr<Store> store_;
  std::unique_ptr<Station> station_;
  std::unique_ptr<TraceWriter> trace_;
  std::optional<TraceContents> replay_;
  std::size_t replay_pos_ = 0;
  VirtualTime now_ = 0.0;
  // Held while an event is processed and while report() reads the counters.
  mutable std::mutex mu_;
};

/// Batch run from t = 0 to duration_s; flushes the store.
RunReport run_scenario(const ScenarioConfig& cfg);

}  // namespace greenmon
