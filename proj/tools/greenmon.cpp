// greenmon: scenario runner, trace replayer and store reporter.
//
//   greenmon run <config> [--serve]
//   greenmon replay <trace> --config <config> [--store <path>]
//   greenmon report <store_path>
//
// Exit status: 0 success, 1 configuration error, 2 runtime I/O error.

#include <atomic>
#include <chrono>
#include <csignal>
#include <fstream>
#include <filesystem>
#include <iostream>
#include <limits>
#include <thread>

#include <CLI11.hpp>

#include "greenmon/api.hpp"
#include "greenmon/scenario.hpp"

namespace {

using namespace greenmon;

constexpr int kExitOk = 0;
constexpr int kExitConfig = 1;
constexpr int kExitIo = 2;

std::atomic<bool> g_interrupted{false};

void on_signal(int) { g_interrupted = true; }

std::filesystem::path report_path_for(const std::string& store_path) {
  return std::filesystem::path(store_path + ".report.json");
}

void write_report(const RunReport& report, const ScenarioConfig& cfg) {
  const auto text = to_json(report).dump(2);
  std::cout << text << "\n";
  if (cfg.store_path.empty()) return;
  std::ofstream out(report_path_for(cfg.store_path));
  out << text << "\n";
  if (!out) throw StoreError("cannot write report beside " + cfg.store_path);
}

void serve_until_interrupted() {
  while (!g_interrupted) std::this_thread::sleep_for(std::chrono::milliseconds(100));
}

std::unique_ptr<ApiServer> start_api(Simulation& sim) {
  auto opts = parse_listen_address(sim.config().listen_address);
  auto server = std::make_unique<ApiServer>(
      sim.station(), &sim.environment().faults(), opts,
      [&sim] { return to_json(sim.report()).dump(); });
  const int port = server->start();
  std::cerr << "api listening on " << opts.host << ":" << port << "\n";
  return server;
}

// Store failures abort the run; whatever was counted so far is still printed.
template <typename F>
void guarded(Simulation& sim, F&& body) {
  try {
    body();
  } catch (const StoreError& e) {
    Json partial = to_json(sim.report());
    partial["partial"] = true;
    partial["note"] = std::string("run aborted: ") + e.what();
    std::cout << partial.dump(2) << "\n";
    throw;
  }
}

int cmd_run(const std::string& config_path, bool serve) {
  const auto cfg = load_config(config_path);
  Simulation sim(cfg);

  if (cfg.speedup <= 0.0) {
    const auto t0 = std::chrono::steady_clock::now();
    guarded(sim, [&] { sim.run_to_end(); });
    const std::chrono::duration<double> wall = std::chrono::steady_clock::now() - t0;
    std::cerr << "batch run finished in " << wall.count() << " s wall-clock\n";
    write_report(sim.report(), cfg);
    if (serve) {
      auto server = start_api(sim);
      serve_until_interrupted();
    }
    return kExitOk;
  }

  // Live mode: virtual time = wall seconds since start x speedup. The API runs
  // concurrently; its mutations serialize with ingest inside the station.
  auto server = start_api(sim);
  const auto t0 = std::chrono::steady_clock::now();
  guarded(sim, [&] {
    while (!g_interrupted) {
      const std::chrono::duration<double> wall = std::chrono::steady_clock::now() - t0;
      const double target = std::min(wall.count() * cfg.speedup, cfg.duration_s);
      sim.step_to(target);
      if (target >= cfg.duration_s) break;
      std::this_thread::sleep_for(std::chrono::milliseconds(20));
    }
    sim.run_to_end();
  });
  write_report(sim.report(), cfg);
  if (serve) serve_until_interrupted();
  return kExitOk;
}

int cmd_replay(const std::string& trace_path, const std::string& config_path,
               const std::string& store_path) {
  auto cfg = load_config(config_path);
  cfg.trace_path.clear();
  cfg.store_path = store_path;
  Simulation sim(cfg, read_trace(trace_path));
  sim.run_to_end();
  write_report(sim.report(), cfg);
  return kExitOk;
}

int cmd_report(const std::string& store_path) {
  if (!std::filesystem::exists(store_path)) throw StoreError("no store at " + store_path);
  Store store{std::filesystem::path(store_path)};
  Json series = Json::array();
  for (const auto& key : store.series()) {
    const auto records = store.query_range(key, -std::numeric_limits<double>::max(),
                                           std::numeric_limits<double>::max());
    const auto latest = store.latest(key);
    series.push_back(Json{{"node_id", key.node_id},
                          {"channel", channel_code(key.channel)},
                          {"count", records.size()},
                          {"first_sample_t", records.front().reading.sample_t},
                          {"last_sample_t", records.back().reading.sample_t},
                          {"latest_value", latest->reading.value}});
  }
  Json out{{"store_path", store_path},
           {"records", store.size()},
           {"load_warnings", store.load_warnings()},
           {"series", std::move(series)}};
  if (std::ifstream in(report_path_for(store_path)); in) {
    out["run_report"] = to_json(report_from_json(Json::parse(in)));
  }
  std::cout << out.dump(2) << "\n";
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"greenhouse sensor-network monitor: simulate, replay and report"};
  app.require_subcommand(1);

  std::string config_path;
  bool serve = false;
  auto* run = app.add_subcommand("run", "Run a scenario (batch when speedup is 0, live otherwise)");
  run->add_option("config", config_path, "Scenario file")->required();
  run->add_flag("--serve", serve, "Keep serving the API after the run until interrupted");

  std::string trace_path;
  std::string replay_config;
  std::string replay_store;
  auto* replay = app.add_subcommand("replay", "Re-run a recorded transmission trace");
  replay->add_option("trace", trace_path, "Trace file written by `run`")->required();
  replay->add_option("--config", replay_config, "Scenario file of the original run")->required();
  replay->add_option("--store", replay_store, "Store log for the replayed readings (default: in-memory)");

  std::string store_path;
  auto* report = app.add_subcommand("report", "Summarize a store and its last run report");
  report->add_option("store_path", store_path, "Store log file")->required();

  CLI11_PARSE(app, argc, argv);

  std::signal(SIGINT, on_signal);
  std::signal(SIGTERM, on_signal);

  try {
    if (*run) return cmd_run(config_path, serve);
    if (*replay) return cmd_replay(trace_path, replay_config, replay_store);
    if (*report) return cmd_report(store_path);
  } catch (const ConfigLoadError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "runtime error: " << e.what() << "\n";
    return kExitIo;
  }
  return kExitOk;
}
