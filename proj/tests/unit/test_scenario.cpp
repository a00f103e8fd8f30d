#include <gtest/gtest.h>

#include <fstream>
#include <algorithm>
#include <random>

#include "greenmon/scenario.hpp"
#include "temp_dir.hpp"

namespace greenmon {
namespace {

using testing::TempDir;

ScenarioConfig small(std::size_t nodes, double duration_s, double loss, double dup,
                     std::uint64_t seed = 1) {
  ScenarioConfig cfg;
  cfg.seed = seed;
  cfg.duration_s = duration_s;
  for (std::size_t i = 1; i <= nodes; ++i) {
    NodeSpec n;
    n.node_id = static_cast<NodeId>(i);
    n.location = "bed-" + std::to_string(i);
    cfg.nodes.push_back(n);
  }
  cfg.radio.loss_prob = loss;
  cfg.radio.dup_prob = dup;
  return cfg;
}

void write(const std::filesystem::path& p, const std::string& text) { std::ofstream(p) << text; }

TEST(LoadConfig, MinimalGetsDefaults) {
  const auto cfg = parse_config(Json::parse(R"({"seed": 7, "nodes": [{"node_id": 1}]})"));
  EXPECT_EQ(cfg.seed, 7u);
  ASSERT_EQ(cfg.nodes.size(), 1u);
  EXPECT_EQ(cfg.nodes[0].sampling_interval_s, 30u);
  EXPECT_EQ(cfg.radio.latency_ms, 50.0);
  EXPECT_EQ(cfg.dedup_window, 64u);
  EXPECT_EQ(cfg.speedup, 0.0);
  EXPECT_EQ(cfg.listen_address, "127.0.0.1:8080");
  Simulation sim(cfg);
  for (Channel c : kAllChannels) {
    EXPECT_EQ(sim.station().thresholds()[channel_index(c)].clear_count, 3u);
  }
}

TEST(LoadConfig, DuplicateNodeNamesNodes) {
  try {
    parse_config(Json::parse(R"({"nodes": [{"node_id": 1}, {"node_id": 1}]})"));
    FAIL();
  } catch (const ConfigError& e) {
    EXPECT_EQ(e.field(), "nodes");
  }
}

TEST(LoadConfig, ThresholdMinNotBelowMax) {
  EXPECT_THROW(parse_config(Json::parse(
                   R"({"thresholds": [{"channel": "temperature", "min_ok": 30, "max_ok": 30}]})")),
               ConfigError);
}

TEST(LoadConfig, UnknownFieldRejected) {
  EXPECT_THROW(parse_config(Json::parse(R"({"sede": 1})")), ConfigError);
}

TEST(LoadConfig, FailureKindsDistinct) {
  TempDir dir;
  auto kind_of = [](const std::filesystem::path& p) {
    try {
      load_config(p);
    } catch (const ConfigLoadError& e) {
      return e.kind();
    }
    ADD_FAILURE() << "no error for " << p;
    return ConfigLoadError::Kind::kInvalid;
  };
  EXPECT_EQ(kind_of(dir / "absent.json"), ConfigLoadError::Kind::kMissingFile);
  write(dir / "broken.json", "{\"seed\": ");
  EXPECT_EQ(kind_of(dir / "broken.json"), ConfigLoadError::Kind::kParse);
  write(dir / "bad.json", R"({"duration_s": -1})");
  EXPECT_EQ(kind_of(dir / "bad.json"), ConfigLoadError::Kind::kInvalid);
}

TEST(LoadConfig, JsonRoundTrip) {
  auto cfg = small(3, 600, 0.1, 0.05, 9);
  cfg.thresholds.push_back(default_thresholds(Channel::kHumidity));
  FaultEvent f;
  f.fault_id = "heater";
  f.start_t = 100;
  f.magnitude = 4;
  cfg.faults.push_back(f);
  const auto again = parse_config(to_json(cfg));
  EXPECT_EQ(to_json(again).dump(), to_json(cfg).dump());
}

TEST(RunScenario, ZeroDurationAllZero) {
  const auto r = run_scenario(small(2, 0, 0, 0));
  EXPECT_EQ(r.transmitted, 0u);
  EXPECT_EQ(r.delivered, 0u);
  EXPECT_EQ(r.readings_stored, 0u);
  EXPECT_EQ(r.total_rejected(), 0u);
  for (const auto& [kind, n] : r.alarms_by_kind) EXPECT_EQ(n, 0u) << kind;
}

TEST(RunScenario, TwoNodesOneHour) {
  const auto r = run_scenario(small(2, 3600, 0, 0));
  EXPECT_EQ(r.transmitted, 720u);
  EXPECT_EQ(r.delivered, 720u);
  EXPECT_EQ(r.readings_stored, 720u);
  EXPECT_TRUE(r.conservation_holds());
}

TEST(RunScenario, SameSeedSameHash) {
  const auto cfg = small(3, 7200, 0.05, 0.05, 11);
  EXPECT_EQ(run_scenario(cfg).event_log_hash, run_scenario(cfg).event_log_hash);
}

TEST(RunScenario, ContiguousSeqWithoutLoss) {
  Simulation sim(small(2, 3600, 0, 0.3));
  sim.run_to_end();
  for (NodeId n : {1, 2}) {
    std::vector<std::uint16_t> seqs;
    for (Channel c : kAllChannels) {
      for (const auto& rec : sim.station().store().query_range({n, c}, 0, 1e9)) {
        seqs.push_back(rec.reading.seq);
      }
    }
    std::sort(seqs.begin(), seqs.end());
    ASSERT_EQ(seqs.size(), 360u);
    for (std::size_t i = 0; i < seqs.size(); ++i) EXPECT_EQ(seqs[i], i);
  }
}

TEST(RunScenario, SilentNodeAlarmRaisedAndCleared) {
  auto cfg = small(1, 1800, 0, 0);
  cfg.radio.loss_prob = 1.0;
  const auto r = run_scenario(cfg);
  EXPECT_EQ(r.alarms_by_kind.at("node_silent"), 1u);
  EXPECT_EQ(r.readings_stored, 0u);
}

TEST(RunScenario, StoreWrittenAndFlushed) {
  TempDir dir;
  auto cfg = small(1, 600, 0, 0);
  cfg.store_path = (dir / "store.jsonl").string();
  const auto r = run_scenario(cfg);
  Store reopened{std::filesystem::path(cfg.store_path)};
  EXPECT_EQ(reopened.size(), r.readings_stored);
}

TEST(RunScenario, UnwritableStoreFails) {
  auto cfg = small(1, 60, 0, 0);
  cfg.store_path = "/nonexistent-dir/greenmon/store.jsonl";
  EXPECT_THROW(run_scenario(cfg), StoreError);
}

TEST(RunReport, JsonRoundTrip) {
  const auto r = run_scenario(small(2, 3600, 0.1, 0.1, 3));
  const auto back = report_from_json(to_json(r));
  EXPECT_EQ(to_json(back).dump(), to_json(r).dump());
}

TEST(ScenarioProperty, ConservationUnderFuzzedConfigs) {
  std::mt19937_64 gen(123);
  std::uniform_real_distribution<double> prob(0, 0.5);
  for (int i = 0; i < 25; ++i) {
    auto cfg = small(1 + gen() % 4, 60.0 * static_cast<double>(1 + gen() % 90), prob(gen), prob(gen),
                     gen());
    for (auto& n : cfg.nodes) n.sampling_interval_s = 5 + static_cast<std::uint32_t>(gen() % 60);
    cfg.radio.latency_ms = static_cast<double>(gen() % 5000);
    cfg.dedup_window = 1 + gen() % 80;
    const auto r = run_scenario(cfg);
    EXPECT_TRUE(r.conservation_holds()) << to_json(r).dump();
    EXPECT_EQ(r.delivered, r.readings_stored + r.total_rejected());
    EXPECT_EQ(r.transmitted + r.duplicated, r.delivered + r.lost);
  }
}

TEST(Replay, ReproducesOriginalRun) {
  TempDir dir;
  auto cfg = small(3, 4 * 3600.0, 0.05, 0.1, 21);
  FaultEvent hot;
  hot.start_t = 3600;
  hot.duration_s = 1800;
  hot.kind = FaultKind::kSpike;
  hot.magnitude = 20;
  cfg.faults.push_back(hot);
  cfg.trace_path = (dir / "run.trace").string();
  const auto original = run_scenario(cfg);
  EXPECT_GT(original.alarms_by_kind.at("high"), 0u);

  auto replay_cfg = cfg;
  replay_cfg.trace_path.clear();
  Simulation sim(replay_cfg, read_trace(cfg.trace_path));
  sim.run_to_end();
  const auto replayed = sim.report();
  EXPECT_EQ(replayed.readings_stored, original.readings_stored);
  EXPECT_EQ(replayed.alarms_by_kind, original.alarms_by_kind);
  EXPECT_EQ(replayed.event_log_hash, original.event_log_hash);
}

TEST(Simulation, StepToIsIncremental) {
  const auto cfg = small(2, 3600, 0.1, 0.1, 5);
  Simulation stepped(cfg);
  for (double t = 0; t <= 3600; t += 97.5) stepped.step_to(t);
  stepped.run_to_end();
  EXPECT_EQ(stepped.report().event_log_hash, run_scenario(cfg).event_log_hash);
  EXPECT_TRUE(stepped.finished());
}

}  // namespace
}  // namespace greenmon
