#include <benchmark/benchmark.h>

#include <random>

#include "greenmon/gateway.hpp"
#include "greenmon/scenario.hpp"
#include "greenmon/store.hpp"

using namespace greenmon;

static void BM_EncodeDecode(benchmark::State& state) {
  MotePacket p{12, Channel::kHumidity, 0, 700, 3600, 88};
  for (auto _ : state) {
    ++p.seq;
    const auto bytes = encode_packet(p);
    auto back = decode_packet(bytes);
    benchmark::DoNotOptimize(back);
  }
  state.SetItemsProcessed(state.iterations());
}
BENCHMARK(BM_EncodeDecode);

static void BM_GatewayAccept(benchmark::State& state) {
  Gateway gw{CalibrationMap{}};
  MotePacket p{1, Channel::kTemperature, 0, 512, 0, 100};
  double t = 0;
  for (auto _ : state) {
    ++p.seq;
    t += 0.01;
    auto r = gw.accept(encode_packet(p), t);
    benchmark::DoNotOptimize(r);
  }
  state.SetItemsProcessed(state.iterations());
}
BENCHMARK(BM_GatewayAccept);

static Reading random_reading(std::mt19937_64& gen, double t) {
  Reading r;
  r.node_id = static_cast<NodeId>(1 + gen() % 10);
  r.channel = kAllChannels[gen() % 3];
  r.value = std::uniform_real_distribution<double>(0, 50)(gen);
  r.sample_t = t;
  r.arrival_t = t + 0.05;
  return r;
}

static void BM_StoreAppend(benchmark::State& state) {
  std::mt19937_64 gen(1);
  Store s;
  double t = 0;
  for (auto _ : state) benchmark::DoNotOptimize(s.append(random_reading(gen, t += 1)));
  state.SetItemsProcessed(state.iterations());
}
BENCHMARK(BM_StoreAppend);

static void BM_StoreAggregate(benchmark::State& state) {
  std::mt19937_64 gen(2);
  Store s;
  for (int i = 0; i < 86400; ++i) s.append(random_reading(gen, i));
  const SeriesKey key{1, Channel::kTemperature};
  for (auto _ : state) {
    auto b = s.aggregate(key, 0, 86400, static_cast<double>(state.range(0)));
    benchmark::DoNotOptimize(b);
  }
}
BENCHMARK(BM_StoreAggregate)->Arg(60)->Arg(3600);

static void BM_RecordLine(benchmark::State& state) {
  StoreRecord rec{42, {7, Channel::kLight, 512.3372434017595, 43230, 43230.05, 999, 87}};
  for (auto _ : state) {
    auto back = parse_record_line(format_record_line(rec));
    benchmark::DoNotOptimize(back);
  }
}
BENCHMARK(BM_RecordLine);

// 10 nodes x 3 channels x 24 h at 30 s.
static void BM_ReferenceScenario(benchmark::State& state) {
  ScenarioConfig cfg;
  cfg.seed = 1;
  cfg.duration_s = 86400;
  for (NodeId id = 1; id <= 10; ++id) {
    NodeSpec n;
    n.node_id = id;
    cfg.nodes.push_back(n);
  }
  cfg.radio.loss_prob = state.range(0) / 100.0;
  cfg.radio.dup_prob = state.range(0) / 100.0;
  for (auto _ : state) {
    auto r = run_scenario(cfg);
    benchmark::DoNotOptimize(r);
  }
  state.SetItemsProcessed(state.iterations() * 86400);
}
BENCHMARK(BM_ReferenceScenario)->Arg(0)->Arg(20)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
