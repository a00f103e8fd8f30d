#include <gtest/gtest.h>

#include <map>
#include <random>
#include <set>
#include <tuple>

#include "greenmon/alarms.hpp"

namespace greenmon {
namespace {

Reading temp(double value, double t, NodeId node = 1) {
  Reading r;
  r.node_id = node;
  r.channel = Channel::kTemperature;
  r.value = value;
  r.sample_t = t;
  r.arrival_t = t;
  return r;
}

ThresholdConfig temp_cfg() {
  ThresholdConfig c = default_thresholds(Channel::kTemperature);
  c.min_ok = 10;
  c.max_ok = 35;
  c.rate_limit = 2;
  c.hysteresis = 0.5;
  c.clear_count = 3;
  return c;
}

TEST(Evaluate, AboveMaxRaisesHigh) {
  AlarmEngine eng;
  eng.set_threshold(temp_cfg());
  const auto tr = eng.evaluate_reading(temp(36.2, 30));
  ASSERT_EQ(tr.size(), 1u);
  EXPECT_EQ(tr[0].type, TransitionType::kRaised);
  EXPECT_EQ(tr[0].alarm.kind, AlarmKind::kHigh);
  EXPECT_EQ(tr[0].alarm.peak_value, 36.2);
  EXPECT_EQ(tr[0].alarm.raised_t, 30);
}

TEST(Evaluate, InBandNoTransition) {
  AlarmEngine eng;
  eng.set_threshold(temp_cfg());
  EXPECT_TRUE(eng.evaluate_reading(temp(34.9, 30)).empty());
}

TEST(Evaluate, BoundaryIsInBand) {
  AlarmEngine eng;
  eng.set_threshold(temp_cfg());
  EXPECT_TRUE(eng.evaluate_reading(temp(35.0, 30)).empty());
  EXPECT_TRUE(eng.evaluate_reading(temp(10.0, 60)).empty());
  const auto low = eng.evaluate_reading(temp(9.99, 90));
  ASSERT_EQ(low.size(), 1u);
  EXPECT_EQ(low[0].alarm.kind, AlarmKind::kLow);
}

TEST(Evaluate, HysteresisClearsOnThirdReading) {
  AlarmEngine eng;
  eng.set_threshold(temp_cfg());
  eng.evaluate_reading(temp(36.2, 30));
  EXPECT_TRUE(eng.evaluate_reading(temp(34.4, 60)).empty());
  EXPECT_TRUE(eng.evaluate_reading(temp(34.3, 90)).empty());
  const auto tr = eng.evaluate_reading(temp(34.2, 120));
  ASSERT_EQ(tr.size(), 1u);
  EXPECT_EQ(tr[0].type, TransitionType::kCleared);
  EXPECT_EQ(tr[0].alarm.cleared_t, 120);
  EXPECT_TRUE(eng.list_active().empty());
}

TEST(Evaluate, InsideHysteresisBandResetsRun) {
  AlarmEngine eng;
  eng.set_threshold(temp_cfg());
  eng.evaluate_reading(temp(36.2, 30));
  eng.evaluate_reading(temp(34.4, 60));
  eng.evaluate_reading(temp(34.8, 90));  // in band but within hysteresis of max
  eng.evaluate_reading(temp(34.4, 120));
  EXPECT_TRUE(eng.evaluate_reading(temp(34.4, 150)).empty());
  EXPECT_EQ(eng.evaluate_reading(temp(34.4, 180)).size(), 1u);
}

TEST(Evaluate, PeakTracksWorstValue) {
  AlarmEngine eng;
  eng.set_threshold(temp_cfg());
  const auto id = eng.evaluate_reading(temp(36, 30))[0].alarm.alarm_id;
  eng.evaluate_reading(temp(38, 60));
  eng.evaluate_reading(temp(37, 90));
  EXPECT_EQ(eng.find(id)->peak_value, 38);
}

TEST(Rate, AboveLimitRaises) {
  const auto cfg = temp_cfg();
  EXPECT_EQ(check_rate(temp(25.0, 0), temp(27.5, 60), cfg), RateCheck::kExceeded);
  EXPECT_EQ(check_rate(temp(25.0, 0), temp(27.0, 60), cfg), RateCheck::kWithin);
  EXPECT_EQ(check_rate(temp(25.0, 0), temp(23.0, 60), cfg), RateCheck::kWithin);
  EXPECT_EQ(check_rate(temp(25.0, 60), temp(27.0, 60), cfg), RateCheck::kDegenerate);
}

TEST(Rate, ProcessRaisesAndAutoClears) {
  AlarmEngine eng;
  eng.set_threshold(temp_cfg());
  EXPECT_TRUE(eng.process(temp(25.0, 0)).empty());
  const auto up = eng.process(temp(27.5, 60));
  ASSERT_EQ(up.size(), 1u);
  EXPECT_EQ(up[0].alarm.kind, AlarmKind::kRapidChange);
  EXPECT_EQ(up[0].alarm.peak_value, 27.5);
  const auto down = eng.process(temp(28.0, 120));
  ASSERT_EQ(down.size(), 1u);
  EXPECT_EQ(down[0].type, TransitionType::kCleared);
}

TEST(Rate, ExactLimitDoesNotRaise) {
  AlarmEngine eng;
  eng.set_threshold(temp_cfg());
  for (int i = 0; i <= 20; ++i) EXPECT_TRUE(eng.process(temp(15.0 + i, i * 30.0)).empty());
}

TEST(Rate, DegeneratePairSkippedAndCounted) {
  AlarmEngine eng;
  eng.set_threshold(temp_cfg());
  eng.process(temp(25.0, 60));
  EXPECT_TRUE(eng.process(temp(30.0, 60)).empty());
  EXPECT_EQ(eng.degenerate_pairs(), 1u);
  // The skipped reading does not become the new reference.
  EXPECT_TRUE(eng.process(temp(26.0, 90)).empty());
}

TEST(Silence, StrictBoundary) {
  AlarmEngine eng;
  eng.watch_node(5, 0.0, 30);
  EXPECT_DOUBLE_EQ(eng.next_silence_deadline(), 90.0);
  EXPECT_TRUE(eng.check_silence(90.0).empty());
  const auto tr = eng.check_silence(91.0);
  ASSERT_EQ(tr.size(), 1u);
  EXPECT_EQ(tr[0].alarm.kind, AlarmKind::kNodeSilent);
  EXPECT_EQ(tr[0].alarm.node_id, 5);
  EXPECT_FALSE(tr[0].alarm.channel);
  EXPECT_TRUE(eng.check_silence(500.0).empty());  // one open alarm per node
}

TEST(Silence, PacketClears) {
  AlarmEngine eng;
  eng.watch_node(5, 0.0, 30);
  eng.check_silence(91.0);
  const auto tr = eng.process(temp(24, 100, 5));
  ASSERT_EQ(tr.size(), 1u);
  EXPECT_EQ(tr[0].type, TransitionType::kCleared);
  EXPECT_EQ(tr[0].alarm.kind, AlarmKind::kNodeSilent);
  EXPECT_EQ(tr[0].alarm.cleared_t, 100);
}

TEST(Ack, ActiveBecomesAcknowledged) {
  AlarmEngine eng;
  eng.set_threshold(temp_cfg());
  const auto id = eng.evaluate_reading(temp(36.2, 30))[0].alarm.alarm_id;
  const auto tr = eng.acknowledge(id, "grower", 45.0);
  EXPECT_EQ(tr.type, TransitionType::kAcknowledged);
  EXPECT_EQ(tr.alarm.state, AlarmState::kAcknowledged);
  EXPECT_EQ(tr.alarm.ack_by, "grower");
  EXPECT_EQ(tr.alarm.ack_t, 45.0);
}

TEST(Ack, Errors) {
  AlarmEngine eng;
  eng.set_threshold(temp_cfg());
  try {
    eng.acknowledge(99, "x", 0);
    FAIL();
  } catch (const AlarmError& e) {
    EXPECT_EQ(e.kind(), AlarmError::Kind::kNotFound);
  }
  const auto id = eng.evaluate_reading(temp(36.2, 30))[0].alarm.alarm_id;
  eng.acknowledge(id, "x", 31);
  try {
    eng.acknowledge(id, "x", 32);
    FAIL();
  } catch (const AlarmError& e) {
    EXPECT_EQ(e.kind(), AlarmError::Kind::kInvalidState);
  }
}

TEST(Ack, AcknowledgedStillClears) {
  AlarmEngine eng;
  eng.set_threshold(temp_cfg());
  const auto id = eng.evaluate_reading(temp(36.2, 30))[0].alarm.alarm_id;
  eng.acknowledge(id, "x", 31);
  for (int i = 0; i < 3; ++i) eng.evaluate_reading(temp(30, 60 + i * 30.0));
  EXPECT_EQ(eng.find(id)->state, AlarmState::kCleared);
  EXPECT_THROW(eng.acknowledge(id, "x", 200), AlarmError);
}

TEST(ListActive, OrderAndFilter) {
  AlarmEngine eng;
  eng.set_threshold(temp_cfg());
  EXPECT_TRUE(eng.list_active().empty());
  const auto a = eng.evaluate_reading(temp(36, 50, 2))[0].alarm.alarm_id;
  const auto b = eng.evaluate_reading(temp(5, 40, 1))[0].alarm.alarm_id;
  auto list = eng.list_active();
  ASSERT_EQ(list.size(), 2u);
  EXPECT_EQ(list[0].alarm_id, b);
  EXPECT_EQ(list[1].alarm_id, a);
  eng.acknowledge(a, "x", 60);
  for (int i = 0; i < 3; ++i) eng.evaluate_reading(temp(20, 100 + i * 30.0, 1));
  list = eng.list_active();
  ASSERT_EQ(list.size(), 1u);
  EXPECT_EQ(list[0].alarm_id, a);
  EXPECT_EQ(list[0].state, AlarmState::kAcknowledged);
}

TEST(ThresholdConfig, Validation) {
  auto c = temp_cfg();
  c.min_ok = 40;
  try {
    c.validate();
    FAIL();
  } catch (const ConfigError& e) {
    EXPECT_EQ(e.field(), "min_ok");
  }
  c = temp_cfg();
  c.rate_limit = 0;
  EXPECT_THROW(c.validate(), ConfigError);
  c = temp_cfg();
  c.hysteresis = -1;
  EXPECT_THROW(c.validate(), ConfigError);
  c = temp_cfg();
  c.clear_count = 0;
  EXPECT_THROW(c.validate(), ConfigError);
}

// Randomized streams: every transition must follow the lifecycle table and
// at most one alarm per (node, channel, kind) may be open at once.
TEST(AlarmProperty, LegalTransitionsAndSingleOpenAlarm) {
  std::mt19937_64 gen(17);
  std::uniform_real_distribution<double> value(0, 45);
  std::uniform_int_distribution<int> node(1, 3), action(0, 9);
  AlarmEngine eng;
  eng.set_threshold(temp_cfg());
  for (NodeId n = 1; n <= 3; ++n) eng.watch_node(n, 0, 30);
  std::map<AlarmId, AlarmState> seen;
  double t = 0;
  auto apply = [&](const AlarmTransition& tr) {
    const auto id = tr.alarm.alarm_id;
    switch (tr.type) {
      case TransitionType::kRaised:
        ASSERT_FALSE(seen.count(id));
        ASSERT_EQ(tr.alarm.state, AlarmState::kActive);
        break;
      case TransitionType::kAcknowledged:
        ASSERT_EQ(seen.at(id), AlarmState::kActive);
        ASSERT_EQ(tr.alarm.state, AlarmState::kAcknowledged);
        break;
      case TransitionType::kCleared:
        ASSERT_NE(seen.at(id), AlarmState::kCleared);
        ASSERT_EQ(tr.alarm.state, AlarmState::kCleared);
        break;
    }
    seen[id] = tr.alarm.state;
  };
  for (int step = 0; step < 5000; ++step) {
    t += std::uniform_real_distribution<double>(0, 60)(gen);
    const int a = action(gen);
    if (a < 7) {
      for (const auto& tr : eng.process(temp(value(gen), t, static_cast<NodeId>(node(gen))))) apply(tr);
    } else if (a < 9) {
      for (const auto& tr : eng.check_silence(t)) apply(tr);
    } else {
      const auto active = eng.list_active();
      if (active.empty()) continue;
      const auto& target = active[gen() % active.size()];
      if (target.state == AlarmState::kActive) {
        apply(eng.acknowledge(target.alarm_id, "op", t));
      } else {
        EXPECT_THROW(eng.acknowledge(target.alarm_id, "op", t), AlarmError);
      }
    }
    std::set<std::tuple<NodeId, int, AlarmKind>> open;
    for (const auto& al : eng.list_active()) {
      const int ch = al.channel ? channel_code(*al.channel) : -1;
      ASSERT_TRUE(open.emplace(al.node_id, ch, al.kind).second);
    }
  }
  EXPECT_GT(seen.size(), 10u);
}

}  // namespace
}  // namespace greenmon
