#include <gtest/gtest.h>

#include <random>

#include "greenmon/gateway.hpp"
#include "greenmon/mote.hpp"

namespace greenmon {
namespace {

PacketBytes hex(std::initializer_list<int> bytes) {
  PacketBytes out{};
  std::size_t i = 0;
  for (int b : bytes) out[i++] = static_cast<std::uint8_t>(b);
  return out;
}

const EnvSampler kFlatEnv = [](Channel, VirtualTime) { return 25.0; };

TEST(Quantize, Endpoints) {
  EXPECT_EQ(quantize_sample(0.0, 0, 50), 0);
  EXPECT_EQ(quantize_sample(50.0, 0, 50), 1023);
}

TEST(Quantize, MidpointRoundsHalfUp) { EXPECT_EQ(quantize_sample(25.0, 0, 50), 512); }

TEST(Quantize, ClampsOutOfRange) {
  EXPECT_EQ(quantize_sample(60.0, 0, 50), 1023);
  EXPECT_EQ(quantize_sample(-5.0, 0, 50), 0);
}

TEST(Quantize, RejectsEmptyRange) { EXPECT_THROW(quantize_sample(1.0, 5, 5), ConfigError); }

TEST(Quantize, HalfLsbBound) {
  CalibrationMap cal;
  std::mt19937_64 gen(11);
  for (Channel c : kAllChannels) {
    const auto r = cal.range(c);
    std::uniform_real_distribution<double> dist(r.lo, r.hi);
    for (int i = 0; i < 20000; ++i) {
      const double v = dist(gen);
      const double back = to_engineering(quantize_sample(v, r.lo, r.hi), c, cal);
      ASSERT_LE(std::abs(back - v), (r.hi - r.lo) / 1023 / 2 + 1e-12) << v;
    }
  }
}

TEST(Encode, GoldenVectors) {
  EXPECT_EQ(encode_packet({1, Channel::kTemperature, 7, 512, 3600, 100}),
            hex({0x00, 0x01, 0x00, 0x00, 0x07, 0x02, 0x00, 0x00, 0x00, 0x0E, 0x10, 0x64, 0x7E}));
  EXPECT_EQ(encode_packet({2, Channel::kLight, 65535, 1023, 0, 50}),
            hex({0x00, 0x02, 0x02, 0xFF, 0xFF, 0x03, 0xFF, 0x00, 0x00, 0x00, 0x00, 0x32, 0xCE}));
}

TEST(Encode, RejectsOutOfRangeFields) {
  EXPECT_THROW(encode_packet({1, Channel::kTemperature, 0, 1024, 0, 0}), EncodeError);
  EXPECT_THROW(encode_packet({1, Channel::kTemperature, 0, 0, 0, 101}), EncodeError);
}

TEST(Encode, RoundTripRandomized) {
  std::mt19937_64 gen(2024);
  for (int i = 0; i < 10000; ++i) {
    MotePacket p;
    p.node_id = static_cast<NodeId>(gen());
    p.channel = kAllChannels[gen() % 3];
    p.seq = static_cast<std::uint16_t>(gen());
    p.adc_counts = static_cast<std::uint16_t>(gen() % 1024);
    p.sample_t = static_cast<std::uint32_t>(gen());
    p.battery_pct = static_cast<std::uint8_t>(gen() % 101);
    const auto bytes = encode_packet(p);
    ASSERT_EQ(xor_checksum(std::span(bytes).first(12)), bytes[12]);
    const auto decoded = decode_packet(bytes);
    ASSERT_TRUE(std::holds_alternative<MotePacket>(decoded));
    ASSERT_EQ(std::get<MotePacket>(decoded), p);
  }
}

TEST(NodeTick, OneChannelDue) {
  auto node = NodeState::create(4, "bench", 30);
  node.channels_enabled = {true, false, false};
  const auto out = node_tick(node, 30.0, kFlatEnv, CalibrationMap{});
  ASSERT_EQ(out.size(), 1u);
  EXPECT_EQ(out[0].seq, 0);
  EXPECT_EQ(node.seq, 1);
  EXPECT_EQ(out[0].sample_t, 30u);
  EXPECT_EQ(node.next_due_t[0], 60u);
}

TEST(NodeTick, ThreeChannelsDue) {
  auto node = NodeState::create(1, "", 30);
  const auto out = node_tick(node, 30.0, kFlatEnv, CalibrationMap{});
  ASSERT_EQ(out.size(), 3u);
  EXPECT_EQ(out[0].seq + 1, out[1].seq);
  EXPECT_EQ(out[1].seq + 1, out[2].seq);
  EXPECT_EQ(out[0].channel, Channel::kTemperature);
  EXPECT_EQ(out[2].channel, Channel::kLight);
  EXPECT_NEAR(node.battery_pct, 100.0 - 0.03, 1e-12);
}

TEST(NodeTick, NothingBeforeFirstDue) {
  auto node = NodeState::create(1, "", 30);
  EXPECT_TRUE(node_tick(node, 29.0, kFlatEnv, CalibrationMap{}).empty());
}

TEST(NodeTick, SampleTimeIsDueInstantNotTickTime) {
  auto node = NodeState::create(1, "", 30);
  node.channels_enabled = {true, false, false};
  const auto out = node_tick(node, 95.0, kFlatEnv, CalibrationMap{});
  ASSERT_EQ(out.size(), 3u);
  EXPECT_EQ(out[0].sample_t, 30u);
  EXPECT_EQ(out[1].sample_t, 60u);
  EXPECT_EQ(out[2].sample_t, 90u);
}

TEST(NodeTick, DeadNodeEmitsNothing) {
  auto node = NodeState::create(1, "", 30);
  node.battery_pct = 0.0;
  const auto due = node.next_due_t;
  const auto seq = node.seq;
  EXPECT_TRUE(node_tick(node, 300.0, kFlatEnv, CalibrationMap{}).empty());
  EXPECT_EQ(node.next_due_t, due);
  EXPECT_EQ(node.seq, seq);
  EXPECT_EQ(node.last_tick_t, 300.0);
}

TEST(NodeTick, BatteryRunsOut) {
  auto node = NodeState::create(1, "", 30);
  node.battery_pct = 0.05;
  std::size_t emitted = 0;
  for (int k = 1; k <= 10; ++k) emitted += node_tick(node, k * 30.0, kFlatEnv, CalibrationMap{}).size();
  EXPECT_EQ(emitted, 5u);
  EXPECT_TRUE(node.dead());
}

TEST(NodeTick, SeqWraps) {
  auto node = NodeState::create(1, "", 30);
  node.seq = 65534;
  const auto out = node_tick(node, 30.0, kFlatEnv, CalibrationMap{});
  ASSERT_EQ(out.size(), 3u);
  EXPECT_EQ(out[0].seq, 65534);
  EXPECT_EQ(out[1].seq, 65535);
  EXPECT_EQ(out[2].seq, 0);
}

TEST(NodeTick, QuantizesThroughCalibration) {
  auto node = NodeState::create(1, "", 30);
  const auto out = node_tick(node, 30.0, kFlatEnv, CalibrationMap{});
  EXPECT_EQ(out[0].adc_counts, 512);  // 25 degC on [0, 50]
  EXPECT_EQ(out[1].adc_counts, 256);  // 25 %RH on [0, 100]: 255.75 -> 256
  EXPECT_EQ(out[0].battery_pct, 100);
}

}  // namespace
}  // namespace greenmon
