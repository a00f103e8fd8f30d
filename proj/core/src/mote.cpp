#include "greenmon/mote.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>

namespace greenmon {

std::uint8_t xor_checksum(std::span<const std::uint8_t> bytes) {
  std::uint8_t x = 0;
  for (auto b : bytes) x ^= b;
  return x;
}

PacketBytes encode_packet(const MotePacket& p) {
  if (p.adc_counts > kMaxAdcCounts) throw EncodeError("adc_counts exceeds 10 bits");
  if (p.battery_pct > 100) throw EncodeError("battery_pct exceeds 100");
  if (!channel_from_code(channel_code(p.channel))) throw EncodeError("unknown channel");

  PacketBytes out{};
  out[0] = static_cast<std::uint8_t>(p.node_id >> 8);
  out[1] = static_cast<std::uint8_t>(p.node_id);
  out[2] = channel_code(p.channel);
  out[3] = static_cast<std::uint8_t>(p.seq >> 8);
  out[4] = static_cast<std::uint8_t>(p.seq);
  out[5] = static_cast<std::uint8_t>(p.adc_counts >> 8);
  out[6] = static_cast<std::uint8_t>(p.adc_counts);
  out[7] = static_cast<std::uint8_t>(p.sample_t >> 24);
  out[8] = static_cast<std::uint8_t>(p.sample_t >> 16);
  out[9] = static_cast<std::uint8_t>(p.sample_t >> 8);
  out[10] = static_cast<std::uint8_t>(p.sample_t);
  out[11] = p.battery_pct;
  out[12] = xor_checksum(std::span(out).first(kPacketSize - 1));
  return out;
}

std::uint16_t quantize_sample(double value, double lo, double hi) {
  if (!(hi > lo)) throw ConfigError("calibration", "hi must be greater than lo");
  const double scaled = (value - lo) / (hi - lo) * kMaxAdcCounts;
  // NaN lands on 0 rather than invoking undefined conversion behaviour.
  if (!(scaled > 0.0)) return 0;
  const double rounded = std::floor(scaled + 0.5);
  if (rounded >= kMaxAdcCounts) return kMaxAdcCounts;
  return static_cast<std::uint16_t>(rounded);
}

double NodeState::next_due() const {
  if (dead()) return std::numeric_limits<double>::infinity();
  double best = std::numeric_limits<double>::infinity();
  for (Channel c : kAllChannels) {
    if (channels_enabled[channel_index(c)]) {
      best = std::min(best, static_cast<double>(next_due_t[channel_index(c)]));
    }
  }
  return best;
}

NodeState NodeState::create(NodeId id, std::string location, std::uint32_t interval_s) {
  NodeState s;
  s.node_id = id;
  s.location = std::move(location);
  s.sampling_interval_s = interval_s;
  s.next_due_t.fill(interval_s);
  return s;
}

namespace {

std::uint8_t reported_battery(double pct) {
  return static_cast<std::uint8_t>(std::clamp(std::lround(pct), 0L, 100L));
}

}  // namespace

std::vector<MotePacket> node_tick(NodeState& state, VirtualTime t, const EnvSampler& env,
                                  const CalibrationMap& cal) {
  if (state.sampling_interval_s == 0) throw ConfigError("sampling_interval_s", "must be > 0");
  std::vector<MotePacket> out;
  state.last_tick_t = std::max(state.last_tick_t, t);
  while (!state.dead()) {
    // Earliest due channel; lower channel code wins ties.
    std::optional<Channel> next;
    for (Channel c : kAllChannels) {
      const auto i = channel_index(c);
      if (!state.channels_enabled[i] || state.next_due_t[i] > t) continue;
      if (!next || state.next_due_t[i] < state.next_due_t[channel_index(*next)]) next = c;
    }
    if (!next) break;

    const auto i = channel_index(*next);
    const std::uint32_t due = state.next_due_t[i];
    const auto& range = cal.range(*next);

    MotePacket p;
    p.node_id = state.node_id;
    p.channel = *next;
    p.seq = state.seq;
    p.adc_counts = quantize_sample(env(*next, due), range.lo, range.hi);
    p.sample_t = due;
    p.battery_pct = reported_battery(state.battery_pct);
    out.push_back(p);

    state.seq = static_cast<std::uint16_t>(state.seq + 1);
    state.next_due_t[i] = due + state.sampling_interval_s;
    state.battery_pct -= state.drain_per_packet;
    // Accumulated decrements can leave a tiny positive residue.
    if (state.battery_pct < 1e-9) state.battery_pct = 0.0;
  }
  return out;
}

}  // namespace greenmon
