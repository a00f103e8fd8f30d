#pragma once

// Synthetic greenhouse environment: a diurnal sinusoid per channel plus seeded
// Gaussian noise plus operator-injected faults.

#include <array>
#include <cstdint>
#include <mutex>
#include <optional>
#include <shared_mutex>
#include <span>
#include <string>
#include <vector>

#include "greenmon/channel.hpp"
#include "greenmon/random.hpp"

namespace greenmon {

struct EnvSignalSpec {
  Channel channel = Channel::kTemperature;
  double base = 0.0;
  double amplitude = 0.0;
  double period_s = 86400.0;
  double phase_s = 0.0;
  double noise_sigma = 0.0;

  /// Throws ConfigError on period_s <= 0, amplitude < 0 or noise_sigma < 0.
  void validate() const;
};

/// Plausible greenhouse defaults used when a scenario omits a channel.
EnvSignalSpec default_signal(Channel c);

enum class FaultKind : std::uint8_t { kStep, kRamp, kSpike };

std::string_view fault_kind_name(FaultKind k);
std::optional<FaultKind> parse_fault_kind(std::string_view text);

struct FaultEvent {
  std::string fault_id;  // assigned by the registry when empty
  Channel channel = Channel::kTemperature;
  FaultKind kind = FaultKind::kStep;
  VirtualTime start_t = 0.0;
  double duration_s = 1.0;
  double magnitude = 0.0;

  /// Contribution of this fault to the channel value at time t.
  ///   step:  magnitude for t >= start_t
  ///   ramp:  0 at start_t rising linearly to magnitude at start_t + duration_s, then held
  ///   spike: magnitude within [start_t, start_t + duration_s), else 0
  double contribution(VirtualTime t) const;
};

/// Noise-free component: base + amplitude * sin(2*pi*(t - phase_s)/period_s).
double signal_value(const EnvSignalSpec& spec, VirtualTime t);

/// Full environment value. Draws one Gaussian from `noise` only when
/// noise_sigma > 0, so a zero-noise channel is a pure function of its inputs.
double env_value(const EnvSignalSpec& spec, std::span<const FaultEvent> faults, VirtualTime t,
                 RandomStream& noise);

/// Append-only fault list shared between the simulation loop and the fault
/// injection endpoint.
class FaultRegistry {
 public:
  /// Returns the fault id. Throws ConfigError("duration_s") on a non-positive
  /// duration and ConfigError("fault_id") on a reused id.
  std::string inject(FaultEvent fault);

  std::vector<FaultEvent> for_channel(Channel c) const;
  std::vector<FaultEvent> all() const;

 private:
  mutable std::shared_mutex mu_;
  std::vector<FaultEvent> faults_;
  std::uint64_t next_id_ = 1;
};

/// The greenhouse as seen by the sensors. One independent noise stream per
/// channel, advanced only when a sample is taken.
class Environment {
 public:
  Environment(std::span<const EnvSignalSpec> specs, std::uint64_t seed);

  const EnvSignalSpec& spec(Channel c) const { return specs_[channel_index(c)]; }

  /// Value observed by a sensor at t (advances that channel's noise stream).
  double sample(Channel c, VirtualTime t);
  /// Noise-free value at t including faults.
  double truth(Channel c, VirtualTime t) const;

  FaultRegistry& faults() { return faults_; }
  const FaultRegistry& faults() const { return faults_; }

 private:
  std::array<EnvSignalSpec, kChannelCount> specs_;
  std::array<RandomStream, kChannelCount> noise_;
  FaultRegistry faults_;
};

}  // namespace greenmon
