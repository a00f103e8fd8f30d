#include "greenmon/envmodel.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace greenmon {

void EnvSignalSpec::validate() const {
  const std::string prefix = "env." + std::string(channel_name(channel)) + ".";
  if (!(period_s > 0.0)) throw ConfigError(prefix + "period_s", "must be > 0");
  if (!(amplitude >= 0.0)) throw ConfigError(prefix + "amplitude", "must be >= 0");
  if (!(noise_sigma >= 0.0)) throw ConfigError(prefix + "noise_sigma", "must be >= 0");
  if (!std::isfinite(base)) throw ConfigError(prefix + "base", "must be finite");
}

EnvSignalSpec default_signal(Channel c) {
  switch (c) {
    case Channel::kTemperature: return {c, 24.0, 6.0, 86400.0, 21600.0, 0.0};
    case Channel::kHumidity: return {c, 60.0, 15.0, 86400.0, 64800.0, 0.0};
    case Channel::kLight: return {c, 450.0, 400.0, 86400.0, 21600.0, 0.0};
  }
  return {};
}

std::string_view fault_kind_name(FaultKind k) {
  switch (k) {
    case FaultKind::kStep: return "step";
    case FaultKind::kRamp: return "ramp";
    case FaultKind::kSpike: return "spike";
  }
  return "unknown";
}

std::optional<FaultKind> parse_fault_kind(std::string_view text) {
  if (text == "step") return FaultKind::kStep;
  if (text == "ramp") return FaultKind::kRamp;
  if (text == "spike") return FaultKind::kSpike;
  return std::nullopt;
}

double FaultEvent::contribution(VirtualTime t) const {
  if (t < start_t) return 0.0;
  switch (kind) {
    case FaultKind::kStep:
      return magnitude;
    case FaultKind::kRamp:
      if (t >= start_t + duration_s) return magnitude;
      return magnitude * (t - start_t) / duration_s;
    case FaultKind::kSpike:
      return t < start_t + duration_s ? magnitude : 0.0;
  }
  return 0.0;
}

double signal_value(const EnvSignalSpec& spec, VirtualTime t) {
  return spec.base +
         spec.amplitude * std::sin(2.0 * std::numbers::pi * (t - spec.phase_s) / spec.period_s);
}

double env_value(const EnvSignalSpec& spec, std::span<const FaultEvent> faults, VirtualTime t,
                 RandomStream& noise) {
  double v = signal_value(spec, t);
  if (spec.noise_sigma > 0.0) v += spec.noise_sigma * noise.gaussian();
  for (const auto& f : faults) v += f.contribution(t);
  return v;
}

std::string FaultRegistry::inject(FaultEvent fault) {
  if (!(fault.duration_s > 0.0)) throw ConfigError("duration_s", "must be > 0");
  if (!std::isfinite(fault.start_t) || fault.start_t < 0.0) {
    throw ConfigError("start_t", "must be a non-negative time");
  }
  if (!std::isfinite(fault.magnitude)) throw ConfigError("magnitude", "must be finite");
  std::unique_lock lock(mu_);
  if (fault.fault_id.empty()) {
    do {
      fault.fault_id = "fault-" + std::to_string(next_id_++);
    } while (std::any_of(faults_.begin(), faults_.end(),
                         [&](const FaultEvent& f) { return f.fault_id == fault.fault_id; }));
  } else if (std::any_of(faults_.begin(), faults_.end(),
                         [&](const FaultEvent& f) { return f.fault_id == fault.fault_id; })) {
    throw ConfigError("fault_id", "already in use");
  }
  faults_.push_back(fault);
  return fault.fault_id;
}

std::vector<FaultEvent> FaultRegistry::for_channel(Channel c) const {
  std::shared_lock lock(mu_);
  std::vector<FaultEvent> out;
  for (const auto& f : faults_) {
    if (f.channel == c) out.push_back(f);
  }
  return out;
}

std::vector<FaultEvent> FaultRegistry::all() const {
  std::shared_lock lock(mu_);
  return faults_;
}

Environment::Environment(std::span<const EnvSignalSpec> specs, std::uint64_t seed) {
  for (Channel c : kAllChannels) {
    specs_[channel_index(c)] = default_signal(c);
    noise_[channel_index(c)] = RandomStream(mix_seed(seed, 0x100 + channel_code(c)));
  }
  for (const auto& s : specs) {
    s.validate();
    specs_[channel_index(s.channel)] = s;
  }
}

double Environment::sample(Channel c, VirtualTime t) {
  const auto faults = faults_.for_channel(c);
  return env_value(specs_[channel_index(c)], faults, t, noise_[channel_index(c)]);
}

double Environment::truth(Channel c, VirtualTime t) const {
  const auto faults = faults_.for_channel(c);
  const auto& spec = specs_[channel_index(c)];
  double v = signal_value(spec, t);
  for (const auto& f : faults) v += f.contribution(t);
  return v;
}

}  // namespace greenmon
