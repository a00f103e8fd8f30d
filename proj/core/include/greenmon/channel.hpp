#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace greenmon {

/// Virtual seconds since scenario start.
using VirtualTime = double;

using NodeId = std::uint16_t;

/// Sensing channel. The numeric code is what travels on air.
enum class Channel : std::uint8_t {
  kTemperature = 0,  // degC
  kHumidity = 1,     // %RH
  kLight = 2,        // lux
};

inline constexpr std::size_t kChannelCount = 3;
inline constexpr std::array<Channel, kChannelCount> kAllChannels = {
    Channel::kTemperature, Channel::kHumidity, Channel::kLight};

constexpr std::uint8_t channel_code(Channel c) { return static_cast<std::uint8_t>(c); }
constexpr std::size_t channel_index(Channel c) { return static_cast<std::size_t>(c); }

std::optional<Channel> channel_from_code(int code);
/// Accepts either the numeric code ("0") or the name ("temperature").
std::optional<Channel> parse_channel(std::string_view text);
std::string_view channel_name(Channel c);
std::string_view channel_unit(Channel c);

/// Raised for invalid configuration values. `field` names the offending field.
class ConfigError : public std::runtime_error {
 public:
  ConfigError(std::string field, const std::string& message)
      : std::runtime_error(field.empty() ? message : field + ": " + message),
        field_(std::move(field)) {}

  const std::string& field() const { return field_; }

 private:
  std::string field_;
};

/// Physical range mapped onto the 10-bit ADC scale.
struct ChannelRange {
  double lo = 0.0;
  double hi = 1.0;
};

/// Per-channel affine map between ADC counts and engineering units.
class CalibrationMap {
 public:
  /// Temperature [0, 50] degC, humidity [0, 100] %RH, light [0, 1000] lux.
  CalibrationMap();

  const ChannelRange& range(Channel c) const { return ranges_[channel_index(c)]; }
  /// Throws ConfigError unless hi > lo.
  void set_range(Channel c, ChannelRange r);

 private:
  std::array<ChannelRange, kChannelCount> ranges_;
};

/// Half of one ADC step, the best-case quantization error for a channel.
double half_lsb(const ChannelRange& r);

}  // namespace greenmon
