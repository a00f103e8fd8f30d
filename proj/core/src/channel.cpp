#include "greenmon/channel.hpp"

#include <charconv>
#include <cmath>

namespace greenmon {

std::optional<Channel> channel_from_code(int code) {
  if (code < 0 || code >= static_cast<int>(kChannelCount)) return std::nullopt;
  return static_cast<Channel>(code);
}

std::optional<Channel> parse_channel(std::string_view text) {
  for (Channel c : kAllChannels) {
    if (text == channel_name(c)) return c;
  }
  int code = -1;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), code);
  if (ec != std::errc{} || ptr != text.data() + text.size()) return std::nullopt;
  return channel_from_code(code);
}

std::string_view channel_name(Channel c) {
  switch (c) {
    case Channel::kTemperature: return "temperature";
    case Channel::kHumidity: return "humidity";
    case Channel::kLight: return "light";
  }
  return "unknown";
}

std::string_view channel_unit(Channel c) {
  switch (c) {
    case Channel::kTemperature: return "degC";
    case Channel::kHumidity: return "%RH";
    case Channel::kLight: return "lux";
  }
  return "";
}

CalibrationMap::CalibrationMap()
    : ranges_{ChannelRange{0.0, 50.0}, ChannelRange{0.0, 100.0}, ChannelRange{0.0, 1000.0}} {}

void CalibrationMap::set_range(Channel c, ChannelRange r) {
  if (!(r.hi > r.lo) || !std::isfinite(r.lo) || !std::isfinite(r.hi)) {
    throw ConfigError("calibration." + std::string(channel_name(c)), "hi must be greater than lo");
  }
  ranges_[channel_index(c)] = r;
}

double half_lsb(const ChannelRange& r) { return (r.hi - r.lo) / 1023.0 / 2.0; }

}  // namespace greenmon
