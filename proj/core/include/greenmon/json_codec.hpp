#pragma once

// JSON forms of the domain types, shared by the scenario file, the HTTP API
// and the run report. Field names match the domain type fields exactly.

#include <nlohmann/json.hpp>

#include "greenmon/alarms.hpp"
#include "greenmon/envmodel.hpp"
#include "greenmon/events.hpp"
#include "greenmon/radio.hpp"
#include "greenmon/store.hpp"

namespace greenmon {

using Json = nlohmann::ordered_json;

Json to_json(const Reading& r);
Json to_json(const Alarm& a);
Json to_json(const Bucket& b);
Json to_json(const ThresholdConfig& c);
Json to_json(const FaultEvent& f);
Json to_json(const EnvSignalSpec& s);
Json to_json(const RadioParams& p);
Json to_json(const ApiEvent& e);

/// Parsers throw ConfigError naming the offending field (prefixed by `where`).
/// `channel` is read as a code or a name. Missing optional fields keep their
/// defaults.
ThresholdConfig threshold_from_json(const Json& j, const std::string& where = "");
/// A missing start_t becomes `default_start`.
FaultEvent fault_from_json(const Json& j, const std::string& where = "", VirtualTime default_start = 0.0);
EnvSignalSpec signal_from_json(const Json& j, const std::string& where = "");
RadioParams radio_from_json(const Json& j, const std::string& where = "");
Channel channel_from_json(const Json& j, const std::string& field);

/// Hex form of a 64-bit digest, "0x" followed by 16 lowercase digits.
std::string hex64(std::uint64_t v);

}  // namespace greenmon
