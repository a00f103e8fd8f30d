#pragma once

// Golden HTTP transcripts.
//
// A transcript is a line-oriented script run against a fresh station served
// over a real socket:
//
//   # comment
//   volatile ack_t                      fields masked before comparing
//   !!! frame <node> <ch> <seq> <counts> <sample_t> <batt> <arrival_t>
//   !!! clock <t>                       advance the station clock
//   !!! silence <t>                     run a silence check
//   !!! watch <node> <last_heard> <interval_s>
//   >>> METHOD /path?query              request
//   <body line>                         optional request body
//   <<< <status> <content-type>         expected response
//   <body line>                         expected body
//
// The fixture station calibrates temperature to [0, 1023] so ADC counts equal
// degrees; humidity and light keep their defaults.

#include <filesystem>
#include <memory>
#include <string>
#include <vector>

#include "greenmon/station.hpp"

namespace greenmon::testing {

struct TranscriptMismatch {
  std::size_t line = 0;
  std::string request;
  std::string expected;
  std::string actual;
};

struct TranscriptResult {
  std::size_t exchanges = 0;
  std::vector<TranscriptMismatch> mismatches;
  bool ok() const { return mismatches.empty() && exchanges > 0; }
};

StationOptions transcript_station_options();

/// Replays `path` over HTTP. When `update` is set, rewrites the expected
/// responses in place with what the server returned.
TranscriptResult replay_transcript(const std::filesystem::path& path, bool update = false);

/// True when GREENMON_UPDATE_GOLDEN=1.
bool update_golden_requested();

/// Sorted list of *.txt transcripts under `dir`.
std::vector<std::filesystem::path> list_transcripts(const std::filesystem::path& dir);

}  // namespace greenmon::testing
