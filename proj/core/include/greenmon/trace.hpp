#pragma once

// Packet trace files. Layout:
//   8-byte magic "GMTRACE1"
//   records: u16 BE frame length | u64 BE IEEE-754 bits of the time | frame bytes
// Transmission traces carry the transmit time; quarantine files carry the
// arrival time of the rejected frame.

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <span>
#include <stdexcept>
#include <vector>

#include "greenmon/channel.hpp"

namespace greenmon {

struct TraceRecord {
  VirtualTime t = 0.0;
  std::vector<std::uint8_t> frame;

  bool operator==(const TraceRecord&) const = default;
};

class TraceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class TraceWriter {
 public:
  /// Truncates any existing file. Throws TraceError if it cannot be opened.
  explicit TraceWriter(const std::filesystem::path& path);

  void write(VirtualTime t, std::span<const std::uint8_t> frame);
  void flush();

 private:
  std::ofstream out_;
};

struct TraceContents {
  std::vector<TraceRecord> records;
  /// Set when the file ended inside a record; that record is dropped.
  bool truncated_tail = false;
};

/// Throws TraceError on a missing file or a bad magic header.
TraceContents read_trace(const std::filesystem::path& path);

}  // namespace greenmon
