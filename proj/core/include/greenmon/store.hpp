#pragma once

// Append-only time-series store backed by a newline-delimited log.
//
// Each line is one JSON object with a fixed field order:
//   {"record_id":N,"node_id":N,"channel":N,"value":X,"sample_t":X,"arrival_t":X,"seq":N,"battery_pct":N}
// Doubles are written in shortest round-trip form, so a reload reproduces
// values bit-exactly. An unterminated final line is a torn write: it is
// dropped on load, counted, and cut from the file before the next append.

#include <compare>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <shared_mutex>
#include <stdexcept>
#include <string>
#include <vector>

#include "greenmon/gateway.hpp"

namespace greenmon {

struct SeriesKey {
  NodeId node_id = 0;
  Channel channel = Channel::kTemperature;

  auto operator<=>(const SeriesKey&) const = default;
};

struct StoreRecord {
  std::uint64_t record_id = 0;
  Reading reading;

  bool operator==(const StoreRecord&) const = default;
};

/// Half-open [start_t, end_t). Stats are absent when count == 0.
struct Bucket {
  VirtualTime start_t = 0.0;
  VirtualTime end_t = 0.0;
  std::uint64_t count = 0;
  std::optional<double> min;
  std::optional<double> max;
  std::optional<double> avg;

  bool operator==(const Bucket&) const = default;
};

/// Write failures and corrupt log files.
class StoreError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Invalid query parameters. `reason` is a short machine-readable tag.
class QueryError : public std::invalid_argument {
 public:
  QueryError(std::string reason, const std::string& message)
      : std::invalid_argument(message), reason_(std::move(reason)) {}
  const std::string& reason() const { return reason_; }

 private:
  std::string reason_;
};

/// Serializes one record to its log line (without the trailing newline).
std::string format_record_line(const StoreRecord& rec);
/// Throws StoreError on malformed input.
StoreRecord parse_record_line(std::string_view line);

/// Single writer, many readers.
class Store {
 public:
  /// In-memory store with no backing file.
  Store();
  /// Opens (creating if needed) the log at `path` and rebuilds the index.
  /// Throws StoreError identifying the first bad line of a corrupt file.
  explicit Store(const std::filesystem::path& path);

  Store(const Store&) = delete;
  Store& operator=(const Store&) = delete;

  /// Returns a record id strictly greater than every earlier one.
  std::uint64_t append(const Reading& reading);
  /// After flush() returns, every appended record is on disk.
  void flush();

  /// sample_t in [t0, t1), ordered by (sample_t, record_id).
  std::vector<StoreRecord> query_range(const SeriesKey& key, VirtualTime t0, VirtualTime t1) const;
  std::vector<Bucket> aggregate(const SeriesKey& key, VirtualTime t0, VirtualTime t1,
                                double bucket_s) const;
  /// Max sample_t, ties to the highest record_id.
  std::optional<StoreRecord> latest(const SeriesKey& key) const;

  std::vector<SeriesKey> series() const;
  std::size_t size() const;
  /// Torn trailing lines dropped while loading.
  std::size_t load_warnings() const { return load_warnings_; }
  const std::filesystem::path& path() const { return path_; }

 private:
  void load();
  void index(std::size_t pos);

  std::filesystem::path path_;
  std::ofstream out_;
  mutable std::shared_mutex mu_;
  std::vector<StoreRecord> records_;
  std::map<SeriesKey, std::vector<std::size_t>> index_;
  std::uint64_t next_id_ = 1;
  std::size_t load_warnings_ = 0;
};

}  // namespace greenmon
