#include "greenmon/store.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <iterator>
#include <mutex>

#include <nlohmann/json.hpp>

namespace greenmon {

namespace {

constexpr std::size_t kMaxBuckets = 1'000'000;

void append_double(std::string& out, double v) {
  char buf[32];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  out.append(buf, ptr);
}

template <typename T>
T checked_uint(const nlohmann::json& j, const char* field, std::uint64_t max) {
  const auto& v = j.at(field);
  if (!v.is_number_unsigned() || v.get<std::uint64_t>() > max) {
    throw StoreError(std::string("field ") + field + " out of range");
  }
  return static_cast<T>(v.get<std::uint64_t>());
}

double checked_double(const nlohmann::json& j, const char* field) {
  const auto& v = j.at(field);
  if (!v.is_number()) throw StoreError(std::string("field ") + field + " is not a number");
  return v.get<double>();
}

}  // namespace

std::string format_record_line(const StoreRecord& rec) {
  const auto& r = rec.reading;
  std::string out;
  out.reserve(160);
  out += "{\"record_id\":";
  out += std::to_string(rec.record_id);
  out += ",\"node_id\":";
  out += std::to_string(r.node_id);
  out += ",\"channel\":";
  out += std::to_string(channel_code(r.channel));
  out += ",\"value\":";
  append_double(out, r.value);
  out += ",\"sample_t\":";
  append_double(out, r.sample_t);
  out += ",\"arrival_t\":";
  append_double(out, r.arrival_t);
  out += ",\"seq\":";
  out += std::to_string(r.seq);
  out += ",\"battery_pct\":";
  out += std::to_string(r.battery_pct);
  out += '}';
  return out;
}

StoreRecord parse_record_line(std::string_view line) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(line);
  } catch (const nlohmann::json::parse_error& e) {
    throw StoreError(std::string("malformed record: ") + e.what());
  }
  if (!j.is_object()) throw StoreError("record is not an object");
  try {
    StoreRecord rec;
    rec.record_id = checked_uint<std::uint64_t>(j, "record_id", UINT64_MAX);
    rec.reading.node_id = checked_uint<NodeId>(j, "node_id", 0xFFFF);
    const auto channel = channel_from_code(checked_uint<int>(j, "channel", 0xFF));
    if (!channel) throw StoreError("unknown channel code");
    rec.reading.channel = *channel;
    rec.reading.value = checked_double(j, "value");
    rec.reading.sample_t = checked_double(j, "sample_t");
    rec.reading.arrival_t = checked_double(j, "arrival_t");
    rec.reading.seq = checked_uint<std::uint16_t>(j, "seq", 0xFFFF);
    rec.reading.battery_pct = checked_uint<std::uint8_t>(j, "battery_pct", 100);
    return rec;
  } catch (const nlohmann::json::out_of_range& e) {
    throw StoreError(std::string("missing field: ") + e.what());
  }
}

Store::Store() = default;

Store::Store(const std::filesystem::path& path) : path_(path) {
  load();
  out_.open(path_, std::ios::binary | std::ios::app);
  if (!out_) throw StoreError("cannot open store for append: " + path_.string());
}

void Store::load() {
  std::error_code ec;
  if (!std::filesystem::exists(path_, ec)) return;
  std::ifstream in(path_, std::ios::binary);
  if (!in) throw StoreError("cannot read store: " + path_.string());
  const std::string data{std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
  in.close();

  std::size_t pos = 0;
  std::size_t line_no = 0;
  std::size_t good_end = 0;
  while (pos < data.size()) {
    const auto nl = data.find('\n', pos);
    ++line_no;
    if (nl == std::string::npos) {
      // Torn final write.
      ++load_warnings_;
      break;
    }
    const std::string_view line(data.data() + pos, nl - pos);
    if (!line.empty()) {
      StoreRecord rec;
      try {
        rec = parse_record_line(line);
      } catch (const StoreError& e) {
        throw StoreError(path_.string() + ": line " + std::to_string(line_no) + ": " + e.what());
      }
      if (rec.record_id < next_id_) {
        throw StoreError(path_.string() + ": line " + std::to_string(line_no) +
                         ": record_id not increasing");
      }
      next_id_ = rec.record_id + 1;
      records_.push_back(rec);
      index(records_.size() - 1);
    }
    pos = nl + 1;
    good_end = pos;
  }
  if (good_end < data.size()) std::filesystem::resize_file(path_, good_end);
}

void Store::index(std::size_t pos) {
  auto& positions = index_[SeriesKey{records_[pos].reading.node_id, records_[pos].reading.channel}];
  const double t = records_[pos].reading.sample_t;
  // Ids only grow, so inserting after every equal sample_t keeps record_id order.
  const auto it = std::upper_bound(positions.begin(), positions.end(), t,
                                   [&](double v, std::size_t p) { return v < records_[p].reading.sample_t; });
  positions.insert(it, pos);
}

std::uint64_t Store::append(const Reading& reading) {
  std::unique_lock lock(mu_);
  StoreRecord rec{next_id_, reading};
  if (out_.is_open()) {
    out_ << format_record_line(rec) << '\n';
    if (!out_) throw StoreError("write failed: " + path_.string());
  }
  ++next_id_;
  records_.push_back(rec);
  index(records_.size() - 1);
  return rec.record_id;
}

void Store::flush() {
  std::unique_lock lock(mu_);
  if (!out_.is_open()) return;
  out_.flush();
  if (!out_) throw StoreError("flush failed: " + path_.string());
}

std::vector<StoreRecord> Store::query_range(const SeriesKey& key, VirtualTime t0,
                                            VirtualTime t1) const {
  if (t0 > t1) throw QueryError("from_after_to", "t0 must not exceed t1");
  std::shared_lock lock(mu_);
  std::vector<StoreRecord> out;
  const auto it = index_.find(key);
  if (it == index_.end()) return out;
  const auto& positions = it->second;
  const auto by_time = [&](std::size_t p, double v) { return records_[p].reading.sample_t < v; };
  auto first = std::lower_bound(positions.begin(), positions.end(), t0, by_time);
  const auto last = std::lower_bound(first, positions.end(), t1, by_time);
  for (; first != last; ++first) out.push_back(records_[*first]);
  return out;
}

std::vector<Bucket> Store::aggregate(const SeriesKey& key, VirtualTime t0, VirtualTime t1,
                                     double bucket_s) const {
  if (!(bucket_s > 0.0) || !std::isfinite(bucket_s)) {
    throw QueryError("bad_bucket", "bucket width must be > 0");
  }
  if (t0 > t1) throw QueryError("from_after_to", "t0 must not exceed t1");
  const double n_exact = std::ceil((t1 - t0) / bucket_s);
  if (n_exact > static_cast<double>(kMaxBuckets)) {
    throw QueryError("too_many_buckets", "interval / bucket width is too large");
  }
  auto n = static_cast<std::size_t>(n_exact);
  const auto start_of = [&](std::size_t i) { return t0 + static_cast<double>(i) * bucket_s; };
  while (n > 0 && start_of(n - 1) >= t1) --n;

  std::vector<Bucket> buckets(n);
  std::vector<double> sums(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    buckets[i].start_t = start_of(i);
    buckets[i].end_t = i + 1 < n ? start_of(i + 1) : t1;
  }
  for (const auto& rec : query_range(key, t0, t1)) {
    const double v = rec.reading.value;
    const double s = rec.reading.sample_t;
    auto i = static_cast<std::size_t>(
        std::clamp(std::floor((s - t0) / bucket_s), 0.0, static_cast<double>(n - 1)));
    while (i > 0 && s < buckets[i].start_t) --i;
    while (i + 1 < n && s >= buckets[i].end_t) ++i;
    auto& b = buckets[i];
    b.min = b.count == 0 ? v : std::min(*b.min, v);
    b.max = b.count == 0 ? v : std::max(*b.max, v);
    ++b.count;
    sums[i] += v;
  }
  for (std::size_t i = 0; i < n; ++i) {
    auto& b = buckets[i];
    if (b.count > 0) b.avg = std::clamp(sums[i] / static_cast<double>(b.count), *b.min, *b.max);
  }
  return buckets;
}

std::optional<StoreRecord> Store::latest(const SeriesKey& key) const {
  std::shared_lock lock(mu_);
  const auto it = index_.find(key);
  if (it == index_.end() || it->second.empty()) return std::nullopt;
  return records_[it->second.back()];
}

std::vector<SeriesKey> Store::series() const {
  std::shared_lock lock(mu_);
  std::vector<SeriesKey> out;
  out.reserve(index_.size());
  for (const auto& [k, _] : index_) out.push_back(k);
  return out;
}

std::size_t Store::size() const {
  std::shared_lock lock(mu_);
  return records_.size();
}

}  // namespace greenmon
