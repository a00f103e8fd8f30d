#include "greenmon/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <set>

namespace greenmon {

namespace {

constexpr double kMaxDuration = 4294967295.0;  // sample_t is 32-bit on air

const std::set<std::string> kTopLevelFields = {
    "seed",        "duration_s", "speedup",        "nodes",          "radio",
    "env",         "thresholds", "calibration",    "faults",         "store_path",
    "listen_address", "trace_path", "quarantine_path", "dedup_window", "silent_after"};

const Json* find(const Json& j, const char* key) {
  const auto it = j.find(key);
  return it == j.end() || it->is_null() ? nullptr : &*it;
}

double number_or(const Json& j, const char* key, double def) {
  const Json* v = find(j, key);
  if (!v) return def;
  if (!v->is_number()) throw ConfigError(key, "must be a number");
  return v->get<double>();
}

std::uint64_t unsigned_or(const Json& j, const char* key, std::uint64_t def, const std::string& field) {
  const Json* v = find(j, key);
  if (!v) return def;
  if (!v->is_number_unsigned()) throw ConfigError(field, "must be a non-negative integer");
  return v->get<std::uint64_t>();
}

std::string string_or(const Json& j, const char* key, std::string def) {
  const Json* v = find(j, key);
  if (!v) return def;
  if (!v->is_string()) throw ConfigError(key, "must be a string");
  return v->get<std::string>();
}

const Json& array_field(const Json& j, const char* key) {
  static const Json kEmpty = Json::array();
  const Json* v = find(j, key);
  if (!v) return kEmpty;
  if (!v->is_array()) throw ConfigError(key, "must be an array");
  return *v;
}

NodeSpec node_from_json(const Json& j, const std::string& where) {
  if (!j.is_object()) throw ConfigError(where, "must be an object");
  NodeSpec n;
  const auto id = unsigned_or(j, "node_id", 0, where + ".node_id");
  if (id == 0 || id > 0xFFFF) throw ConfigError("nodes", where + ".node_id must be in [1, 65535]");
  n.node_id = static_cast<NodeId>(id);
  n.location = string_or(j, "location", "");
  const auto interval = unsigned_or(j, "sampling_interval_s", 30, where + ".sampling_interval_s");
  if (interval == 0 || interval > UINT32_MAX) {
    throw ConfigError(where + ".sampling_interval_s", "must be a positive integer");
  }
  n.sampling_interval_s = static_cast<std::uint32_t>(interval);
  n.battery_pct = number_or(j, "battery_pct", 100.0);
  n.drain_per_packet = number_or(j, "drain_per_packet", 0.01);
  return n;
}

}  // namespace

void ScenarioConfig::validate() const {
  if (!(duration_s >= 0.0) || duration_s > kMaxDuration) {
    throw ConfigError("duration_s", "must be in [0, 2^32 - 1]");
  }
  if (!(speedup >= 0.0) || !std::isfinite(speedup)) throw ConfigError("speedup", "must be >= 0");
  std::set<NodeId> ids;
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    const auto& n = nodes[i];
    const std::string where = "nodes[" + std::to_string(i) + "]";
    if (n.node_id == 0) throw ConfigError("nodes", where + ".node_id 0 is reserved for the sink");
    if (!ids.insert(n.node_id).second) {
      throw ConfigError("nodes", "duplicate node_id " + std::to_string(n.node_id));
    }
    if (n.sampling_interval_s == 0) throw ConfigError(where + ".sampling_interval_s", "must be > 0");
    if (!(n.battery_pct >= 0.0 && n.battery_pct <= 100.0)) {
      throw ConfigError(where + ".battery_pct", "must be in [0, 100]");
    }
    if (!(n.drain_per_packet >= 0.0) || !std::isfinite(n.drain_per_packet)) {
      throw ConfigError(where + ".drain_per_packet", "must be >= 0");
    }
  }
  radio.validate();
  std::set<Channel> env_channels;
  for (const auto& s : env) {
    s.validate();
    if (!env_channels.insert(s.channel).second) {
      throw ConfigError("env", "duplicate channel " + std::string(channel_name(s.channel)));
    }
  }
  for (const auto& t : thresholds) t.validate();
  for (const auto& f : faults) {
    if (!(f.duration_s > 0.0)) throw ConfigError("faults.duration_s", "must be > 0");
    if (!(f.start_t >= 0.0)) throw ConfigError("faults.start_t", "must be >= 0");
  }
  if (dedup_window == 0) throw ConfigError("dedup_window", "must be >= 1");
  if (!(silent_after > 0.0) || !std::isfinite(silent_after)) {
    throw ConfigError("silent_after", "must be > 0");
  }
}

ScenarioConfig parse_config(const Json& j) {
  if (!j.is_object()) throw ConfigError("", "scenario must be a JSON object");
  for (const auto& [key, _] : j.items()) {
    if (!kTopLevelFields.contains(key)) throw ConfigError(key, "unknown field");
  }

  ScenarioConfig cfg;
  cfg.seed = unsigned_or(j, "seed", 0, "seed");
  cfg.duration_s = number_or(j, "duration_s", 0.0);
  cfg.speedup = number_or(j, "speedup", 0.0);

  const auto& nodes = array_field(j, "nodes");
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    cfg.nodes.push_back(node_from_json(nodes[i], "nodes[" + std::to_string(i) + "]"));
  }
  if (const Json* radio = find(j, "radio")) {
    cfg.radio = radio_from_json(*radio, "radio");
    cfg.radio_seed_set = radio->contains("seed");
  }
  const auto& env = array_field(j, "env");
  for (std::size_t i = 0; i < env.size(); ++i) {
    cfg.env.push_back(signal_from_json(env[i], "env[" + std::to_string(i) + "]"));
  }
  const auto& thresholds = array_field(j, "thresholds");
  for (std::size_t i = 0; i < thresholds.size(); ++i) {
    cfg.thresholds.push_back(threshold_from_json(thresholds[i], "thresholds[" + std::to_string(i) + "]"));
  }
  const auto& calibration = array_field(j, "calibration");
  for (std::size_t i = 0; i < calibration.size(); ++i) {
    const std::string where = "calibration[" + std::to_string(i) + "]";
    const auto& c = calibration[i];
    if (!c.is_object() || !c.contains("channel")) throw ConfigError(where + ".channel", "required");
    const Channel ch = channel_from_json(c["channel"], where + ".channel");
    ChannelRange r = cfg.calibration.range(ch);
    r.lo = number_or(c, "lo", r.lo);
    r.hi = number_or(c, "hi", r.hi);
    if (!(r.hi > r.lo)) throw ConfigError(where, "hi must be greater than lo");
    cfg.calibration.set_range(ch, r);
  }
  const auto& faults = array_field(j, "faults");
  for (std::size_t i = 0; i < faults.size(); ++i) {
    cfg.faults.push_back(fault_from_json(faults[i], "faults[" + std::to_string(i) + "]"));
  }
  cfg.store_path = string_or(j, "store_path", "");
  cfg.listen_address = string_or(j, "listen_address", cfg.listen_address);
  cfg.trace_path = string_or(j, "trace_path", "");
  cfg.quarantine_path = string_or(j, "quarantine_path", "");
  cfg.dedup_window = unsigned_or(j, "dedup_window", 64, "dedup_window");
  cfg.silent_after = number_or(j, "silent_after", 3.0);
  cfg.validate();
  return cfg;
}

ScenarioConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) {
    throw ConfigLoadError(ConfigLoadError::Kind::kMissingFile, "",
                          "cannot open config: " + path.string());
  }
  Json j;
  try {
    j = Json::parse(in);
  } catch (const Json::parse_error& e) {
    throw ConfigLoadError(ConfigLoadError::Kind::kParse, "",
                          path.string() + ": parse error: " + e.what());
  }
  try {
    return parse_config(j);
  } catch (const ConfigError& e) {
    throw ConfigLoadError(ConfigLoadError::Kind::kInvalid, e.field(),
                          path.string() + ": " + e.what());
  }
}

Json to_json(const ScenarioConfig& cfg) {
  Json nodes = Json::array();
  for (const auto& n : cfg.nodes) {
    nodes.push_back(Json{{"node_id", n.node_id},
                         {"location", n.location},
                         {"sampling_interval_s", n.sampling_interval_s},
                         {"battery_pct", n.battery_pct},
                         {"drain_per_packet", n.drain_per_packet}});
  }
  Json env = Json::array();
  for (const auto& s : cfg.env) env.push_back(to_json(s));
  Json thresholds = Json::array();
  for (const auto& t : cfg.thresholds) thresholds.push_back(to_json(t));
  Json calibration = Json::array();
  for (Channel c : kAllChannels) {
    calibration.push_back(Json{{"channel", channel_code(c)},
                               {"lo", cfg.calibration.range(c).lo},
                               {"hi", cfg.calibration.range(c).hi}});
  }
  Json faults = Json::array();
  for (const auto& f : cfg.faults) faults.push_back(to_json(f));
  Json radio = to_json(cfg.radio);
  if (!cfg.radio_seed_set) radio.erase("seed");
  return Json{{"seed", cfg.seed},
              {"duration_s", cfg.duration_s},
              {"speedup", cfg.speedup},
              {"nodes", std::move(nodes)},
              {"radio", std::move(radio)},
              {"env", std::move(env)},
              {"thresholds", std::move(thresholds)},
              {"calibration", std::move(calibration)},
              {"faults", std::move(faults)},
              {"store_path", cfg.store_path},
              {"listen_address", cfg.listen_address},
              {"trace_path", cfg.trace_path},
              {"quarantine_path", cfg.quarantine_path},
              {"dedup_window", cfg.dedup_window},
              {"silent_after", cfg.silent_after}};
}

std::uint64_t RunReport::duplicates_rejected() const {
  const auto it = rejected_by_reason.find("duplicate");
  return it == rejected_by_reason.end() ? 0 : it->second;
}

std::uint64_t RunReport::total_rejected() const {
  std::uint64_t n = 0;
  for (const auto& [_, count] : rejected_by_reason) n += count;
  return n;
}

bool RunReport::conservation_holds() const {
  return delivered == readings_stored + total_rejected() &&
         transmitted + duplicated == delivered + lost;
}

Json to_json(const RunReport& r) {
  Json rejected = Json::object();
  for (std::size_t i = 0; i < kRejectReasonCount; ++i) {
    const std::string name(reject_reason_name(static_cast<RejectReason>(i)));
    const auto it = r.rejected_by_reason.find(name);
    rejected[name] = it == r.rejected_by_reason.end() ? 0 : it->second;
  }
  Json alarms = Json::object();
  for (std::size_t i = 0; i < kAlarmKindCount; ++i) {
    const std::string name(alarm_kind_name(static_cast<AlarmKind>(i)));
    const auto it = r.alarms_by_kind.find(name);
    alarms[name] = it == r.alarms_by_kind.end() ? 0 : it->second;
  }
  return Json{{"transmitted", r.transmitted},
              {"delivered", r.delivered},
              {"duplicated", r.duplicated},
              {"lost", r.lost},
              {"rejected_by_reason", std::move(rejected)},
              {"readings_stored", r.readings_stored},
              {"alarms_by_kind", std::move(alarms)},
              {"event_log_hash", hex64(r.event_log_hash)},
              {"degenerate_rate_pairs", r.degenerate_rate_pairs},
              {"duration_s", r.duration_s}};
}

RunReport report_from_json(const Json& j) {
  RunReport r;
  r.transmitted = j.at("transmitted").get<std::uint64_t>();
  r.delivered = j.at("delivered").get<std::uint64_t>();
  r.duplicated = j.at("duplicated").get<std::uint64_t>();
  r.lost = j.at("lost").get<std::uint64_t>();
  for (const auto& [k, v] : j.at("rejected_by_reason").items()) r.rejected_by_reason[k] = v.get<std::uint64_t>();
  r.readings_stored = j.at("readings_stored").get<std::uint64_t>();
  for (const auto& [k, v] : j.at("alarms_by_kind").items()) r.alarms_by_kind[k] = v.get<std::uint64_t>();
  r.event_log_hash = std::stoull(j.at("event_log_hash").get<std::string>(), nullptr, 16);
  r.degenerate_rate_pairs = j.value("degenerate_rate_pairs", std::uint64_t{0});
  r.duration_s = j.value("duration_s", 0.0);
  return r;
}

namespace {

RadioParams effective_radio(const ScenarioConfig& cfg) {
  RadioParams p = cfg.radio;
  if (!cfg.radio_seed_set) p.seed = mix_seed(cfg.seed, 2);
  return p;
}

std::shared_ptr<Store> open_store(const std::string& path) {
  if (path.empty()) return std::make_shared<Store>();
  return std::make_shared<Store>(std::filesystem::path(path));
}

}  // namespace

Simulation::Simulation(const ScenarioConfig& cfg)
    : cfg_(cfg), env_(cfg.env, mix_seed(cfg.seed, 1)), radio_(effective_radio(cfg)) {
  init();
}

Simulation::Simulation(const ScenarioConfig& cfg, TraceContents trace)
    : cfg_(cfg),
      env_(cfg.env, mix_seed(cfg.seed, 1)),
      radio_(effective_radio(cfg)),
      replay_(std::move(trace)) {
  std::stable_sort(replay_->records.begin(), replay_->records.end(),
                   [](const TraceRecord& a, const TraceRecord& b) { return a.t < b.t; });
  init();
}

void Simulation::init() {
  cfg_.validate();
  for (const auto& f : cfg_.faults) env_.faults().inject(f);

  store_ = open_store(cfg_.store_path);
  StationOptions opts;
  opts.calibration = cfg_.calibration;
  opts.dedup_window = cfg_.dedup_window;
  opts.thresholds = cfg_.thresholds;
  opts.silent_after = cfg_.silent_after;
  station_ = std::make_unique<Station>(std::move(opts), store_);
  if (!cfg_.quarantine_path.empty()) {
    station_->set_quarantine(std::make_unique<TraceWriter>(cfg_.quarantine_path));
  }
  if (!cfg_.trace_path.empty() && !replay_) trace_ = std::make_unique<TraceWriter>(cfg_.trace_path);

  for (const auto& spec : cfg_.nodes) {
    auto node = NodeState::create(spec.node_id, spec.location, spec.sampling_interval_s);
    node.battery_pct = spec.battery_pct;
    node.drain_per_packet = spec.drain_per_packet;
    nodes_.push_back(std::move(node));
    station_->watch_node(spec.node_id, 0.0, spec.sampling_interval_s);
  }
  std::sort(nodes_.begin(), nodes_.end(),
            [](const NodeState& a, const NodeState& b) { return a.node_id < b.node_id; });
}

VirtualTime Simulation::next_event_time() const {
  constexpr double kInf = std::numeric_limits<double>::infinity();
  VirtualTime next = radio_.next_arrival();
  if (replay_) {
    if (replay_pos_ < replay_->records.size()) next = std::min(next, replay_->records[replay_pos_].t);
  } else {
    for (const auto& n : nodes_) {
      const double due = n.next_due();
      if (due <= cfg_.duration_s) next = std::min(next, due);
    }
  }
  const double deadline = station_->next_silence_deadline();
  if (deadline < kInf) {
    // First whole second strictly past the deadline.
    const double check = std::max(std::floor(deadline) + 1.0, now_);
    if (check <= cfg_.duration_s) next = std::min(next, check);
  }
  return next;
}

void Simulation::process_at(VirtualTime t) {
  std::lock_guard lock(mu_);
  now_ = t;
  station_->advance_clock(t);

  if (replay_) {
    auto& records = replay_->records;
    while (replay_pos_ < records.size() && records[replay_pos_].t <= t) {
      const auto& rec = records[replay_pos_++];
      if (rec.frame.size() == kPacketSize) {
        radio_.transmit(rec.frame, t);
      } else {
        station_->receive_frame(rec.frame, t);
      }
    }
  } else {
    const EnvSampler sampler = [this](Channel c, VirtualTime at) { return env_.sample(c, at); };
    for (auto& node : nodes_) {
      if (node.next_due() > t) continue;
      for (const auto& packet : node_tick(node, t, sampler, cfg_.calibration)) {
        const auto bytes = encode_packet(packet);
        if (trace_) trace_->write(t, bytes);
        radio_.transmit(bytes, t);
      }
    }
  }

  for (const auto& delivery : radio_.drain_deliveries(t)) station_->receive(delivery);
  if (t <= cfg_.duration_s) station_->check_silence(t);
}

void Simulation::step_to(VirtualTime t) {
  for (VirtualTime next = next_event_time(); std::isfinite(next) && next <= t; next = next_event_time()) {
    process_at(next);
  }
  if (std::isfinite(t) && t > now_) {
    now_ = t;
    station_->advance_clock(t);
  }
}

void Simulation::run_to_end() {
  step_to(cfg_.duration_s);
  step_to(std::numeric_limits<double>::infinity());
  store_->flush();
  if (trace_) trace_->flush();
}

bool Simulation::finished() const {
  return now_ >= cfg_.duration_s && std::isinf(next_event_time());
}

RunReport Simulation::report() const {
  std::lock_guard lock(mu_);
  RunReport r;
  const auto& rc = radio_.counters();
  r.transmitted = rc.transmitted;
  r.delivered = rc.delivered;
  r.duplicated = rc.duplicated;
  r.lost = rc.lost;
  const auto rejected = station_->rejected();
  for (std::size_t i = 0; i < kRejectReasonCount; ++i) {
    r.rejected_by_reason[std::string(reject_reason_name(static_cast<RejectReason>(i)))] = rejected[i];
  }
  // Frames replayed around the radio count as deliveries.
  if (replay_) {
    for (const auto& rec : replay_->records) {
      if (rec.frame.size() != kPacketSize) {
        ++r.transmitted;
        ++r.delivered;
      }
    }
  }
  r.readings_stored = station_->readings_stored();
  const auto raised = station_->alarms_raised();
  for (std::size_t i = 0; i < kAlarmKindCount; ++i) {
    r.alarms_by_kind[std::string(alarm_kind_name(static_cast<AlarmKind>(i)))] = raised[i];
  }
  r.event_log_hash = station_->event_log_hash();
  r.degenerate_rate_pairs = station_->degenerate_rate_pairs();
  r.duration_s = cfg_.duration_s;
  return r;
}

RunReport run_scenario(const ScenarioConfig& cfg) {
  Simulation sim(cfg);
  sim.run_to_end();
  return sim.report();
}

}  // namespace greenmon
