#include "greenmon/json_codec.hpp"

#include <cinttypes>
#include <cstdio>

namespace greenmon {

namespace {

template <typename T>
Json optional_json(const std::optional<T>& v) {
  return v ? Json(*v) : Json(nullptr);
}

std::string field_name(const std::string& where, const char* key) {
  return where.empty() ? std::string(key) : where + "." + key;
}

const Json* find(const Json& j, const char* key) {
  if (!j.is_object()) return nullptr;
  const auto it = j.find(key);
  return it == j.end() ? nullptr : &*it;
}

double number(const Json& j, const char* key, const std::string& where, std::optional<double> def) {
  const Json* v = find(j, key);
  if (!v || v->is_null()) {
    if (def) return *def;
    throw ConfigError(field_name(where, key), "required");
  }
  if (!v->is_number()) throw ConfigError(field_name(where, key), "must be a number");
  return v->get<double>();
}

std::uint64_t unsigned_number(const Json& j, const char* key, const std::string& where,
                              std::optional<std::uint64_t> def, std::uint64_t max) {
  const Json* v = find(j, key);
  if (!v || v->is_null()) {
    if (def) return *def;
    throw ConfigError(field_name(where, key), "required");
  }
  if (!v->is_number_unsigned() || v->get<std::uint64_t>() > max) {
    throw ConfigError(field_name(where, key), "must be an integer in [0, " + std::to_string(max) + "]");
  }
  return v->get<std::uint64_t>();
}

void require_object(const Json& j, const std::string& where) {
  if (!j.is_object()) throw ConfigError(where, "must be an object");
}

}  // namespace

std::string hex64(std::uint64_t v) {
  char buf[19];
  std::snprintf(buf, sizeof(buf), "0x%016" PRIx64, v);
  return buf;
}

Json to_json(const Reading& r) {
  return Json{{"node_id", r.node_id},     {"channel", channel_code(r.channel)},
              {"value", r.value},         {"sample_t", r.sample_t},
              {"arrival_t", r.arrival_t}, {"seq", r.seq},
              {"battery_pct", r.battery_pct}};
}

Json to_json(const Alarm& a) {
  return Json{{"alarm_id", a.alarm_id},
              {"kind", alarm_kind_name(a.kind)},
              {"node_id", a.node_id},
              {"channel", a.channel ? Json(channel_code(*a.channel)) : Json(nullptr)},
              {"raised_t", a.raised_t},
              {"state", alarm_state_name(a.state)},
              {"peak_value", a.peak_value},
              {"ack_by", optional_json(a.ack_by)},
              {"ack_t", optional_json(a.ack_t)},
              {"cleared_t", optional_json(a.cleared_t)}};
}

Json to_json(const Bucket& b) {
  Json j{{"start_t", b.start_t}, {"end_t", b.end_t}, {"count", b.count}};
  if (b.count > 0) {
    j["min"] = *b.min;
    j["max"] = *b.max;
    j["avg"] = *b.avg;
  }
  return j;
}

Json to_json(const ThresholdConfig& c) {
  return Json{{"channel", channel_code(c.channel)}, {"min_ok", c.min_ok},
              {"max_ok", c.max_ok},                 {"rate_limit", c.rate_limit},
              {"hysteresis", c.hysteresis},         {"clear_count", c.clear_count}};
}

Json to_json(const FaultEvent& f) {
  return Json{{"fault_id", f.fault_id},   {"channel", channel_code(f.channel)},
              {"kind", fault_kind_name(f.kind)}, {"start_t", f.start_t},
              {"duration_s", f.duration_s}, {"magnitude", f.magnitude}};
}

Json to_json(const EnvSignalSpec& s) {
  return Json{{"channel", channel_code(s.channel)}, {"base", s.base},
              {"amplitude", s.amplitude},           {"period_s", s.period_s},
              {"phase_s", s.phase_s},               {"noise_sigma", s.noise_sigma}};
}

Json to_json(const RadioParams& p) {
  return Json{{"loss_prob", p.loss_prob},
              {"dup_prob", p.dup_prob},
              {"latency_ms", p.latency_ms},
              {"seed", p.seed}};
}

Json to_json(const ApiEvent& e) {
  Json payload = std::visit([](const auto& p) { return to_json(p); }, e.payload);
  return Json{{"event_type", event_type_name(e.event_type)},
              {"event_seq", e.event_seq},
              {"payload", std::move(payload)}};
}

Channel channel_from_json(const Json& j, const std::string& field) {
  std::optional<Channel> c;
  if (j.is_number_unsigned()) {
    c = channel_from_code(static_cast<int>(std::min<std::uint64_t>(j.get<std::uint64_t>(), 255)));
  } else if (j.is_string()) {
    c = parse_channel(j.get<std::string>());
  }
  if (!c) throw ConfigError(field, "unknown channel");
  return *c;
}

ThresholdConfig threshold_from_json(const Json& j, const std::string& where) {
  require_object(j, where);
  const Json* ch = find(j, "channel");
  if (!ch) throw ConfigError(field_name(where, "channel"), "required");
  ThresholdConfig cfg = default_thresholds(channel_from_json(*ch, field_name(where, "channel")));
  cfg.min_ok = number(j, "min_ok", where, cfg.min_ok);
  cfg.max_ok = number(j, "max_ok", where, cfg.max_ok);
  cfg.rate_limit = number(j, "rate_limit", where, cfg.rate_limit);
  cfg.hysteresis = number(j, "hysteresis", where, cfg.hysteresis);
  cfg.clear_count = static_cast<std::uint32_t>(
      unsigned_number(j, "clear_count", where, cfg.clear_count, UINT32_MAX));
  try {
    cfg.validate();
  } catch (const ConfigError& e) {
    throw ConfigError(field_name(where, e.field().c_str()), "violates threshold invariants");
  }
  return cfg;
}

FaultEvent fault_from_json(const Json& j, const std::string& where, VirtualTime default_start) {
  require_object(j, where);
  FaultEvent f;
  if (const Json* id = find(j, "fault_id"); id && !id->is_null()) {
    if (!id->is_string()) throw ConfigError(field_name(where, "fault_id"), "must be a string");
    f.fault_id = id->get<std::string>();
  }
  const Json* ch = find(j, "channel");
  if (!ch) throw ConfigError(field_name(where, "channel"), "required");
  f.channel = channel_from_json(*ch, field_name(where, "channel"));
  const Json* kind = find(j, "kind");
  if (!kind || !kind->is_string()) throw ConfigError(field_name(where, "kind"), "required string");
  const auto k = parse_fault_kind(kind->get<std::string>());
  if (!k) throw ConfigError(field_name(where, "kind"), "must be step, ramp or spike");
  f.kind = *k;
  f.start_t = number(j, "start_t", where, default_start);
  f.duration_s = number(j, "duration_s", where, std::nullopt);
  f.magnitude = number(j, "magnitude", where, std::nullopt);
  if (!(f.duration_s > 0.0)) throw ConfigError(field_name(where, "duration_s"), "must be > 0");
  if (!(f.start_t >= 0.0)) throw ConfigError(field_name(where, "start_t"), "must be >= 0");
  return f;
}

EnvSignalSpec signal_from_json(const Json& j, const std::string& where) {
  require_object(j, where);
  const Json* ch = find(j, "channel");
  if (!ch) throw ConfigError(field_name(where, "channel"), "required");
  EnvSignalSpec s = default_signal(channel_from_json(*ch, field_name(where, "channel")));
  s.base = number(j, "base", where, s.base);
  s.amplitude = number(j, "amplitude", where, s.amplitude);
  s.period_s = number(j, "period_s", where, s.period_s);
  s.phase_s = number(j, "phase_s", where, s.phase_s);
  s.noise_sigma = number(j, "noise_sigma", where, s.noise_sigma);
  try {
    s.validate();
  } catch (const ConfigError& e) {
    throw ConfigError(where.empty() ? e.field() : where, e.what());
  }
  return s;
}

RadioParams radio_from_json(const Json& j, const std::string& where) {
  require_object(j, where);
  RadioParams p;
  p.loss_prob = number(j, "loss_prob", where, p.loss_prob);
  p.dup_prob = number(j, "dup_prob", where, p.dup_prob);
  p.latency_ms = number(j, "latency_ms", where, p.latency_ms);
  p.seed = unsigned_number(j, "seed", where, p.seed, UINT64_MAX);
  p.validate();
  return p;
}

}  // namespace greenmon
