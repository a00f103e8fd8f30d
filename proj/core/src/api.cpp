#include "greenmon/api.hpp"

#include <atomic>
#include <cmath>
#include <charconv>
#include <cstdlib>
#include <stdexcept>
#include <thread>

#include <httplib.h>

#include "greenmon/json_codec.hpp"

namespace greenmon {

namespace {

constexpr std::string_view kPrefix = "/api/v1/";

ApiResponse json_response(int status, const Json& body) { return {status, "application/json", body.dump()}; }

ApiResponse error(int status, const std::string& reason) {
  return json_response(status, Json{{"error", reason}});
}

std::vector<std::string> split_path(std::string_view path) {
  std::vector<std::string> parts;
  std::size_t pos = 0;
  while (pos <= path.size()) {
    const auto slash = path.find('/', pos);
    const auto end = slash == std::string_view::npos ? path.size() : slash;
    if (end > pos) parts.emplace_back(path.substr(pos, end - pos));
    if (slash == std::string_view::npos) break;
    pos = slash + 1;
  }
  return parts;
}

std::optional<double> parse_double(const std::string& s) {
  if (s.empty()) return std::nullopt;
  char* end = nullptr;
  const double v = std::strtod(s.c_str(), &end);
  if (end != s.c_str() + s.size() || !std::isfinite(v)) return std::nullopt;
  return v;
}

std::optional<std::uint64_t> parse_u64(const std::string& s) {
  std::uint64_t v = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size() || s.empty()) return std::nullopt;
  return v;
}

std::optional<Json> parse_body(const std::string& body) {
  try {
    return Json::parse(body);
  } catch (const Json::parse_error&) {
    return std::nullopt;
  }
}

}  // namespace

ApiRouter::ApiRouter(Station& station, FaultRegistry* faults, ReportProvider report)
    : station_(station), faults_(faults), report_(std::move(report)) {}

ApiResponse ApiRouter::handle(const ApiRequest& req) const {
  if (!req.path.starts_with(kPrefix)) return error(404, "unknown_path");
  const auto parts = split_path(std::string_view(req.path).substr(kPrefix.size()));
  const auto& m = req.method;
  const auto allow = [&](const char* method) { return m == method; };
  const auto wrong_method = [] { return error(405, "method_not_allowed"); };

  try {
    if (parts.size() == 1 && parts[0] == "current") return allow("GET") ? current() : wrong_method();
    if (parts.size() == 1 && parts[0] == "history") return allow("GET") ? history(req) : wrong_method();
    if (parts.size() == 1 && parts[0] == "alarms") return allow("GET") ? alarms() : wrong_method();
    if (parts.size() == 3 && parts[0] == "alarms" && parts[2] == "ack") {
      return allow("POST") ? ack(parts[1], req.body) : wrong_method();
    }
    if (parts.size() == 1 && parts[0] == "thresholds") {
      return allow("GET") ? get_thresholds(nullptr) : wrong_method();
    }
    if (parts.size() == 2 && parts[0] == "thresholds") {
      if (allow("GET")) return get_thresholds(&parts[1]);
      if (allow("PUT")) return put_threshold(parts[1], req.body);
      return wrong_method();
    }
    if (parts.size() == 2 && parts[0] == "sim" && parts[1] == "fault") {
      return allow("POST") ? post_fault(req.body) : wrong_method();
    }
    if (parts.size() == 1 && parts[0] == "report") return allow("GET") ? report() : wrong_method();
  } catch (const StoreError&) {
    return error(500, "storage_error");
  }
  return error(404, "unknown_path");
}

ApiResponse ApiRouter::current() const {
  Json out = Json::array();
  for (const auto& r : station_.current()) out.push_back(to_json(r));
  return json_response(200, out);
}

ApiResponse ApiRouter::history(const ApiRequest& req) const {
  const auto param = [&](const char* name) -> const std::string* {
    const auto it = req.query.find(name);
    return it == req.query.end() ? nullptr : &it->second;
  };
  for (const char* name : {"node", "channel", "from", "to", "bucket"}) {
    if (!param(name)) return error(400, std::string("missing_param:") + name);
  }
  const auto node = parse_u64(*param("node"));
  if (!node || *node > 0xFFFF) return error(400, "bad_param:node");
  const auto channel = parse_channel(*param("channel"));
  if (!channel) return error(400, "bad_param:channel");
  const auto from = parse_double(*param("from"));
  if (!from) return error(400, "bad_param:from");
  const auto to = parse_double(*param("to"));
  if (!to) return error(400, "bad_param:to");
  const auto bucket = parse_double(*param("bucket"));
  if (!bucket) return error(400, "bad_param:bucket");

  try {
    Json out = Json::array();
    for (const auto& b : station_.history(SeriesKey{static_cast<NodeId>(*node), *channel}, *from, *to, *bucket)) {
      out.push_back(to_json(b));
    }
    return json_response(200, out);
  } catch (const QueryError& e) {
    return error(400, e.reason());
  }
}

ApiResponse ApiRouter::alarms() const {
  Json out = Json::array();
  for (const auto& a : station_.active_alarms()) out.push_back(to_json(a));
  return json_response(200, out);
}

ApiResponse ApiRouter::ack(const std::string& id_text, const std::string& body) const {
  const auto id = parse_u64(id_text);
  if (!id) return error(404, "not_found");
  const auto j = parse_body(body);
  if (!j || !j->is_object()) return error(400, "malformed_body");
  const auto who = j->find("who");
  if (who == j->end() || !who->is_string()) return error(400, "missing_field:who");
  try {
    return json_response(200, to_json(station_.acknowledge(*id, who->get<std::string>())));
  } catch (const AlarmError& e) {
    return e.kind() == AlarmError::Kind::kNotFound ? error(404, "not_found") : error(409, "invalid_state");
  }
}

ApiResponse ApiRouter::get_thresholds(const std::string* channel) const {
  const auto all = station_.thresholds();
  if (!channel) {
    Json out = Json::array();
    for (const auto& t : all) out.push_back(to_json(t));
    return json_response(200, out);
  }
  const auto c = parse_channel(*channel);
  if (!c) return error(404, "unknown_channel");
  return json_response(200, to_json(all[channel_index(*c)]));
}

ApiResponse ApiRouter::put_threshold(const std::string& channel, const std::string& body) const {
  const auto c = parse_channel(channel);
  if (!c) return error(404, "unknown_channel");
  auto j = parse_body(body);
  if (!j || !j->is_object()) return error(400, "malformed_body");
  if (const auto it = j->find("channel"); it != j->end()) {
    try {
      if (channel_from_json(*it, "channel") != *c) return error(400, "channel_mismatch");
    } catch (const ConfigError&) {
      return error(400, "invalid_threshold:channel");
    }
  } else {
    (*j)["channel"] = channel_code(*c);
  }
  try {
    return json_response(200, to_json(station_.set_threshold(threshold_from_json(*j))));
  } catch (const ConfigError& e) {
    return error(400, "invalid_threshold:" + e.field());
  }
}

ApiResponse ApiRouter::post_fault(const std::string& body) const {
  if (!faults_) return error(409, "no_simulation");
  const auto j = parse_body(body);
  if (!j || !j->is_object()) return error(400, "malformed_body");
  try {
    auto fault = fault_from_json(*j, "", station_.now());
    const auto id = faults_->inject(std::move(fault));
    return json_response(200, Json{{"fault_id", id}});
  } catch (const ConfigError& e) {
    return error(400, "invalid_fault:" + e.field());
  }
}

ApiResponse ApiRouter::report() const {
  Json out{{"virtual_now", station_.now()}};
  if (report_) {
    const Json extra = Json::parse(report_());
    for (const auto& [k, v] : extra.items()) out[k] = v;
  } else {
    Json rejected = Json::object();
    const auto counts = station_.rejected();
    for (std::size_t i = 0; i < kRejectReasonCount; ++i) {
      rejected[std::string(reject_reason_name(static_cast<RejectReason>(i)))] = counts[i];
    }
    Json alarms = Json::object();
    const auto raised = station_.alarms_raised();
    for (std::size_t i = 0; i < kAlarmKindCount; ++i) {
      alarms[std::string(alarm_kind_name(static_cast<AlarmKind>(i)))] = raised[i];
    }
    out["rejected_by_reason"] = std::move(rejected);
    out["readings_stored"] = station_.readings_stored();
    out["alarms_by_kind"] = std::move(alarms);
    out["event_log_hash"] = hex64(station_.event_log_hash());
  }
  return json_response(200, out);
}

std::string format_sse_event(const ApiEvent& ev) {
  std::string out = "id: " + std::to_string(ev.event_seq) + "\n";
  out += "event: ";
  out += event_type_name(ev.event_type);
  out += "\ndata: ";
  out += to_json(ev).dump();
  out += "\n\n";
  return out;
}

ApiServerOptions parse_listen_address(const std::string& address) {
  const auto colon = address.rfind(':');
  if (colon == std::string::npos || colon == 0) {
    throw ConfigError("listen_address", "expected host:port");
  }
  const auto port = parse_u64(address.substr(colon + 1));
  if (!port || *port > 65535) throw ConfigError("listen_address", "bad port");
  ApiServerOptions opts;
  opts.host = address.substr(0, colon);
  opts.port = static_cast<int>(*port);
  return opts;
}

struct ApiServer::Impl {
  Impl(Station& st, FaultRegistry* faults, ApiServerOptions opts, ReportProvider report)
      : station(st), router(st, faults, std::move(report)), options(std::move(opts)) {}

  Station& station;
  ApiRouter router;
  ApiServerOptions options;
  httplib::Server server;
  std::thread thread;
  std::atomic<bool> stopping{false};
  int bound_port = -1;

  void install_routes();
  void dispatch(const httplib::Request& req, httplib::Response& res) const;
  void stream(httplib::Response& res);
};

void ApiServer::Impl::dispatch(const httplib::Request& req, httplib::Response& res) const {
  ApiRequest r;
  r.method = req.method;
  r.path = req.path;
  for (const auto& [k, v] : req.params) r.query.emplace(k, v);
  r.body = req.body;
  const auto out = router.handle(r);
  res.status = out.status;
  res.set_content(out.body, out.content_type);
}

void ApiServer::Impl::stream(httplib::Response& res) {
  auto sub = station.events().subscribe();
  res.set_header("Cache-Control", "no-cache");
  res.set_chunked_content_provider(
      "text/event-stream",
      [this, sub, greeted = false](std::size_t, httplib::DataSink& sink) mutable {
        if (!greeted) {
          greeted = true;
          const std::string hello = ": connected\n\n";
          return sink.write(hello.data(), hello.size());
        }
        // Wait in short slices so shutdown is not held up by a quiet stream.
        const auto deadline = std::chrono::steady_clock::now() + options.heartbeat;
        while (!stopping.load()) {
          const auto left = std::chrono::duration_cast<std::chrono::milliseconds>(
              deadline - std::chrono::steady_clock::now());
          if (left.count() <= 0) {
            const std::string beat = ": keepalive\n\n";
            return sink.write(beat.data(), beat.size());
          }
          if (auto ev = sub->next(std::min(left, std::chrono::milliseconds(100)))) {
            const auto msg = format_sse_event(*ev);
            return sink.write(msg.data(), msg.size());
          }
          if (sub->closed()) break;
        }
        return false;
      },
      [this, sub](bool) { station.events().unsubscribe(sub); });
}

void ApiServer::Impl::install_routes() {
  server.Get("/api/v1/stream",
             [this](const httplib::Request&, httplib::Response& res) { stream(res); });
  const auto handler = [this](const httplib::Request& req, httplib::Response& res) { dispatch(req, res); };
  server.Get(".*", handler);
  server.Post(".*", handler);
  server.Put(".*", handler);
  server.Delete(".*", handler);
  server.Patch(".*", handler);
}

ApiServer::ApiServer(Station& station, FaultRegistry* faults, ApiServerOptions options,
                     ReportProvider report)
    : impl_(std::make_unique<Impl>(station, faults, std::move(options), std::move(report))) {
  impl_->install_routes();
}

ApiServer::~ApiServer() { stop(); }

int ApiServer::start() {
  auto& s = *impl_;
  if (s.options.port == 0) {
    s.bound_port = s.server.bind_to_any_port(s.options.host);
  } else if (s.server.bind_to_port(s.options.host, s.options.port)) {
    s.bound_port = s.options.port;
  }
  if (s.bound_port <= 0) {
    throw std::runtime_error("cannot bind " + s.options.host + ":" + std::to_string(s.options.port));
  }
  s.thread = std::thread([&s] { s.server.listen_after_bind(); });
  s.server.wait_until_ready();
  return s.bound_port;
}

void ApiServer::stop() {
  if (!impl_) return;
  impl_->stopping = true;
  impl_->server.stop();
  if (impl_->thread.joinable()) impl_->thread.join();
}

int ApiServer::port() const { return impl_->bound_port; }

}  // namespace greenmon
