#pragma once

// Session-scoped HTTP API for the operator console. Sessions live in memory
// only. A run request on a session that is already running is rejected with
// 409 rather than queued.
//
//   POST   /sessions                      PGM body      -> {"session_id": ...}
//   GET    /sessions/{id}                               -> status
//   POST   /sessions/{id}/run             config JSON   -> report JSON
//   GET    /sessions/{id}/report                        -> latest report JSON
//   GET    /sessions/{id}/stages/{name}                 -> PGM/PPM body
//   DELETE /sessions/{id}
//
// `?timings=0` on run/report omits stage_timings_ms.

#include <atomic>
#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <random>
#include <string>

#include "httplib.h"
#include "smear/json_io.hpp"
#include "smear/netpbm.hpp"
#include "smear/pipeline.hpp"

namespace smear {

struct ServiceResponse {
  int status = 200;
  std::string body;
  std::string content_type = "application/json";
};

class SessionStore {
public:
  SessionStore() = default;
  /// `defaults` is used for run requests with an empty body.
  explicit SessionStore(PipelineConfig defaults) : defaults_(std::move(defaults)) {}

  ServiceResponse create(const std::string& pgm_body) {
    GrayImage img;
    try {
      img = load_pgm(std::span(reinterpret_cast<const std::uint8_t*>(pgm_body.data()), pgm_body.size()));
    } catch (const ParseError& e) {
      return error(400, "bad_image", e.what());
    }
    auto session = std::make_shared<Session>();
    session->image = std::move(img);
    std::string id;
    {
      std::lock_guard lock(mutex_);
      id = next_id();
      sessions_[id] = session;
    }
    return {201, Json{{"session_id", id}}.dump()};
  }

  ServiceResponse status(const std::string& id) {
    auto s = find(id);
    if (!s) return unknown(id);
    std::lock_guard lock(s->state_mutex);
    Json body{{"session_id", id},
              {"width", s->image.width()},
              {"height", s->image.height()},
              {"running", s->running.load()},
              {"status", s->result ? "done" : (s->last_error ? "error" : "no run yet")}};
    if (s->last_error) body["error"] = *s->last_error;
    return {200, body.dump()};
  }

  ServiceResponse run(const std::string& id, const std::string& config_body, ReportFormat fmt = {}) {
    auto s = find(id);
    if (!s) return unknown(id);
    PipelineConfig cfg = defaults_;
    try {
      if (config_body.find_first_not_of(" \t\r\n") != std::string::npos) cfg = config_from_string(config_body);
    } catch (const ConfigError& e) {
      return error(400, "bad_config", e.what());
    }
    std::unique_lock run_lock(s->run_mutex, std::try_to_lock);
    if (!run_lock.owns_lock()) return error(409, "busy", "a run is already in progress for this session");
    s->running = true;
    struct Reset {
      std::atomic<bool>& flag;
      ~Reset() { flag = false; }
    } reset{s->running};
    try {
      auto result = std::make_shared<const PipelineResult>(run_pipeline(s->image, cfg));
      std::lock_guard lock(s->state_mutex);
      s->result = result;
      s->last_error.reset();
      return {200, report_to_string(result->report, fmt)};
    } catch (const StageError& e) {
      std::lock_guard lock(s->state_mutex);
      s->last_error = e.what();
      Json body{{"error", "stage_failed"}, {"stage", e.stage()}, {"reason", e.what()}};
      return {422, body.dump()};
    }
  }

  ServiceResponse report(const std::string& id, ReportFormat fmt = {}) {
    auto s = find(id);
    if (!s) return unknown(id);
    auto result = latest(*s);
    if (!result) return error(404, "no_run", "no run yet");
    return {200, report_to_string(result->report, fmt)};
  }

  ServiceResponse stage(const std::string& id, const std::string& name) {
    auto s = find(id);
    if (!s) return unknown(id);
    if (name == "original") return {200, to_string(save_pgm(s->image)), "image/x-portable-graymap"};
    auto result = latest(*s);
    if (!result) return error(404, "no_run", "no run yet");
    const auto images = result->stage_images();
    const auto it = images.find(name);
    if (it == images.end()) return error(404, "unknown_stage", "no stage named '" + name + "'");
    return {200, to_string(it->second.bytes),
            it->second.extension == "ppm" ? "image/x-portable-pixmap" : "image/x-portable-graymap"};
  }

  ServiceResponse erase(const std::string& id) {
    std::lock_guard lock(mutex_);
    if (sessions_.erase(id) == 0) return unknown(id);
    return {200, Json{{"deleted", id}}.dump()};
  }

  std::size_t size() const {
    std::lock_guard lock(mutex_);
    return sessions_.size();
  }

private:
  struct Session {
    GrayImage image;
    std::mutex run_mutex;    // held for the duration of a run
    std::mutex state_mutex;  // guards result / last_error
    std::atomic<bool> running{false};
    std::shared_ptr<const PipelineResult> result;
    std::optional<std::string> last_error;
  };

  static ServiceResponse error(int status, const std::string& code, const std::string& reason) {
    return {status, Json{{"error", code}, {"reason", reason}}.dump()};
  }
  static ServiceResponse unknown(const std::string& id) { return error(404, "unknown_session", "no session '" + id + "'"); }
  static std::string to_string(const Bytes& b) { return std::string(b.begin(), b.end()); }

  std::shared_ptr<Session> find(const std::string& id) {
    std::lock_guard lock(mutex_);
    const auto it = sessions_.find(id);
    return it == sessions_.end() ? nullptr : it->second;
  }
  static std::shared_ptr<const PipelineResult> latest(Session& s) {
    std::lock_guard lock(s.state_mutex);
    return s.result;
  }
  std::string next_id() {
    static constexpr char hex[] = "0123456789abcdef";
    std::string id;
    do {
      std::uint64_t v = rng_();
      id.clear();
      for (int i = 0; i < 16; ++i, v >>= 4) id.push_back(hex[v & 0xf]);
    } while (sessions_.count(id) != 0);
    return id;
  }

  PipelineConfig defaults_;
  mutable std::mutex mutex_;
  std::map<std::string, std::shared_ptr<Session>> sessions_;
  std::mt19937_64 rng_{std::random_device{}()};
};

inline ReportFormat report_format_of(const httplib::Request& req) {
  ReportFormat fmt;
  if (req.has_param("timings")) fmt.timings = req.get_param_value("timings") != "0";
  return fmt;
}

inline void register_routes(httplib::Server& server, SessionStore& store) {
  auto send = [](httplib::Response& res, const ServiceResponse& r) {
    res.status = r.status;
    res.set_content(r.body, r.content_type);
  };
  server.Post("/sessions", [&store, send](const httplib::Request& req, httplib::Response& res) {
    send(res, store.create(req.body));
  });
  server.Get(R"(/sessions/([^/]+))", [&store, send](const httplib::Request& req, httplib::Response& res) {
    send(res, store.status(req.matches[1]));
  });
  server.Post(R"(/sessions/([^/]+)/run)", [&store, send](const httplib::Request& req, httplib::Response& res) {
    send(res, store.run(req.matches[1], req.body, report_format_of(req)));
  });
  server.Get(R"(/sessions/([^/]+)/report)", [&store, send](const httplib::Request& req, httplib::Response& res) {
    send(res, store.report(req.matches[1], report_format_of(req)));
  });
  server.Get(R"(/sessions/([^/]+)/stages/([A-Za-z0-9_\-]+))",
             [&store, send](const httplib::Request& req, httplib::Response& res) {
               send(res, store.stage(req.matches[1], req.matches[2]));
             });
  server.Delete(R"(/sessions/([^/]+))", [&store, send](const httplib::Request& req, httplib::Response& res) {
    send(res, store.erase(req.matches[1]));
  });
  server.set_default_headers({{"Access-Control-Allow-Origin", "*"}});
  server.Options(R"(.*)", [](const httplib::Request&, httplib::Response& res) {
    res.set_header("Access-Control-Allow-Methods", "GET, POST, DELETE, OPTIONS");
    res.set_header("Access-Control-Allow-Headers", "Content-Type");
    res.status = 204;
  });
}

/// Blocks serving the API on `host:port` until the server is stopped.
inline bool serve(const PipelineConfig& defaults, int port, const std::string& host = "127.0.0.1") {
  httplib::Server server;
  SessionStore store(defaults);
  register_routes(server, store);
  return server.listen(host, port);
}

}  // namespace smear
