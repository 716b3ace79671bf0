#pragma once

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <random>
#include <shared_mutex>
#include <string>

#include "colorfm/io_formats.hpp"

namespace colorfm {

using ServiceClock = std::chrono::steady_clock;

struct ServiceOptions {
  std::chrono::seconds session_ttl = std::chrono::hours(24);
  /// Value for Access-Control-Allow-Origin; empty disables CORS headers.
  std::string allow_origin;
  /// Sessions are written here by snapshot() (serve calls it on shutdown).
  std::optional<std::filesystem::path> snapshot_dir;
  /// Test hook; defaults to ServiceClock::now.
  std::function<ServiceClock::time_point()> clock;
  LoadOptions load;
};

struct HttpRequest {
  std::string method;
  std::string path;
  std::map<std::string, std::string> query;
  std::string body;
};

struct HttpResponse {
  int status = 200;
  std::string content_type = "application/json";
  std::string body;
};

/// Session-based configuration API. Transport independent: `handle` maps a
/// request to a response and is safe to call from many threads. Requests on
/// one session are serialized; models are shared read-only.
class ConfigService {
 public:
  explicit ConfigService(ServiceOptions options = {});
  ~ConfigService();

  HttpResponse handle(const HttpRequest& request);

  /// Registers a model directly (used by `serve --model`). Returns its id.
  std::string add_model(std::string_view document);

  std::size_t session_count() const;
  /// Drops sessions idle for longer than the TTL. Returns how many.
  std::size_t expire_idle();
  /// Writes `<session>.fm` and `<session>.fmconfig` for every live session.
  /// Returns the number of sessions written.
  std::size_t snapshot(const std::filesystem::path& dir) const;

  const ServiceOptions& options() const noexcept { return options_; }

 private:
  struct Model;
  struct Session;

  HttpResponse post_model(const HttpRequest& r);
  HttpResponse post_session(const std::string& model_id);
  HttpResponse get_session(const std::string& sid);
  HttpResponse post_decision(const std::string& sid, const HttpRequest& r);
  HttpResponse post_undo(const std::string& sid);
  HttpResponse get_assets(const std::string& sid);
  HttpResponse get_export(const std::string& sid);
  HttpResponse get_diagram(const std::string& model_id, const HttpRequest& r);

  std::shared_ptr<const Model> find_model(const std::string& id) const;
  std::shared_ptr<Session> find_session(const std::string& id);
  ServiceClock::time_point now() const;
  std::string new_session_id();

  ServiceOptions options_;
  mutable std::shared_mutex mutex_;
  std::map<std::string, std::shared_ptr<const Model>> models_;
  std::map<std::string, std::shared_ptr<Session>> sessions_;
  std::uint64_t next_model_ = 1;
  std::mutex rng_mutex_;
  std::mt19937_64 rng_;
};

/// Blocking HTTP front end over a ConfigService.
class HttpServer {
 public:
  explicit HttpServer(ConfigService& service);
  ~HttpServer();

  /// Binds to `host:port`; port 0 picks a free port. Returns the bound port
  /// or -1 on failure.
  int bind(const std::string& host, int port);
  /// Serves until stop(). Returns false if the listener failed.
  bool listen();
  void stop();

  /// Directory of static files served under `/ui/`.
  void set_ui_dir(const std::filesystem::path& dir);

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace colorfm
