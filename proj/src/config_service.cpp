#include "colorfm/config_service.hpp"

#include <cstdio>
#include <sstream>

#include <httplib.h>

#include "colorfm/analysis.hpp"
#include "colorfm/records.hpp"

namespace colorfm {

struct ConfigService::Model {
  Model(std::string i, LoadedModel l, CycleReport c)
      : id(std::move(i)), loaded(std::move(l)), cycles(std::move(c)) {}
  std::string id;
  LoadedModel loaded;
  CycleReport cycles;
};

struct ConfigService::Session {
  Session(std::string sid, std::shared_ptr<const Model> m, ConfigState s,
          ServiceClock::time_point t)
      : id(std::move(sid)), model(std::move(m)), state(std::move(s)), touched(t) {}

  std::string id;
  std::shared_ptr<const Model> model;
  std::mutex mutex;
  ConfigState state;
  ServiceClock::time_point touched;
};

namespace {

int status_for(ErrorCode code) {
  switch (code) {
    case ErrorCode::Syntax:
    case ErrorCode::EmptyInput: return 400;
    case ErrorCode::UnknownBox: return 404;
    case ErrorCode::VoidModel:
    case ErrorCode::InvalidDecision:
    case ErrorCode::NothingToUndo:
    case ErrorCode::ReplayDivergence: return 409;
    case ErrorCode::Io: return 500;
    default: return 422;
  }
}

HttpResponse json_response(int status, const Json& body) {
  return HttpResponse{status, "application/json", body.dump(2) + "\n"};
}

HttpResponse error_response(int status, std::string_view code, const std::string& message,
                            const std::vector<std::string>& details = {}) {
  return json_response(status, error_record(code, message, details));
}

HttpResponse error_response(const Error& e) {
  return json_response(status_for(e.code()), error_record(e));
}

HttpResponse not_found(const std::string& what) {
  return error_response(404, "not-found", what + " not found");
}

std::vector<std::string> split_path(const std::string& path) {
  std::vector<std::string> parts;
  std::string cur;
  for (char c : path) {
    if (c == '/') {
      if (!cur.empty()) parts.push_back(std::move(cur));
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  if (!cur.empty()) parts.push_back(std::move(cur));
  return parts;
}

std::string cycle_warning(const std::vector<std::string>& component) {
  std::string w = "circular constraints: ";
  for (std::size_t i = 0; i < component.size(); ++i) {
    if (i) w += ", ";
    w += component[i];
  }
  return w;
}

Json session_view(const std::string& sid, const std::string& model_id, const ConfigState& state) {
  const LookaheadResult probe = lookahead(state, LookaheadMode::Report);
  const Status st = status(state);
  Json journal = Json::array();
  for (const Decision& d : state.user_decisions()) journal.push_back(decision_record(state.model(), d));
  Json dead = Json::array();
  for (BoxId b : probe.dead_boxes) dead.push_back(b.str());
  return Json{{"session_id", sid},
              {"model_id", model_id},
              {"model", state.model().name()},
              {"complete", st.complete()},
              {"open_count", st.open_count},
              {"dead_end", probe.dead_end},
              {"dead_boxes", std::move(dead)},
              {"undo_depth", state.undo_depth()},
              {"journal", std::move(journal)},
              {"boxes", boxes_record(state, probe)}};
}

}  // namespace

ConfigService::ConfigService(ServiceOptions options)
    : options_(std::move(options)), rng_(std::random_device{}()) {}

ConfigService::~ConfigService() = default;

ServiceClock::time_point ConfigService::now() const {
  return options_.clock ? options_.clock() : ServiceClock::now();
}

std::string ConfigService::new_session_id() {
  std::lock_guard lock(rng_mutex_);
  char buf[33];
  std::snprintf(buf, sizeof buf, "%016llx%016llx", static_cast<unsigned long long>(rng_()),
                static_cast<unsigned long long>(rng_()));
  return buf;
}

std::shared_ptr<const ConfigService::Model> ConfigService::find_model(const std::string& id) const {
  std::shared_lock lock(mutex_);
  auto it = models_.find(id);
  return it == models_.end() ? nullptr : it->second;
}

std::shared_ptr<ConfigService::Session> ConfigService::find_session(const std::string& id) {
  std::shared_ptr<Session> s;
  {
    std::shared_lock lock(mutex_);
    auto it = sessions_.find(id);
    if (it == sessions_.end()) return nullptr;
    s = it->second;
  }
  std::lock_guard lock(s->mutex);
  if (now() - s->touched > options_.session_ttl) return nullptr;
  s->touched = now();
  return s;
}

std::size_t ConfigService::session_count() const {
  std::shared_lock lock(mutex_);
  return sessions_.size();
}

std::size_t ConfigService::expire_idle() {
  const auto t = now();
  std::unique_lock lock(mutex_);
  std::size_t dropped = 0;
  for (auto it = sessions_.begin(); it != sessions_.end();) {
    std::lock_guard slock(it->second->mutex);
    if (t - it->second->touched > options_.session_ttl) {
      it = sessions_.erase(it);
      ++dropped;
    } else {
      ++it;
    }
  }
  return dropped;
}

std::size_t ConfigService::snapshot(const std::filesystem::path& dir) const {
  std::vector<std::shared_ptr<Session>> live;
  {
    std::shared_lock lock(mutex_);
    for (const auto& [id, s] : sessions_) live.push_back(s);
  }
  std::filesystem::create_directories(dir);
  for (const auto& s : live) {
    std::lock_guard lock(s->mutex);
    const LoadedModel& m = s->model->loaded;
    write_text_file(dir / (s->id + ".fm"), serialize_model(m.base, m.constraints, m.catalog));
    write_text_file(dir / (s->id + ".fmconfig"), export_config(s->state));
  }
  return live.size();
}

std::string ConfigService::add_model(std::string_view document) {
  LoadedModel loaded = parse_model(document, options_.load);
  CycleReport cycles = detect_cycles(*loaded.model);
  std::unique_lock lock(mutex_);
  std::string id = "m" + std::to_string(next_model_++);
  models_[id] = std::make_shared<const Model>(id, std::move(loaded), std::move(cycles));
  return id;
}

HttpResponse ConfigService::handle(const HttpRequest& r) {
  expire_idle();
  const std::vector<std::string> p = split_path(r.path);
  try {
    if (r.method == "POST" && p.size() == 1 && p[0] == "models") return post_model(r);
    if (r.method == "POST" && p.size() == 3 && p[0] == "models" && p[2] == "sessions")
      return post_session(p[1]);
    if (r.method == "GET" && p.size() == 3 && p[0] == "models" && p[2] == "diagram")
      return get_diagram(p[1], r);
    if (p.size() >= 2 && p[0] == "sessions") {
      const std::string& sid = p[1];
      if (r.method == "GET" && p.size() == 2) return get_session(sid);
      if (r.method == "POST" && p.size() == 3 && p[2] == "decisions") return post_decision(sid, r);
      if (r.method == "POST" && p.size() == 3 && p[2] == "undo") return post_undo(sid);
      if (r.method == "GET" && p.size() == 3 && p[2] == "assets") return get_assets(sid);
      if (r.method == "GET" && p.size() == 3 && p[2] == "export") return get_export(sid);
    }
    return not_found("route " + r.method + " " + r.path);
  } catch (const Error& e) {
    return error_response(e);
  } catch (const std::exception& e) {
    return error_response(500, "internal", e.what());
  }
}

HttpResponse ConfigService::post_model(const HttpRequest& r) {
  std::string document = r.body;
  const auto first = r.body.find_first_not_of(" \t\r\n");
  if (first != std::string::npos && r.body[first] == '{') {
    Json body = Json::parse(r.body, nullptr, false);
    if (body.is_discarded() || !body.is_object() || !body.contains("document") ||
        !body["document"].is_string())
      return error_response(400, "bad-request", "expected {\"document\": \"...\"}");
    document = body["document"].get<std::string>();
  }
  const std::string id = add_model(document);
  auto m = find_model(id);
  Json warnings = Json::array();
  for (const auto& c : m->cycles.components) warnings.push_back(cycle_warning(c));
  const FeatureModel& fm = *m->loaded.model;
  return json_response(
      201, Json{{"model_id", id},
                {"name", fm.name()},
                {"fingerprint", fingerprint_hex(model_fingerprint(fm))},
                {"boxes", fm.size()},
                {"features", fm.feature_labels().size()},
                {"assets", m->loaded.catalog.size()},
                {"validation", Json{{"ok", true}, {"violations", Json::array()}}},
                {"cycles", cycle_record(m->cycles)},
                {"warnings", std::move(warnings)}});
}

HttpResponse ConfigService::post_session(const std::string& model_id) {
  auto m = find_model(model_id);
  if (!m) return not_found("model " + model_id);
  ConfigState state = initial_state(m->loaded.model);
  auto s = std::make_shared<Session>(new_session_id(), m, std::move(state), now());
  Json view = session_view(s->id, m->id, s->state);
  {
    std::unique_lock lock(mutex_);
    sessions_[s->id] = s;
  }
  return json_response(201, view);
}

HttpResponse ConfigService::get_session(const std::string& sid) {
  auto s = find_session(sid);
  if (!s) return not_found("session " + sid);
  std::lock_guard lock(s->mutex);
  return json_response(200, session_view(s->id, s->model->id, s->state));
}

HttpResponse ConfigService::post_decision(const std::string& sid, const HttpRequest& r) {
  auto s = find_session(sid);
  if (!s) return not_found("session " + sid);
  Json body = Json::parse(r.body, nullptr, false);
  if (body.is_discarded() || !body.is_object() || !body.contains("label") ||
      !body["label"].is_string() || !body.contains("action") || !body["action"].is_string())
    return error_response(400, "bad-request", "expected {\"label\": \"...\", \"action\": \"select|discard\"}");
  const std::string label = body["label"].get<std::string>();
  const auto action = parse_action(body["action"].get<std::string>());
  if (!action)
    return error_response(400, "bad-request", "action must be select or discard");

  std::lock_guard lock(s->mutex);
  const FeatureModel& model = s->state.model();
  if (!model.is_feature_label(label))
    return error_response(422, error_code_name(ErrorCode::UnknownLabel),
                          "unknown feature label '" + label + "'", {label});
  DecideResult result = decide(s->state, label, *action);
  if (!result.report.accepted) {
    const Conflict& c = *result.report.conflict;
    Json err = error_record("rejected", describe(model, c), {c.box.str(), model.box(c.box).label});
    err["conflict"] = conflict_record(model, c);
    return json_response(409, err);
  }
  s->state = std::move(result.state);
  Json out = report_record(model, result.report);
  const Status st = status(s->state);
  out["complete"] = st.complete();
  out["open_count"] = st.open_count;
  out["journal_length"] = s->state.user_decisions().size();
  return json_response(200, out);
}

HttpResponse ConfigService::post_undo(const std::string& sid) {
  auto s = find_session(sid);
  if (!s) return not_found("session " + sid);
  std::lock_guard lock(s->mutex);
  s->state = undo(s->state);
  return json_response(200, session_view(s->id, s->model->id, s->state));
}

HttpResponse ConfigService::get_assets(const std::string& sid) {
  auto s = find_session(sid);
  if (!s) return not_found("session " + sid);
  std::lock_guard lock(s->mutex);
  const Catalog& catalog = s->model->loaded.catalog;
  return json_response(200, filter_record(catalog, filter_partial(catalog, s->state)));
}

HttpResponse ConfigService::get_export(const std::string& sid) {
  auto s = find_session(sid);
  if (!s) return not_found("session " + sid);
  std::lock_guard lock(s->mutex);
  return HttpResponse{200, "application/json", export_config(s->state)};
}

HttpResponse ConfigService::get_diagram(const std::string& model_id, const HttpRequest& r) {
  auto m = find_model(model_id);
  if (!m) return not_found("model " + model_id);
  auto q = r.query.find("session");
  if (q == r.query.end() || q->second.empty())
    return HttpResponse{200, "text/vnd.graphviz", export_dot(*m->loaded.model)};
  auto s = find_session(q->second);
  if (!s) return not_found("session " + q->second);
  if (s->model != m)
    return error_response(409, error_code_name(ErrorCode::ModelMismatch),
                          "session " + q->second + " belongs to model " + s->model->id);
  std::lock_guard lock(s->mutex);
  return HttpResponse{200, "text/vnd.graphviz", export_dot(*m->loaded.model, &s->state)};
}

struct HttpServer::Impl {
  explicit Impl(ConfigService& s) : service(s) {}
  ConfigService& service;
  httplib::Server server;
};

HttpServer::HttpServer(ConfigService& service) : impl_(std::make_unique<Impl>(service)) {
  auto& svr = impl_->server;
  const std::string origin = service.options().allow_origin;
  if (!origin.empty()) {
    svr.set_default_headers({{"Access-Control-Allow-Origin", origin},
                             {"Access-Control-Allow-Methods", "GET, POST, OPTIONS"},
                             {"Access-Control-Allow-Headers", "Content-Type"}});
  }
  auto forward = [this](const httplib::Request& req, httplib::Response& res) {
    HttpRequest r{req.method, req.path, {}, req.body};
    for (const auto& [k, v] : req.params) r.query.emplace(k, v);
    HttpResponse out = impl_->service.handle(r);
    res.status = out.status;
    res.set_content(out.body, out.content_type);
  };
  svr.Get(R"(/(models|sessions)/.*)", forward);
  svr.Post(R"(/(models|sessions)(/.*)?)", forward);
  svr.Options(R"(.*)", [](const httplib::Request&, httplib::Response& res) { res.status = 204; });
}

HttpServer::~HttpServer() { stop(); }

int HttpServer::bind(const std::string& host, int port) {
  auto& svr = impl_->server;
  if (port == 0) return svr.bind_to_any_port(host);
  return svr.bind_to_port(host, port) ? port : -1;
}

bool HttpServer::listen() { return impl_->server.listen_after_bind(); }

void HttpServer::stop() {
  if (impl_->server.is_running()) impl_->server.stop();
}

void HttpServer::set_ui_dir(const std::filesystem::path& dir) {
  impl_->server.set_mount_point("/ui", dir.string());
}

}  // namespace colorfm
