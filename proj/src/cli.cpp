#include "colorfm/cli.hpp"

#include <algorithm>
#include <csignal>
#include <iostream>
#include <optional>
#include <pthread.h>
#include <sstream>
#include <thread>

#include <CLI11.hpp>

#include "colorfm/analysis.hpp"
#include "colorfm/config_service.hpp"
#include "colorfm/io_formats.hpp"
#include "colorfm/records.hpp"

namespace colorfm {

namespace {

enum class Format { Text, Records };

struct Io {
  std::ostream& out;
  std::ostream& err;
  Format format = Format::Text;

  bool records() const { return format == Format::Records; }
  void emit(const Json& j) { out << j.dump(2) << '\n'; }
};

// Usage-level failure raised by the command bodies (bad flag values etc).
struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

bool is_usage_level(ErrorCode c) {
  return c == ErrorCode::Syntax || c == ErrorCode::EmptyInput || c == ErrorCode::Io;
}

int report_error(Io& io, const Error& e) {
  io.err << "error: " << error_code_name(e.code()) << ": " << e.what() << '\n';
  for (const std::string& d : e.details()) io.err << "  " << d << '\n';
  if (io.records()) io.emit(error_record(e));
  return is_usage_level(e.code()) ? kExitUsage : kExitDomain;
}

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t");
  return std::string(s.substr(b, e - b + 1));
}

std::vector<std::pair<std::string, Action>> parse_decisions(const std::string& text) {
  std::vector<std::pair<std::string, Action>> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (trim(item).empty()) continue;
    const auto eq = item.rfind('=');
    if (eq == std::string::npos) throw UsageError("decision '" + trim(item) + "' lacks '=action'");
    std::string label = trim(std::string_view(item).substr(0, eq));
    const std::string act = trim(std::string_view(item).substr(eq + 1));
    if (label.size() >= 2 && label.front() == '"' && label.back() == '"')
      label = label.substr(1, label.size() - 2);
    const auto action = parse_action(act);
    if (label.empty() || !action)
      throw UsageError("decision '" + trim(item) + "' must be label=select|discard");
    out.emplace_back(std::move(label), *action);
  }
  return out;
}

LoadedModel load(const std::string& path, Encoding enc = Encoding::Structural) {
  LoadOptions opts;
  opts.encoding = enc;
  return parse_model(read_text_file(path), opts);
}

std::string joined(const std::set<std::string>& s) {
  std::string out;
  for (const auto& x : s) out += (out.empty() ? "" : ", ") + x;
  return out.empty() ? "none" : out;
}

std::string joined(const std::vector<std::string>& s) {
  return joined(std::set<std::string>(s.begin(), s.end()));
}

std::string status_text(const ConfigState& s) {
  const Status st = status(s);
  return st.complete() ? "COMPLETE" : std::to_string(st.open_count) + " open";
}

// ---- commands -------------------------------------------------------------

int cmd_check(Io& io, const std::string& path, bool strict_cycles) {
  std::optional<LoadedModel> loaded;
  try {
    loaded = load(path);
  } catch (const Error& e) {
    if (e.code() != ErrorCode::InvalidModel) throw;
    if (io.records()) {
      io.emit(Json{{"violations", e.details()}, {"cycles", Json::array()}});
    } else {
      for (const std::string& d : e.details()) io.out << d << '\n';
      io.out << e.details().size() << " violations\n";
    }
    io.err << "error: " << error_code_name(e.code()) << ": " << e.what() << '\n';
    return kExitDomain;
  }
  const LoadedModel& m = *loaded;
  const CycleReport cycles = detect_cycles(*m.model);
  for (const auto& c : cycles.components)
    io.err << "warning: circular constraints: " << joined(c) << '\n';
  if (io.records()) {
    io.emit(Json{{"model", m.model->name()},
                 {"boxes", m.model->size()},
                 {"features", m.model->feature_labels().size()},
                 {"constraints", m.constraints.size()},
                 {"assets", m.catalog.size()},
                 {"violations", Json::array()},
                 {"cycles", cycle_record(cycles)}});
  } else {
    io.out << "model " << m.model->name() << ": " << m.model->size() << " boxes, "
           << m.model->feature_labels().size() << " features, " << m.constraints.size()
           << " constraints, " << m.catalog.size() << " assets\n";
    io.out << "0 violations\n";
    for (const auto& c : cycles.components) io.out << "cycle: {" << joined(c) << "}\n";
  }
  return strict_cycles && !cycles.empty() ? kExitDomain : kExitOk;
}

int cmd_analyze(Io& io, const std::string& path, std::size_t cap) {
  LoadedModel m = load(path);
  const SolutionStats sols = solution_stats(*m.model, cap);
  const auto dead = dead_features(sols, *m.model);
  const auto fo = false_optional(sols, *m.model);
  if (sols.count == 0) io.err << "warning: void model: no valid configuration\n";
  if (io.records()) {
    io.emit(Json{{"model", m.model->name()},
                 {"valid_configurations", sols.count},
                 {"void", sols.count == 0},
                 {"dead_features", dead},
                 {"false_optional", fo}});
  } else {
    io.out << "valid configurations: " << sols.count << '\n';
    io.out << "dead features: " << joined(dead) << '\n';
    io.out << "false-optional features: " << joined(fo) << '\n';
  }
  return kExitOk;
}

void dump_branch(std::ostream& os, const FeatureModel& model, BoxId id, int depth) {
  const Box& b = model.box(id);
  os << std::string(2 * depth, ' ') << b.id.str() << ' ' << quote_label_if_needed(b.label);
  if (b.mandatory) os << " mandatory";
  if (b.group != Group::Free) os << " group=" << group_name(b.group);
  os << '\n';
  for (BoxId c : b.children) dump_branch(os, model, c, depth + 1);
}

int cmd_compile(Io& io, const std::string& path, bool canonical, bool via_dnf) {
  LoadedModel m = load(path, via_dnf ? Encoding::ViaDnf : Encoding::Structural);
  const FeatureModel& fm = *m.model;
  std::size_t gadget_boxes = 0;
  for (const Box& b : fm.boxes())
    if (fm.in_constraints_branch(b.id)) ++gadget_boxes;
  std::vector<std::string> decls;
  for (const auto& d : m.constraints) decls.push_back(d.to_source());
  if (io.records()) {
    Json j{{"model", fm.name()},
           {"encoding", via_dnf ? "dnf" : "structural"},
           {"declarations", decls},
           {"constraints_boxes", gadget_boxes},
           {"boxes", fm.size()}};
    if (canonical) j["canonical"] = serialize_model(m.base, m.constraints, m.catalog);
    io.emit(j);
    return kExitOk;
  }
  for (const auto& d : decls) io.out << "declaration: " << d << '\n';
  io.out << "constraints subtree: " << gadget_boxes << " boxes\n";
  if (fm.constraints_root()) dump_branch(io.out, fm, *fm.constraints_root(), 1);
  if (canonical) io.out << "\n" << serialize_model(m.base, m.constraints, m.catalog);
  return kExitOk;
}

int cmd_configure(Io& io, const std::string& path, const std::string& decisions,
                  const std::string& out_path) {
  const auto steps = parse_decisions(decisions);
  LoadedModel m = load(path);
  ConfigState state = initial_state(m.model);
  Json rec_steps = Json::array();
  for (std::size_t i = 0; i < steps.size(); ++i) {
    const auto& [label, action] = steps[i];
    if (!m.model->is_feature_label(label))
      throw Error(ErrorCode::UnknownLabel, "unknown feature label '" + label + "'", {label});
    DecideResult r = decide(state, label, action);
    if (!io.records())
      io.out << "step " << i + 1 << ": " << label << '=' << action_name(action) << '\n';
    if (!r.report.accepted) {
      const Conflict& c = *r.report.conflict;
      if (io.records()) {
        Json err = error_record("rejected", describe(*m.model, c), {c.box.str(), label});
        err["step"] = i + 1;
        err["conflict"] = conflict_record(*m.model, c);
        io.emit(Json{{"steps", rec_steps}, {"error", err}});
      } else {
        io.out << "  REJECTED: " << describe(*m.model, c);
      }
      io.err << "error: rejected: decision " << label << '=' << action_name(action)
             << " contradicts earlier decisions\n";
      return kExitDomain;
    }
    if (io.records()) {
      Json s = report_record(*m.model, r.report);
      s["label"] = label;
      s["action"] = std::string(action_name(action));
      rec_steps.push_back(std::move(s));
    } else {
      for (const Decision& d : r.report.forced) io.out << "  " << describe(*m.model, d) << '\n';
    }
    state = std::move(r.state);
  }
  if (io.records())
    io.emit(Json{{"steps", rec_steps},
                 {"complete", status(state).complete()},
                 {"open_count", status(state).open_count}});
  else
    io.out << "status: " << status_text(state) << '\n';
  if (!out_path.empty()) write_text_file(out_path, export_config(state));
  return kExitOk;
}

int cmd_filter(Io& io, const std::string& model_path, const std::string& config_path,
               const std::string& out_path) {
  LoadedModel m = load(model_path);
  ImportedConfig cfg = import_config(m.model, read_text_file(config_path));
  for (const auto& w : cfg.warnings) io.err << "warning: " << w << '\n';
  const FilterResult r = filter_partial(m.catalog, cfg.state);
  const std::string body =
      io.records() ? filter_record(m.catalog, r).dump(2) + "\n" : filter_csv(m.catalog, r);
  if (out_path.empty())
    io.out << body;
  else
    write_text_file(out_path, body);
  return kExitOk;
}

int cmd_export(Io& io, const std::string& model_path, const std::string& config_path,
               const std::string& dot_path) {
  LoadedModel m = load(model_path);
  std::optional<ConfigState> state;
  if (!config_path.empty()) {
    ImportedConfig cfg = import_config(m.model, read_text_file(config_path));
    for (const auto& w : cfg.warnings) io.err << "warning: " << w << '\n';
    state = std::move(cfg.state);
  }
  const std::string dot = export_dot(*m.model, state ? &*state : nullptr);
  if (dot_path.empty())
    io.out << dot;
  else
    write_text_file(dot_path, dot);
  return kExitOk;
}

struct ServeFlags {
  std::string host = "127.0.0.1";
  int port = 8080;
  std::string allow_origin;
  long long ttl_seconds = 24 * 3600;
  std::string ui_dir;
  std::vector<std::string> models;
  std::string snapshot_dir;
};

int cmd_serve(Io& io, const ServeFlags& f) {
  ServiceOptions opts;
  opts.allow_origin = f.allow_origin;
  opts.session_ttl = std::chrono::seconds(f.ttl_seconds);
  if (!f.snapshot_dir.empty()) opts.snapshot_dir = f.snapshot_dir;
  ConfigService service(opts);
  for (const auto& path : f.models) {
    const std::string id = service.add_model(read_text_file(path));
    io.out << "model " << id << ": " << path << '\n';
  }
  HttpServer server(service);
  if (!f.ui_dir.empty()) server.set_ui_dir(f.ui_dir);
  const int port = server.bind(f.host, f.port);
  if (port < 0) throw Error(ErrorCode::Io, "cannot bind " + f.host + ":" + std::to_string(f.port));
  io.out << "listening on http://" << f.host << ':' << port << std::endl;

  // SIGINT/SIGTERM are taken synchronously by a watcher thread.
  sigset_t set;
  sigemptyset(&set);
  sigaddset(&set, SIGINT);
  sigaddset(&set, SIGTERM);
  pthread_sigmask(SIG_BLOCK, &set, nullptr);
  std::thread watcher([&] {
    int sig = 0;
    sigwait(&set, &sig);
    server.stop();
  });
  const bool ok = server.listen();
  if (!ok) pthread_kill(watcher.native_handle(), SIGTERM);
  watcher.join();
  if (opts.snapshot_dir) {
    const std::size_t n = service.snapshot(*opts.snapshot_dir);
    io.out << "snapshot: " << n << " sessions written to " << opts.snapshot_dir->string() << '\n';
  }
  return ok ? kExitOk : kExitUsage;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Color-coded feature models: check, analyze, configure, filter assets", "colorfm"};
  app.require_subcommand(1);

  std::string format = "text";
  auto add_format = [&](CLI::App* sub) {
    sub->add_option("--format", format, "Output format")
        ->check(CLI::IsMember({"text", "records"}));
  };

  std::string model, config, out_path, decisions, dot;
  bool strict_cycles = false, canonical = false, via_dnf = false;
  std::size_t cap = kDefaultLabelCap;
  ServeFlags serve;

  auto* check = app.add_subcommand("check", "Validate a model and report circular constraints");
  check->add_option("model", model, "Model file")->required();
  check->add_flag("--strict-cycles", strict_cycles, "Treat circular constraints as errors");
  add_format(check);

  auto* analyze = app.add_subcommand("analyze", "Count configurations, dead and false-optional features");
  analyze->add_option("model", model, "Model file")->required();
  analyze->add_option("--cap", cap, "Maximum number of feature labels to enumerate");
  add_format(analyze);

  auto* compile = app.add_subcommand("compile", "Show the compiled constraints branch");
  compile->add_option("model", model, "Model file")->required();
  compile->add_flag("--emit-canonical", canonical, "Also print the canonical model text");
  compile->add_flag("--via-dnf", via_dnf, "Compile formulas through disjunctive normal form");
  add_format(compile);

  auto* configure = app.add_subcommand("configure", "Apply decisions in order and report consequences");
  configure->add_option("model", model, "Model file")->required();
  configure->add_option("--decisions", decisions, "label=select|discard,...")->required();
  configure->add_option("--out", out_path, "Write the configuration file here");
  add_format(configure);

  auto* filter = app.add_subcommand("filter", "Filter the asset catalog by a configuration");
  filter->add_option("model", model, "Model file")->required();
  filter->add_option("config", config, "Configuration file")->required();
  filter->add_option("--out", out_path, "Write the result here instead of standard output");
  add_format(filter);

  auto* exp = app.add_subcommand("export", "Export the diagram as Graphviz text");
  exp->add_option("model", model, "Model file")->required();
  exp->add_option("--config", config, "Configuration to color the diagram with");
  exp->add_option("--dot", dot, "Write the diagram here instead of standard output");

  auto* srv = app.add_subcommand("serve", "Run the configuration HTTP service");
  srv->add_option("--host", serve.host, "Listen address");
  srv->add_option("--port", serve.port, "Listen port (0 picks a free one)");
  srv->add_option("--allow-origin", serve.allow_origin, "CORS origin for the web UI");
  srv->add_option("--session-ttl", serve.ttl_seconds, "Idle session lifetime in seconds")
      ->check(CLI::PositiveNumber);
  srv->add_option("--ui-dir", serve.ui_dir, "Static files served under /ui/");
  srv->add_option("--model", serve.models, "Preload a model file (repeatable)");
  srv->add_option("--snapshot-dir", serve.snapshot_dir, "Write sessions here on shutdown");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  Io io{out, err, format == "records" ? Format::Records : Format::Text};
  try {
    if (*check) return cmd_check(io, model, strict_cycles);
    if (*analyze) return cmd_analyze(io, model, cap);
    if (*compile) return cmd_compile(io, model, canonical, via_dnf);
    if (*configure) return cmd_configure(io, model, decisions, out_path);
    if (*filter) return cmd_filter(io, model, config, out_path);
    if (*exp) return cmd_export(io, model, config, dot);
    if (*srv) return cmd_serve(io, serve);
  } catch (const UsageError& e) {
    err << "error: usage: " << e.what() << '\n';
    return kExitUsage;
  } catch (const Error& e) {
    return report_error(io, e);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  }
  return kExitUsage;
}

}  // namespace colorfm
