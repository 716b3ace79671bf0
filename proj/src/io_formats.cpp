#include "colorfm/io_formats.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <optional>
#include <set>
#include <sstream>

#include <json.hpp>

#include "colorfm/error.hpp"

namespace colorfm {

namespace {

std::string lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}

enum class Tok { Word, String, LBrace, RBrace, End };

struct Token {
  Tok kind = Tok::End;
  std::string text;
  SourcePos pos;
};

class DocLexer {
 public:
  explicit DocLexer(std::string_view text) : text_(text) {}

  const Token& peek() {
    if (!buffered_) {
      buffer_ = scan();
      buffered_ = true;
    }
    return buffer_;
  }

  Token next() {
    peek();
    buffered_ = false;
    return std::move(buffer_);
  }

  /// Raw text up to the end of the line, comment stripped. Must not be
  /// called with a peeked token pending.
  std::pair<std::string, SourcePos> rest_of_line() {
    if (buffered_) throw std::logic_error("rest_of_line with a buffered token");
    while (i_ < text_.size() && (text_[i_] == ' ' || text_[i_] == '\t')) advance();
    const SourcePos start = pos_;
    std::string out;
    bool quoted = false;
    while (i_ < text_.size() && text_[i_] != '\n') {
      const char c = text_[i_];
      if (!quoted && c == '#') break;
      if (c == '"') quoted = !quoted;
      if (quoted && c == '\\' && i_ + 1 < text_.size() && text_[i_ + 1] != '\n') {
        out += c;
        advance();
      }
      out += text_[i_];
      advance();
    }
    while (i_ < text_.size() && text_[i_] != '\n') advance();
    while (!out.empty() && std::isspace(static_cast<unsigned char>(out.back()))) out.pop_back();
    return {out, start};
  }

 private:
  void advance() {
    if (text_[i_] == '\n') {
      ++pos_.line;
      pos_.column = 1;
    } else {
      ++pos_.column;
    }
    ++i_;
  }

  Token scan() {
    while (i_ < text_.size()) {
      const char c = text_[i_];
      if (std::isspace(static_cast<unsigned char>(c))) {
        advance();
      } else if (c == '#') {
        while (i_ < text_.size() && text_[i_] != '\n') advance();
      } else {
        break;
      }
    }
    const SourcePos start = pos_;
    if (i_ >= text_.size()) return {Tok::End, "", start};
    const char c = text_[i_];
    if (c == '{') {
      advance();
      return {Tok::LBrace, "{", start};
    }
    if (c == '}') {
      advance();
      return {Tok::RBrace, "}", start};
    }
    if (c == '"') {
      advance();
      std::string value;
      while (true) {
        if (i_ >= text_.size() || text_[i_] == '\n') {
          throw SyntaxError(start, "unterminated string");
        }
        char ch = text_[i_];
        if (ch == '"') {
          advance();
          break;
        }
        if (ch == '\\' && i_ + 1 < text_.size()) {
          advance();
          ch = text_[i_];
        }
        value += ch;
        advance();
      }
      return {Tok::String, value, start};
    }
    std::string word;
    while (i_ < text_.size()) {
      const char ch = text_[i_];
      if (std::isspace(static_cast<unsigned char>(ch)) || ch == '{' || ch == '}' || ch == '"' ||
          ch == '#') {
        break;
      }
      word += ch;
      advance();
    }
    return {Tok::Word, word, start};
  }

  std::string_view text_;
  std::size_t i_ = 0;
  SourcePos pos_;
  Token buffer_;
  bool buffered_ = false;
};

std::string describe(const Token& t) {
  switch (t.kind) {
    case Tok::End: return "end of file";
    case Tok::String: return quote_string(t.text);
    default: return "'" + t.text + "'";
  }
}

class DocParser {
 public:
  explicit DocParser(std::string_view text) : lex_(text) {}

  Document parse() {
    if (lex_.peek().kind == Tok::End) throw Error(ErrorCode::EmptyInput, "empty model document");
    expect_keyword("model");
    const Token name = lex_.next();
    if (name.kind != Tok::String && name.kind != Tok::Word) {
      throw SyntaxError(name.pos, "expected model name, found " + describe(name));
    }

    const Token& head = lex_.peek();
    if (head.kind != Tok::Word || lower(head.text) != "feature") {
      throw SyntaxError(head.pos, "expected root 'feature', found " + describe(head));
    }
    std::optional<ModelBuilder> builder;
    parse_feature(builder, std::nullopt, name.text);

    std::vector<ConstraintDecl> decls;
    std::vector<Asset> assets;
    while (lex_.peek().kind != Tok::End) {
      const Token t = lex_.next();
      const std::string kw = t.kind == Tok::Word ? lower(t.text) : std::string();
      if (kw == "requires" || kw == "excludes") {
        if (!assets.empty()) throw SyntaxError(t.pos, "constraints must precede assets");
        std::string a = label(lex_.next());
        std::string b = label(lex_.next());
        decls.push_back(kw == "requires" ? ConstraintDecl::requires_(std::move(a), std::move(b))
                                         : ConstraintDecl::excludes(std::move(a), std::move(b)));
      } else if (kw == "constraint") {
        if (!assets.empty()) throw SyntaxError(t.pos, "constraints must precede assets");
        const Token n = lex_.next();
        if (n.kind != Tok::String) {
          throw SyntaxError(n.pos, "expected quoted constraint name, found " + describe(n));
        }
        auto [text, pos] = lex_.rest_of_line();
        if (text.empty()) throw SyntaxError(pos, "expected formula after constraint name");
        decls.push_back(ConstraintDecl::constraint(n.text, parse_formula(text, pos)));
      } else if (kw == "asset") {
        assets.push_back(parse_asset(t));
      } else if (kw == "feature") {
        throw SyntaxError(t.pos, "a model has exactly one root feature");
      } else {
        throw SyntaxError(t.pos, "expected constraint or asset declaration, found " + describe(t));
      }
    }
    Catalog catalog(std::move(assets));
    return Document{builder->build(), std::move(decls), std::move(catalog)};
  }

 private:
  void expect_keyword(std::string_view kw) {
    const Token t = lex_.next();
    if (t.kind != Tok::Word || lower(t.text) != kw) {
      throw SyntaxError(t.pos, "expected '" + std::string(kw) + "', found " + describe(t));
    }
  }

  std::string label(const Token& t) {
    if (t.kind == Tok::String) {
      if (t.text.empty()) throw SyntaxError(t.pos, "empty label");
      return t.text;
    }
    if (t.kind == Tok::Word && is_identifier(t.text)) return t.text;
    throw SyntaxError(t.pos, "expected label, found " + describe(t));
  }

  void parse_feature(std::optional<ModelBuilder>& builder, std::optional<BoxId> parent,
                     const std::string& model_name) {
    expect_keyword("feature");
    std::string name = label(lex_.next());
    bool mandatory = false;
    Group group = Group::Free;
    while (lex_.peek().kind == Tok::Word) {
      const std::string word = lower(lex_.peek().text);
      if (word == "mandatory") {
        mandatory = true;
      } else if (word.rfind("group=", 0) == 0) {
        auto g = parse_group(word.substr(6));
        if (!g) throw SyntaxError(lex_.peek().pos, "unknown group '" + word.substr(6) + "'");
        group = *g;
      } else {
        break;
      }
      lex_.next();
    }

    BoxId id;
    if (!parent) {
      builder.emplace(model_name, name);
      id = builder->root();
      builder->at(id).group = group;
    } else {
      id = builder->add(*parent, name, mandatory, group);
    }

    if (lex_.peek().kind != Tok::LBrace) return;
    const Token open = lex_.next();
    while (true) {
      const Token& t = lex_.peek();
      if (t.kind == Tok::RBrace) {
        lex_.next();
        return;
      }
      if (t.kind == Tok::End) {
        throw SyntaxError(open.pos, "missing '}' for feature '" + name + "' opened at line " +
                                        std::to_string(open.pos.line));
      }
      if (t.kind != Tok::Word || lower(t.text) != "feature") {
        throw SyntaxError(t.pos, "expected 'feature' or '}', found " + describe(t));
      }
      parse_feature(builder, id, model_name);
    }
  }

  Asset parse_asset(const Token& kw) {
    Asset a;
    const Token id = lex_.next();
    const Token name = lex_.next();
    if (id.kind != Tok::String) throw SyntaxError(id.pos, "expected quoted asset id");
    if (name.kind != Tok::String) throw SyntaxError(name.pos, "expected quoted asset name");
    if (!asset_ids_.insert(id.text).second) {
      throw SyntaxError(id.pos, "duplicate asset id " + quote_string(id.text));
    }
    a.id = id.text;
    a.name = name.text;
    const Token kind = lex_.next();
    if (kind.kind != Tok::Word || lower(kind.text).rfind("kind=", 0) != 0) {
      throw SyntaxError(kind.pos, "expected kind=<kind>, found " + describe(kind));
    }
    auto k = parse_asset_kind(kind.text.substr(5));
    if (!k) throw SyntaxError(kind.pos, "unknown asset kind '" + kind.text.substr(5) + "'");
    a.kind = *k;
    expect_keyword("when");
    auto [text, pos] = lex_.rest_of_line();
    if (text.empty()) throw SyntaxError(pos, "expected criterion after 'when'");
    if (lower(text) != "always") a.criterion = parse_formula(text, pos);
    (void)kw;
    return a;
  }

  DocLexer lex_;
  std::set<std::string> asset_ids_;
};

}  // namespace

Document parse_document(std::string_view text) { return DocParser(text).parse(); }

LoadedModel parse_model(std::string_view text, const LoadOptions& options) {
  Document doc = parse_document(text);
  const ValidationReport report = validate_model(doc.base);
  if (!report.ok()) {
    std::vector<std::string> details;
    for (const Violation& v : report.violations) details.push_back(v.rule + ": " + v.message);
    throw Error(ErrorCode::InvalidModel,
                std::to_string(report.violations.size()) + " model violation(s)", details);
  }
  FeatureModel compiled = compile_all(doc.base, doc.constraints, options.encoding);
  if (options.strict_assets) {
    const ValidationReport bound = bind_catalog(doc.catalog, doc.base);
    if (!bound.ok()) {
      std::vector<std::string> details;
      for (const Violation& v : bound.violations) details.push_back(v.message);
      throw Error(ErrorCode::UnknownLabel, details.front(), details);
    }
  }
  return LoadedModel{std::make_shared<const FeatureModel>(std::move(compiled)), std::move(doc.base),
                     std::move(doc.constraints), std::move(doc.catalog)};
}

namespace {

void write_feature(const FeatureModel& model, BoxId id, int depth, std::string& out) {
  const Box& b = model.box(id);
  out.append(static_cast<std::size_t>(depth) * 2, ' ');
  out += "feature ";
  out += quote_label_if_needed(b.label);
  if (b.mandatory) out += " mandatory";
  if (b.group != Group::Free) {
    out += " group=";
    out += group_name(b.group);
  }
  std::vector<BoxId> kids;
  for (BoxId c : b.children) {
    if (c != model.constraints_root()) kids.push_back(c);
  }
  if (kids.empty()) {
    out += '\n';
    return;
  }
  out += " {\n";
  for (BoxId c : kids) write_feature(model, c, depth + 1, out);
  out.append(static_cast<std::size_t>(depth) * 2, ' ');
  out += "}\n";
}

}  // namespace

std::string serialize_model(const FeatureModel& model, std::span<const ConstraintDecl> decls,
                            const Catalog& catalog) {
  std::string out = "model " + quote_string(model.name()) + "\n\n";
  write_feature(model, model.root(), 0, out);
  if (!decls.empty()) {
    out += '\n';
    for (const ConstraintDecl& d : decls) out += d.to_source() + "\n";
  }
  if (!catalog.empty()) {
    out += '\n';
    for (const Asset& a : catalog.assets()) {
      out += "asset " + quote_string(a.id) + " " + quote_string(a.name) + " kind=";
      out += asset_kind_name(a.kind);
      out += " when ";
      out += a.always() ? "always" : a.criterion->to_string();
      out += '\n';
    }
  }
  return out;
}

namespace {

std::string dot_escape(std::string_view s) {
  std::string out;
  for (char c : s) {
    if (c == '"' || c == '\\') out += '\\';
    out += c;
  }
  return out;
}

std::string_view dot_fill(StructuralColor c) {
  switch (c) {
    case StructuralColor::White: return "white";
    case StructuralColor::Blue: return "lightblue";
    case StructuralColor::Red: return "red";
  }
  return "white";
}

}  // namespace

std::string export_dot(const FeatureModel& model, const ConfigState* state) {
  const ColorView view = state ? render_colors(model, state->states()) : render_colors(model);
  std::ostringstream out;
  out << "digraph \"" << dot_escape(model.name()) << "\" {\n";
  out << "  node [shape=box, style=filled, fontname=\"Helvetica\"];\n";
  for (const Box& b : model.boxes()) {
    out << "  " << b.id.str() << " [label=\"" << dot_escape(b.label) << "\", fillcolor=\""
        << dot_fill(view.structural[b.id.value]) << "\"";
    if (view.state) {
      const StateColor sc = (*view.state)[b.id.value];
      if (sc == StateColor::Green) out << ", color=\"green\", penwidth=3";
      if (sc == StateColor::Gray) out << ", color=\"gray\", penwidth=3, fontcolor=\"gray40\"";
    }
    out << "];\n";
  }
  for (const Box& b : model.boxes()) {
    for (BoxId c : b.children) out << "  " << b.id.str() << " -> " << c.str() << ";\n";
  }
  out << "}\n";
  return out.str();
}

namespace {

constexpr std::string_view kConfigFormat = "colorfm-config";

}  // namespace

std::string export_config(const ConfigState& state) {
  const FeatureModel& model = state.model();
  nlohmann::ordered_json j;
  j["format"] = kConfigFormat;
  j["version"] = 1;
  j["model"] = model.name();
  j["fingerprint"] = fingerprint_hex(model_fingerprint(model));
  nlohmann::ordered_json states = nlohmann::ordered_json::object();
  // Gadget labels are derived and get renumbered when constraints change.
  for (const std::string& label : model.feature_labels()) {
    states[label] = state_name(state.label_state(label));
  }
  j["states"] = std::move(states);
  nlohmann::ordered_json journal = nlohmann::ordered_json::array();
  for (const Decision& d : state.journal()) {
    if (d.rule != Rule::User && d.rule != Rule::Lookahead) continue;
    nlohmann::ordered_json entry;
    entry["label"] = model.box(d.box).label;
    entry["box"] = d.box.str();
    entry["action"] = action_name(d.action);
    entry["origin"] = d.rule == Rule::User ? "user" : "lookahead";
    journal.push_back(std::move(entry));
  }
  j["journal"] = std::move(journal);
  return j.dump(2) + "\n";
}

namespace {

std::optional<BoxState> parse_state(std::string_view s) {
  for (BoxState b : {BoxState::Open, BoxState::Selected, BoxState::Discarded}) {
    if (state_name(b) == s) return b;
  }
  return std::nullopt;
}

}  // namespace

namespace {

ImportedConfig import_config_impl(std::shared_ptr<const FeatureModel> model,
                                  std::string_view text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw Error(ErrorCode::Syntax, std::string("malformed configuration: ") + e.what());
  }
  if (!j.is_object() || j.value("format", "") != kConfigFormat) {
    throw Error(ErrorCode::Syntax, "not a configuration record");
  }

  std::vector<std::string> warnings;
  const std::string fp = fingerprint_hex(model_fingerprint(*model));
  if (j.value("fingerprint", "") != fp) {
    warnings.push_back("configuration was recorded against a different model (fingerprint " +
                       j.value("fingerprint", std::string("?")) + ", current " + fp + ")");
  }

  std::vector<std::pair<std::string, BoxState>> expected;
  if (j.contains("states")) {
    if (!j["states"].is_object()) throw Error(ErrorCode::Syntax, "'states' must be an object");
    for (const auto& [label, value] : j["states"].items()) {
      if (!model->is_feature_label(label)) {
        throw Error(ErrorCode::UnknownLabel, "unknown label '" + label + "' in configuration",
                    {label});
      }
      auto s = value.is_string() ? parse_state(value.get<std::string>()) : std::nullopt;
      if (!s) throw Error(ErrorCode::Syntax, "bad state for label '" + label + "'");
      expected.emplace_back(label, *s);
    }
  }

  ConfigState state = initial_state(model);
  const auto& journal = j.contains("journal") ? j["journal"] : nlohmann::json::array();
  if (!journal.is_array()) throw Error(ErrorCode::Syntax, "'journal' must be an array");
  std::size_t step = 0;
  for (const auto& entry : journal) {
    ++step;
    if (!entry.is_object() || !entry.contains("label") || !entry.contains("action")) {
      throw Error(ErrorCode::Syntax, "journal entry " + std::to_string(step) + " is malformed");
    }
    const std::string label = entry["label"].get<std::string>();
    auto action = parse_action(entry["action"].get<std::string>());
    if (!action) {
      throw Error(ErrorCode::Syntax, "journal entry " + std::to_string(step) + " has bad action");
    }
    if (!model->has_label(label)) {
      throw Error(ErrorCode::UnknownLabel, "unknown label '" + label + "' in journal", {label});
    }
    const std::string where =
        "journal step " + std::to_string(step) + " (" + label + "=" +
        std::string(action_name(*action)) + ")";
    if (state.label_state(label) != BoxState::Open) {
      throw Error(ErrorCode::ReplayDivergence,
                  where + ": '" + label + "' is already " +
                      std::string(state_name(state.label_state(label))),
                  {label});
    }
    // The recorded box when it still carries the label, so causes replay
    // exactly; otherwise any box of the label.
    BoxId box = model->boxes_with_label(label).front();
    if (entry.contains("box") && entry["box"].is_string()) {
      auto id = parse_box_id(entry["box"].get<std::string>());
      if (id && model->contains(*id) && model->box(*id).label == label) box = *id;
    }
    const bool lookahead = entry.value("origin", "user") == "lookahead";
    DecideResult r = decide(state, box, *action,
                            lookahead ? Rule::Lookahead : Rule::User);
    if (!r.report.accepted) {
      throw Error(ErrorCode::ReplayDivergence, where + " is rejected by the current model",
                  {label});
    }
    state = std::move(r.state);
  }

  for (const auto& [label, s] : expected) {
    if (state.label_state(label) != s) {
      throw Error(ErrorCode::ReplayDivergence,
                  "replayed state of '" + label + "' is " +
                      std::string(state_name(state.label_state(label))) + ", file says " +
                      std::string(state_name(s)),
                  {label});
    }
  }
  return ImportedConfig{std::move(state), std::move(warnings)};
}

}  // namespace

ImportedConfig import_config(std::shared_ptr<const FeatureModel> model, std::string_view text) {
  try {
    return import_config_impl(std::move(model), text);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::Syntax, std::string("malformed configuration: ") + e.what());
  }
}

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::Io, "cannot read '" + path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text_file(const std::filesystem::path& path, std::string_view text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::Io, "cannot write '" + path.string() + "'");
  out << text;
  if (!out) throw Error(ErrorCode::Io, "failed writing '" + path.string() + "'");
}

}  // namespace colorfm
