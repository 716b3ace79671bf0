#include <doctest.h>

#include <random>

#include "colorfm/io_formats.hpp"
#include "support.hpp"

using namespace colorfm;
using namespace colorfm::testing;

namespace {

void check_same_document(const LoadedModel& a, const LoadedModel& b) {
  CHECK(same_tree(a.base, b.base));
  CHECK(same_tree(*a.model, *b.model));
  CHECK(a.constraints == b.constraints);
  CHECK(a.catalog == b.catalog);
}

}  // namespace

TEST_CASE("car model parses") {
  const LoadedModel car = load_fixture("car.fm");
  const FeatureModel& m = car.base;
  CHECK(m.name() == "Car");
  const Box& engine = m.box(m.boxes_with_label("Engine").front());
  CHECK(engine.group == Group::Xor);
  CHECK(engine.mandatory);
  REQUIRE(engine.children.size() == 4);
  CHECK(m.box(engine.children[0]).label == "Diesel");
  CHECK(m.box(engine.children[3]).label == "Electric");
  CHECK(m.box(m.root()).mandatory);
  CHECK(car.constraints.size() == 2);
  CHECK(car.catalog.size() == 6);
  REQUIRE(car.model->constraints_root());
  CHECK_FALSE(m.constraints_root());
  CHECK(car.model->size() > m.size());
}

TEST_CASE("syntax errors name the line") {
  try {
    parse_model(fixture_text("malformed.fm"));
    FAIL("expected syntax error");
  } catch (const SyntaxError& e) {
    CHECK(e.position().line == 2);
    CHECK(std::string(e.what()).find("missing '}'") != std::string::npos);
  }
  auto line_of = [](const char* text) -> std::size_t {
    try {
      parse_document(text);
    } catch (const SyntaxError& e) {
      return e.position().line;
    }
    return 0;
  };
  CHECK(line_of("model \"M\"\nfeature R {\n  feature A group=any\n}\n") == 3);
  CHECK(line_of("model \"M\"\nfeature R\nfeature S\n") == 3);
  CHECK(line_of("model \"M\"\nfeature R\nasset \"a\" \"A\" kind=part when always\nrequires R R\n") == 4);
  CHECK(line_of("model \"M\"\nfeature R\nasset \"a\" \"A\" kind=gizmo when always\n") == 3);
  CHECK(line_of("model \"M\"\nfeature R\nasset \"a\" \"A\" kind=part when always\n"
                "asset \"a\" \"B\" kind=part when always\n") == 4);
  CHECK(line_of("model \"M\"\nfeature R\nconstraint \"c\" R &\n") == 3);
  CHECK(line_of("feature R\n") == 1);
  CHECK_THROWS_AS(parse_document("   # nothing\n"), Error);
}

TEST_CASE("load errors") {
  try {
    parse_model(fixture_text("invalid.fm"));
    FAIL("expected invalid-model");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::InvalidModel);
    REQUIRE_FALSE(e.details().empty());
    CHECK(e.details()[0].find("group-needs-children") != std::string::npos);
  }
  try {
    parse_model("model \"M\"\nfeature R { feature A }\nrequires A Missing\n");
    FAIL("expected unknown-label");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::UnknownLabel);
  }
  const char* unbound = "model \"M\"\nfeature R { feature A }\nasset \"x\" \"X\" kind=part when Raddar\n";
  CHECK_THROWS_AS(parse_model(unbound), Error);
  LoadOptions lax;
  lax.strict_assets = false;
  CHECK(parse_model(unbound, lax).catalog.size() == 1);
}

TEST_CASE("requires line yields a constraints subtree") {
  const LoadedModel m = parse_model("model \"M\"\nfeature R { feature ACC feature Radar }\nrequires ACC Radar\n");
  REQUIRE(m.model->constraints_root());
  const Box& head = m.model->box(*m.model->constraints_root());
  CHECK(head.label == kConstraintsLabel);
  REQUIRE(head.children.size() == 1);
  CHECK(m.model->box(head.children[0]).label == "Radar");
}

TEST_CASE("serialize: canonical text") {
  const LoadedModel car = load_fixture("car.fm");
  const std::string text = serialize_model(car.base, car.constraints, car.catalog);
  CHECK(text.find("  feature Engine mandatory group=xor {\n    feature Diesel\n") != std::string::npos);
  CHECK(text.find("requires ACC Radar\n") != std::string::npos);
  CHECK(text.find("asset \"chassis\" \"Chassis frame\" kind=part when always\n") != std::string::npos);
  CHECK(text.find(std::string(kConstraintsLabel)) == std::string::npos);

  const LoadedModel plain = load_fixture("leaves10.fm");
  CHECK(serialize_model(plain.base, plain.constraints, plain.catalog).find("asset") == std::string::npos);

  const LoadedModel quoted = parse_model("model \"Q\"\nfeature R { feature \"Lane Keep\" }\n");
  CHECK(serialize_model(quoted.base, {}, {}).find("feature \"Lane Keep\"") != std::string::npos);
}

TEST_CASE("serialize/parse round trip on every fixture") {
  const auto names = loadable_fixtures();
  CHECK(names.size() >= 7);
  for (const auto& name : names) {
    CAPTURE(name);
    const LoadedModel a = load_fixture(name);
    const std::string once = serialize_model(a.base, a.constraints, a.catalog);
    const LoadedModel b = parse_model(once);
    check_same_document(a, b);
    CHECK(serialize_model(b.base, b.constraints, b.catalog) == once);
  }
}

TEST_CASE("serialize/parse round trip on random models") {
  std::mt19937_64 rng(31);
  for (int i = 0; i < 100; ++i) {
    RandomModelOptions o;
    o.max_constraints = 0;
    const FeatureModel base = random_model(rng, o);
    std::vector<ConstraintDecl> decls{ConstraintDecl::constraint(
        "k", random_formula(rng, {"F1", "F2"}, 3))};
    if (!base.has_label("F2")) continue;
    const std::string text = serialize_model(base, decls, {});
    const LoadedModel back = parse_model(text);
    CHECK(same_tree(back.base, base));
    CHECK(serialize_model(back.base, back.constraints, {}) == text);
    CHECK(back.constraints == decls);
  }
}

TEST_CASE("dot export") {
  const LoadedModel car = load_fixture("car.fm");
  const FeatureModel& m = *car.model;
  const std::string dot = export_dot(m);
  CHECK(dot.rfind("digraph", 0) == 0);
  const std::string engine = m.boxes_with_label("Engine").front().str();
  const std::string diesel = m.boxes_with_label("Diesel").front().str();
  CHECK(dot.find(engine + " [label=\"Engine\", fillcolor=\"lightblue\"") != std::string::npos);
  CHECK(dot.find(diesel + " [label=\"Diesel\", fillcolor=\"red\"") != std::string::npos);
  CHECK(dot.find("fillcolor=\"white\"") != std::string::npos);
  CHECK(dot.find("color=\"green\"") == std::string::npos);
  CHECK(export_dot(m) == dot);

  ConfigState s = initial_state(car.model);
  s = decide(s, "Diesel", Action::Select).state;
  const std::string colored = export_dot(m, &s);
  const auto line = [&](const std::string& id) {
    const auto at = colored.find("  " + id + " [");
    return colored.substr(at, colored.find('\n', at) - at);
  };
  CHECK(line(diesel).find("color=\"green\"") != std::string::npos);
  CHECK(line(m.boxes_with_label("Gasoline").front().str()).find("color=\"gray\"") != std::string::npos);
  CHECK(line(m.boxes_with_label("Towbar").front().str()).find("penwidth") == std::string::npos);
}

TEST_CASE("config export/import round trip on random walks") {
  const auto names = loadable_fixtures();
  std::mt19937_64 rng(41);
  for (const auto& name : names) {
    CAPTURE(name);
    const LoadedModel lm = load_fixture(name);
    std::optional<ConfigState> s0;
    try {
      s0 = initial_state(lm.model);
    } catch (const Error&) {
      continue;
    }
    auto hook = [&](const ConfigState&, const ConfigState& after, BoxId, Action) {
      const ImportedConfig back = import_config(lm.model, export_config(after));
      CHECK(back.warnings.empty());
      CHECK(back.state == after);
    };
    for (int w = 0; w < 3; ++w) random_walk(*s0, rng, hook);
    CHECK(import_config(lm.model, export_config(*s0)).state == *s0);
  }
}

TEST_CASE("config import checks") {
  const LoadedModel car = load_fixture("car.fm");
  ConfigState s = initial_state(car.model);
  s = decide(s, "Diesel", Action::Select).state;
  s = decide(s, "Towbar", Action::Select).state;
  const std::string text = export_config(s);
  CHECK(text.find("\"format\": \"colorfm-config\"") != std::string::npos);

  SUBCASE("unknown label") {
    std::string bad = text;
    bad.replace(bad.find("\"Towbar\""), 8, "\"Towhook\"");
    try {
      import_config(car.model, bad);
      FAIL("expected unknown-label");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::UnknownLabel);
      CHECK(std::string(e.what()).find("Towhook") != std::string::npos);
    }
  }
  SUBCASE("fingerprint drift with a replayable journal") {
    std::string doc = fixture_text("car.fm");
    doc.replace(doc.find("feature Towbar"), 14, "feature Towbar\n  feature Spoiler");
    const LoadedModel evolved = parse_model(doc);
    const ImportedConfig r = import_config(evolved.model, text);
    REQUIRE(r.warnings.size() == 1);
    CHECK(r.warnings[0].find("different model") != std::string::npos);
    CHECK(r.state.label_state("Diesel") == BoxState::Selected);
  }
  SUBCASE("replay divergence") {
    std::string doc = fixture_text("car.fm");
    doc.replace(doc.find("excludes Sunroof RoofRack"), 25, "excludes Diesel Towbar");
    const LoadedModel changed = parse_model(doc);
    try {
      import_config(changed.model, text);
      FAIL("expected replay-divergence");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::ReplayDivergence);
    }
  }
  SUBCASE("malformed") {
    CHECK_THROWS_AS(import_config(car.model, "{ not json"), Error);
    CHECK_THROWS_AS(import_config(car.model, "{\"format\": \"other\"}"), Error);
    try {
      import_config(car.model, "{\"format\": \"colorfm-config\", \"journal\": [{\"label\": 3, \"action\": 1}]}");
      FAIL("expected syntax error");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::Syntax);
    }
  }
}

TEST_CASE("files") {
  CHECK_THROWS_AS(read_text_file("/nonexistent/x.fm"), Error);
  const auto tmp = std::filesystem::temp_directory_path() / "colorfm_io_test.txt";
  write_text_file(tmp, "hello\n");
  CHECK(read_text_file(tmp) == "hello\n");
  std::filesystem::remove(tmp);
}
