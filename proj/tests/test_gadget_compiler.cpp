#include <doctest.h>

#include <algorithm>
#include <random>

#include "colorfm/analysis.hpp"
#include "colorfm/gadget_compiler.hpp"
#include "support.hpp"

using namespace colorfm;
using namespace colorfm::testing;

namespace {

FeatureModel car_base() { return load_fixture("car.fm").base; }

ConfigState start(const FeatureModel& m) { return initial_state(share(m)); }

ConfigState apply(const ConfigState& s, std::string_view label, Action a) {
  DecideResult r = decide(s, label, a);
  REQUIRE(r.report.accepted);
  return r.state;
}

// Base solutions satisfying f, projected onto the base labels.
std::set<Assignment> expected(const FeatureModel& base, const Formula& f) {
  std::set<Assignment> out;
  const SolutionSet sols = enumerate_unpruned(base);
  for (std::size_t i = 0; i < sols.size(); ++i) {
    Assignment a = sols.at(i);
    if (evaluate(f, a, UnknownPolicy::DefaultFalse)) out.insert(std::move(a));
  }
  return out;
}

std::set<Assignment> projected(const FeatureModel& compiled, const FeatureModel& base) {
  return enumerate(compiled).project(base.labels());
}

FeatureModel abcd() {
  ModelBuilder b("Four", "R");
  for (const char* l : {"A", "B", "C", "D"}) b.add(b.root(), l);
  return b.build();
}

}  // namespace

TEST_CASE("excludes discards the other side, both ways") {
  const FeatureModel m = compile_excludes(car_base(), "Sunroof", "RoofRack");
  CHECK(validate_model(m).ok());
  ConfigState s = apply(start(m), "Sunroof", Action::Select);
  CHECK(s.label_state("RoofRack") == BoxState::Discarded);
  s = apply(start(m), "RoofRack", Action::Select);
  CHECK(s.label_state("Sunroof") == BoxState::Discarded);
  // Neither is forced: discarding both is fine.
  s = apply(start(m), "RoofRack", Action::Discard);
  CHECK(s.label_state("Sunroof") == BoxState::Open);
}

TEST_CASE("excludes and requires reject bad labels") {
  const FeatureModel m = car_base();
  CHECK_THROWS_AS(compile_excludes(m, "ACC", "ACC"), Error);
  CHECK_THROWS_AS(compile_requires(m, "ACC", "ACC"), Error);
  try {
    compile_requires(m, "ACC", "Lidar");
    FAIL("expected unknown-label");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::UnknownLabel);
  }
  try {
    compile_excludes(m, "Sunroof", "Sunroof");
    FAIL("expected same-label");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::SameLabel);
  }
}

TEST_CASE("requires forces the target, never the reverse") {
  const FeatureModel m = compile_requires(car_base(), "ACC", "Radar");
  CHECK(validate_model(m).ok());
  ConfigState s = apply(start(m), "ACC", Action::Select);
  CHECK(s.label_state("Radar") == BoxState::Selected);
  CHECK(s.label_state("Sensors") == BoxState::Selected);
  s = apply(start(m), "Radar", Action::Select);
  CHECK(s.label_state("ACC") == BoxState::Open);
  // Oracle: a product with Radar and without ACC exists.
  const auto sols = enumerate(m).project({"ACC", "Radar"});
  CHECK(sols.count(Assignment{{"ACC", false}, {"Radar", true}}) == 1);
  CHECK(sols.count(Assignment{{"ACC", true}, {"Radar", false}}) == 0);
}

TEST_CASE("requires chains propagate") {
  ModelBuilder b("Chain", "R");
  for (const char* l : {"A", "B", "C"}) b.add(b.root(), l);
  FeatureModel m = compile_requires(b.build(), "A", "B");
  m = compile_requires(m, "B", "C");
  const ConfigState s = apply(start(m), "A", Action::Select);
  CHECK(s.label_state("B") == BoxState::Selected);
  CHECK(s.label_state("C") == BoxState::Selected);
  CHECK(enumerate(m).project({"A", "C"}).count(Assignment{{"A", true}, {"C", false}}) == 0);
}

TEST_CASE("mutual requires makes labels equivalent") {
  const FeatureModel base = abcd();
  const FeatureModel m = compile_requires(compile_requires(base, "A", "B"), "B", "A");
  const SolutionSet sols = enumerate(m);
  REQUIRE_FALSE(sols.empty());
  for (std::size_t i = 0; i < sols.size(); ++i) {
    const Assignment a = sols.at(i);
    CHECK(a.at("A") == a.at("B"));
  }
  CHECK(sols.project({"A", "B"}).size() == 2);
}

TEST_CASE("NOT gadget: fresh label is the negation") {
  ModelBuilder b("Not", "R");
  b.add(b.root(), "A");
  const FeatureModel base = b.build();
  FreshLabelPolicy policy;
  const Formula f = Formula::negate(Formula::atom("A"));
  const CompiledFormula c = compile_formula(base, f, policy);
  CHECK(validate_model(c.model).ok());
  // Compiling !A forces A false; a sandbox NOT of a subformula is in `labels`.
  REQUIRE(c.labels.count(f.to_string()) == 1);
  const SolutionSet sols = enumerate(c.model);
  CHECK(sols.project({"A"}) == std::set<Assignment>{{{"A", false}}});
  const std::string neg = c.labels.at(f.to_string());
  for (std::size_t i = 0; i < sols.size(); ++i) CHECK(sols.at(i).at(neg) == !sols.at(i).at("A"));
}

TEST_CASE("NOT gadget inside a disjunction keeps both projections") {
  ModelBuilder b("NotOr", "R");
  b.add(b.root(), "A");
  b.add(b.root(), "Z");
  const FeatureModel base = b.build();
  FreshLabelPolicy policy;
  // (!A | Z): A can be either value overall; when A is true Z is needed.
  const Formula f = parse_formula("!A | Z");
  const CompiledFormula c = compile_formula(base, f, policy);
  CHECK(projected(c.model, base) == expected(base, f));
  const std::string neg = c.labels.at("!A");
  const SolutionSet sols = enumerate(c.model);
  CHECK(sols.project({"A"}).size() == 2);
  for (std::size_t i = 0; i < sols.size(); ++i) CHECK(sols.at(i).at(neg) == !sols.at(i).at("A"));
}

TEST_CASE("implication with a disjunction") {
  const FeatureModel base = load_fixture("car.fm").base;
  FreshLabelPolicy policy = FreshLabelPolicy::after(base);
  const CompiledFormula c =
      compile_formula(base, parse_formula("ACC => (Radar | Camera)"), policy);
  const ConfigState s0 = start(c.model);

  // With both sensors gone, ACC is discarded before it can be chosen.
  ConfigState s = apply(s0, "Radar", Action::Discard);
  s = apply(s, "Camera", Action::Discard);
  CHECK(s.label_state("ACC") == BoxState::Discarded);
  CHECK_THROWS_AS(decide(s, "ACC", Action::Select), Error);

  // ACC first: dropping the whole sensor branch contradicts it.
  s = apply(s0, "ACC", Action::Select);
  const DecideResult r = decide(s, "Sensors", Action::Discard);
  CHECK_FALSE(r.report.accepted);
  REQUIRE(r.report.conflict);
  CHECK(r.state == s);

  // Oracle agrees: no product has ACC without a sensor.
  const auto proj = enumerate(c.model).project({"ACC", "Radar", "Camera"});
  CHECK(proj.count(Assignment{{"ACC", true}, {"Camera", false}, {"Radar", false}}) == 0);
  CHECK(proj.count(Assignment{{"ACC", true}, {"Camera", true}, {"Radar", false}}) == 1);
}

TEST_CASE("constants") {
  const FeatureModel base = abcd();
  FreshLabelPolicy policy;
  const CompiledFormula t = compile_formula(base, Formula::truth(), policy);
  CHECK(model_fingerprint(t.model) == model_fingerprint(base));
  CHECK(t.boxes_added == 0);
  const CompiledFormula f = compile_formula(base, Formula::falsity(), policy);
  CHECK(validate_model(f.model).ok());
  CHECK(enumerate(f.model).empty());
  CHECK_THROWS_AS(initial_state(share(f.model)), Error);
}

TEST_CASE("compile_all composition") {
  const FeatureModel base = car_base();
  CHECK(model_fingerprint(compile_all(base, {})) == model_fingerprint(base));

  const std::vector<ConstraintDecl> two{ConstraintDecl::excludes("Sunroof", "RoofRack"),
                                        ConstraintDecl::requires_("ACC", "Radar")};
  const FeatureModel m = compile_all(base, two);
  REQUIRE(m.constraints_root());
  const Box& head = m.box(*m.constraints_root());
  CHECK(head.mandatory);
  CHECK(head.children.size() == 2);
  CHECK(m.box(head.children[0]).group == Group::Xor);
  CHECK(m.box(head.children[1]).label == "Radar");

  // Same declarations twice: distinct boxes, same products.
  std::vector<ConstraintDecl> dup = two;
  dup.insert(dup.end(), two.begin(), two.end());
  const FeatureModel m2 = compile_all(base, dup);
  CHECK(m2.size() > m.size());
  CHECK(enumerate(m2).project(base.labels()) == enumerate(m).project(base.labels()));
}

TEST_CASE("compile_all reports the failing declaration") {
  const std::vector<ConstraintDecl> decls{ConstraintDecl::requires_("ACC", "Radar"),
                                          ConstraintDecl::excludes("Sunroof", "Moonroof")};
  try {
    compile_all(car_base(), decls);
    FAIL("expected error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::UnknownLabel);
    CHECK(std::string(e.what()).find("constraint #2") != std::string::npos);
    CHECK(std::find(e.details().begin(), e.details().end(), "declaration=1") != e.details().end());
  }
}

TEST_CASE("compilation only appends boxes") {
  const FeatureModel base = load_fixture("mutex.fm").base;
  const FeatureModel m = load_fixture("mutex.fm").model ? *load_fixture("mutex.fm").model : base;
  REQUIRE(m.size() > base.size());
  for (const Box& b : base.boxes()) {
    const Box& c = m.box(b.id);
    CHECK(c.label == b.label);
    CHECK(c.parent == b.parent);
    CHECK(c.mandatory == b.mandatory);
    CHECK(c.group == b.group);
    if (b.id == base.root()) continue;
    CHECK(c.children == b.children);
  }
  for (const Box& b : m.boxes())
    if (b.id.value >= base.size()) CHECK(m.in_constraints_branch(b.id));
}

TEST_CASE("fresh labels skip existing ones") {
  ModelBuilder b("Fresh", "R");
  b.add(b.root(), "A");
  b.add(b.root(), "_c0");
  b.add(b.root(), "_c4");
  const FeatureModel base = b.build();
  FreshLabelPolicy p = FreshLabelPolicy::after(base);
  CHECK(p.next(base) == "_c5");
  FreshLabelPolicy clash;
  CHECK_THROWS_AS(clash.next(base), Error);
  const FeatureModel m = compile_excludes(base, "A", "_c0");
  for (const auto& l : m.labels())
    if (!base.has_label(l) && l != kConstraintsLabel) CHECK(l.rfind("_c", 0) == 0);
}

TEST_CASE("random formulas: both encodings match the truth table") {
  std::mt19937_64 rng(2024);
  const FeatureModel base = abcd();
  const std::vector<std::string> labels{"A", "B", "C", "D"};
  for (int i = 0; i < 120; ++i) {
    const Formula f = random_formula(rng, labels, 3);
    CAPTURE(f.to_string());
    const auto want = expected(base, f);
    for (Encoding enc : {Encoding::Structural, Encoding::ViaDnf}) {
      FreshLabelPolicy policy;
      const CompiledFormula c = compile_formula(base, f, policy, enc);
      CHECK(validate_model(c.model).ok());
      CHECK(projected(c.model, base) == want);
    }
  }
}

TEST_CASE("define_formula leaves products alone and names the formula") {
  std::mt19937_64 rng(77);
  const FeatureModel base = abcd();
  const std::vector<std::string> labels{"A", "B", "C", "D"};
  const auto base_solutions = enumerate(base).project(base.labels());
  for (int i = 0; i < 60; ++i) {
    const Formula f = random_formula(rng, labels, 3);
    CAPTURE(f.to_string());
    FreshLabelPolicy policy;
    const CompiledFormula c = define_formula(base, f, policy);
    if (c.top.empty()) {
      CHECK(c.boxes_added == 0);
      continue;
    }
    const SolutionSet sols = enumerate(c.model);
    CHECK(sols.project(base.labels()) == base_solutions);
    for (std::size_t k = 0; k < sols.size(); ++k) {
      const Assignment a = sols.at(k);
      CHECK(a.at(c.top) == evaluate(f, a, UnknownPolicy::DefaultFalse));
    }
  }
}
