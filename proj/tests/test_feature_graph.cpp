#include <doctest.h>

#include "colorfm/feature_graph.hpp"
#include "support.hpp"

using namespace colorfm;
using colorfm::testing::load_fixture;

namespace {

FeatureModel car_base() { return load_fixture("car.fm").base; }

BoxId first(const FeatureModel& m, std::string_view label) {
  return m.boxes_with_label(label).front();
}

}  // namespace

TEST_CASE("box ids print and parse") {
  CHECK(BoxId{7}.str() == "b7");
  CHECK(parse_box_id("b12") == BoxId{12});
  CHECK_FALSE(parse_box_id("12"));
  CHECK_FALSE(parse_box_id("b"));
  CHECK_FALSE(parse_box_id("bx"));
}

TEST_CASE("groups") {
  CHECK(parse_group("XOR") == Group::Xor);
  CHECK(parse_group("mutex") == Group::Mutex);
  CHECK_FALSE(parse_group("and"));
  CHECK(needs_one_child(Group::Or));
  CHECK(needs_one_child(Group::Xor));
  CHECK_FALSE(needs_one_child(Group::Mutex));
  CHECK(allows_one_child(Group::Mutex));
  CHECK_FALSE(allows_one_child(Group::Or));
}

TEST_CASE("car model validates") {
  const FeatureModel m = car_base();
  CHECK(validate_model(m).ok());
  const Box& engine = m.box(first(m, "Engine"));
  CHECK(engine.mandatory);
  CHECK(engine.group == Group::Xor);
  CHECK(engine.children.size() == 4);
}

TEST_CASE("validation rules") {
  SUBCASE("mandatory child under an optional parent is fine") {
    ModelBuilder b("M", "R");
    const BoxId a = b.add(b.root(), "A");
    b.add(a, "B", true);
    CHECK(validate_model(b.build()).ok());
  }
  SUBCASE("empty label") {
    ModelBuilder b("M", "R");
    b.add(b.root(), "");
    CHECK(validate_model(b.build()).has("empty-label"));
  }
  SUBCASE("group without children") {
    ModelBuilder b("M", "R");
    b.add(b.root(), "G", false, Group::Or);
    CHECK(validate_model(b.build()).has("group-needs-children"));
  }
  SUBCASE("root must be mandatory") {
    ModelBuilder b("M", "R");
    b.at(b.root()).mandatory = false;
    CHECK(validate_model(b.build()).has("root-mandatory"));
  }
  SUBCASE("parent link mismatch") {
    ModelBuilder b("M", "R");
    const BoxId a = b.add(b.root(), "A");
    const BoxId c = b.add(b.root(), "C");
    b.at(c).parent = a;
    const ValidationReport r = validate_model(b.build());
    CHECK(r.has("parent-link"));
  }
  SUBCASE("reserved label outside the constraints branch") {
    ModelBuilder b("M", "R");
    b.add(b.root(), std::string(kConstraintsLabel));
    CHECK(validate_model(b.build()).has("reserved-label"));
  }
  SUBCASE("constraints branch must hang mandatory off the root") {
    ModelBuilder b("M", "R");
    const BoxId a = b.add(b.root(), "A");
    const BoxId c = b.add(a, std::string(kConstraintsLabel));
    b.set_constraints_root(c);
    CHECK(validate_model(b.build()).has("constraints-placement"));
  }
}

TEST_CASE("structural colors") {
  const FeatureModel m = car_base();
  CHECK(structural_color(m, first(m, "Engine")) == StructuralColor::Blue);
  for (const char* c : {"Diesel", "Gasoline", "Hybrid", "Electric"})
    CHECK(structural_color(m, first(m, c)) == StructuralColor::Red);
  CHECK(structural_color(m, first(m, "ACC")) == StructuralColor::White);
  // An OR head is blue; its children stay white.
  CHECK(structural_color(m, first(m, "Sensors")) == StructuralColor::Blue);
  CHECK(structural_color(m, first(m, "Radar")) == StructuralColor::White);
}

TEST_CASE("red takes precedence over mandatory") {
  ModelBuilder b("M", "R");
  const BoxId g = b.add(b.root(), "G", true, Group::Mutex);
  const BoxId x = b.add(g, "X", true);
  b.add(g, "Y");
  const FeatureModel m = b.build();
  CHECK(structural_color(m, x) == StructuralColor::Red);
  CHECK(structural_color(m, g) == StructuralColor::Blue);
}

TEST_CASE("state colors and size mismatch") {
  const FeatureModel m = car_base();
  std::vector<BoxState> states(m.size(), BoxState::Open);
  states[first(m, "Diesel").value] = BoxState::Selected;
  states[first(m, "Gasoline").value] = BoxState::Discarded;
  const ColorView v = render_colors(m, states);
  REQUIRE(v.state);
  CHECK((*v.state)[first(m, "Diesel").value] == StateColor::Green);
  CHECK((*v.state)[first(m, "Gasoline").value] == StateColor::Gray);
  CHECK((*v.state)[first(m, "Hybrid").value] == StateColor::None);
  states.pop_back();
  CHECK_THROWS_AS(render_colors(m, states), Error);
}

TEST_CASE("shared labels") {
  const FeatureModel m = load_fixture("shared.fm").base;
  const auto groups = shared_label_groups(m);
  REQUIRE(groups.count("Heater") == 1);
  CHECK(groups.at("Heater").size() == 2);
  std::size_t linked = 0;
  std::size_t total = 0;
  for (const auto& [label, ids] : groups) {
    total += ids.size();
    if (ids.size() >= 2) ++linked;
  }
  CHECK(linked == 1);
  CHECK(total == m.size());
  CHECK(m.boxes_with_label("Heater").size() == 2);
  CHECK(m.boxes_with_label("Nope").empty());
}

TEST_CASE("fingerprint tracks structure") {
  const FeatureModel a = car_base();
  const FeatureModel b = car_base();
  CHECK(model_fingerprint(a) == model_fingerprint(b));
  ModelBuilder mb(a);
  mb.at(first(a, "ACC")).mandatory = true;
  CHECK(model_fingerprint(mb.build()) != model_fingerprint(a));
  CHECK(fingerprint_hex(0xabc).size() == 16);
}

TEST_CASE("unknown box throws") {
  const FeatureModel m = car_base();
  CHECK_THROWS_AS(m.box(BoxId{9999}), Error);
  CHECK(error_code_name(ErrorCode::VoidModel) == "void-model");
}
