#include <doctest.h>

#include <random>

#include "colorfm/asset_catalog.hpp"
#include "support.hpp"

using namespace colorfm;
using namespace colorfm::testing;

namespace {

Asset asset(std::string id, const char* when) {
  Asset a;
  a.id = id;
  a.name = id;
  a.kind = AssetKind::Part;
  if (when) a.criterion = parse_formula(when);
  return a;
}

}  // namespace

TEST_CASE("asset kinds") {
  CHECK(parse_asset_kind("software") == AssetKind::Software);
  CHECK(parse_asset_kind("PROCEDURE") == AssetKind::Procedure);
  CHECK_FALSE(parse_asset_kind("widget"));
  CHECK(asset_kind_name(AssetKind::Tool) == "tool");
}

TEST_CASE("catalog ids are unique") {
  CHECK_THROWS_AS(Catalog({asset("x", nullptr), asset("x", "A")}), Error);
  CHECK_THROWS_AS(Catalog({asset("", nullptr)}), Error);
  const Catalog c({asset("x", nullptr), asset("y", "A")});
  CHECK(c.find("y") != nullptr);
  CHECK(c.find("z") == nullptr);
}

TEST_CASE("binding criteria to the model") {
  const FeatureModel m = load_fixture("car.fm").base;
  CHECK(bind_catalog(Catalog({asset("radar-unit", "Radar")}), m).ok());
  CHECK(bind_catalog(Catalog({asset("chassis", nullptr)}), m).ok());
  const ValidationReport r = bind_catalog(Catalog({asset("radar-unit", "Raddar | Camera")}), m);
  REQUIRE(r.violations.size() == 1);
  CHECK(r.violations[0].rule == "unknown-label");
  CHECK(r.violations[0].message.find("Raddar") != std::string::npos);
}

TEST_CASE("filter_complete") {
  const Catalog c({asset("radar-unit", "Radar"), asset("diesel-tank", "Diesel"),
                   asset("chassis", nullptr)});
  const FilterResult r =
      filter_complete(c, {{"Radar", true}, {"Diesel", false}});
  CHECK(r.included == std::vector<std::string>{"radar-unit", "chassis"});
  CHECK(r.excluded == std::vector<std::string>{"diesel-tank"});
  CHECK(r.undecided.empty());
  CHECK_THROWS_AS(filter_complete(c, {{"Radar", true}}), Error);
  CHECK(filter_complete(c, {{"Radar", true}}, UnknownPolicy::DefaultFalse).excluded.size() == 1);
}

TEST_CASE("filter_complete follows catalog order") {
  const Catalog a({asset("p", "A"), asset("q", "!A"), asset("r", nullptr)});
  const Catalog b({asset("r", nullptr), asset("q", "!A"), asset("p", "A")});
  const Assignment x{{"A", true}};
  const FilterResult ra = filter_complete(a, x);
  const FilterResult rb = filter_complete(b, x);
  CHECK(ra.included == std::vector<std::string>{"p", "r"});
  CHECK(rb.included == std::vector<std::string>{"r", "p"});
  CHECK(ra.excluded == rb.excluded);
}

TEST_CASE("filter_partial uses Kleene logic") {
  const LoadedModel car = load_fixture("car.fm");
  ConfigState s = initial_state(car.model);
  FilterResult r = filter_partial(car.catalog, s);
  CHECK(std::count(r.undecided.begin(), r.undecided.end(), "radar-unit") == 1);
  CHECK(r.included == std::vector<std::string>{"chassis"});

  const Catalog either({asset("fuel", "Diesel | Gasoline")});
  s = decide(s, "Diesel", Action::Select).state;
  CHECK(filter_partial(either, s).included == std::vector<std::string>{"fuel"});

  const Catalog foreign({asset("x", "Warp")});
  CHECK_THROWS_AS(filter_partial(foreign, s), Error);
}

TEST_CASE("filter_partial on a complete state equals filter_complete") {
  const LoadedModel car = load_fixture("car.fm");
  std::mt19937_64 rng(21);
  for (int i = 0; i < 30; ++i) {
    auto done = random_walk(initial_state(car.model), rng);
    REQUIRE(done);
    const FilterResult p = filter_partial(car.catalog, *done);
    const FilterResult c = filter_complete(car.catalog, final_assignment(*done));
    CHECK(p == c);
    CHECK(p.undecided.empty());
    CHECK(p.included.size() + p.excluded.size() == car.catalog.size());
  }
}

TEST_CASE("decided labels") {
  const LoadedModel car = load_fixture("car.fm");
  const ConfigState s = initial_state(car.model);
  const Assignment a = decided_labels(s);
  CHECK(a.at("Engine"));
  CHECK(a.count("Diesel") == 0);
}

TEST_CASE("CSV") {
  const Catalog c({Asset{"a,1", "Name \"quoted\"", AssetKind::Software, std::nullopt},
                   asset("b", "X")});
  FilterResult r;
  r.included = {"a,1"};
  r.undecided = {"b"};
  r.rows = {{"a,1", AssetStatus::Included}, {"b", AssetStatus::Undecided}};
  CHECK(filter_csv(c, r) ==
        "id,name,kind,status\n\"a,1\",\"Name \"\"quoted\"\"\",software,included\n"
        "b,b,part,undecided\n");
}
