#include <catch_amalgamated.hpp>

#include "chp/validate.hpp"
#include "support/fixtures.hpp"

using namespace chp;

namespace {

bool has_violation(const ValidationReport& rep, const std::string& invariant) {
  for (const auto& v : rep.violations)
    if (v.invariant == invariant) return true;
  return false;
}

}  // namespace

TEST_CASE("reference instance validates") {
  Instance inst = chp_test::load_reference();
  ValidationReport rep = validate(inst);
  INFO(rep.to_string());
  CHECK(rep.pass());
  CHECK(inst.grid.electricity_periods == 16);
  CHECK(inst.grid.heat_periods == 4);
}

TEST_CASE("divisible time grid passes, ragged one fails") {
  Instance inst = chp_test::single_bus();
  inst.grid = {0.25, 1.0, 16, 4};
  for (Bus& b : inst.electric.buses) b.load_mw.assign(16, 50.0);
  CHECK(validate(inst).pass());

  inst.grid = {0.3, 1.0, 16, 4};
  CHECK(has_violation(validate(inst),
                      "heat step not an integer multiple of electricity step"));
}

TEST_CASE("non-convex cost is rejected") {
  Instance inst = chp_test::load_reference();
  GenerationUnit& chp1 = inst.units[inst.unit_index("CHP1")];
  chp1.cost.heat_quadratic = 1.0;
  chp1.cost.power_quadratic = 1.0;
  chp1.cost.cross = 3.0;  // 4*1*1 < 9
  CHECK(has_violation(validate(inst), "non-convex cost"));
}

TEST_CASE("back-pressure unit needs the affine pair") {
  Instance inst = chp_test::load_reference();
  GenerationUnit& bp = inst.units[inst.unit_index("CHP2")];
  // drop the second half of the pair
  std::vector<PolytopeRow> rows;
  for (const PolytopeRow& r : bp.region)
    if (!(r.power_coeff < 0)) rows.push_back(r);
  bp.region = rows;
  CHECK(has_violation(validate(inst), "unpaired linear relation"));
}

TEST_CASE("four-vertex extraction region and 1-D back-pressure segment are accepted") {
  std::vector<PolytopeRow> ec = {
      {1.0, -7.0 / 30.0, 45.0},
      {1.0, 11.0 / 3.0, 162.0},
      {-1.0, 1.0 / 6.0, -24.0},
      {0.0, -1.0, 0.0},
  };
  RegionGeometry g = analyze_region(ec, true, true);
  CHECK(g.bounded);
  CHECK_FALSE(g.empty);
  CHECK(g.max_heat == Catch::Approx(36.0));
  CHECK(g.max_power == Catch::Approx(52.0));
  CHECK(g.min_power == Catch::Approx(24.0));

  std::vector<PolytopeRow> bp = {
      {1.0, -0.58, 1.5}, {-1.0, 0.58, -1.5}, {0.0, -1.0, -4.0}, {0.0, 1.0, 24.0}};
  RegionGeometry s = analyze_region(bp, true, true);
  CHECK(s.bounded);
  CHECK_FALSE(s.empty);
  CHECK(s.min_heat == Catch::Approx(4.0));
  CHECK(s.max_heat == Catch::Approx(24.0));
}

TEST_CASE("unbounded and empty regions are flagged") {
  // no upper bound on heat
  RegionGeometry open = analyze_region({{1.0, 0.0, 10.0}, {0.0, -1.0, 0.0}}, true, true);
  CHECK_FALSE(open.bounded);

  RegionGeometry empty =
      analyze_region({{1.0, 0.0, 1.0}, {-1.0, 0.0, -2.0}, {0.0, 1.0, 5.0}, {0.0, -1.0, 0.0}},
                     true, true);
  CHECK(empty.bounded);
  CHECK(empty.empty);

  Instance inst = chp_test::single_bus();
  inst.units[0].region = {{1.0, 0.0, 100.0}};  // no lower bound
  CHECK(has_violation(validate(inst), "unbounded feasible region"));
}

TEST_CASE("structural referencing problems are reported") {
  Instance inst = chp_test::load_reference();

  SECTION("unknown bus") {
    inst.units[0].bus = "nowhere";
    CHECK(has_violation(validate(inst), "unknown bus"));
  }
  SECTION("duplicate node id") {
    inst.heat.nodes.push_back(inst.heat.nodes.front());
    CHECK(has_violation(validate(inst), "duplicate id"));
  }
  SECTION("disconnected electric graph") {
    inst.electric.buses.push_back({"ISLAND", std::vector<double>(16, 0.0)});
    CHECK(has_violation(validate(inst), "disconnected graph"));
  }
  SECTION("load at source node") {
    for (HeatNode& n : inst.heat.nodes)
      if (n.kind == NodeKind::Source) n.load_mw[0] = 5.0;
    CHECK(has_violation(validate(inst), "nonzero load at source node"));
  }
  SECTION("series length mismatch") {
    inst.heat.nodes[0].exchanger_flow_kg_per_s.pop_back();
    CHECK(has_violation(validate(inst), "series length mismatch"));
  }
  SECTION("pipeline too slow") {
    inst.heat.pipelines[0].length_m *= 50.0;
    CHECK(has_violation(validate(inst), "transport exceeds one heat period"));
  }
  SECTION("requirement below ambient") {
    inst.heat.nodes[2].required_supply_c.assign(4, 5.0);
    CHECK(has_violation(validate(inst), "requirement below ambient"));
  }
  SECTION("source without a unit") {
    inst.units.erase(inst.units.begin() + inst.unit_index("CHP2"));
    CHECK(has_violation(validate(inst), "source node without heat unit"));
  }
}
