#include <catch_amalgamated.hpp>

#include "chp/settlement.hpp"
#include "support/fixtures.hpp"

using namespace chp;
using chp_test::run_pipeline;

TEST_CASE("single period lossless: surplus is the initial-state impact alone") {
  Instance inst = chp_test::heat_pair(1, 0.5, 0.0, 10.0);
  auto run = run_pipeline(inst);
  REQUIRE(run.sol.optimal());
  REQUIRE(run.surplus.heat.size() == 1);
  const HeatSurplusRow& row = run.surplus.heat[0];
  CHECK(row.congestion_rent == Catch::Approx(0.0).margin(1e-9));
  CHECK(row.impact_upcoming == 0.0);  // terminal convention
  CHECK(row.direct == Catch::Approx(row.impact_last).margin(1e-6));
  CHECK(run.surplus.heat_total ==
        Catch::Approx(run.surplus.heat_total_decomposed).margin(1e-6));
}

TEST_CASE("uncongested network earns the electricity operator nothing") {
  auto run = run_pipeline(chp_test::two_bus_congested(1000.0, 30.0));
  REQUIRE(run.sol.optimal());
  CHECK(std::abs(run.surplus.elec_direct[0]) < 1e-7);
  CHECK(run.surplus.elec_rent[0] == Catch::Approx(0.0).margin(1e-9));
}

TEST_CASE("binding line: per-period surplus equals sigma times the limit") {
  auto run = run_pipeline(chp_test::two_bus_congested(10.0, 30.0));
  REQUIRE(run.sol.optimal());
  CHECK(run.surplus.elec_direct[0] == Catch::Approx(400.0).margin(1e-6));
  CHECK(std::abs(run.surplus.elec_direct[0] - run.surplus.elec_rent[0]) < 1e-6);
}

TEST_CASE("reference instance: per-period identities, terminal convention, conservation") {
  auto run = run_pipeline(chp_test::load_reference());
  REQUIRE(run.sol.optimal());
  for (const HeatSurplusRow& row : run.surplus.heat)
    CHECK(std::abs(row.gap()) < 1e-6);
  CHECK(run.surplus.heat.back().impact_upcoming == 0.0);
  CHECK(run.surplus.worst_elec_gap() < 1e-6);
  CHECK(std::abs(run.surplus.conservation_gap) < 1e-6);
  CHECK(run.surplus.heat_total >= -1e-6);
  CHECK(run.surplus.min_elec_period() >= -1e-6);

  // horizon decomposition: total equals sum CR + initial impact (constant ambient)
  CHECK(run.surplus.heat_total ==
        Catch::Approx(run.surplus.heat_total_decomposed).margin(1e-6));

  // CR and IL stay nonnegative in the above-ambient regime
  REQUIRE(run.surplus.temperature_ordering_ok);
  for (const HeatSurplusRow& row : run.surplus.heat) {
    CHECK(row.congestion_rent >= -1e-9);
    CHECK(row.impact_last >= -1e-6);
  }
}

TEST_CASE("randomized sweep holds every identity (seed 0, 20 instances)") {
  SweepReport rep = property_sweep(0, 20);
  INFO(rep.to_string());
  CHECK(rep.violations == 0);
  int optimal = 0;
  for (const auto& e : rep.entries)
    if (e.status == QpStatus::Optimal) ++optimal;
  CHECK(optimal >= 15);  // most random draws should clear
}
