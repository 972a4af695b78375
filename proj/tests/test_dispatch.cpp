#include <catch_amalgamated.hpp>

#include "chp/dispatch.hpp"
#include "support/admm_oracle.hpp"
#include "support/fixtures.hpp"

using namespace chp;
using chp_test::run_pipeline;

TEST_CASE("degenerate single-bus problem reduces to the forced dispatch") {
  auto run = run_pipeline(chp_test::single_bus(100.0, 10.0, 0.1));
  REQUIRE(run.sol.optimal());
  CHECK(run.sol.gp(0, 0) == Catch::Approx(100.0).margin(1e-7));
  CHECK(run.sol.objective == Catch::Approx(2000.0).margin(1e-5));
  // lambda = marginal cost at the optimum (dt = 1)
  CHECK(run.sol.lambda_power(0, 0) == Catch::Approx(30.0).margin(1e-6));
}

TEST_CASE("variable count follows the hybrid time-scale rule") {
  Instance inst = chp_test::load_reference();
  HeatDynamicsSystem dyn = assemble(inst);
  DispatchProblem prob = build(inst, dyn);
  int units_e = 0, units_h = 0;
  for (const auto& u : inst.units) {
    units_e += u.has_power() ? 1 : 0;
    units_h += u.has_heat() ? 1 : 0;
  }
  int buses = static_cast<int>(inst.electric.buses.size());
  int states = 2 * static_cast<int>(inst.heat.nodes.size());
  CHECK(prob.qp.vars() == inst.grid.electricity_periods * (units_e + buses) +
                              inst.grid.heat_periods * (units_h + states));
}

TEST_CASE("back-pressure units contribute paired rows per electricity period and bounds per"
          " heat period") {
  Instance inst = chp_test::load_reference();
  HeatDynamicsSystem dyn = assemble(inst);
  DispatchProblem prob = build(inst, dyn);
  int bp = inst.unit_index("CHP2");
  int mixed = 0, heat_only = 0;
  for (const RowTag& tag : prob.ineq_tags)
    if (tag.family == Family::UnitPolytope && tag.a == bp) {
      if (inst.units[bp].region[tag.b].power_coeff != 0) ++mixed;
      else ++heat_only;
    }
  CHECK(mixed == 2 * inst.grid.electricity_periods);
  CHECK(heat_only == 2 * inst.grid.heat_periods);
}

TEST_CASE("two-bus congestion produces split prices and congestion rent") {
  auto run = run_pipeline(chp_test::two_bus_congested(10.0, 30.0));
  REQUIRE(run.sol.optimal());
  // cheap unit limited to the 10 MW line, expensive unit serves the rest
  CHECK(run.sol.gp(0, 0) == Catch::Approx(10.0).margin(1e-6));
  CHECK(run.sol.gp(1, 0) == Catch::Approx(20.0).margin(1e-6));
  CHECK(run.sol.lambda_power(0, 0) == Catch::Approx(10.0).margin(1e-6));
  CHECK(run.sol.lambda_power(0, 1) == Catch::Approx(50.0).margin(1e-6));
  double sigma = run.sol.sigma_fwd(0, 0);
  CHECK(sigma == Catch::Approx(40.0).margin(1e-6));
  CHECK(run.surplus.elec_direct[0] == Catch::Approx(400.0).margin(1e-6));
  CHECK(run.surplus.elec_rent[0] == Catch::Approx(400.0).margin(1e-6));

  chp_test::AdmmResult oracle = chp_test::admm_solve(run.prob.qp);
  REQUIRE(oracle.converged);
  CHECK(std::abs(oracle.objective - run.sol.qp_objective) /
            (1.0 + std::abs(oracle.objective)) < 1e-7);
}

TEST_CASE("reference instance solves and cross-checks against the splitting oracle") {
  auto run = run_pipeline(chp_test::load_reference());
  REQUIRE(run.sol.optimal());
  CHECK(run.sol.residuals.worst() < 1e-6);

  chp_test::AdmmResult oracle = chp_test::admm_solve(run.prob.qp);
  REQUIRE(oracle.converged);
  CHECK(std::abs(oracle.objective - run.sol.qp_objective) /
            (1.0 + std::abs(oracle.objective)) < 1e-5);

  // optimizer temperatures equal the forward simulation
  std::vector<Eigen::VectorXd> inj;
  for (int r = 0; r < run.inst.grid.heat_periods; ++r) {
    Eigen::VectorXd net = Eigen::VectorXd::Zero(run.prob.n_nodes);
    for (int k = 0; k < run.prob.n_nodes; ++k) {
      net[k] -= run.inst.heat.nodes[k].load_mw[r];
      for (std::size_t u = 0; u < run.inst.units.size(); ++u)
        if (run.inst.units[u].node && *run.inst.units[u].node == run.inst.heat.nodes[k].id)
          net[k] += run.sol.gh(static_cast<int>(u), r);
    }
    inj.push_back(run.dyn.injection_vector(net));
  }
  auto traj = simulate_forward(run.dyn, run.dyn.initial_state, inj);
  for (int r = 0; r < run.inst.grid.heat_periods; ++r)
    CHECK((traj[r] - Eigen::VectorXd(run.sol.temps.row(r).transpose()))
              .cwiseAbs().maxCoeff() < 1e-6);

  // back-pressure power locks to the heat time scale
  int bp = run.inst.unit_index("CHP2");
  for (int r = 0; r < run.inst.grid.heat_periods; ++r) {
    auto [t0, t1] = block_range(r, run.inst.grid);
    for (int t = t0 + 1; t <= t1; ++t)
      CHECK(std::abs(run.sol.gp(bp, t) - run.sol.gp(bp, t0)) < 1e-6);
  }
}

TEST_CASE("kkt report flags a corrupted dual in the right block") {
  auto run = run_pipeline(chp_test::single_bus(100.0, 10.0, 0.1));
  REQUIRE(run.sol.optimal());
  KktReport clean = kkt_report(run.prob, run.sol);
  CHECK(clean.worst() < 1e-8);

  Eigen::VectorXd y = run.sol.y;
  for (std::size_t i = 0; i < run.prob.eq_tags.size(); ++i)
    if (run.prob.eq_tags[i].family == Family::PowerBalance) y[static_cast<int>(i)] = 0.0;
  KktReport faulty = kkt_report(run.prob, run.sol.x, y, run.sol.z);
  CHECK(faulty.stat_power > 1.0);  // the zeroed balance dual breaks dG_p stationarity
  CHECK(faulty.feasibility.at("power_balance") < 1e-8);
}

TEST_CASE("contradictory temperature band is infeasible and names the rows") {
  Instance inst = load_instance(chp_test::data_dir() + "/infeasible_band.instance.json");
  REQUIRE(validate(inst).pass());
  auto run = run_pipeline(inst);
  REQUIRE(run.sol.status == QpStatus::Infeasible);
  bool mentions_req = false, mentions_cap = false;
  for (const std::string& row : run.sol.conflicting_rows) {
    mentions_req = mentions_req || row.find("temp_req") != std::string::npos;
    mentions_cap = mentions_cap || row.find("temp_cap") != std::string::npos;
  }
  CHECK(mentions_req);
  CHECK(mentions_cap);
}

TEST_CASE("objective matches the frozen oracle-produced value") {
  json golden = json::parse(read_file(chp_test::data_dir() + "/reference.golden.json"));
  auto run = run_pipeline(chp_test::load_reference());
  REQUIRE(run.sol.optimal());
  double expected = golden.at("objective").get<double>();
  CHECK(std::abs(run.sol.objective - expected) / (1.0 + std::abs(expected)) < 1e-5);
}
