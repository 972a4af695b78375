#pragma once

// Shared instance builders and pipeline helpers for the test suites.

#include <cstdlib>
#include <string>

#include "chp/dispatch.hpp"
#include "chp/instance_io.hpp"
#include "chp/pricing.hpp"
#include "chp/settlement.hpp"
#include "chp/validate.hpp"
#include "chp/verification.hpp"

namespace chp_test {

inline std::string data_dir() {
  const char* env = std::getenv("CHP_DATA_DIR");
  return env != nullptr ? env : "data";
}

inline chp::Instance load_reference() {
  return chp::load_instance(data_dir() + "/reference.instance.json");
}

// 1 bus, 1 pure-electric unit, 1 period, no heat side.
inline chp::Instance single_bus(double demand = 100.0, double lin = 10.0, double quad = 0.1,
                                double cap = 200.0) {
  chp::Instance inst;
  inst.name = "single-bus";
  inst.grid = {1.0, 1.0, 1, 1};
  inst.electric.reference_bus = "B1";
  inst.electric.buses.push_back({"B1", {demand}});
  chp::GenerationUnit g;
  g.id = "G1";
  g.kind = chp::UnitKind::PureElectric;
  g.bus = "B1";
  g.cost.power_linear = lin;
  g.cost.power_quadratic = quad;
  g.region = {{1.0, 0.0, cap}, {-1.0, 0.0, 0.0}};
  inst.units.push_back(std::move(g));
  return inst;
}

// 2 buses, one line with a tight limit, cheap unit at A, expensive at B.
inline chp::Instance two_bus_congested(double limit = 10.0, double demand = 30.0) {
  chp::Instance inst;
  inst.name = "two-bus";
  inst.grid = {1.0, 1.0, 1, 1};
  inst.electric.reference_bus = "A";
  inst.electric.buses.push_back({"A", {0.0}});
  inst.electric.buses.push_back({"B", {demand}});
  inst.electric.lines.push_back({"AB", "A", "B", 0.1, limit});
  chp::GenerationUnit cheap;
  cheap.id = "GA";
  cheap.kind = chp::UnitKind::PureElectric;
  cheap.bus = "A";
  cheap.cost.power_linear = 10.0;
  cheap.region = {{1.0, 0.0, 100.0}, {-1.0, 0.0, 0.0}};
  chp::GenerationUnit dear = cheap;
  dear.id = "GB";
  dear.bus = "B";
  dear.cost.power_linear = 50.0;
  inst.units.push_back(std::move(cheap));
  inst.units.push_back(std::move(dear));
  return inst;
}

// Source + load pair joined by one supply and one return pipe, heat only.
// transit: transfer fraction of both pipes; loss: W/(m C) coefficient.
inline chp::Instance heat_pair(int n_h = 4, double transit = 0.5, double loss = 0.0,
                               double load = 10.0, bool with_req = false) {
  chp::Instance inst;
  inst.name = "heat-pair";
  inst.grid = {1.0, 1.0, n_h, n_h};
  inst.heat.ambient_c.assign(n_h, 10.0);

  chp::HeatNode src;
  src.id = "S";
  src.kind = chp::NodeKind::Source;
  src.exchanger_flow_kg_per_s.assign(n_h, 50.0);
  src.load_mw.assign(n_h, 0.0);
  src.initial_supply_c = 90.0;
  src.initial_return_c = 60.0;
  chp::HeatNode snk;
  snk.id = "L";
  snk.kind = chp::NodeKind::Load;
  snk.exchanger_flow_kg_per_s.assign(n_h, 50.0);
  snk.load_mw.assign(n_h, load);
  snk.initial_supply_c = 90.0;
  snk.initial_return_c = 60.0;
  if (with_req) {
    snk.required_supply_c.assign(n_h, std::nullopt);
    snk.required_supply_c[n_h - 1] = 88.0;
  }
  inst.heat.nodes.push_back(std::move(src));
  inst.heat.nodes.push_back(std::move(snk));

  auto pipe = [&](const std::string& id, const std::string& from, const std::string& to,
                  chp::NetworkSide side) {
    chp::Pipeline p;
    p.id = id;
    p.from_node = from;
    p.to_node = to;
    p.side = side;
    p.cross_section_m2 = 0.1;
    p.flow_kg_per_s.assign(n_h, 50.0);
    p.length_m = transit * 50.0 * 3600.0 / (1000.0 * p.cross_section_m2);
    p.loss_w_per_m_c = loss;
    p.max_temp_c = side == chp::NetworkSide::Supply ? 130.0 : 95.0;
    inst.heat.pipelines.push_back(std::move(p));
  };
  pipe("PS", "S", "L", chp::NetworkSide::Supply);
  pipe("PR", "L", "S", chp::NetworkSide::Return);

  chp::GenerationUnit boiler;
  boiler.id = "HB";
  boiler.kind = chp::UnitKind::PureHeat;
  boiler.node = "S";
  boiler.cost.heat_linear = 12.0;
  boiler.cost.heat_quadratic = 0.05;
  boiler.region = {{0.0, 1.0, 80.0}, {0.0, -1.0, 0.0}};
  inst.units.push_back(std::move(boiler));
  return inst;
}

struct ClearedRun {
  chp::Instance inst;
  chp::HeatDynamicsSystem dyn;
  chp::DispatchProblem prob;
  chp::DispatchSolution sol;
  chp::PriceSchedule prices;
  chp::SurplusReport surplus;
};

inline ClearedRun run_pipeline(const chp::Instance& inst) {
  ClearedRun p{inst, chp::assemble(inst), {}, {}, {}, {}};
  p.prob = chp::build(p.inst, p.dyn);
  p.sol = chp::solve(p.prob, p.inst);
  if (p.sol.optimal()) {
    p.prices = chp::compute_prices(p.inst, p.dyn, p.prob, p.sol);
    p.surplus = chp::settle(p.inst, p.dyn, p.sol, p.prices);
  }
  return p;
}

}  // namespace chp_test
