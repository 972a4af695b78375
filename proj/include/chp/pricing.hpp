#pragma once

#include <Eigen/Dense>
#include <stdexcept>
#include <string>
#include <vector>

#include "chp/dispatch.hpp"
#include "chp/heat_dynamics.hpp"
#include "chp/model.hpp"

namespace chp {

// Marginal-generation / energy-coupled split of a unit's prices. For units
// without one of the sides the corresponding series are structurally zero.
struct PriceDecomposition {
  Eigen::VectorXd mg_electric, co_electric;  // per electricity period, $/MWh
  Eigen::VectorXd mg_heat, co_heat;          // per heat period, $/MWh

  // populated for back-pressure units only: the individual multipliers of
  // the affine +- pair and of the heat bound rows
  bool back_pressure = false;
  Eigen::VectorXd pair_lower, pair_upper;    // per electricity period
  Eigen::VectorXd bound_lower, bound_upper;  // per heat period
};

// Energy-grade double prices derived from the optimal multipliers: heat
// energy at the nodal balance duals, heat grade at the temperature-requirement
// duals, electricity at the bus balance duals.
struct PriceSchedule {
  Eigen::MatrixXd heat_energy;    // n_h x nodes, $/MWh
  Eigen::MatrixXd grade_supply;   // n_h x nodes, $/(degC h)
  Eigen::MatrixXd grade_return;   // n_h x nodes
  Eigen::MatrixXd electricity;    // n_e x buses, $/MWh
  std::vector<PriceDecomposition> units;
};

struct SettlementLine {
  std::string participant;
  std::string market;  // "heat" | "electricity"
  double energy_payment = 0;
  double grade_payment = 0;  // positive: pays for grade; negative entries appear on sources
  double total = 0;
};

inline PriceSchedule compute_prices(const Instance& inst, const HeatDynamicsSystem& dyn,
                                    const DispatchProblem& prob, const DispatchSolution& sol) {
  if (!sol.optimal()) throw std::runtime_error("missing duals: problem not solved to optimality");
  const double dte = inst.grid.electricity_step_hours;
  const double dth = inst.grid.heat_step_hours;
  const int n_h = inst.grid.heat_periods, n_e = inst.grid.electricity_periods;
  const int nodes = prob.n_nodes, buses = prob.n_buses;

  PriceSchedule ps;
  ps.heat_energy = Eigen::MatrixXd::Zero(n_h, std::max(nodes, 1));
  ps.grade_supply = Eigen::MatrixXd::Zero(n_h, std::max(nodes, 1));
  ps.grade_return = Eigen::MatrixXd::Zero(n_h, std::max(nodes, 1));
  ps.electricity = Eigen::MatrixXd::Zero(n_e, std::max(buses, 1));
  for (int r = 0; r < n_h; ++r)
    for (int k = 0; k < nodes; ++k) {
      ps.heat_energy(r, k) = sol.lambda_heat(r, dyn.balance_row[k]) / dth;
      ps.grade_supply(r, k) = sol.beta_supply(r, k) / dth;
      ps.grade_return(r, k) = sol.beta_return(r, k) / dth;
    }
  for (int t = 0; t < n_e; ++t)
    for (int b = 0; b < buses; ++b) ps.electricity(t, b) = sol.lambda_power(t, b) / dte;

  ps.units.reserve(inst.units.size());
  for (int u = 0; u < prob.n_units; ++u) {
    const GenerationUnit& unit = inst.units[u];
    const UnitCost& c = unit.cost;
    PriceDecomposition d;
    d.mg_electric = Eigen::VectorXd::Zero(n_e);
    d.co_electric = Eigen::VectorXd::Zero(n_e);
    d.mg_heat = Eigen::VectorXd::Zero(n_h);
    d.co_heat = Eigen::VectorXd::Zero(n_h);
    const int block = inst.grid.block_size();

    if (unit.has_power())
      for (int t = 0; t < n_e; ++t) {
        int r = heat_index_of(t, inst.grid);
        d.mg_electric[t] = c.power_linear + 2.0 * c.power_quadratic * sol.gp(u, t) +
                           (unit.has_heat() ? c.cross * sol.gh(u, r) : 0.0);
        double co = 0;
        for (std::size_t j = 0; j < prob.elec_rows[u].size(); ++j)
          co += sol.gamma_elec[u](t, static_cast<int>(j)) *
                unit.region[prob.elec_rows[u][j]].power_coeff;
        d.co_electric[t] = co / dte;
      }
    if (unit.has_heat())
      for (int r = 0; r < n_h; ++r) {
        double gp_sum = 0;
        if (unit.has_power())
          for (int t = r * block; t < (r + 1) * block; ++t) gp_sum += sol.gp(u, t);
        d.mg_heat[r] = c.heat_linear + 2.0 * c.heat_quadratic * sol.gh(u, r) +
                       c.cross * gp_sum * dte / dth;
        double co = 0;
        for (int t = r * block; t < (r + 1) * block && unit.has_power(); ++t)
          for (std::size_t j = 0; j < prob.elec_rows[u].size(); ++j)
            co += sol.gamma_elec[u](t, static_cast<int>(j)) *
                  unit.region[prob.elec_rows[u][j]].heat_coeff;
        for (std::size_t j = 0; j < prob.heat_rows[u].size(); ++j)
          co += sol.gamma_heat[u](r, static_cast<int>(j)) *
                unit.region[prob.heat_rows[u][j]].heat_coeff;
        d.co_heat[r] = co / dth;
      }

    if (unit.kind == UnitKind::BackPressure) {
      d.back_pressure = true;
      d.pair_lower = Eigen::VectorXd::Zero(n_e);
      d.pair_upper = Eigen::VectorXd::Zero(n_e);
      d.bound_lower = Eigen::VectorXd::Zero(n_h);
      d.bound_upper = Eigen::VectorXd::Zero(n_h);
      for (std::size_t j = 0; j < prob.elec_rows[u].size(); ++j) {
        const PolytopeRow& row = unit.region[prob.elec_rows[u][j]];
        auto& dest = row.power_coeff > 0 ? d.pair_upper : d.pair_lower;
        for (int t = 0; t < n_e; ++t) dest[t] += sol.gamma_elec[u](t, static_cast<int>(j));
      }
      for (std::size_t j = 0; j < prob.heat_rows[u].size(); ++j) {
        const PolytopeRow& row = unit.region[prob.heat_rows[u][j]];
        auto& dest = row.heat_coeff > 0 ? d.bound_upper : d.bound_lower;
        for (int r = 0; r < n_h; ++r) dest[r] += sol.gamma_heat[u](r, static_cast<int>(j));
      }
    }
    ps.units.push_back(std::move(d));
  }
  return ps;
}

// Payment of the load(s) at a heat node over the horizon: energy at the heat
// energy price plus grade payments for the above-ambient part of each
// temperature requirement. Absent requirements contribute nothing.
inline SettlementLine heat_load_payment(const Instance& inst, const PriceSchedule& ps,
                                        const std::string& node_id) {
  int k = inst.node_index(node_id);
  const HeatNode& node = inst.heat.nodes[k];
  const double dth = inst.grid.heat_step_hours;
  SettlementLine line{node_id, "heat", 0, 0, 0};
  for (int r = 0; r < inst.grid.heat_periods; ++r) {
    double amb = inst.heat.ambient_c[r];
    line.energy_payment += dth * ps.heat_energy(r, k) * node.load_mw[r];
    if (!node.required_supply_c.empty() && node.required_supply_c[r])
      line.grade_payment += dth * ps.grade_supply(r, k) * (*node.required_supply_c[r] - amb);
    if (!node.required_return_c.empty() && node.required_return_c[r])
      line.grade_payment += dth * ps.grade_return(r, k) * (*node.required_return_c[r] - amb);
  }
  line.total = line.energy_payment + line.grade_payment;
  return line;
}

inline SettlementLine electric_load_payment(const Instance& inst, const PriceSchedule& ps,
                                            const std::string& bus_id) {
  int b = inst.bus_index(bus_id);
  const double dte = inst.grid.electricity_step_hours;
  SettlementLine line{bus_id, "electricity", 0, 0, 0};
  for (int t = 0; t < inst.grid.electricity_periods; ++t)
    line.energy_payment += dte * ps.electricity(t, b) * inst.electric.buses[b].load_mw[t];
  line.total = line.energy_payment;
  return line;
}

// Revenue of a unit in one market. Heat sources pay for their own node's
// temperature requirements, hence the negative grade entry.
inline std::vector<SettlementLine> unit_payment(const Instance& inst, const PriceSchedule& ps,
                                                const DispatchSolution& sol,
                                                const std::string& unit_id) {
  int u = inst.unit_index(unit_id);
  const GenerationUnit& unit = inst.units[u];
  std::vector<SettlementLine> lines;
  if (unit.has_power()) {
    SettlementLine e{unit_id, "electricity", 0, 0, 0};
    int b = inst.bus_index(*unit.bus);
    for (int t = 0; t < inst.grid.electricity_periods; ++t)
      e.energy_payment +=
          inst.grid.electricity_step_hours * ps.electricity(t, b) * sol.gp(u, t);
    e.total = e.energy_payment;
    lines.push_back(e);
  }
  if (unit.has_heat()) {
    SettlementLine hline{unit_id, "heat", 0, 0, 0};
    int k = inst.node_index(*unit.node);
    const HeatNode& node = inst.heat.nodes[k];
    const double dth = inst.grid.heat_step_hours;
    for (int r = 0; r < inst.grid.heat_periods; ++r) {
      double amb = inst.heat.ambient_c[r];
      hline.energy_payment += dth * ps.heat_energy(r, k) * sol.gh(u, r);
      if (!node.required_supply_c.empty() && node.required_supply_c[r])
        hline.grade_payment -= dth * ps.grade_supply(r, k) * (*node.required_supply_c[r] - amb);
      if (!node.required_return_c.empty() && node.required_return_c[r])
        hline.grade_payment -= dth * ps.grade_return(r, k) * (*node.required_return_c[r] - amb);
    }
    hline.total = hline.energy_payment + hline.grade_payment;
    lines.push_back(hline);
  }
  return lines;
}

// Every settlement line of the market: heat loads, electric loads (buses
// carrying demand), and units.
inline std::vector<SettlementLine> settlement_lines(const Instance& inst,
                                                    const PriceSchedule& ps,
                                                    const DispatchSolution& sol) {
  std::vector<SettlementLine> lines;
  for (const HeatNode& n : inst.heat.nodes)
    if (n.kind == NodeKind::Load) lines.push_back(heat_load_payment(inst, ps, n.id));
  for (const Bus& b : inst.electric.buses) {
    bool has_load = false;
    for (double d : b.load_mw) has_load = has_load || d != 0;
    if (has_load) lines.push_back(electric_load_payment(inst, ps, b.id));
  }
  for (const GenerationUnit& u : inst.units)
    for (SettlementLine& l : unit_payment(inst, ps, sol, u.id)) lines.push_back(l);
  return lines;
}

// Largest violation of the price-component identity price == MG + CO over
// all units and periods; exact complementary slackness makes it zero.
inline double price_identity_gap(const Instance& inst, const PriceSchedule& ps,
                                 const DispatchSolution& sol) {
  double worst = 0;
  for (std::size_t u = 0; u < inst.units.size(); ++u) {
    const GenerationUnit& unit = inst.units[u];
    const PriceDecomposition& d = ps.units[u];
    if (unit.has_power()) {
      int b = inst.bus_index(*unit.bus);
      for (int t = 0; t < inst.grid.electricity_periods; ++t)
        worst = std::max(worst, std::abs(ps.electricity(t, b) - d.mg_electric[t] -
                                         d.co_electric[t]));
    }
    if (unit.has_heat()) {
      int k = inst.node_index(*unit.node);
      for (int r = 0; r < inst.grid.heat_periods; ++r)
        worst = std::max(worst,
                         std::abs(ps.heat_energy(r, k) - d.mg_heat[r] - d.co_heat[r]));
    }
  }
  (void)sol;
  return worst;
}

}  // namespace chp
