#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "chp/dispatch.hpp"
#include "chp/heat_dynamics.hpp"
#include "chp/model.hpp"
#include "chp/pricing.hpp"

namespace chp {

// Per-period merchandise surplus of the heat operator with its constraint
// decomposition: congestion rent on temperature caps, impact of the previous
// period's state, impact on the upcoming period. The direct computation
// (payments in minus payments out) is always carried next to the
// decomposition so the identity stays audited.
struct HeatSurplusRow {
  double direct = 0;
  double congestion_rent = 0;
  double impact_last = 0;
  double impact_upcoming = 0;
  double gap() const { return direct - congestion_rent - impact_last - impact_upcoming; }
};

struct SurplusReport {
  std::vector<HeatSurplusRow> heat;      // per heat period
  double heat_total = 0;                 // sum of direct rows
  double heat_total_decomposed = 0;      // sum CR + initial-state impact
  double initial_state_impact = 0;       // IL at t=1 evaluated against T_0

  std::vector<double> elec_direct;       // per electricity period
  std::vector<double> elec_rent;         // congestion rent sigma' * limit
  double elec_total = 0;

  double conservation_gap = 0;  // decomposed surplus vs all payments in - out
  bool temperature_ordering_ok = true;  // ambient <= T* (and T* <= caps where present)

  double worst_heat_gap() const {
    double w = 0;
    for (const auto& r : heat) w = std::max(w, std::abs(r.gap()));
    return w;
  }
  double worst_elec_gap() const {
    double w = 0;
    for (std::size_t t = 0; t < elec_direct.size(); ++t)
      w = std::max(w, std::abs(elec_direct[t] - elec_rent[t]));
    return w;
  }
  double min_elec_period() const {
    double m = 0;
    for (double v : elec_direct) m = std::min(m, v);
    return m;
  }
};

// Heat-operator surplus. Raw multipliers already carry the period length, so
// payments here are in dollars per heat period.
inline void heat_surplus(const Instance& inst, const HeatDynamicsSystem& dyn,
                         const DispatchSolution& sol, SurplusReport& rep) {
  const int n_h = inst.grid.heat_periods;
  const int nodes = static_cast<int>(inst.heat.nodes.size());
  rep.heat.assign(n_h, {});
  if (nodes == 0) return;

  for (int r = 0; r < n_h; ++r) {
    double amb = inst.heat.ambient_c[r];
    HeatSurplusRow& row = rep.heat[r];
    for (int k = 0; k < nodes; ++k) {
      const HeatNode& node = inst.heat.nodes[k];
      double lambda = sol.lambda_heat(r, dyn.balance_row[k]);
      double grade = 0;
      if (!node.required_supply_c.empty() && node.required_supply_c[r])
        grade += sol.beta_supply(r, k) * (*node.required_supply_c[r] - amb);
      if (!node.required_return_c.empty() && node.required_return_c[r])
        grade += sol.beta_return(r, k) * (*node.required_return_c[r] - amb);
      if (node.kind == NodeKind::Load) {
        row.direct += lambda * node.load_mw[r] + grade;
      } else {
        double gh = 0;
        for (std::size_t u = 0; u < inst.units.size(); ++u)
          if (inst.units[u].node && *inst.units[u].node == node.id) gh += sol.gh(u, r);
        row.direct -= lambda * gh - grade;
      }
    }
    for (int p = 0; p < static_cast<int>(inst.heat.pipelines.size()); ++p)
      if (inst.heat.pipelines[p].max_temp_c)
        row.congestion_rent +=
            sol.mu_cap(r, p) * (*inst.heat.pipelines[p].max_temp_c - inst.pipe_ambient(inst.heat.pipelines[p], r));

    Eigen::VectorXd amb_vec = Eigen::VectorXd::Constant(dyn.states, amb);
    Eigen::VectorXd t_prev = r == 0 ? dyn.initial_state
                                    : Eigen::VectorXd(sol.temps.row(r - 1).transpose());
    row.impact_last =
        -sol.lambda_heat.row(r).dot(dyn.previous[r] * (t_prev - amb_vec));
    if (r + 1 < n_h)
      row.impact_upcoming = sol.lambda_heat.row(r + 1).dot(
          dyn.previous[r + 1] * (Eigen::VectorXd(sol.temps.row(r).transpose()) - amb_vec));
  }

  rep.heat_total = 0;
  double cr_total = 0;
  for (const auto& row : rep.heat) {
    rep.heat_total += row.direct;
    cr_total += row.congestion_rent;
  }
  rep.initial_state_impact = rep.heat[0].impact_last;
  rep.heat_total_decomposed = cr_total + rep.initial_state_impact;

  rep.temperature_ordering_ok = true;
  for (int r = 0; r < n_h; ++r) {
    double amb = inst.heat.ambient_c[r];
    for (int s = 0; s < dyn.states; ++s)
      if (sol.temps(r, s) < amb - 1e-9) rep.temperature_ordering_ok = false;
  }
}

// Electricity-operator surplus: load payments minus unit revenues per period,
// against the congestion-rent form sigma' * limit.
inline void electricity_surplus(const Instance& inst, const DispatchSolution& sol,
                                SurplusReport& rep) {
  const int n_e = inst.grid.electricity_periods;
  const int buses = static_cast<int>(inst.electric.buses.size());
  rep.elec_direct.assign(n_e, 0.0);
  rep.elec_rent.assign(n_e, 0.0);
  for (int t = 0; t < n_e; ++t) {
    for (int b = 0; b < buses; ++b) {
      double gen = 0;
      for (std::size_t u = 0; u < inst.units.size(); ++u)
        if (inst.units[u].bus && *inst.units[u].bus == inst.electric.buses[b].id)
          gen += sol.gp(static_cast<int>(u), t);
      rep.elec_direct[t] +=
          sol.lambda_power(t, b) * (inst.electric.buses[b].load_mw[t] - gen);
    }
    for (int l = 0; l < static_cast<int>(inst.electric.lines.size()); ++l)
      rep.elec_rent[t] +=
          (sol.sigma_fwd(t, l) + sol.sigma_rev(t, l)) * inst.electric.lines[l].limit_mw;
  }
  rep.elec_total = 0;
  for (double v : rep.elec_direct) rep.elec_total += v;
}

inline SurplusReport settle(const Instance& inst, const HeatDynamicsSystem& dyn,
                            const DispatchSolution& sol, const PriceSchedule& ps) {
  SurplusReport rep;
  heat_surplus(inst, dyn, sol, rep);
  electricity_surplus(inst, sol, rep);

  // global conservation: decomposed operator surpluses vs settled payments
  double decomposed = 0;
  for (const auto& row : rep.heat)
    decomposed += row.congestion_rent + row.impact_last + row.impact_upcoming;
  for (double v : rep.elec_rent) decomposed += v;
  double pay_in = 0, pay_out = 0;
  for (const SettlementLine& line : settlement_lines(inst, ps, sol)) {
    bool is_unit = false;
    for (const GenerationUnit& u : inst.units) is_unit = is_unit || u.id == line.participant;
    (is_unit ? pay_out : pay_in) += line.total;
  }
  rep.conservation_gap = decomposed - (pay_in - pay_out);
  return rep;
}

}  // namespace chp
