#pragma once

// Test-only scalar evaluation of the exchanger balance and mixing equations,
// written directly from the per-node/per-pipe definitions. Independent of
// chp::assemble: pipe outlets are computed value-wise here, then the nodal
// residuals are formed. Used to certify the assembled matrix rows.

#include <Eigen/Dense>

#include "chp/heat_dynamics.hpp"
#include "chp/model.hpp"

namespace chp_test {

// Residual vector (one entry per state row, same ordering as the assembled
// system) of the scalar equations at heat period r0 for the state pair
// (t_now, t_prev) and per-node net injections.
inline Eigen::VectorXd scalar_residuals(const chp::Instance& inst, int r0,
                                        const Eigen::VectorXd& t_now,
                                        const Eigen::VectorXd& t_prev,
                                        const Eigen::VectorXd& net_injection_by_node) {
  const auto& nodes = inst.heat.nodes;
  const double c = inst.water.specific_heat_mw();
  Eigen::VectorXd res = Eigen::VectorXd::Zero(2 * static_cast<int>(nodes.size()));

  auto outlet = [&](const chp::Pipeline& p) {
    int j = inst.node_index(p.from_node);
    int st = chp::state_of(j, p.side);
    return chp::outlet_temperature(p, inst.grid, r0, t_now[st], t_prev[st],
                                   inst.pipe_ambient(p, r0), inst.water);
  };

  for (std::size_t k = 0; k < nodes.size(); ++k) {
    const chp::HeatNode& node = nodes[k];
    const bool source = node.kind == chp::NodeKind::Source;
    const chp::NetworkSide active =
        source ? chp::NetworkSide::Supply : chp::NetworkSide::Return;
    const double exch = node.exchanger_flow_kg_per_s[r0];
    const int ki = static_cast<int>(k);

    // balance: G - D = c[(M + sum m) T_active - M T_other - sum m tau]
    double inflow = 0, tau_mix = 0;
    for (const chp::Pipeline& p : inst.heat.pipelines) {
      if (p.to_node != node.id || p.side != active) continue;
      inflow += p.flow_kg_per_s[r0];
      tau_mix += p.flow_kg_per_s[r0] * outlet(p);
    }
    double t_active = t_now[chp::state_of(ki, active)];
    double t_other = t_now[chp::state_of(
        ki, active == chp::NetworkSide::Supply ? chp::NetworkSide::Return
                                               : chp::NetworkSide::Supply)];
    res[chp::state_of(ki, active)] =
        c * ((exch + inflow) * t_active - exch * t_other - tau_mix) -
        net_injection_by_node[ki];

    // mixing on the other side: 0 = (sum m) T - sum m tau
    chp::NetworkSide passive = active == chp::NetworkSide::Supply
                                   ? chp::NetworkSide::Return
                                   : chp::NetworkSide::Supply;
    double pin = 0, ptau = 0;
    for (const chp::Pipeline& p : inst.heat.pipelines) {
      if (p.to_node != node.id || p.side != passive) continue;
      pin += p.flow_kg_per_s[r0];
      ptau += p.flow_kg_per_s[r0] * outlet(p);
    }
    res[chp::state_of(ki, passive)] = pin * t_now[chp::state_of(ki, passive)] - ptau;
  }
  return res;
}

}  // namespace chp_test
