#pragma once

#include <Eigen/Dense>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

#include "chp/common.hpp"
#include "chp/model.hpp"

namespace chp {

// Raised when a pipeline's transport time exceeds one heat period. The
// one-lag recurrence T_t, T_{t-1} cannot represent longer delays.
struct PipelineTooSlow : std::runtime_error {
  double fraction;
  PipelineTooSlow(const std::string& pipe, double f)
      : std::runtime_error("pipeline " + pipe + " transport time exceeds one heat period (" +
                           num_str(f) + " periods)"),
        fraction(f) {}
};

// Raised when the linear loss factor of a pipeline is not in (0, 1].
struct ExcessiveLoss : std::runtime_error {
  double factor;
  ExcessiveLoss(const std::string& pipe, double f)
      : std::runtime_error("pipeline " + pipe + " loss factor out of range (" + num_str(f) + ")"),
        factor(f) {}
};

// Fraction of a heat period spent by the mass flow in transit through the
// pipeline: rho*S*L / (m * step). 0 for a zero-length pipe, exactly 1 at the
// supported boundary; beyond 1 the pipe is too slow for the model.
inline double transfer_fraction(const Pipeline& pipe, const TimeGrid& grid, int heat_period0,
                                const WaterProperties& water = {}) {
  double m = pipe.flow_kg_per_s.at(heat_period0);
  double step_s = grid.heat_step_hours * 3600.0;
  double psi = water.density_kg_per_m3 * pipe.cross_section_m2 * pipe.length_m / (m * step_s);
  if (psi > 1.0) throw PipelineTooSlow(pipe.id, psi);
  return psi;
}

// Multiplicative retention factor 1 - v*L/(c*m) applied to the
// above-ambient part of the transported temperature.
inline double loss_retention(const Pipeline& pipe, int heat_period0,
                             const WaterProperties& water = {}) {
  double m = pipe.flow_kg_per_s.at(heat_period0);
  double phi =
      1.0 - pipe.loss_w_per_m_c * pipe.length_m / (water.specific_heat_j_per_kg_c * m);
  if (phi <= 0.0) throw ExcessiveLoss(pipe.id, phi);
  return phi;
}

// Pipeline outlet temperature given the inlet node's temperature now and one
// heat period ago: a transit-weighted mix, decayed toward ambient.
inline double outlet_temperature(const Pipeline& pipe, const TimeGrid& grid, int heat_period0,
                                 double t_inlet_now, double t_inlet_prev, double t_ambient,
                                 const WaterProperties& water = {}) {
  double psi = transfer_fraction(pipe, grid, heat_period0, water);
  double phi = loss_retention(pipe, heat_period0, water);
  return ((1.0 - psi) * t_inlet_now + psi * t_inlet_prev - t_ambient) * phi + t_ambient;
}

// State ordering: node k occupies rows/columns 2k (supply) and 2k+1 (return).
inline int supply_state(int node_idx) { return 2 * node_idx; }
inline int return_state(int node_idx) { return 2 * node_idx + 1; }
inline int state_of(int node_idx, NetworkSide side) {
  return side == NetworkSide::Supply ? supply_state(node_idx) : return_state(node_idx);
}

// Assembled linear recurrence linking consecutive heat-period temperature
// vectors:
//   current[t] * T_t + previous[t] * T_{t-1} + offset[t] = H_t,
// where H_t carries the net exchanger injections (generation minus load) on
// the balance rows and zero on the passive mixing rows. One row per state:
// a node's balance equation sits on the side its exchanger drives (supply
// for sources, return for loads), the mixing equation on the other side.
struct HeatDynamicsSystem {
  int states = 0;
  std::vector<Eigen::MatrixXd> current;    // per heat period
  std::vector<Eigen::MatrixXd> previous;
  std::vector<Eigen::VectorXd> offset;
  std::vector<int> balance_row;            // node index -> its balance row
  std::vector<std::string> state_label;    // "node/side" per state
  Eigen::VectorXd initial_state;

  // Net-injection vector for heat period r0 given per-node injections
  // (sum of unit heat output at the node minus its heat load).
  Eigen::VectorXd injection_vector(const Eigen::VectorXd& net_by_node) const {
    Eigen::VectorXd h = Eigen::VectorXd::Zero(states);
    for (std::size_t k = 0; k < balance_row.size(); ++k)
      h[balance_row[k]] = net_by_node[static_cast<int>(k)];
    return h;
  }

  // Residual of the recurrence at heat period r0 for a given state pair.
  Eigen::VectorXd residual(int r0, const Eigen::VectorXd& t_now, const Eigen::VectorXd& t_prev,
                           const Eigen::VectorXd& injections) const {
    return current[r0] * t_now + previous[r0] * t_prev + offset[r0] - injections;
  }

  void dump(std::ostream& os) const {
    for (std::size_t r = 0; r < current.size(); ++r) {
      os << "# heat period " << r + 1 << "\n";
      for (const char* name : {"current", "previous"}) {
        const Eigen::MatrixXd& m = name[0] == 'c' ? current[r] : previous[r];
        os << name << " (" << states << "x" << states << ")\n";
        for (int i = 0; i < states; ++i) {
          os << state_label[i];
          for (int j = 0; j < states; ++j) os << " " << num_str(m(i, j));
          os << "\n";
        }
      }
      os << "offset\n";
      for (int i = 0; i < states; ++i)
        os << state_label[i] << " " << num_str(offset[r][i]) << "\n";
    }
  }
};

// Builds the recurrence row by row from the scalar exchanger-balance and
// mixing equations, with pipeline outlets eliminated through the transit /
// loss expression above. Requires a validated instance.
inline HeatDynamicsSystem assemble(const Instance& inst) {
  const auto& net = inst.heat;
  const int n_nodes = static_cast<int>(net.nodes.size());
  const int n_h = inst.grid.heat_periods;
  const double c = inst.water.specific_heat_mw();

  HeatDynamicsSystem sys;
  sys.states = 2 * n_nodes;
  sys.balance_row.resize(n_nodes);
  sys.state_label.resize(sys.states);
  sys.initial_state.resize(sys.states);
  for (int k = 0; k < n_nodes; ++k) {
    sys.state_label[supply_state(k)] = net.nodes[k].id + "/supply";
    sys.state_label[return_state(k)] = net.nodes[k].id + "/return";
    sys.initial_state[supply_state(k)] = net.nodes[k].initial_supply_c;
    sys.initial_state[return_state(k)] = net.nodes[k].initial_return_c;
    sys.balance_row[k] = net.nodes[k].kind == NodeKind::Source ? supply_state(k)
                                                               : return_state(k);
  }

  for (int r = 0; r < n_h; ++r) {
    Eigen::MatrixXd cur = Eigen::MatrixXd::Zero(sys.states, sys.states);
    Eigen::MatrixXd prev = Eigen::MatrixXd::Zero(sys.states, sys.states);
    Eigen::VectorXd off = Eigen::VectorXd::Zero(sys.states);

    for (int k = 0; k < n_nodes; ++k) {
      const HeatNode& node = net.nodes[k];
      const bool source = node.kind == NodeKind::Source;
      const NetworkSide active = source ? NetworkSide::Supply : NetworkSide::Return;
      const NetworkSide passive = source ? NetworkSide::Return : NetworkSide::Supply;
      const int active_row = state_of(k, active);
      const int passive_row = state_of(k, passive);
      const double exch = node.exchanger_flow_kg_per_s.at(r);

      // balance row: c[(M + sum m) T_active - M T_passive - sum m tau] = G - D
      cur(active_row, state_of(k, active)) += c * exch;
      cur(active_row, state_of(k, passive)) -= c * exch;
      // mixing row: (sum m) T_passive - sum m tau = 0
      for (const Pipeline& p : net.pipelines) {
        if (p.to_node != node.id) continue;
        const double m = p.flow_kg_per_s.at(r);
        const double psi = transfer_fraction(p, inst.grid, r, inst.water);
        const double phi = loss_retention(p, r, inst.water);
        const double amb = inst.pipe_ambient(p, r);
        const int row = p.side == active ? active_row : passive_row;
        const double w = p.side == active ? c * m : m;
        const int inlet = state_of(inst.node_index(p.from_node), p.side);
        cur(row, state_of(k, p.side)) += w;
        cur(row, inlet) -= w * phi * (1.0 - psi);
        prev(row, inlet) -= w * phi * psi;
        off[row] -= w * (1.0 - phi) * amb;
      }
    }
    sys.current.push_back(std::move(cur));
    sys.previous.push_back(std::move(prev));
    sys.offset.push_back(std::move(off));
  }
  return sys;
}

// Forward time stepping: T_t = current^{-1} (H_t - previous T_{t-1} - offset).
// Independent check for any temperature trajectory claimed optimal.
inline std::vector<Eigen::VectorXd> simulate_forward(
    const HeatDynamicsSystem& sys, const Eigen::VectorXd& t0,
    const std::vector<Eigen::VectorXd>& injections) {
  std::vector<Eigen::VectorXd> traj;
  Eigen::VectorXd prev_t = t0;
  for (std::size_t r = 0; r < sys.current.size(); ++r) {
    Eigen::FullPivLU<Eigen::MatrixXd> lu(sys.current[r]);
    if (!lu.isInvertible())
      throw std::runtime_error("singular temperature map at heat period " +
                               std::to_string(r + 1));
    Eigen::VectorXd t =
        lu.solve(injections.at(r) - sys.previous[r] * prev_t - sys.offset[r]);
    traj.push_back(t);
    prev_t = t;
  }
  return traj;
}

}  // namespace chp
