#pragma once

#include <Eigen/Dense>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "chp/heat_dynamics.hpp"
#include "chp/model.hpp"
#include "chp/qp.hpp"

namespace chp {

// Constraint families of the dispatch program. Each carries its own dual
// stream in the solution.
enum class Family {
  HeatBalance,   // dynamics recurrence rows (equality)
  PowerBalance,  // bus balance rows (equality)
  RefAngle,      // reference-angle pin (equality)
  TempCap,       // pipeline inlet temperature caps
  TempReq,       // nodal temperature requirements (lower bounds)
  LineLimit,     // directed transmission limits
  UnitPolytope,  // unit feasible-region rows
};

inline const char* to_string(Family f) {
  switch (f) {
    case Family::HeatBalance: return "heat_balance";
    case Family::PowerBalance: return "power_balance";
    case Family::RefAngle: return "ref_angle";
    case Family::TempCap: return "temp_cap";
    case Family::TempReq: return "temp_req";
    case Family::LineLimit: return "line_limit";
    case Family::UnitPolytope: return "unit_polytope";
  }
  return "?";
}

struct RowTag {
  Family family;
  int period = 0;  // heat period for heat families, electricity period otherwise (0-based)
  int a = 0;       // family-specific: state row / bus / pipe / node / line / unit
  int b = 0;       // family-specific: side, direction, region row
};

// The assembled asynchronous dispatch QP. Decision variables: unit power per
// electricity period, unit heat per heat period, temperature states per heat
// period, bus angles per electricity period.
struct DispatchProblem {
  QpProblem qp;
  double objective_constant = 0;

  int n_units = 0, n_e = 0, n_h = 0, n_states = 0, n_buses = 0, n_lines = 0, n_nodes = 0,
      n_pipes = 0;
  std::vector<int> gp_base, gh_base;  // per unit, -1 when that side is absent
  int t_base = -1, delta_base = -1;

  std::vector<RowTag> eq_tags, ineq_tags;
  std::vector<int> cap_row;   // r * n_pipes + pipe -> ineq row (-1 absent)
  std::vector<int> req_row;   // (r * n_nodes + node)*2 + side -> ineq row (-1 absent)
  int line_base = -1;         // (t * n_lines + line)*2 + dir
  std::vector<std::vector<int>> elec_rows, heat_rows;  // per unit: region row indices
  std::vector<int> poly_e_row_base, poly_h_row_base;   // per unit

  int gp(int u, int t) const { return gp_base[u] + t; }
  int gh(int u, int r) const { return gh_base[u] + r; }
  int temp(int r, int s) const { return t_base + r * n_states + s; }
  int delta(int t, int b) const { return delta_base + t * n_buses + b; }
  int dyn_row(int r, int k) const { return r * n_states + k; }
  int line_row(int t, int l, int dir) const {
    return line_base + (t * n_lines + l) * 2 + dir;
  }
  int poly_e_row(int u, int t, int j) const {
    return poly_e_row_base[u] + t * static_cast<int>(elec_rows[u].size()) + j;
  }
  int poly_h_row(int u, int r, int j) const {
    return poly_h_row_base[u] + r * static_cast<int>(heat_rows[u].size()) + j;
  }

  std::string var_name(int i) const;
  std::string eq_name(const Instance& inst, int row) const;
  std::string ineq_name(const Instance& inst, int row) const;
};

// Primal and dual values for every constraint family, labeled by entity.
struct DispatchSolution {
  QpStatus status = QpStatus::NumericalFailure;
  std::string message;
  int iterations = 0;
  bool polished = false;
  QpResiduals residuals;
  double objective = 0;      // includes the fixed standby cost
  double qp_objective = 0;

  Eigen::MatrixXd gp;              // units x n_e (0 where absent)
  Eigen::MatrixXd gh;              // units x n_h
  Eigen::MatrixXd temps;           // n_h x states
  Eigen::MatrixXd angle;           // n_e x buses
  Eigen::MatrixXd lambda_heat;     // n_h x states (dual of every dynamics row)
  Eigen::MatrixXd lambda_power;    // n_e x buses
  Eigen::MatrixXd mu_cap;          // n_h x pipes (0 where no cap)
  Eigen::MatrixXd beta_supply;     // n_h x nodes
  Eigen::MatrixXd beta_return;     // n_h x nodes
  Eigen::MatrixXd sigma_fwd;       // n_e x lines
  Eigen::MatrixXd sigma_rev;       // n_e x lines
  std::vector<Eigen::MatrixXd> gamma_elec;  // per unit: n_e x elec_rows
  std::vector<Eigen::MatrixXd> gamma_heat;  // per unit: n_h x heat_rows

  Eigen::VectorXd x, y, z, s;      // raw solver vectors, for audits
  std::vector<std::string> conflicting_rows;  // named rows from the infeasibility probe

  bool optimal() const { return status == QpStatus::Optimal; }
};

inline std::string DispatchProblem::var_name(int i) const {
  for (int u = 0; u < n_units; ++u) {
    if (gp_base[u] >= 0 && i >= gp_base[u] && i < gp_base[u] + n_e)
      return "Gp_u" + std::to_string(u) + "_t" + std::to_string(i - gp_base[u] + 1);
    if (gh_base[u] >= 0 && i >= gh_base[u] && i < gh_base[u] + n_h)
      return "Gh_u" + std::to_string(u) + "_r" + std::to_string(i - gh_base[u] + 1);
  }
  if (i >= t_base && i < t_base + n_h * n_states) {
    int off = i - t_base;
    return "T_s" + std::to_string(off % n_states) + "_r" + std::to_string(off / n_states + 1);
  }
  if (delta_base >= 0 && i >= delta_base) {
    int off = i - delta_base;
    return "th_b" + std::to_string(off % n_buses) + "_t" + std::to_string(off / n_buses + 1);
  }
  return "x" + std::to_string(i);
}

inline std::string DispatchProblem::eq_name(const Instance& inst, int row) const {
  const RowTag& t = eq_tags[row];
  switch (t.family) {
    case Family::HeatBalance:
      return "heat_balance[" +
             (n_states > 0 ? inst.heat.nodes[t.a / 2].id + "/" +
                                 (t.a % 2 == 0 ? "supply" : "return")
                           : std::to_string(t.a)) +
             ",r=" + std::to_string(t.period + 1) + "]";
    case Family::PowerBalance:
      return "power_balance[" + inst.electric.buses[t.a].id + ",t=" +
             std::to_string(t.period + 1) + "]";
    case Family::RefAngle:
      return "ref_angle[t=" + std::to_string(t.period + 1) + "]";
    default: return "eq" + std::to_string(row);
  }
}

inline std::string DispatchProblem::ineq_name(const Instance& inst, int row) const {
  const RowTag& t = ineq_tags[row];
  std::string p = std::to_string(t.period + 1);
  switch (t.family) {
    case Family::TempCap:
      return "temp_cap[" + inst.heat.pipelines[t.a].id + ",r=" + p + "]";
    case Family::TempReq:
      return "temp_req[" + inst.heat.nodes[t.a].id + "/" +
             (t.b == 0 ? "supply" : "return") + ",r=" + p + "]";
    case Family::LineLimit:
      return "line_limit[" + inst.electric.lines[t.a].id + (t.b == 0 ? ",fwd" : ",rev") +
             ",t=" + p + "]";
    case Family::UnitPolytope:
      return "unit_polytope[" + inst.units[t.a].id + ",row=" + std::to_string(t.b) +
             (t.family == Family::UnitPolytope && inst.units[t.a].region[t.b].power_coeff != 0
                  ? ",t=" : ",r=") + p + "]";
    default: return "ineq" + std::to_string(row);
  }
}

// Assembles the dispatch QP from a validated instance and its heat dynamics.
// Electricity-dependent cost terms are weighted by the electricity step,
// heat-dependent terms by the heat step; each cost term appears exactly once.
inline DispatchProblem build(const Instance& inst, const HeatDynamicsSystem& dyn) {
  DispatchProblem prob;
  const TimeGrid& grid = inst.grid;
  prob.n_units = static_cast<int>(inst.units.size());
  prob.n_e = grid.electricity_periods;
  prob.n_h = grid.heat_periods;
  prob.n_states = dyn.states;
  prob.n_buses = static_cast<int>(inst.electric.buses.size());
  prob.n_lines = static_cast<int>(inst.electric.lines.size());
  prob.n_nodes = static_cast<int>(inst.heat.nodes.size());
  prob.n_pipes = static_cast<int>(inst.heat.pipelines.size());
  const double dte = grid.electricity_step_hours;
  const double dth = grid.heat_step_hours;

  // ---- variable layout ----
  int nx = 0;
  prob.gp_base.assign(prob.n_units, -1);
  prob.gh_base.assign(prob.n_units, -1);
  for (int u = 0; u < prob.n_units; ++u)
    if (inst.units[u].has_power()) { prob.gp_base[u] = nx; nx += prob.n_e; }
  for (int u = 0; u < prob.n_units; ++u)
    if (inst.units[u].has_heat()) { prob.gh_base[u] = nx; nx += prob.n_h; }
  prob.t_base = nx;
  nx += prob.n_h * prob.n_states;
  prob.delta_base = nx;
  nx += prob.n_e * prob.n_buses;

  // ---- objective ----
  std::vector<Eigen::Triplet<double>> pt;
  Eigen::VectorXd q = Eigen::VectorXd::Zero(nx);
  for (int u = 0; u < prob.n_units; ++u) {
    const UnitCost& c = inst.units[u].cost;
    prob.objective_constant += c.fixed_per_hour * grid.horizon_hours();
    if (prob.gp_base[u] >= 0)
      for (int t = 0; t < prob.n_e; ++t) {
        q[prob.gp(u, t)] += dte * c.power_linear;
        if (c.power_quadratic != 0)
          pt.emplace_back(prob.gp(u, t), prob.gp(u, t), 2.0 * dte * c.power_quadratic);
      }
    if (prob.gh_base[u] >= 0)
      for (int r = 0; r < prob.n_h; ++r) {
        q[prob.gh(u, r)] += dth * c.heat_linear;
        if (c.heat_quadratic != 0)
          pt.emplace_back(prob.gh(u, r), prob.gh(u, r), 2.0 * dth * c.heat_quadratic);
      }
    if (prob.gp_base[u] >= 0 && prob.gh_base[u] >= 0 && c.cross != 0)
      for (int t = 0; t < prob.n_e; ++t) {
        int r = heat_index_of(t, grid);
        pt.emplace_back(prob.gp(u, t), prob.gh(u, r), dte * c.cross);
        pt.emplace_back(prob.gh(u, r), prob.gp(u, t), dte * c.cross);
      }
  }

  // ---- equalities ----
  std::vector<Eigen::Triplet<double>> at;
  std::vector<double> bv;
  auto eq_row = [&](const RowTag& tag) {
    prob.eq_tags.push_back(tag);
    bv.push_back(0.0);
    return static_cast<int>(bv.size()) - 1;
  };

  std::vector<std::vector<int>> units_at_node(std::max(prob.n_nodes, 1));
  std::vector<std::vector<int>> units_at_bus(std::max(prob.n_buses, 1));
  for (int u = 0; u < prob.n_units; ++u) {
    if (inst.units[u].node) units_at_node[inst.node_index(*inst.units[u].node)].push_back(u);
    if (inst.units[u].bus) units_at_bus[inst.bus_index(*inst.units[u].bus)].push_back(u);
  }

  for (int r = 0; r < prob.n_h; ++r)
    for (int k = 0; k < prob.n_states; ++k) {
      int row = eq_row({Family::HeatBalance, r, k, 0});
      for (int j = 0; j < prob.n_states; ++j) {
        double c1 = dyn.current[r](k, j);
        if (c1 != 0) at.emplace_back(row, prob.temp(r, j), c1);
        if (r > 0) {
          double c2 = dyn.previous[r](k, j);
          if (c2 != 0) at.emplace_back(row, prob.temp(r - 1, j), c2);
        }
      }
      double rhs = -dyn.offset[r][k];
      if (r == 0) rhs -= dyn.previous[0].row(k).dot(dyn.initial_state);
      for (int kn = 0; kn < prob.n_nodes; ++kn) {
        if (dyn.balance_row[kn] != k) continue;
        rhs -= inst.heat.nodes[kn].load_mw[r];
        for (int u : units_at_node[kn]) at.emplace_back(row, prob.gh(u, r), -1.0);
      }
      bv.back() = rhs;
    }

  int ref_bus = prob.n_buses > 0 ? inst.bus_index(inst.electric.reference_bus) : -1;
  for (int t = 0; t < prob.n_e; ++t) {
    for (int i = 0; i < prob.n_buses; ++i) {
      int row = eq_row({Family::PowerBalance, t, i, 0});
      bv.back() = -inst.electric.buses[i].load_mw[t];
      for (int u : units_at_bus[i]) at.emplace_back(row, prob.gp(u, t), -1.0);
    }
    // susceptance terms
    for (const Line& l : inst.electric.lines) {
      int i = inst.bus_index(l.from_bus), j = inst.bus_index(l.to_bus);
      double y = 1.0 / l.reactance_pu;
      int ri = static_cast<int>(bv.size()) - prob.n_buses + i;
      int rj = static_cast<int>(bv.size()) - prob.n_buses + j;
      at.emplace_back(ri, prob.delta(t, i), y);
      at.emplace_back(ri, prob.delta(t, j), -y);
      at.emplace_back(rj, prob.delta(t, j), y);
      at.emplace_back(rj, prob.delta(t, i), -y);
    }
    if (ref_bus >= 0) {
      int row = eq_row({Family::RefAngle, t, ref_bus, 0});
      at.emplace_back(row, prob.delta(t, ref_bus), 1.0);
    }
  }

  // ---- inequalities ----
  std::vector<Eigen::Triplet<double>> gt;
  std::vector<double> hv;
  auto ineq_row = [&](const RowTag& tag, double rhs) {
    prob.ineq_tags.push_back(tag);
    hv.push_back(rhs);
    return static_cast<int>(hv.size()) - 1;
  };

  prob.cap_row.assign(static_cast<std::size_t>(prob.n_h) * std::max(prob.n_pipes, 1), -1);
  for (int r = 0; r < prob.n_h; ++r)
    for (int p = 0; p < prob.n_pipes; ++p) {
      const Pipeline& pipe = inst.heat.pipelines[p];
      if (!pipe.max_temp_c) continue;
      int row = ineq_row({Family::TempCap, r, p, 0}, *pipe.max_temp_c);
      int st = state_of(inst.node_index(pipe.from_node), pipe.side);
      gt.emplace_back(row, prob.temp(r, st), 1.0);
      prob.cap_row[r * prob.n_pipes + p] = row;
    }

  prob.req_row.assign(static_cast<std::size_t>(prob.n_h) * std::max(prob.n_nodes, 1) * 2, -1);
  for (int r = 0; r < prob.n_h; ++r)
    for (int k = 0; k < prob.n_nodes; ++k) {
      const HeatNode& node = inst.heat.nodes[k];
      for (int side = 0; side < 2; ++side) {
        const auto& req = side == 0 ? node.required_supply_c : node.required_return_c;
        if (req.empty() || !req[r]) continue;
        int row = ineq_row({Family::TempReq, r, k, side}, -*req[r]);
        gt.emplace_back(row, prob.temp(r, 2 * k + side), -1.0);
        prob.req_row[(r * prob.n_nodes + k) * 2 + side] = row;
      }
    }

  prob.line_base = static_cast<int>(hv.size());
  for (int t = 0; t < prob.n_e; ++t)
    for (int l = 0; l < prob.n_lines; ++l) {
      const Line& line = inst.electric.lines[l];
      int i = inst.bus_index(line.from_bus), j = inst.bus_index(line.to_bus);
      double y = 1.0 / line.reactance_pu;
      for (int dir = 0; dir < 2; ++dir) {
        double sgn = dir == 0 ? 1.0 : -1.0;
        int row = ineq_row({Family::LineLimit, t, l, dir}, line.limit_mw);
        gt.emplace_back(row, prob.delta(t, i), sgn * y);
        gt.emplace_back(row, prob.delta(t, j), -sgn * y);
      }
    }

  prob.elec_rows.resize(prob.n_units);
  prob.heat_rows.resize(prob.n_units);
  prob.poly_e_row_base.assign(prob.n_units, -1);
  prob.poly_h_row_base.assign(prob.n_units, -1);
  for (int u = 0; u < prob.n_units; ++u)
    for (std::size_t j = 0; j < inst.units[u].region.size(); ++j)
      (inst.units[u].region[j].power_coeff != 0 ? prob.elec_rows : prob.heat_rows)[u]
          .push_back(static_cast<int>(j));
  for (int u = 0; u < prob.n_units; ++u) {
    if (prob.elec_rows[u].empty()) continue;
    prob.poly_e_row_base[u] = static_cast<int>(hv.size());
    for (int t = 0; t < prob.n_e; ++t) {
      int r = heat_index_of(t, inst.grid);
      for (int j : prob.elec_rows[u]) {
        const PolytopeRow& pr = inst.units[u].region[j];
        int row = ineq_row({Family::UnitPolytope, t, u, j}, pr.bound);
        gt.emplace_back(row, prob.gp(u, t), pr.power_coeff);
        if (pr.heat_coeff != 0 && prob.gh_base[u] >= 0)
          gt.emplace_back(row, prob.gh(u, r), pr.heat_coeff);
      }
    }
  }
  for (int u = 0; u < prob.n_units; ++u) {
    if (prob.heat_rows[u].empty()) continue;
    prob.poly_h_row_base[u] = static_cast<int>(hv.size());
    for (int r = 0; r < prob.n_h; ++r)
      for (int j : prob.heat_rows[u]) {
        const PolytopeRow& pr = inst.units[u].region[j];
        int row = ineq_row({Family::UnitPolytope, r, u, j}, pr.bound);
        gt.emplace_back(row, prob.gh(u, r), pr.heat_coeff);
      }
  }

  // ---- pack ----
  prob.qp.P = Eigen::SparseMatrix<double>(nx, nx);
  prob.qp.P.setFromTriplets(pt.begin(), pt.end());
  prob.qp.q = q;
  prob.qp.A = Eigen::SparseMatrix<double>(static_cast<int>(bv.size()), nx);
  prob.qp.A.setFromTriplets(at.begin(), at.end());
  prob.qp.b = Eigen::Map<Eigen::VectorXd>(bv.data(), static_cast<int>(bv.size()));
  prob.qp.G = Eigen::SparseMatrix<double>(static_cast<int>(hv.size()), nx);
  prob.qp.G.setFromTriplets(gt.begin(), gt.end());
  prob.qp.h = Eigen::Map<Eigen::VectorXd>(hv.data(), static_cast<int>(hv.size()));
  return prob;
}

// Solves the dispatch QP to KKT optimality and unpacks primal/dual values by
// constraint family. Deterministic for fixed inputs.
inline DispatchSolution solve(const DispatchProblem& prob, const Instance& inst,
                              const QpSettings& settings = {}) {
  DispatchSolution out;
  QpSolution qs = solve_qp(prob.qp, settings);
  out.status = qs.status;
  out.message = qs.message;
  out.iterations = qs.iterations;
  out.polished = qs.polished;
  out.residuals = qs.residuals;
  out.qp_objective = qs.objective;
  out.objective = qs.objective + prob.objective_constant;
  out.x = qs.x; out.y = qs.y; out.z = qs.z; out.s = qs.s;
  for (int row : qs.infeasible_rows)
    out.conflicting_rows.push_back(row >= 0 ? prob.ineq_name(inst, row)
                                            : prob.eq_name(inst, -row - 1));
  if (!out.optimal()) return out;

  out.gp = Eigen::MatrixXd::Zero(prob.n_units, prob.n_e);
  out.gh = Eigen::MatrixXd::Zero(prob.n_units, prob.n_h);
  out.temps = Eigen::MatrixXd::Zero(prob.n_h, prob.n_states);
  out.angle = Eigen::MatrixXd::Zero(prob.n_e, prob.n_buses);
  for (int u = 0; u < prob.n_units; ++u) {
    if (prob.gp_base[u] >= 0)
      for (int t = 0; t < prob.n_e; ++t) out.gp(u, t) = qs.x[prob.gp(u, t)];
    if (prob.gh_base[u] >= 0)
      for (int r = 0; r < prob.n_h; ++r) out.gh(u, r) = qs.x[prob.gh(u, r)];
  }
  for (int r = 0; r < prob.n_h; ++r)
    for (int s = 0; s < prob.n_states; ++s) out.temps(r, s) = qs.x[prob.temp(r, s)];
  for (int t = 0; t < prob.n_e; ++t)
    for (int b = 0; b < prob.n_buses; ++b) out.angle(t, b) = qs.x[prob.delta(t, b)];

  out.lambda_heat = Eigen::MatrixXd::Zero(prob.n_h, prob.n_states);
  out.lambda_power = Eigen::MatrixXd::Zero(prob.n_e, prob.n_buses);
  for (std::size_t i = 0; i < prob.eq_tags.size(); ++i) {
    const RowTag& tag = prob.eq_tags[i];
    if (tag.family == Family::HeatBalance)
      out.lambda_heat(tag.period, tag.a) = qs.y[static_cast<int>(i)];
    else if (tag.family == Family::PowerBalance)
      out.lambda_power(tag.period, tag.a) = qs.y[static_cast<int>(i)];
  }

  out.mu_cap = Eigen::MatrixXd::Zero(prob.n_h, std::max(prob.n_pipes, 1));
  out.beta_supply = Eigen::MatrixXd::Zero(prob.n_h, std::max(prob.n_nodes, 1));
  out.beta_return = Eigen::MatrixXd::Zero(prob.n_h, std::max(prob.n_nodes, 1));
  out.sigma_fwd = Eigen::MatrixXd::Zero(prob.n_e, std::max(prob.n_lines, 1));
  out.sigma_rev = Eigen::MatrixXd::Zero(prob.n_e, std::max(prob.n_lines, 1));
  out.gamma_elec.resize(prob.n_units);
  out.gamma_heat.resize(prob.n_units);
  for (int u = 0; u < prob.n_units; ++u) {
    out.gamma_elec[u] =
        Eigen::MatrixXd::Zero(prob.n_e, static_cast<int>(prob.elec_rows[u].size()));
    out.gamma_heat[u] =
        Eigen::MatrixXd::Zero(prob.n_h, static_cast<int>(prob.heat_rows[u].size()));
  }
  for (std::size_t i = 0; i < prob.ineq_tags.size(); ++i) {
    const RowTag& tag = prob.ineq_tags[i];
    double zi = qs.z[static_cast<int>(i)];
    switch (tag.family) {
      case Family::TempCap: out.mu_cap(tag.period, tag.a) = zi; break;
      case Family::TempReq:
        (tag.b == 0 ? out.beta_supply : out.beta_return)(tag.period, tag.a) = zi;
        break;
      case Family::LineLimit:
        (tag.b == 0 ? out.sigma_fwd : out.sigma_rev)(tag.period, tag.a) = zi;
        break;
      case Family::UnitPolytope: {
        const auto& er = prob.elec_rows[tag.a];
        const auto& hr = prob.heat_rows[tag.a];
        bool is_elec = inst.units[tag.a].region[tag.b].power_coeff != 0;
        const auto& list = is_elec ? er : hr;
        int j = static_cast<int>(std::find(list.begin(), list.end(), tag.b) - list.begin());
        (is_elec ? out.gamma_elec : out.gamma_heat)[tag.a](tag.period, j) = zi;
        break;
      }
      default: break;
    }
  }
  return out;
}

// Per-family KKT residual table (max norms), recomputable for any candidate
// multiplier vector, so a fault-injected dual shows up in the right block.
struct KktReport {
  double stat_power = 0, stat_heat = 0, stat_temp = 0, stat_angle = 0;
  std::map<std::string, double> feasibility;      // per family
  std::map<std::string, double> complementarity;  // per family
  double dual_sign = 0;

  double worst() const {
    double w = std::max({stat_power, stat_heat, stat_temp, stat_angle, dual_sign});
    for (const auto& [k, v] : feasibility) w = std::max(w, v);
    for (const auto& [k, v] : complementarity) w = std::max(w, v);
    return w;
  }

  std::string to_string() const {
    std::ostringstream os;
    os << "stationarity dG_p        " << num_str(stat_power) << "\n"
       << "stationarity dG_h        " << num_str(stat_heat) << "\n"
       << "stationarity dT          " << num_str(stat_temp) << "\n"
       << "stationarity dDelta      " << num_str(stat_angle) << "\n";
    for (const auto& [k, v] : feasibility)
      os << "feasibility " << k << std::string(k.size() < 13 ? 13 - k.size() : 1, ' ')
         << num_str(v) << "\n";
    for (const auto& [k, v] : complementarity)
      os << "complementarity " << k << std::string(k.size() < 9 ? 9 - k.size() : 1, ' ')
         << num_str(v) << "\n";
    os << "dual sign                " << num_str(dual_sign) << "\n"
       << "worst                    " << num_str(worst()) << "\n";
    return os.str();
  }
};

inline KktReport kkt_report(const DispatchProblem& prob, const Eigen::VectorXd& x,
                            const Eigen::VectorXd& y, const Eigen::VectorXd& z) {
  KktReport rep;
  const QpProblem& qp = prob.qp;
  Eigen::VectorXd rd = qp.P * x + qp.q + qp.A.transpose() * y + qp.G.transpose() * z;
  for (int u = 0; u < prob.n_units; ++u) {
    if (prob.gp_base[u] >= 0)
      for (int t = 0; t < prob.n_e; ++t)
        rep.stat_power = std::max(rep.stat_power, std::abs(rd[prob.gp(u, t)]));
    if (prob.gh_base[u] >= 0)
      for (int r = 0; r < prob.n_h; ++r)
        rep.stat_heat = std::max(rep.stat_heat, std::abs(rd[prob.gh(u, r)]));
  }
  for (int i = prob.t_base; i < prob.t_base + prob.n_h * prob.n_states; ++i)
    rep.stat_temp = std::max(rep.stat_temp, std::abs(rd[i]));
  for (int i = prob.delta_base; i < prob.delta_base + prob.n_e * prob.n_buses; ++i)
    rep.stat_angle = std::max(rep.stat_angle, std::abs(rd[i]));

  Eigen::VectorXd rp = qp.A * x - qp.b;
  for (std::size_t i = 0; i < prob.eq_tags.size(); ++i) {
    double& slot = rep.feasibility[to_string(prob.eq_tags[i].family)];
    slot = std::max(slot, std::abs(rp[static_cast<int>(i)]));
  }
  Eigen::VectorXd gap = qp.G * x - qp.h;
  for (std::size_t i = 0; i < prob.ineq_tags.size(); ++i) {
    const char* fam = to_string(prob.ineq_tags[i].family);
    int ii = static_cast<int>(i);
    double& slot = rep.feasibility[fam];
    slot = std::max(slot, std::max(0.0, gap[ii]));
    double& cslot = rep.complementarity[fam];
    cslot = std::max(cslot, std::abs(gap[ii] * z[ii]));
    rep.dual_sign = std::max(rep.dual_sign, -z[ii]);
  }
  return rep;
}

inline KktReport kkt_report(const DispatchProblem& prob, const DispatchSolution& sol) {
  return kkt_report(prob, sol.x, sol.y, sol.z);
}

}  // namespace chp
