#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "chp/heat_dynamics.hpp"
#include "chp/model.hpp"

namespace chp {

struct Violation {
  std::string field;      // e.g. "units[1].cost"
  std::string invariant;  // short name, e.g. "non-convex cost"
  std::string detail;
};

struct ValidationReport {
  std::vector<Violation> violations;
  std::vector<std::string> warnings;

  bool pass() const { return violations.empty(); }

  std::string to_string() const {
    std::ostringstream os;
    if (pass()) {
      os << "validation: pass\n";
    } else {
      os << "validation: " << violations.size() << " violation(s)\n";
      for (const auto& v : violations)
        os << "  " << v.field << ": " << v.invariant
           << (v.detail.empty() ? "" : " (" + v.detail + ")") << "\n";
    }
    for (const auto& w : warnings) os << "  warning: " << w << "\n";
    return os.str();
  }
};

// Geometry of a unit's feasible region in the (G_p, G_h) plane (or on a
// single axis for pure units). Vertices are found by pairwise row
// intersection; boundedness by checking candidate recession directions,
// which for a planar region are all orthogonal to some row normal.
struct RegionGeometry {
  bool empty = true;
  bool bounded = false;
  std::vector<std::pair<double, double>> vertices;  // (G_p, G_h)
  double min_power = 0, max_power = 0, min_heat = 0, max_heat = 0;
};

inline RegionGeometry analyze_region(const std::vector<PolytopeRow>& rows, bool has_power,
                                     bool has_heat) {
  RegionGeometry g;
  const double tol = 1e-9;
  auto feasible = [&](double p, double h) {
    for (const auto& r : rows) {
      double scale = std::max({1.0, std::abs(r.bound), std::abs(r.power_coeff * p),
                               std::abs(r.heat_coeff * h)});
      if (r.power_coeff * p + r.heat_coeff * h > r.bound + tol * scale) return false;
    }
    return true;
  };

  if (has_power != has_heat) {
    // 1-D interval on the active axis
    double lo = -std::numeric_limits<double>::infinity();
    double hi = std::numeric_limits<double>::infinity();
    for (const auto& r : rows) {
      double coeff = has_power ? r.power_coeff : r.heat_coeff;
      if (coeff > 0) hi = std::min(hi, r.bound / coeff);
      else if (coeff < 0) lo = std::max(lo, r.bound / coeff);
      else if (r.bound < 0) { g.empty = true; g.bounded = true; return g; }
    }
    g.bounded = std::isfinite(lo) && std::isfinite(hi);
    g.empty = lo > hi + tol;
    if (!g.empty && g.bounded) {
      g.vertices = {{has_power ? lo : 0, has_heat ? lo : 0},
                    {has_power ? hi : 0, has_heat ? hi : 0}};
      g.min_power = has_power ? lo : 0; g.max_power = has_power ? hi : 0;
      g.min_heat = has_heat ? lo : 0;   g.max_heat = has_heat ? hi : 0;
    }
    return g;
  }

  // recession direction candidates: +-90deg rotations of each row normal
  g.bounded = true;
  for (const auto& r : rows) {
    double n = std::hypot(r.power_coeff, r.heat_coeff);
    if (n < tol) continue;
    for (double sgn : {1.0, -1.0}) {
      double dp = sgn * -r.heat_coeff / n, dh = sgn * r.power_coeff / n;
      bool recedes = true;
      for (const auto& q : rows)
        if (q.power_coeff * dp + q.heat_coeff * dh > tol) { recedes = false; break; }
      if (recedes) { g.bounded = false; break; }
    }
    if (!g.bounded) break;
  }

  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (std::size_t j = i + 1; j < rows.size(); ++j) {
      const auto &a = rows[i], &b = rows[j];
      double det = a.power_coeff * b.heat_coeff - a.heat_coeff * b.power_coeff;
      double scale = std::max({std::abs(a.power_coeff), std::abs(a.heat_coeff),
                               std::abs(b.power_coeff), std::abs(b.heat_coeff), 1.0});
      if (std::abs(det) < 1e-12 * scale * scale) continue;
      double p = (a.bound * b.heat_coeff - a.heat_coeff * b.bound) / det;
      double h = (a.power_coeff * b.bound - a.bound * b.power_coeff) / det;
      if (feasible(p, h)) g.vertices.emplace_back(p, h);
    }
  }
  g.empty = g.vertices.empty();
  if (!g.empty) {
    g.min_power = g.max_power = g.vertices[0].first;
    g.min_heat = g.max_heat = g.vertices[0].second;
    for (auto& [p, h] : g.vertices) {
      g.min_power = std::min(g.min_power, p); g.max_power = std::max(g.max_power, p);
      g.min_heat = std::min(g.min_heat, h);   g.max_heat = std::max(g.max_heat, h);
    }
  }
  return g;
}

// True if the region rows contain a +-pair of identical mixed rows (the
// inequality encoding of an affine power/heat relation).
inline bool has_affine_pair(const std::vector<PolytopeRow>& rows) {
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto& a = rows[i];
    if (a.power_coeff == 0 || a.heat_coeff == 0) continue;
    for (std::size_t j = 0; j < rows.size(); ++j) {
      if (i == j) continue;
      const auto& b = rows[j];
      double scale = std::max({std::abs(a.power_coeff), std::abs(a.heat_coeff),
                               std::abs(a.bound), 1.0});
      if (std::abs(a.power_coeff + b.power_coeff) < 1e-9 * scale &&
          std::abs(a.heat_coeff + b.heat_coeff) < 1e-9 * scale &&
          std::abs(a.bound + b.bound) < 1e-9 * scale)
        return true;
    }
  }
  return false;
}

namespace detail {

inline void check_series(std::vector<Violation>& out, const std::string& field,
                         std::size_t got, int want) {
  if (got != static_cast<std::size_t>(want))
    out.push_back({field, "series length mismatch",
                   "expected " + std::to_string(want) + " entries, got " +
                       std::to_string(got)});
}

}  // namespace detail

// Structural and numeric validation. A passing instance satisfies every
// precondition the assembler, solver and settlement stages rely on.
// Violations are data, not exceptions.
inline ValidationReport validate(const Instance& inst) {
  ValidationReport rep;
  auto fail = [&](const std::string& field, const std::string& inv, std::string detail = "") {
    rep.violations.push_back({field, inv, std::move(detail)});
  };

  const TimeGrid& grid = inst.grid;
  const int n_h = grid.heat_periods;
  const int n_e = grid.electricity_periods;

  if (inst.format_version != 1)
    fail("format_version", "unsupported version", std::to_string(inst.format_version));
  if (n_h <= 0 || n_e <= 0 || grid.heat_step_hours <= 0 || grid.electricity_step_hours <= 0)
    fail("time_grid", "non-positive grid");
  else {
    if (!grid.ratio_is_integral())
      fail("time_grid", "heat step not an integer multiple of electricity step");
    else if (n_e != n_h * grid.block_size())
      fail("time_grid", "period counts inconsistent with step ratio");
    if (!grid.horizons_match()) fail("time_grid", "horizons differ between sides");
  }
  if (!rep.pass()) return rep;  // later checks index by the grid

  if (inst.water.specific_heat_j_per_kg_c <= 0 || inst.water.density_kg_per_m3 <= 0)
    fail("constants", "non-positive water properties");

  // ---- heat side ----
  std::set<std::string> node_ids;
  detail::check_series(rep.violations, "heat_network.ambient_c",
                       inst.heat.ambient_c.size(), n_h);
  for (std::size_t i = 0; i < inst.heat.nodes.size(); ++i) {
    const HeatNode& nd = inst.heat.nodes[i];
    std::string f = "heat_network.nodes[" + std::to_string(i) + "]";
    if (!node_ids.insert(nd.id).second) fail(f + ".id", "duplicate id", nd.id);
    detail::check_series(rep.violations, f + ".exchanger_flow_kg_per_s",
                         nd.exchanger_flow_kg_per_s.size(), n_h);
    detail::check_series(rep.violations, f + ".load_mw", nd.load_mw.size(), n_h);
    for (double m : nd.exchanger_flow_kg_per_s)
      if (!(m > 0)) { fail(f + ".exchanger_flow_kg_per_s", "non-positive exchanger flow"); break; }
    for (double d : nd.load_mw)
      if (d < 0) { fail(f + ".load_mw", "negative heat load"); break; }
    if (nd.kind == NodeKind::Source)
      for (double d : nd.load_mw)
        if (d != 0) { fail(f + ".load_mw", "nonzero load at source node"); break; }
    for (const auto* req : {&nd.required_supply_c, &nd.required_return_c}) {
      std::string rf = f + (req == &nd.required_supply_c ? ".required_supply_c"
                                                         : ".required_return_c");
      if (!req->empty()) {
        detail::check_series(rep.violations, rf, req->size(), n_h);
        for (std::size_t r = 0; r < req->size() && r < inst.heat.ambient_c.size(); ++r)
          if ((*req)[r]) {
            double val = *(*req)[r];
            if (!std::isfinite(val)) fail(rf, "non-finite requirement");
            else if (val < inst.heat.ambient_c[r])
              fail(rf, "requirement below ambient", "period " + std::to_string(r + 1));
          }
      }
    }
    if (!std::isfinite(nd.initial_supply_c) || !std::isfinite(nd.initial_return_c))
      fail(f, "non-finite initial temperature");
  }

  std::vector<int> active_inflow(inst.heat.nodes.size(), 0);
  std::vector<int> passive_inflow(inst.heat.nodes.size(), 0);
  for (std::size_t i = 0; i < inst.heat.pipelines.size(); ++i) {
    const Pipeline& p = inst.heat.pipelines[i];
    std::string f = "heat_network.pipelines[" + std::to_string(i) + "]";
    bool from_ok = node_ids.count(p.from_node) > 0;
    bool to_ok = node_ids.count(p.to_node) > 0;
    if (!from_ok) fail(f + ".from_node", "unknown node", p.from_node);
    if (!to_ok) fail(f + ".to_node", "unknown node", p.to_node);
    if (p.from_node == p.to_node) fail(f, "self-loop pipeline");
    detail::check_series(rep.violations, f + ".flow_kg_per_s", p.flow_kg_per_s.size(), n_h);
    if (!p.ambient_c.empty())
      detail::check_series(rep.violations, f + ".ambient_c", p.ambient_c.size(), n_h);
    if (p.cross_section_m2 <= 0) fail(f + ".cross_section_m2", "non-positive cross section");
    if (p.length_m < 0) fail(f + ".length_m", "negative length");
    if (p.loss_w_per_m_c < 0) fail(f + ".loss_w_per_m_c", "negative loss coefficient");
    for (std::size_t r = 0; r < p.flow_kg_per_s.size(); ++r) {
      if (!(p.flow_kg_per_s[r] > 0)) {
        fail(f + ".flow_kg_per_s", "non-positive mass flow");
        break;
      }
      try {
        transfer_fraction(p, grid, static_cast<int>(r), inst.water);
        loss_retention(p, static_cast<int>(r), inst.water);
      } catch (const PipelineTooSlow& e) {
        fail(f, "transport exceeds one heat period", num_str(e.fraction) + " periods");
        break;
      } catch (const ExcessiveLoss& e) {
        fail(f, "loss factor out of range", num_str(e.factor));
        break;
      }
    }
    if (p.max_temp_c && to_ok && from_ok) {
      for (std::size_t r = 0; r < inst.heat.ambient_c.size(); ++r)
        if (*p.max_temp_c < inst.pipe_ambient(p, static_cast<int>(r))) {
          fail(f + ".max_temp_c", "temperature cap below ambient");
          break;
        }
    }
    if (to_ok) {
      int k = inst.node_index(p.to_node);
      bool active = (inst.heat.nodes[k].kind == NodeKind::Source) ==
                    (p.side == NetworkSide::Supply);
      (active ? active_inflow : passive_inflow)[k]++;
    }
  }
  // the mixing row needs throughflow, otherwise the temperature map is singular
  for (std::size_t k = 0; k < inst.heat.nodes.size(); ++k)
    if (passive_inflow[k] == 0)
      fail("heat_network.nodes[" + std::to_string(k) + "]", "no inflow on passive side",
           std::string(to_string(inst.heat.nodes[k].kind)) + " node needs a " +
               (inst.heat.nodes[k].kind == NodeKind::Source ? "return" : "supply") +
               "-side pipeline");

  // ---- electric side ----
  std::set<std::string> bus_ids;
  for (std::size_t i = 0; i < inst.electric.buses.size(); ++i) {
    const Bus& b = inst.electric.buses[i];
    std::string f = "electric_network.buses[" + std::to_string(i) + "]";
    if (!bus_ids.insert(b.id).second) fail(f + ".id", "duplicate id", b.id);
    detail::check_series(rep.violations, f + ".load_mw", b.load_mw.size(), n_e);
  }
  if (!inst.electric.buses.empty() && bus_ids.count(inst.electric.reference_bus) == 0)
    fail("electric_network.reference_bus", "unknown bus", inst.electric.reference_bus);
  for (std::size_t i = 0; i < inst.electric.lines.size(); ++i) {
    const Line& l = inst.electric.lines[i];
    std::string f = "electric_network.lines[" + std::to_string(i) + "]";
    if (bus_ids.count(l.from_bus) == 0) fail(f + ".from_bus", "unknown bus", l.from_bus);
    if (bus_ids.count(l.to_bus) == 0) fail(f + ".to_bus", "unknown bus", l.to_bus);
    if (l.from_bus == l.to_bus) fail(f, "self-loop line");
    if (!(l.reactance_pu > 0)) fail(f + ".reactance_pu", "non-positive reactance");
    if (!(l.limit_mw > 0)) fail(f + ".limit_mw", "non-positive thermal limit");
  }
  if (inst.electric.buses.size() > 1) {
    // connectivity over the line graph
    std::vector<int> comp(inst.electric.buses.size(), -1);
    std::vector<int> stack{0};
    comp[0] = 0;
    while (!stack.empty()) {
      int b = stack.back();
      stack.pop_back();
      for (const Line& l : inst.electric.lines) {
        if (bus_ids.count(l.from_bus) == 0 || bus_ids.count(l.to_bus) == 0) continue;
        int u = inst.bus_index(l.from_bus), v = inst.bus_index(l.to_bus);
        if (u == b && comp[v] < 0) { comp[v] = 0; stack.push_back(v); }
        if (v == b && comp[u] < 0) { comp[u] = 0; stack.push_back(u); }
      }
    }
    for (std::size_t i = 0; i < comp.size(); ++i)
      if (comp[i] < 0) {
        fail("electric_network", "disconnected graph",
             "bus " + inst.electric.buses[i].id + " unreachable");
        break;
      }
  }

  // ---- units ----
  std::set<std::string> unit_ids;
  std::vector<int> heat_units_at_node(inst.heat.nodes.size(), 0);
  for (std::size_t i = 0; i < inst.units.size(); ++i) {
    const GenerationUnit& u = inst.units[i];
    std::string f = "units[" + std::to_string(i) + "]";
    if (!unit_ids.insert(u.id).second) fail(f + ".id", "duplicate id", u.id);

    if (u.has_power()) {
      if (!u.bus) fail(f + ".bus", "missing bus reference");
      else if (bus_ids.count(*u.bus) == 0) fail(f + ".bus", "unknown bus", *u.bus);
    } else if (u.bus) {
      fail(f + ".bus", "bus reference on pure-heat unit");
    }
    if (u.has_heat()) {
      if (!u.node) fail(f + ".node", "missing node reference");
      else if (node_ids.count(*u.node) == 0) fail(f + ".node", "unknown node", *u.node);
      else {
        int k = inst.node_index(*u.node);
        heat_units_at_node[k]++;
        if (inst.heat.nodes[k].kind != NodeKind::Source)
          fail(f + ".node", "heat unit at load node", *u.node);
      }
    } else if (u.node) {
      fail(f + ".node", "node reference on pure-electric unit");
    }

    const UnitCost& c = u.cost;
    if (c.heat_quadratic < 0 || c.power_quadratic < 0 ||
        4.0 * c.heat_quadratic * c.power_quadratic < c.cross * c.cross)
      fail(f + ".cost", "non-convex cost",
           "requires heat_quadratic >= 0, power_quadratic >= 0 and "
           "4*heat_quadratic*power_quadratic >= cross^2");
    if (u.kind == UnitKind::PureElectric &&
        (c.heat_linear != 0 || c.heat_quadratic != 0 || c.cross != 0))
      fail(f + ".cost", "heat cost terms on pure-electric unit");
    if (u.kind == UnitKind::PureHeat &&
        (c.power_linear != 0 || c.power_quadratic != 0 || c.cross != 0))
      fail(f + ".cost", "power cost terms on pure-heat unit");

    if (u.region.empty()) {
      fail(f + ".feasible_region", "empty row set");
      continue;
    }
    for (std::size_t b = 0; b < u.region.size(); ++b) {
      const PolytopeRow& row = u.region[b];
      std::string rf = f + ".feasible_region[" + std::to_string(b) + "]";
      if (!u.has_power() && row.power_coeff != 0)
        fail(rf, "power coefficient on pure-heat unit");
      if (!u.has_heat() && row.heat_coeff != 0)
        fail(rf, "heat coefficient on pure-electric unit");
      if (row.power_coeff == 0 && row.heat_coeff == 0)
        fail(rf, "degenerate all-zero row");
    }
    RegionGeometry geom = analyze_region(u.region, u.has_power(), u.has_heat());
    if (!geom.bounded) fail(f + ".feasible_region", "unbounded feasible region");
    else if (geom.empty) fail(f + ".feasible_region", "empty feasible region");
    if (u.kind == UnitKind::BackPressure && !has_affine_pair(u.region))
      fail(f + ".feasible_region", "unpaired linear relation",
           "back-pressure units need the +- inequality pair tying power to heat");
  }
  for (std::size_t k = 0; k < inst.heat.nodes.size(); ++k) {
    if (inst.heat.nodes[k].kind == NodeKind::Source && heat_units_at_node[k] != 1)
      fail("heat_network.nodes[" + std::to_string(k) + "]",
           heat_units_at_node[k] == 0 ? "source node without heat unit"
                                      : "multiple heat units at one node",
           inst.heat.nodes[k].id);
  }

  if (inst.units.empty()) fail("units", "no generation units");
  if (inst.heat.nodes.empty() && inst.electric.buses.empty())
    fail("instance", "no networks");

  // the assembled temperature map must be well-posed
  if (rep.pass() && !inst.heat.nodes.empty()) {
    try {
      HeatDynamicsSystem sys = assemble(inst);
      for (int r = 0; r < n_h; ++r) {
        Eigen::FullPivLU<Eigen::MatrixXd> lu(sys.current[r]);
        if (!lu.isInvertible()) {
          fail("heat_network", "singular temperature map",
               "heat period " + std::to_string(r + 1));
          break;
        }
      }
    } catch (const std::exception& e) {
      fail("heat_network", "assembly failure", e.what());
    }
  }
  return rep;
}

}  // namespace chp
