#pragma once

#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "chp/common.hpp"
#include "chp/dispatch.hpp"
#include "chp/instance_io.hpp"
#include "chp/pricing.hpp"
#include "chp/settlement.hpp"
#include "chp/validate.hpp"
#include "chp/verification.hpp"

namespace chp {

struct RunConfig {
  std::string command;
  std::string instance_path;
  std::string out_dir;
  double kkt_tol = 1e-6;
  double price_tol = 1e-3;
  std::uint64_t seed = 0;
  std::vector<std::string> targets;
  bool export_qp = false;
  bool dump_dynamics = false;
  int sweep_count = 0;
  double fault_scale_heat_duals = 1.0;  // test hook: corrupts posted heat duals
};

namespace artifacts_detail {

inline std::string csv_escape(const std::string& s) { return s; }  // fields never hold commas

inline double start_hours_e(const Instance& inst, int t0) {
  return t0 * inst.grid.electricity_step_hours;
}
inline double start_hours_h(const Instance& inst, int r0) {
  return r0 * inst.grid.heat_step_hours;
}

inline std::vector<std::vector<std::string>> read_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("missing run artifact: " + path);
  std::vector<std::vector<std::string>> rows;
  std::string line;
  while (std::getline(in, line)) {
    std::vector<std::string> row;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) row.push_back(cell);
    rows.push_back(std::move(row));
  }
  return rows;
}

}  // namespace artifacts_detail

inline std::string solution_csv(const Instance& inst, const DispatchSolution& sol) {
  using namespace artifacts_detail;
  std::ostringstream os;
  os << "variable,entity,period,period_start_hours,value\n";
  for (std::size_t u = 0; u < inst.units.size(); ++u) {
    if (inst.units[u].has_power())
      for (int t = 0; t < inst.grid.electricity_periods; ++t)
        os << "unit_power_mw," << inst.units[u].id << "," << t + 1 << ","
           << num_str(start_hours_e(inst, t)) << "," << num_str(sol.gp(u, t)) << "\n";
    if (inst.units[u].has_heat())
      for (int r = 0; r < inst.grid.heat_periods; ++r)
        os << "unit_heat_mw," << inst.units[u].id << "," << r + 1 << ","
           << num_str(start_hours_h(inst, r)) << "," << num_str(sol.gh(u, r)) << "\n";
  }
  for (std::size_t k = 0; k < inst.heat.nodes.size(); ++k)
    for (int side = 0; side < 2; ++side)
      for (int r = 0; r < inst.grid.heat_periods; ++r)
        os << "temperature_c," << inst.heat.nodes[k].id << (side == 0 ? "/supply" : "/return")
           << "," << r + 1 << "," << num_str(start_hours_h(inst, r)) << ","
           << num_str(sol.temps(r, 2 * static_cast<int>(k) + side)) << "\n";
  for (std::size_t b = 0; b < inst.electric.buses.size(); ++b)
    for (int t = 0; t < inst.grid.electricity_periods; ++t)
      os << "bus_angle_rad," << inst.electric.buses[b].id << "," << t + 1 << ","
         << num_str(start_hours_e(inst, t)) << ","
         << num_str(sol.angle(t, static_cast<int>(b))) << "\n";
  return os.str();
}

inline std::string prices_csv(const Instance& inst, const PriceSchedule& ps) {
  using namespace artifacts_detail;
  std::ostringstream os;
  os << "market,location,period,period_start_hours,energy_price,grade_supply,grade_return,"
        "mg,co\n";
  for (std::size_t k = 0; k < inst.heat.nodes.size(); ++k)
    for (int r = 0; r < inst.grid.heat_periods; ++r)
      os << "heat," << inst.heat.nodes[k].id << "," << r + 1 << ","
         << num_str(start_hours_h(inst, r)) << ","
         << num_str(ps.heat_energy(r, static_cast<int>(k))) << ","
         << num_str(ps.grade_supply(r, static_cast<int>(k))) << ","
         << num_str(ps.grade_return(r, static_cast<int>(k))) << ",,\n";
  for (std::size_t b = 0; b < inst.electric.buses.size(); ++b)
    for (int t = 0; t < inst.grid.electricity_periods; ++t)
      os << "electricity," << inst.electric.buses[b].id << "," << t + 1 << ","
         << num_str(start_hours_e(inst, t)) << ","
         << num_str(ps.electricity(t, static_cast<int>(b))) << ",,,,\n";
  for (std::size_t u = 0; u < inst.units.size(); ++u) {
    const GenerationUnit& unit = inst.units[u];
    const PriceDecomposition& d = ps.units[u];
    if (unit.has_power()) {
      int b = inst.bus_index(*unit.bus);
      for (int t = 0; t < inst.grid.electricity_periods; ++t)
        os << "electricity," << unit.id << "," << t + 1 << ","
           << num_str(start_hours_e(inst, t)) << "," << num_str(ps.electricity(t, b))
           << ",,," << num_str(d.mg_electric[t]) << "," << num_str(d.co_electric[t]) << "\n";
    }
    if (unit.has_heat()) {
      int k = inst.node_index(*unit.node);
      for (int r = 0; r < inst.grid.heat_periods; ++r)
        os << "heat," << unit.id << "," << r + 1 << "," << num_str(start_hours_h(inst, r))
           << "," << num_str(ps.heat_energy(r, k)) << ",,," << num_str(d.mg_heat[r]) << ","
           << num_str(d.co_heat[r]) << "\n";
    }
  }
  return os.str();
}

inline std::string settlements_csv(const std::vector<SettlementLine>& lines) {
  std::ostringstream os;
  os << "participant,market,energy_payment,grade_payment,total\n";
  for (const SettlementLine& l : lines)
    os << l.participant << "," << l.market << "," << num_str(l.energy_payment) << ","
       << num_str(l.grade_payment) << "," << num_str(l.total) << "\n";
  return os.str();
}

inline std::string surplus_csv(const Instance& inst, const SurplusReport& rep) {
  using namespace artifacts_detail;
  std::ostringstream os;
  os << "market,period,period_start_hours,direct_ms,cr,il,iu,identity_gap\n";
  for (std::size_t r = 0; r < rep.heat.size(); ++r) {
    const HeatSurplusRow& row = rep.heat[r];
    os << "heat," << r + 1 << "," << num_str(start_hours_h(inst, static_cast<int>(r))) << ","
       << num_str(row.direct) << "," << num_str(row.congestion_rent) << ","
       << num_str(row.impact_last) << "," << num_str(row.impact_upcoming) << ","
       << num_str(row.gap()) << "\n";
  }
  for (std::size_t t = 0; t < rep.elec_direct.size(); ++t)
    os << "electricity," << t + 1 << ","
       << num_str(start_hours_e(inst, static_cast<int>(t))) << ","
       << num_str(rep.elec_direct[t]) << "," << num_str(rep.elec_rent[t]) << ",,,"
       << num_str(rep.elec_direct[t] - rep.elec_rent[t]) << "\n";
  return os.str();
}

inline std::string verification_csv(const Instance& inst, const VerificationReport& rep) {
  std::ostringstream os;
  os << "target,period,period_start_hours,posted_price,oracle_price,abs_err,verdict\n";
  for (const OracleCheck& c : rep.checks) {
    double start = c.target.kind == TargetKind::HeatNode
                       ? (c.target.period - 1) * inst.grid.heat_step_hours
                       : (c.target.period - 1) * inst.grid.electricity_step_hours;
    os << c.target.to_string() << "," << c.target.period << "," << num_str(start) << ","
       << num_str(c.posted) << "," << (c.conclusive() ? num_str(c.oracle) : "") << ","
       << (c.conclusive() ? num_str(c.abs_err) : "") << "," << to_string(c.verdict) << "\n";
  }
  return os.str();
}

inline std::string kkt_txt(const Instance& inst, const DispatchProblem& prob,
                           const DispatchSolution& sol) {
  std::ostringstream os;
  os << "status " << to_string(sol.status) << "\n";
  if (!sol.message.empty()) os << "message " << sol.message << "\n";
  os << "iterations " << sol.iterations << "\npolished " << (sol.polished ? 1 : 0) << "\n";
  if (sol.optimal()) {
    os << "objective " << num_str(sol.objective) << "\n\n" << kkt_report(prob, sol).to_string();
  }
  if (!sol.conflicting_rows.empty()) {
    os << "\nconflicting rows:\n";
    for (const std::string& r : sol.conflicting_rows) os << "  " << r << "\n";
  }
  (void)inst;
  return os.str();
}

// ---------------------------------------------------------------------------
// Run pipeline.
// ---------------------------------------------------------------------------

struct RunOutputs {
  std::map<std::string, std::string> files;  // name -> content
  int exit_code = 0;
  std::string log;
};

inline void write_manifest(const RunConfig& cfg, const std::string& instance_digest,
                           RunOutputs& out, const DispatchSolution* sol) {
  json m;
  m["tool"] = "chpmarket";
  m["version"] = CHP_VERSION;
  m["command"] = cfg.command;
  m["instance"] = {{"path", cfg.instance_path}, {"sha256", instance_digest}};
  m["config"] = {{"kkt_tol", cfg.kkt_tol},
                 {"price_tol", cfg.price_tol},
                 {"seed", cfg.seed},
                 {"targets", cfg.targets},
                 {"export_qp", cfg.export_qp},
                 {"sweep_count", cfg.sweep_count}};
  if (sol) {
    m["solver"] = {{"status", to_string(sol->status)},
                   {"iterations", sol->iterations},
                   {"polished", sol->polished}};
    if (sol->optimal()) m["solver"]["objective"] = sol->objective;
  }
  json outputs = json::array();
  for (const auto& [name, content] : out.files)
    outputs.push_back({{"name", name}, {"sha256", sha256_hex(content)}});
  m["outputs"] = outputs;
  out.files["manifest.json"] = m.dump(2) + "\n";
}

inline void flush_outputs(const RunConfig& cfg, const RunOutputs& out) {
  if (cfg.out_dir.empty()) return;
  std::filesystem::create_directories(cfg.out_dir);
  for (const auto& [name, content] : out.files)
    write_file((std::filesystem::path(cfg.out_dir) / name).string(), content);
}

// Full clearing run: solve, price, settle, audit, write artifacts.
// Exit codes: 0 optimal and all checks pass, 1 parse/validation error,
// 2 infeasible or solver failure, 3 invariant failure.
inline RunOutputs run_clear(const RunConfig& cfg) {
  RunOutputs out;
  std::ostringstream log;
  Instance inst;
  std::string raw;
  try {
    raw = read_file(cfg.instance_path);
    inst = parse_instance(raw);
  } catch (const std::exception& e) {
    out.exit_code = 1;
    out.log = std::string("error: ") + e.what() + "\n";
    return out;
  }
  std::string digest = sha256_hex(raw);
  ValidationReport vrep = validate(inst);
  if (!vrep.pass()) {
    out.exit_code = 1;
    out.log = vrep.to_string();
    return out;
  }

  HeatDynamicsSystem dyn = assemble(inst);
  DispatchProblem prob = build(inst, dyn);
  if (cfg.export_qp) {
    std::ostringstream lp;
    write_lp(lp, prob.qp, [&](int i) { return prob.var_name(i); },
             [&](int r) { return prob.eq_name(inst, r); },
             [&](int r) { return prob.ineq_name(inst, r); });
    out.files["qp.lp"] = lp.str();
  }
  if (cfg.dump_dynamics) {
    std::ostringstream ds;
    dyn.dump(ds);
    out.files["dynamics.txt"] = ds.str();
  }

  DispatchSolution sol = solve(prob, inst);
  out.files["kkt.txt"] = kkt_txt(inst, prob, sol);
  if (!sol.optimal()) {
    write_manifest(cfg, digest, out, &sol);
    flush_outputs(cfg, out);
    log << "solve: " << to_string(sol.status) << " " << sol.message << "\n";
    for (const std::string& r : sol.conflicting_rows) log << "  conflict: " << r << "\n";
    out.exit_code = 2;
    out.log = log.str();
    return out;
  }

  PriceSchedule ps = compute_prices(inst, dyn, prob, sol);
  std::vector<SettlementLine> lines = settlement_lines(inst, ps, sol);
  SurplusReport surplus = settle(inst, dyn, sol, ps);

  out.files["solution.csv"] = solution_csv(inst, sol);
  out.files["prices.csv"] = prices_csv(inst, ps);
  out.files["settlements.csv"] = settlements_csv(lines);
  out.files["surplus.csv"] = surplus_csv(inst, surplus);

  CheckTolerances tol;
  tol.kkt = cfg.kkt_tol;
  std::vector<CheckResult> checks = invariant_checks(inst, dyn, prob, sol, ps, surplus, tol);
  bool all_ok = true;
  log << "objective " << num_str(sol.objective) << "\n";
  for (const CheckResult& c : checks) {
    all_ok = all_ok && c.ok;
    log << (c.ok ? "PASS " : "FAIL ") << c.name << " " << num_str(c.value)
        << " (limit " << num_str(c.limit) << ")\n";
  }
  if (!surplus.temperature_ordering_ok)
    log << "warning: temperatures below ambient; CR/IL nonnegativity not asserted\n";
  log << "adequacy heat " << (surplus.heat_total >= -tol.adequacy ? "PASS" : "FAIL")
      << " M_H=" << num_str(surplus.heat_total) << "\n";
  log << "adequacy electricity "
      << (surplus.min_elec_period() >= -tol.adequacy ? "PASS" : "FAIL")
      << " min M_E,t=" << num_str(surplus.min_elec_period()) << "\n";

  write_manifest(cfg, digest, out, &sol);
  flush_outputs(cfg, out);
  out.exit_code = all_ok ? 0 : 3;
  out.log = log.str();
  return out;
}

// Verification run: finite-difference oracle sweep plus the invariant audit.
inline RunOutputs run_verify(const RunConfig& cfg) {
  RunOutputs out;
  std::ostringstream log;
  Instance inst;
  std::string raw;
  try {
    raw = read_file(cfg.instance_path);
    inst = parse_instance(raw);
  } catch (const std::exception& e) {
    out.exit_code = 1;
    out.log = std::string("error: ") + e.what() + "\n";
    return out;
  }
  std::string digest = sha256_hex(raw);
  ValidationReport vrep = validate(inst);
  if (!vrep.pass()) {
    out.exit_code = 1;
    out.log = vrep.to_string();
    return out;
  }
  HeatDynamicsSystem dyn = assemble(inst);
  DispatchProblem prob = build(inst, dyn);
  DispatchSolution sol = solve(prob, inst);
  if (!sol.optimal()) {
    out.exit_code = 2;
    out.log = std::string("solve: ") + to_string(sol.status) + "\n";
    return out;
  }
  if (cfg.fault_scale_heat_duals != 1.0)
    sol.lambda_heat *= cfg.fault_scale_heat_duals;

  PriceSchedule ps = compute_prices(inst, dyn, prob, sol);
  VerificationReport vr =
      verify_prices(inst, ps, cfg.targets, 1e-2, cfg.price_tol, cfg.price_tol);
  out.files["verification.csv"] = verification_csv(inst, vr);

  SurplusReport surplus = settle(inst, dyn, sol, ps);
  CheckTolerances tol;
  tol.kkt = cfg.kkt_tol;
  std::vector<CheckResult> checks = invariant_checks(inst, dyn, prob, sol, ps, surplus, tol);
  bool all_ok = vr.all_conclusive_match();
  log << "oracle checks " << vr.checks.size() << " conclusive " << vr.conclusive
      << " matched " << vr.matched << "\n";
  for (const CheckResult& c : checks) {
    all_ok = all_ok && c.ok;
    log << (c.ok ? "PASS " : "FAIL ") << c.name << " " << num_str(c.value) << "\n";
  }
  if (cfg.sweep_count > 0) {
    SweepReport sweep = property_sweep(cfg.seed, cfg.sweep_count, tol);
    log << sweep.to_string();
    all_ok = all_ok && sweep.violations == 0;
  }
  write_manifest(cfg, digest, out, &sol);
  flush_outputs(cfg, out);
  out.exit_code = all_ok ? 0 : 3;
  out.log = log.str();
  return out;
}

// Long-format export of a completed clearing run, one row per series sample.
inline RunOutputs run_plotdata(const RunConfig& cfg) {
  using namespace artifacts_detail;
  RunOutputs out;
  std::ostringstream os;
  try {
    auto solution = read_csv((std::filesystem::path(cfg.out_dir) / "solution.csv").string());
    auto prices = read_csv((std::filesystem::path(cfg.out_dir) / "prices.csv").string());
    auto surplus = read_csv((std::filesystem::path(cfg.out_dir) / "surplus.csv").string());
    os << "series,location,period_start_hours,value\n";
    for (std::size_t i = 1; i < solution.size(); ++i) {
      const auto& r = solution[i];
      if (r.size() < 5 || r[0] == "bus_angle_rad") continue;
      os << r[0] << "," << r[1] << "," << r[3] << "," << r[4] << "\n";
    }
    for (std::size_t i = 1; i < prices.size(); ++i) {
      const auto& r = prices[i];
      if (r.size() < 5) continue;
      bool unit_row = r.size() >= 9 && !r[7].empty();
      if (unit_row) {
        os << (r[0] == "heat" ? "mg_heat" : "mg_electric") << "," << r[1] << "," << r[3]
           << "," << r[7] << "\n";
        os << (r[0] == "heat" ? "co_heat" : "co_electric") << "," << r[1] << "," << r[3]
           << "," << r[8] << "\n";
      } else if (r[0] == "heat") {
        os << "heat_price," << r[1] << "," << r[3] << "," << r[4] << "\n";
        if (r.size() >= 7 && !r[5].empty())
          os << "grade_price_supply," << r[1] << "," << r[3] << "," << r[5] << "\n";
        if (r.size() >= 7 && !r[6].empty())
          os << "grade_price_return," << r[1] << "," << r[3] << "," << r[6] << "\n";
      } else {
        os << "electricity_price," << r[1] << "," << r[3] << "," << r[4] << "\n";
      }
    }
    for (std::size_t i = 1; i < surplus.size(); ++i) {
      const auto& r = surplus[i];
      if (r.size() < 8) continue;
      if (r[0] == "heat") {
        os << "surplus_heat," << r[0] << "," << r[2] << "," << r[3] << "\n";
        os << "surplus_heat_cr," << r[0] << "," << r[2] << "," << r[4] << "\n";
        os << "surplus_heat_il," << r[0] << "," << r[2] << "," << r[5] << "\n";
        os << "surplus_heat_iu," << r[0] << "," << r[2] << "," << r[6] << "\n";
      } else {
        os << "surplus_electricity," << r[0] << "," << r[2] << "," << r[3] << "\n";
      }
    }
  } catch (const std::exception& e) {
    out.exit_code = 1;
    out.log = std::string("error: ") + e.what() + "\n";
    return out;
  }
  out.files["plotdata.csv"] = os.str();
  flush_outputs(cfg, out);
  return out;
}

inline RunOutputs run_validate(const RunConfig& cfg) {
  RunOutputs out;
  try {
    Instance inst = parse_instance(read_file(cfg.instance_path));
    ValidationReport rep = validate(inst);
    out.log = rep.to_string();
    out.exit_code = rep.pass() ? 0 : 1;
  } catch (const std::exception& e) {
    out.exit_code = 1;
    out.log = std::string("error: ") + e.what() + "\n";
  }
  return out;
}

}  // namespace chp
