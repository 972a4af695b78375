#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "chp/time_grid.hpp"

namespace chp {

// Physical constants used by the node-method thermal model. Overridable in
// the instance file header.
struct WaterProperties {
  double specific_heat_j_per_kg_c = 4182.0;
  double density_kg_per_m3 = 1000.0;

  // specific heat in MW·s/(kg·°C), for equations written in MW
  double specific_heat_mw() const { return specific_heat_j_per_kg_c * 1e-6; }
};

enum class NodeKind { Source, Load };
enum class NetworkSide { Supply, Return };

// A heat-exchanger node. Sources inject through the exchanger on the supply
// side, loads withdraw on the return side. Temperature requirements are
// optional per period; an absent entry means "no constraint".
struct HeatNode {
  std::string id;
  NodeKind kind = NodeKind::Load;
  std::vector<double> exchanger_flow_kg_per_s;            // per heat period
  std::vector<std::optional<double>> required_supply_c;   // empty or per heat period
  std::vector<std::optional<double>> required_return_c;
  std::vector<double> load_mw;                            // per heat period, zero for sources
  double initial_supply_c = 0;
  double initial_return_c = 0;
};

struct Pipeline {
  std::string id;
  std::string from_node;
  std::string to_node;
  NetworkSide side = NetworkSide::Supply;
  double length_m = 0;
  double cross_section_m2 = 0;
  std::vector<double> flow_kg_per_s;        // per heat period, fixed (not dispatched)
  double loss_w_per_m_c = 0;
  std::vector<double> ambient_c;            // per heat period; empty -> network ambient
  std::optional<double> max_temp_c;         // inlet temperature cap
};

struct HeatNetwork {
  std::vector<double> ambient_c;            // per heat period, used for settlement baselines
  std::vector<HeatNode> nodes;
  std::vector<Pipeline> pipelines;
};

struct Bus {
  std::string id;
  std::vector<double> load_mw;              // per electricity period
};

struct Line {
  std::string id;
  std::string from_bus;
  std::string to_bus;
  double reactance_pu = 0;
  double limit_mw = 0;
};

struct ElectricNetwork {
  std::string reference_bus;
  std::vector<Bus> buses;
  std::vector<Line> lines;
};

enum class UnitKind { PureElectric, PureHeat, ExtractionCondensing, BackPressure };

// One half-plane of a unit's feasible region:
//   power_coeff * G_p + heat_coeff * G_h <= bound.
// Rows with power_coeff == 0 constrain heat output alone and are enforced
// once per heat period; all other rows are enforced per electricity period.
struct PolytopeRow {
  double power_coeff = 0;
  double heat_coeff = 0;
  double bound = 0;
};

// Production cost: fixed + heat_linear*Gh + heat_quadratic*Gh^2
//                        + power_linear*Gp + power_quadratic*Gp^2 + cross*Gp*Gh.
// fixed is a standby rate in $/h; the rest are $/MWh-shaped marginal terms.
struct UnitCost {
  double fixed_per_hour = 0;
  double heat_linear = 0;
  double heat_quadratic = 0;
  double power_linear = 0;
  double power_quadratic = 0;
  double cross = 0;
};

struct GenerationUnit {
  std::string id;
  UnitKind kind = UnitKind::PureElectric;
  std::optional<std::string> bus;    // required unless PureHeat
  std::optional<std::string> node;   // required unless PureElectric
  UnitCost cost;
  std::vector<PolytopeRow> region;

  bool has_power() const { return kind != UnitKind::PureHeat; }
  bool has_heat() const { return kind != UnitKind::PureElectric; }
};

// The single immutable input artifact: networks, units, loads and the time
// grid. All per-period series are explicitly lengthed (heat side: heat
// periods, electric side: electricity periods); nothing is broadcast.
struct Instance {
  int format_version = 1;
  std::string name;
  WaterProperties water;
  TimeGrid grid;
  HeatNetwork heat;
  ElectricNetwork electric;
  std::vector<GenerationUnit> units;

  int node_index(const std::string& id) const {
    for (std::size_t i = 0; i < heat.nodes.size(); ++i)
      if (heat.nodes[i].id == id) return static_cast<int>(i);
    throw std::out_of_range("unknown heat node: " + id);
  }
  int bus_index(const std::string& id) const {
    for (std::size_t i = 0; i < electric.buses.size(); ++i)
      if (electric.buses[i].id == id) return static_cast<int>(i);
    throw std::out_of_range("unknown bus: " + id);
  }
  int unit_index(const std::string& id) const {
    for (std::size_t i = 0; i < units.size(); ++i)
      if (units[i].id == id) return static_cast<int>(i);
    throw std::out_of_range("unknown unit: " + id);
  }

  // ambient temperature applying to a pipeline at heat period r0 (0-based)
  double pipe_ambient(const Pipeline& p, int r0) const {
    return p.ambient_c.empty() ? heat.ambient_c.at(r0) : p.ambient_c.at(r0);
  }
};

inline const char* to_string(NodeKind k) { return k == NodeKind::Source ? "source" : "load"; }
inline const char* to_string(NetworkSide s) {
  return s == NetworkSide::Supply ? "supply" : "return";
}
inline const char* to_string(UnitKind k) {
  switch (k) {
    case UnitKind::PureElectric: return "pure_electric";
    case UnitKind::PureHeat: return "pure_heat";
    case UnitKind::ExtractionCondensing: return "extraction_condensing";
    case UnitKind::BackPressure: return "back_pressure";
  }
  return "?";
}

}  // namespace chp
