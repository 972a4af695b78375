#pragma once

#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "chp/common.hpp"
#include "chp/model.hpp"

namespace chp {

using nlohmann::json;

// Parse failure with a field path, surfaced by the CLI as a diagnostic.
struct ParseError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

namespace io_detail {

inline const json& require(const json& j, const std::string& key, const std::string& path) {
  auto it = j.find(key);
  if (it == j.end()) throw ParseError(path + "." + key + ": missing field");
  return *it;
}

template <typename T>
T get(const json& j, const std::string& key, const std::string& path) {
  const json& v = require(j, key, path);
  try {
    return v.get<T>();
  } catch (const json::exception&) {
    throw ParseError(path + "." + key + ": wrong type");
  }
}

template <typename T>
T get_or(const json& j, const std::string& key, T fallback) {
  auto it = j.find(key);
  if (it == j.end() || it->is_null()) return fallback;
  return it->get<T>();
}

inline std::vector<double> series(const json& j, const std::string& key,
                                  const std::string& path) {
  const json& v = require(j, key, path);
  if (!v.is_array()) throw ParseError(path + "." + key + ": expected an array");
  std::vector<double> out;
  for (const auto& e : v) {
    if (!e.is_number()) throw ParseError(path + "." + key + ": expected numbers");
    out.push_back(e.get<double>());
  }
  return out;
}

inline std::vector<std::optional<double>> optional_series(const json& j, const std::string& key,
                                                          const std::string& path) {
  auto it = j.find(key);
  std::vector<std::optional<double>> out;
  if (it == j.end() || it->is_null()) return out;
  if (!it->is_array()) throw ParseError(path + "." + key + ": expected an array");
  for (const auto& e : *it) {
    if (e.is_null()) out.push_back(std::nullopt);
    else if (e.is_number()) out.push_back(e.get<double>());
    else throw ParseError(path + "." + key + ": expected numbers or nulls");
  }
  return out;
}

inline NetworkSide side_from(const std::string& s, const std::string& path) {
  if (s == "supply") return NetworkSide::Supply;
  if (s == "return") return NetworkSide::Return;
  throw ParseError(path + ".side: expected \"supply\" or \"return\"");
}

inline NodeKind node_kind_from(const std::string& s, const std::string& path) {
  if (s == "source") return NodeKind::Source;
  if (s == "load") return NodeKind::Load;
  throw ParseError(path + ".kind: expected \"source\" or \"load\"");
}

inline UnitKind unit_kind_from(const std::string& s, const std::string& path) {
  if (s == "pure_electric") return UnitKind::PureElectric;
  if (s == "pure_heat") return UnitKind::PureHeat;
  if (s == "extraction_condensing") return UnitKind::ExtractionCondensing;
  if (s == "back_pressure") return UnitKind::BackPressure;
  throw ParseError(path + ".kind: unknown unit kind \"" + s + "\"");
}

}  // namespace io_detail

inline Instance instance_from_json(const json& j) {
  using namespace io_detail;
  Instance inst;
  inst.format_version = get<int>(j, "format_version", "$");
  if (inst.format_version != 1)
    throw ParseError("$.format_version: unsupported version " +
                     std::to_string(inst.format_version));
  inst.name = get_or<std::string>(j, "name", "");

  if (j.contains("constants")) {
    const json& c = j.at("constants");
    inst.water.specific_heat_j_per_kg_c =
        get_or<double>(c, "water_specific_heat_j_per_kg_c", 4182.0);
    inst.water.density_kg_per_m3 = get_or<double>(c, "water_density_kg_per_m3", 1000.0);
  }

  const json& tg = require(j, "time_grid", "$");
  inst.grid.electricity_step_hours = get<double>(tg, "electricity_step_hours", "$.time_grid");
  inst.grid.heat_step_hours = get<double>(tg, "heat_step_hours", "$.time_grid");
  inst.grid.electricity_periods = get<int>(tg, "electricity_periods", "$.time_grid");
  inst.grid.heat_periods = get<int>(tg, "heat_periods", "$.time_grid");

  if (j.contains("heat_network") && !j.at("heat_network").is_null()) {
    const json& hn = j.at("heat_network");
    inst.heat.ambient_c = series(hn, "ambient_c", "$.heat_network");
    std::size_t ni = 0;
    for (const json& n : get_or<json>(hn, "nodes", json::array())) {
      std::string path = "$.heat_network.nodes[" + std::to_string(ni++) + "]";
      HeatNode node;
      node.id = get<std::string>(n, "id", path);
      node.kind = node_kind_from(get<std::string>(n, "kind", path), path);
      node.exchanger_flow_kg_per_s = series(n, "exchanger_flow_kg_per_s", path);
      node.load_mw = series(n, "load_mw", path);
      node.required_supply_c = optional_series(n, "required_supply_c", path);
      node.required_return_c = optional_series(n, "required_return_c", path);
      node.initial_supply_c = get<double>(n, "initial_supply_c", path);
      node.initial_return_c = get<double>(n, "initial_return_c", path);
      inst.heat.nodes.push_back(std::move(node));
    }
    std::size_t pi = 0;
    for (const json& p : get_or<json>(hn, "pipelines", json::array())) {
      std::string path = "$.heat_network.pipelines[" + std::to_string(pi++) + "]";
      Pipeline pipe;
      pipe.id = get<std::string>(p, "id", path);
      pipe.from_node = get<std::string>(p, "from", path);
      pipe.to_node = get<std::string>(p, "to", path);
      pipe.side = side_from(get<std::string>(p, "side", path), path);
      pipe.length_m = get<double>(p, "length_m", path);
      pipe.cross_section_m2 = get<double>(p, "cross_section_m2", path);
      pipe.flow_kg_per_s = series(p, "flow_kg_per_s", path);
      pipe.loss_w_per_m_c = get<double>(p, "loss_w_per_m_c", path);
      if (p.contains("ambient_c") && !p.at("ambient_c").is_null())
        pipe.ambient_c = series(p, "ambient_c", path);
      if (p.contains("max_temp_c") && !p.at("max_temp_c").is_null())
        pipe.max_temp_c = p.at("max_temp_c").get<double>();
      inst.heat.pipelines.push_back(std::move(pipe));
    }
  }

  if (j.contains("electric_network") && !j.at("electric_network").is_null()) {
    const json& en = j.at("electric_network");
    inst.electric.reference_bus = get_or<std::string>(en, "reference_bus", "");
    std::size_t bi = 0;
    for (const json& b : get_or<json>(en, "buses", json::array())) {
      std::string path = "$.electric_network.buses[" + std::to_string(bi++) + "]";
      Bus bus;
      bus.id = get<std::string>(b, "id", path);
      bus.load_mw = series(b, "load_mw", path);
      inst.electric.buses.push_back(std::move(bus));
    }
    std::size_t li = 0;
    for (const json& l : get_or<json>(en, "lines", json::array())) {
      std::string path = "$.electric_network.lines[" + std::to_string(li++) + "]";
      Line line;
      line.id = get<std::string>(l, "id", path);
      line.from_bus = get<std::string>(l, "from", path);
      line.to_bus = get<std::string>(l, "to", path);
      line.reactance_pu = get<double>(l, "reactance_pu", path);
      line.limit_mw = get<double>(l, "limit_mw", path);
      inst.electric.lines.push_back(std::move(line));
    }
  }

  std::size_t ui = 0;
  for (const json& u : get_or<json>(j, "units", json::array())) {
    std::string path = "$.units[" + std::to_string(ui++) + "]";
    GenerationUnit unit;
    unit.id = get<std::string>(u, "id", path);
    unit.kind = unit_kind_from(get<std::string>(u, "kind", path), path);
    if (u.contains("bus") && !u.at("bus").is_null())
      unit.bus = u.at("bus").get<std::string>();
    if (u.contains("node") && !u.at("node").is_null())
      unit.node = u.at("node").get<std::string>();
    const json& c = require(u, "cost", path);
    unit.cost.fixed_per_hour = get_or<double>(c, "fixed_per_hour", 0.0);
    unit.cost.heat_linear = get_or<double>(c, "heat_linear", 0.0);
    unit.cost.heat_quadratic = get_or<double>(c, "heat_quadratic", 0.0);
    unit.cost.power_linear = get_or<double>(c, "power_linear", 0.0);
    unit.cost.power_quadratic = get_or<double>(c, "power_quadratic", 0.0);
    unit.cost.cross = get_or<double>(c, "cross", 0.0);
    const json& rows = require(u, "feasible_region", path);
    if (!rows.is_array()) throw ParseError(path + ".feasible_region: expected an array");
    std::size_t ri = 0;
    for (const json& r : rows) {
      std::string rp = path + ".feasible_region[" + std::to_string(ri++) + "]";
      PolytopeRow row;
      row.power_coeff = get_or<double>(r, "power", 0.0);
      row.heat_coeff = get_or<double>(r, "heat", 0.0);
      row.bound = get<double>(r, "bound", rp);
      unit.region.push_back(row);
    }
    inst.units.push_back(std::move(unit));
  }
  return inst;
}

inline json instance_to_json(const Instance& inst) {
  json j;
  j["format_version"] = inst.format_version;
  if (!inst.name.empty()) j["name"] = inst.name;
  j["constants"] = {
      {"water_specific_heat_j_per_kg_c", inst.water.specific_heat_j_per_kg_c},
      {"water_density_kg_per_m3", inst.water.density_kg_per_m3}};
  j["time_grid"] = {{"electricity_step_hours", inst.grid.electricity_step_hours},
                    {"heat_step_hours", inst.grid.heat_step_hours},
                    {"electricity_periods", inst.grid.electricity_periods},
                    {"heat_periods", inst.grid.heat_periods}};

  auto opt_series = [](const std::vector<std::optional<double>>& v) {
    json arr = json::array();
    for (const auto& e : v) {
      if (e) arr.push_back(*e);
      else arr.push_back(nullptr);
    }
    return arr;
  };

  json nodes = json::array();
  for (const HeatNode& n : inst.heat.nodes) {
    json jn = {{"id", n.id},
               {"kind", to_string(n.kind)},
               {"exchanger_flow_kg_per_s", n.exchanger_flow_kg_per_s},
               {"load_mw", n.load_mw},
               {"initial_supply_c", n.initial_supply_c},
               {"initial_return_c", n.initial_return_c}};
    if (!n.required_supply_c.empty()) jn["required_supply_c"] = opt_series(n.required_supply_c);
    if (!n.required_return_c.empty()) jn["required_return_c"] = opt_series(n.required_return_c);
    nodes.push_back(std::move(jn));
  }
  json pipes = json::array();
  for (const Pipeline& p : inst.heat.pipelines) {
    json jp = {{"id", p.id},
               {"from", p.from_node},
               {"to", p.to_node},
               {"side", to_string(p.side)},
               {"length_m", p.length_m},
               {"cross_section_m2", p.cross_section_m2},
               {"flow_kg_per_s", p.flow_kg_per_s},
               {"loss_w_per_m_c", p.loss_w_per_m_c}};
    if (!p.ambient_c.empty()) jp["ambient_c"] = p.ambient_c;
    if (p.max_temp_c) jp["max_temp_c"] = *p.max_temp_c;
    pipes.push_back(std::move(jp));
  }
  if (!inst.heat.nodes.empty())
    j["heat_network"] = {
        {"ambient_c", inst.heat.ambient_c}, {"nodes", nodes}, {"pipelines", pipes}};

  if (!inst.electric.buses.empty()) {
    json buses = json::array();
    for (const Bus& b : inst.electric.buses)
      buses.push_back({{"id", b.id}, {"load_mw", b.load_mw}});
    json lines = json::array();
    for (const Line& l : inst.electric.lines)
      lines.push_back({{"id", l.id},
                       {"from", l.from_bus},
                       {"to", l.to_bus},
                       {"reactance_pu", l.reactance_pu},
                       {"limit_mw", l.limit_mw}});
    j["electric_network"] = {
        {"reference_bus", inst.electric.reference_bus}, {"buses", buses}, {"lines", lines}};
  }

  json units = json::array();
  for (const GenerationUnit& u : inst.units) {
    json ju = {{"id", u.id}, {"kind", to_string(u.kind)}};
    if (u.bus) ju["bus"] = *u.bus;
    if (u.node) ju["node"] = *u.node;
    ju["cost"] = {{"fixed_per_hour", u.cost.fixed_per_hour},
                  {"heat_linear", u.cost.heat_linear},
                  {"heat_quadratic", u.cost.heat_quadratic},
                  {"power_linear", u.cost.power_linear},
                  {"power_quadratic", u.cost.power_quadratic},
                  {"cross", u.cost.cross}};
    json rows = json::array();
    for (const PolytopeRow& r : u.region)
      rows.push_back({{"power", r.power_coeff}, {"heat", r.heat_coeff}, {"bound", r.bound}});
    ju["feasible_region"] = rows;
    units.push_back(std::move(ju));
  }
  j["units"] = units;
  return j;
}

inline Instance parse_instance(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ParseError(std::string("invalid document: ") + e.what());
  }
  return instance_from_json(j);
}

inline Instance load_instance(const std::string& path) {
  return parse_instance(read_file(path));
}

inline std::string serialize_instance(const Instance& inst) {
  return instance_to_json(inst).dump(2) + "\n";
}

inline void save_instance(const Instance& inst, const std::string& path) {
  write_file(path, serialize_instance(inst));
}

// Semantic equality: same content, independent of key order or formatting.
inline bool semantically_equal(const Instance& a, const Instance& b) {
  return instance_to_json(a) == instance_to_json(b);
}

}  // namespace chp
