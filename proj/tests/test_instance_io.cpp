#include <catch_amalgamated.hpp>

#include "chp/instance_io.hpp"
#include "support/fixtures.hpp"

using namespace chp;

TEST_CASE("round-trip keeps every bundled fixture semantically identical") {
  for (const std::string& name : {"reference.instance.json", "infeasible_band.instance.json"}) {
    Instance a = load_instance(chp_test::data_dir() + "/" + name);
    Instance b = parse_instance(serialize_instance(a));
    INFO(name);
    CHECK(semantically_equal(a, b));
  }
}

TEST_CASE("round-trip of generated instances") {
  Rng rng(7);
  for (int i = 0; i < 5; ++i) {
    Instance a = chp::random_instance(rng);
    Instance b = parse_instance(serialize_instance(a));
    CHECK(semantically_equal(a, b));
  }
}

TEST_CASE("parse errors carry the field path") {
  CHECK_THROWS_WITH(parse_instance("{\"format_version\": 1}"),
                    Catch::Matchers::ContainsSubstring("time_grid"));
  CHECK_THROWS_WITH(parse_instance("{\"format_version\": 2, \"time_grid\": {}}"),
                    Catch::Matchers::ContainsSubstring("format_version"));
  CHECK_THROWS_AS(parse_instance("not json"), ParseError);

  std::string missing_bound = R"({
    "format_version": 1,
    "time_grid": {"electricity_step_hours": 1, "heat_step_hours": 1,
                   "electricity_periods": 1, "heat_periods": 1},
    "electric_network": {"reference_bus": "B", "buses": [{"id": "B", "load_mw": [1]}],
                          "lines": []},
    "units": [{"id": "U", "kind": "pure_electric", "bus": "B", "cost": {},
               "feasible_region": [{"power": 1}]}]
  })";
  CHECK_THROWS_WITH(parse_instance(missing_bound),
                    Catch::Matchers::ContainsSubstring("feasible_region[0].bound"));
}

TEST_CASE("optional requirement series accept nulls") {
  Instance ref = chp_test::load_reference();
  json j = instance_to_json(ref);
  j["heat_network"]["nodes"][2]["required_supply_c"] = {nullptr, 85.0, nullptr, nullptr};
  Instance inst = instance_from_json(j);
  int k = inst.node_index(j["heat_network"]["nodes"][2]["id"].get<std::string>());
  REQUIRE(inst.heat.nodes[k].required_supply_c.size() == 4);
  CHECK_FALSE(inst.heat.nodes[k].required_supply_c[0].has_value());
  CHECK(inst.heat.nodes[k].required_supply_c[1] == 85.0);
}
