#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <fstream>
#include <sstream>
#include <string>

#include <json.hpp>

#include "cresim/scenario.hpp"

using namespace cresim;
using nlohmann::json;

#ifndef CRESIM_SCENARIO_DIR
#define CRESIM_SCENARIO_DIR "scenarios"
#endif

namespace {

std::string scenario_path(const std::string& name) {
    return std::string(CRESIM_SCENARIO_DIR) + "/" + name;
}

json baseline_json() {
    std::ifstream f(scenario_path("cbbp_baseline.json"));
    REQUIRE(f.good());
    json j;
    f >> j;
    return j;
}

std::vector<std::string> errors_of(const json& j) {
    try {
        parse_scenario_text(j.dump());
        return {};
    } catch (const ScenarioError& e) {
        return e.errors;
    }
}

bool any_error_contains(const std::vector<std::string>& errs, const std::string& needle) {
    for (const auto& e : errs)
        if (e.find(needle) != std::string::npos) return true;
    return false;
}

}  // namespace

TEST_CASE("every shipped scenario file parses and validates") {
    for (const char* name :
         {"cbbp_baseline.json", "cbbp_hanging.json", "cbbp_outage_wireless.json",
          "cbbp_outage_reroute.json", "cbbp_infeasible.json", "cbbp_transient.json"}) {
        CAPTURE(name);
        ScenarioConfig cfg = parse_scenario(scenario_path(name));
        CHECK_FALSE(cfg.name.empty());
        CHECK(cfg.horizon.micros > 0);
        CHECK(validate_config(cfg).empty());
    }
}

TEST_CASE("the baseline config carries the documented defaults") {
    ScenarioConfig cfg = parse_scenario(scenario_path("cbbp_baseline.json"));
    CHECK(cfg.name == "cbbp_baseline");
    CHECK(cfg.budgets.delta_s1_a1 == SimTime::from_seconds(10));
    CHECK(cfg.budgets.t_s1_c1 == SimTime::from_seconds(1));
    CHECK(cfg.budgets.t_samp == SimTime::from_millis(500));
    CHECK(cfg.application.components ==
          std::vector<std::string>{"c1", "c2", "c3", "c4"});
    CHECK(cfg.mapping.at("c1") == "n3");
    CHECK(cfg.mapping.at("c4") == "n5");
    CHECK(cfg.behaviors_of("c1").size() == 4);
    CHECK(cfg.initial_application_state.contract_ids() ==
          std::vector<std::string>{"C_n3_c1_beh1", "C_n1_c2_beh1", "C_n4_c3_beh2",
                                   "C_n5_c4_beh1"});
    REQUIRE(cfg.relations.size() == 1);
    CHECK(cfg.relations[0].safety_factor == 2);
    CHECK(validate_decomposition(cfg.budgets).ok);
}

TEST_CASE("budgets exceeding the end-to-end bound are rejected with the surplus") {
    json j = baseline_json();
    j["budgets"]["T_s1_c1"] = "3s";  // sum becomes 11s against a 10s bound
    auto errs = errors_of(j);
    REQUIRE_FALSE(errs.empty());
    CHECK(any_error_contains(errs, "exceed the end-to-end bound by 1s"));
}

TEST_CASE("a malformed duration unit is reported with its location") {
    json j = baseline_json();
    j["budgets"]["T_s1_c1"] = "800xs";
    auto errs = errors_of(j);
    REQUIRE_FALSE(errs.empty());
    CHECK(any_error_contains(errs, "budgets"));
}

TEST_CASE("multiple defects are reported together as a structured list") {
    json j = baseline_json();
    j["budgets"]["T_s1_c1"] = "3s";
    j["mapping"].erase("c2");
    j["horizon"] = "0s";
    auto errs = errors_of(j);
    CHECK(errs.size() >= 3);
    CHECK(any_error_contains(errs, "budgets"));
    CHECK(any_error_contains(errs, "UnmappedComponent"));
    CHECK(any_error_contains(errs, "horizon"));
}

TEST_CASE("unparseable JSON yields a parse error, not a crash") {
    try {
        parse_scenario_text("{ not json");
        FAIL("expected ScenarioError");
    } catch (const ScenarioError& e) {
        CHECK_FALSE(e.errors.empty());
    }
}

TEST_CASE("a missing file is a scenario error") {
    CHECK_THROWS_AS(parse_scenario(scenario_path("no_such_scenario.json")), ScenarioError);
}

TEST_CASE("validation catches semantic defects beyond the schema") {
    SUBCASE("initial state referencing an unknown contract") {
        json j = baseline_json();
        j["initial_application_state"][0] = "C_missing";
        CHECK(any_error_contains(errors_of(j), "C_missing"));
    }
    SUBCASE("observer watching an unknown relation") {
        json j = baseline_json();
        j["observers"][3]["watch"] = "rel_ghost";
        CHECK(any_error_contains(errors_of(j), "unknown relation"));
    }
    SUBCASE("fault targeting an unknown entity") {
        json j = baseline_json();
        j["faults"] = json::array({{{"id", "f1"},
                                    {"kind", "network_outage"},
                                    {"target", "m99"},
                                    {"onset", "1s"},
                                    {"permanent", true}}});
        CHECK(any_error_contains(errors_of(j), "unknown entity"));
    }
    SUBCASE("qos outside the unit interval") {
        json j = baseline_json();
        j["behaviors"][0]["qos"] = 1.5;
        CHECK(any_error_contains(errors_of(j), "qos"));
    }
    SUBCASE("component with no behavior") {
        json j = baseline_json();
        j["application"]["components"].push_back("c9");
        CHECK(any_error_contains(errors_of(j), "c9"));
    }
}

TEST_CASE("behavior lookups resolve costs and QoS") {
    ScenarioConfig cfg = parse_scenario(scenario_path("cbbp_baseline.json"));
    auto opt = cfg.behavior_option("c1_beh2");
    REQUIRE(opt);
    CHECK(opt->ec == SimTime::from_millis(500));
    CHECK(opt->cc == SimTime::from_millis(100));
    CHECK(opt->qos == 0.8);
    CHECK_FALSE(cfg.behavior_option("nope"));
    CHECK(cfg.behavior_options_of("c3").size() == 3);
    REQUIRE(cfg.policy_for("c1"));
    CHECK_FALSE(cfg.policy_for("c9"));
}

TEST_CASE("fault sections parse windows, permanence and parameters") {
    ScenarioConfig hang = parse_scenario(scenario_path("cbbp_hanging.json"));
    REQUIRE(hang.faults.size() == 1);
    CHECK(hang.faults[0].kind == FaultKind::HangingProcess);
    CHECK(hang.faults[0].target == "c1");
    CHECK(hang.faults[0].onset == SimTime::from_seconds(5));
    CHECK(hang.faults[0].extra_delay == SimTime::from_millis(1500));
    CHECK_FALSE(hang.faults[0].duration);
    CHECK_FALSE(hang.revert_on_recovery);

    ScenarioConfig transient = parse_scenario(scenario_path("cbbp_transient.json"));
    REQUIRE(transient.faults.size() == 1);
    REQUIRE(transient.faults[0].duration);
    CHECK(*transient.faults[0].duration == SimTime::from_seconds(2));
}
