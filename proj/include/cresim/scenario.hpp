#pragma once

#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "cresim/contracts.hpp"
#include "cresim/faultlab.hpp"
#include "cresim/resilience.hpp"
#include "cresim/runtime.hpp"
#include "cresim/time.hpp"
#include "cresim/topology.hpp"

namespace cresim {

enum class ObserverType { Deadline, Periodic, DeadlinePeriodic, Heartbeat };

struct ObserverSpec {
    std::string id;
    ObserverType type = ObserverType::Deadline;
    Duration deadline;
    Duration period;
    int miss_threshold = 1;
    std::string host;      // platform node hosting the observer
    std::string contract;  // contract whose guarantee this observer monitors
    // What the observer is bound to: a component id ("c1"), a producer ->
    // consumer edge ("c1->c3"), or a platform relation id.
    std::string watch;
};

// Managed node pair whose connectivity is negotiated at runtime (route
// choice + link contract with a delivery bound).
struct RelationSpec {
    std::string id;
    std::string src;
    std::string dst;
    int safety_factor = 2;
};

struct ScenarioConfig {
    std::string name;
    Duration horizon;
    std::uint64_t seed = 0;

    ApplicationGraph application;
    PlatformGraph platform;
    std::vector<RelationSpec> relations;
    Mapping mapping;
    CostModel costs;
    std::vector<Behavior> behaviors;
    BudgetSet budgets{};
    std::map<std::string, Duration> component_budgets;
    Duration conveyor_travel;

    std::map<std::string, Contract> contracts;
    std::vector<std::string> component_order;  // declaration order for app state
    ApplicationState initial_application_state;

    std::vector<ObserverSpec> observers;
    std::vector<ResponsePolicy> policies;
    bool revert_on_recovery = true;

    std::vector<FaultSpec> faults;

    std::vector<Behavior> behaviors_of(const std::string& component) const;
    std::optional<BehaviorOption> behavior_option(const std::string& behavior_id) const;
    std::vector<BehaviorOption> behavior_options_of(const std::string& component) const;
    const ResponsePolicy* policy_for(const std::string& subject) const;
};

struct ScenarioError : std::runtime_error {
    std::vector<std::string> errors;
    explicit ScenarioError(std::vector<std::string> errs);
};

// Parses and fully validates a scenario file; throws ScenarioError with a
// structured error list otherwise.
ScenarioConfig parse_scenario(const std::string& path);
ScenarioConfig parse_scenario_text(const std::string& json_text,
                                   const std::string& origin = "<string>");

// Validation shared by the parser and programmatically built configs.
std::vector<std::string> validate_config(const ScenarioConfig& cfg);

}  // namespace cresim
