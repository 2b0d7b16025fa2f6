#pragma once

#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "cresim/contracts.hpp"
#include "cresim/runtime.hpp"
#include "cresim/time.hpp"
#include "cresim/topology.hpp"

namespace cresim {

// Ordered set of active contracts, one per component, in declaration order.
struct ApplicationState {
    std::vector<std::pair<std::string, std::string>> entries;  // (component, contract id)

    const std::string* contract_of(const std::string& component) const;
    std::vector<std::string> contract_ids() const;
};

// Ordered set of active platform contracts (negotiated link contracts).
struct PlatformState {
    std::vector<std::pair<std::string, std::string>> entries;  // (relation, contract id)

    std::vector<std::string> contract_ids() const;
};

enum class ReconfigurationLevel { Application, Platform };
enum class ReconfigurationTrigger { Violation, FaultMsg, Renegotiation };

struct ReconfigurationRecord {
    ReconfigurationLevel level = ReconfigurationLevel::Application;
    SimTime time;
    std::vector<std::string> from;
    std::vector<std::string> to;
    ReconfigurationTrigger trigger = ReconfigurationTrigger::Violation;
};

// Response strategies, applied in order. NotifyConsumers always runs and
// falls through; Restart applies and falls through (a restart is normally
// paired with consumer notification); SwitchBehavior/SwitchLink stop the
// policy when they succeed; Escalate is the guaranteed terminal fallback and
// is appended when a declared policy omits it.
struct RestartComponent { Duration duration; };
struct SwitchBehaviorStrategy {};
struct SwitchLinkStrategy { LinkMedium medium = LinkMedium::Wireless; };
struct NotifyConsumers {};
struct EscalateStrategy {};
using Strategy = std::variant<RestartComponent, SwitchBehaviorStrategy,
                              SwitchLinkStrategy, NotifyConsumers, EscalateStrategy>;

struct ResponsePolicy {
    std::string subject;  // component id or relation id
    std::vector<Strategy> strategies;

    // Appends the terminal Escalate when missing.
    void normalize();
};

// Behavior cost + QoS tuple used by local selection.
struct BehaviorOption {
    std::string id;
    Duration ec;
    Duration cc;
    double qos = 0.0;
};

// Maximal-QoS behavior among those with EC + CC <= budget; ties broken by
// minimal EC + CC, then lexicographic id. nullopt when nothing is feasible.
std::optional<std::string> select_behavior(const std::vector<BehaviorOption>& options,
                                           Duration budget);

struct UnknownContractError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct SubjectMismatchError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct UnknownRelationError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Switches the component's active contract. No-op (no record) when the
// contract is already active.
std::pair<ApplicationState, std::optional<ReconfigurationRecord>>
apply_app_reconfiguration(const ApplicationState& s, const std::string& component,
                          const std::string& new_contract, SimTime at,
                          const std::map<std::string, Contract>& declared,
                          const Mapping& mapping,
                          ReconfigurationTrigger trigger);

std::pair<PlatformState, std::optional<ReconfigurationRecord>>
apply_platform_reconfiguration(const PlatformState& p, const std::string& relation,
                               const std::string& renegotiated_contract, SimTime at,
                               ReconfigurationTrigger trigger);

// Runtime-negotiated link contract: guarantees delivery within the current
// route latency times a configured safety factor.
struct NoRouteError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

Contract negotiate_link_contract(const std::string& src, const std::string& dst,
                                 const PlatformGraph& g, int safety_factor,
                                 const std::string& contract_id);

// Layer-level escalation outcome.
struct Rerouted { Route path; };
struct Infeasible { std::string report; };
using EscalationResult = std::variant<Rerouted, Infeasible>;

}  // namespace cresim
