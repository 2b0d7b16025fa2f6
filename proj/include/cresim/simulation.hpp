#pragma once

#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "cresim/engine.hpp"
#include "cresim/faultlab.hpp"
#include "cresim/observers.hpp"
#include "cresim/resilience.hpp"
#include "cresim/runtime.hpp"
#include "cresim/scenario.hpp"
#include "cresim/telemetry.hpp"

namespace cresim {

struct RunSummary {
    std::vector<Violation> violations;
    std::vector<ReconfigurationRecord> reconfigurations;
    std::vector<std::string> infeasible_reports;
    SimTime horizon;
    // 0: clean; 1: infeasible report or a violation left unresolved at the
    // horizon.
    int exit_code = 0;
};

// Wires the runtime, observers, resilience managers, fault injection and
// telemetry onto one engine and runs a scenario to its horizon.
class Simulation {
public:
    explicit Simulation(ScenarioConfig cfg);

    RunSummary run();
    RunSummary run_until(SimTime horizon);

    const ScenarioConfig& config() const { return cfg_; }
    const Trace& trace() const { return trace_; }
    const ApplicationState& application_state() const { return app_state_; }
    const PlatformState& platform_state() const { return platform_state_; }
    const ComponentState& component(const std::string& id) const;
    MetricsReport metrics() const;

private:
    struct RelationRuntime {
        RelationSpec spec;
        Route current_route;
        std::string active_contract;
        int negotiation_count = 0;
        bool disconnected = false;
        Duration current_bound;  // negotiated delivery bound
        Duration initial_bound;  // bound negotiated at start of run
    };
    struct PendingExecution {
        std::string component;
        DataMsg msg;
    };
    struct PendingDelivery {
        DataMsg msg;
    };
    struct PendingFaultMsg {
        std::string destination;
        FaultMsg msg;
    };
    struct ObserverTimer {
        std::string observer;
        std::uint64_t generation;
        SimTime bound;
    };

    void init_components();
    void init_observers();
    void init_relations();
    void schedule_faults();
    void schedule_sampling();
    void schedule_heartbeats();

    void dispatch(const Event& ev);
    void on_sample(const std::string& component, const SensorSource& source, SimTime t);
    void on_execution_complete(std::uint64_t handle, SimTime t);
    void on_delivery(std::uint64_t handle, SimTime t);
    void on_heartbeat_due(const std::string& relation, SimTime t);
    void on_heartbeat_arrival(const std::string& relation, SimTime origin, SimTime t);
    void on_observer_timer(std::uint64_t handle, SimTime t);
    void on_fault_onset(const std::string& fault_id, SimTime t);
    void on_fault_clear(const std::string& fault_id, SimTime t);
    void on_restart_complete(const std::string& component, SimTime t);
    void on_fault_msg(std::uint64_t handle, SimTime t);

    void send_output(const std::string& component, const DataMsg& msg, SimTime t);
    void execute_component(const std::string& component, const DataMsg& in, SimTime t);
    std::optional<Route> route_between_nodes(const std::string& src, const std::string& dst) const;
    RelationRuntime* relation_for_nodes(const std::string& a, const std::string& b);

    // Resilience managers.
    void on_violation(const Violation& v, SimTime t);
    void handle_component_violation(const std::string& component, const Violation& v, SimTime t);
    void handle_relation_violation(RelationRuntime& rel, const Violation& v, SimTime t);
    void handle_fault_msg(const std::string& consumer, const FaultMsg& m, SimTime t);
    void restart_component(const std::string& component, Duration duration, SimTime t);
    void notify_consumers(const std::string& component, FaultMsgKind kind,
                          Duration expected_recovery, SimTime t);
    bool switch_link(RelationRuntime& rel, LinkMedium medium, SimTime t);
    EscalationResult escalate_relation(RelationRuntime& rel, SimTime t);
    void switch_component_behavior(const std::string& component, const std::string& behavior,
                                   SimTime t, ReconfigurationTrigger trigger);
    void adopt_relation_contract(RelationRuntime& rel, const Route& r, SimTime t,
                                 ReconfigurationTrigger trigger);

    // Observer plumbing.
    void feed_observer(ObserverInstance& o, const ObserverEvent& ev, SimTime t);
    void arm_observer_timer(ObserverInstance& o);
    void pause_observers_of(const std::string& component);
    void reset_observers_of(const std::string& component, SimTime t);
    std::vector<ObserverInstance*> observers_watching_component(const std::string& component);
    std::vector<ObserverInstance*> observers_watching_edge(const std::string& producer,
                                                           const std::string& consumer);

    void record(SimTime t, const std::string& entity, RecordKind kind,
                std::vector<std::pair<std::string, std::string>> fields);
    void record_action(SimTime t, const std::string& entity, const std::string& action,
                       std::vector<std::pair<std::string, std::string>> extra = {});

    ScenarioConfig cfg_;
    Engine engine_;
    FaultLab faults_;
    Trace trace_;

    std::map<std::string, ComponentState> components_;
    std::map<std::string, ObserverInstance> observers_;
    std::map<std::string, RelationRuntime> relations_;
    std::map<std::string, double> latest_input_;  // consumer: last paired value
    std::map<std::string, bool> has_pair_input_;
    ApplicationState app_state_;
    PlatformState platform_state_;
    RunSummary summary_;

    // Chain-producer message waiting for its pair input at a consumer.
    std::map<std::string, DataMsg> pending_chain_;
    // Predecessor on the sensor->actuator chain, per chain component.
    std::map<std::string, std::string> chain_pred_;
    std::map<std::string, Contract> negotiated_contracts_;
    std::map<std::string, EventId> restart_timers_;

    // Payload stores keyed by engine payload handles.
    std::uint64_t next_handle_ = 1;
    std::map<std::uint64_t, PendingExecution> executions_;
    std::map<std::uint64_t, EventId> exec_event_of_;
    std::map<std::uint64_t, PendingDelivery> deliveries_;
    std::map<std::uint64_t, PendingFaultMsg> fault_msgs_;
    std::map<std::uint64_t, ObserverTimer> observer_timers_;
    std::map<std::uint64_t, std::pair<std::string, SimTime>> heartbeat_arrivals_;

    bool ran_ = false;
};

}  // namespace cresim
