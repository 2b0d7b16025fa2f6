#pragma once

#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "cresim/time.hpp"

namespace cresim {

// One selectable behavior of a component. Execution/communication costs are
// resolved through the CostModel by behavior id.
struct Behavior {
    std::string id;
    std::string owner;
    double qos = 1.0;
};

enum class ComponentStatus { Running, Restarting, Down };

struct ComponentState {
    std::string id;
    std::vector<std::string> behaviors;
    std::string active_behavior;
    std::string declared_behavior;  // initial selection, revert target
    ComponentStatus status = ComponentStatus::Running;
    SimTime restarting_until;
    // Engine event ids of in-flight executions; discarded on restart.
    std::set<std::uint64_t> pending_executions;

    bool running() const { return status == ComponentStatus::Running; }
};

struct DataMsg {
    double payload = 0.0;
    SimTime sampled_at;   // originating sensor sample instant
    SimTime produced_at;
    std::string source;
    std::string destination;
    std::vector<std::string> route_nodes;
    std::vector<std::string> route_links;
};

enum class FaultMsgKind { HangingProcess, NetworkOutage, ProducerRecovered };

// Peer-awareness message carried over the fault channel.
struct FaultMsg {
    FaultMsgKind kind = FaultMsgKind::HangingProcess;
    std::string source;
    Duration expected_recovery;
    SimTime issued_at;
};

const char* to_string(ComponentStatus s);
const char* to_string(FaultMsgKind k);

}  // namespace cresim
