#pragma once

#include <functional>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "cresim/time.hpp"

namespace cresim {

struct SensorSource {
    std::string id;       // e.g. S1
    std::string feeds;    // component sampling this sensor
    Duration period;      // sampling period
};

struct ActuatorSink {
    std::string id;       // e.g. a1
    std::string fed_by;   // component driving the actuator
};

// Directed dataflow graph of software components, sensor sources and
// actuator sinks. Must be a DAG.
struct ApplicationGraph {
    std::vector<std::string> components;
    std::vector<std::pair<std::string, std::string>> edges;  // producer -> consumer
    std::vector<SensorSource> sources;
    std::vector<ActuatorSink> sinks;

    std::vector<std::string> consumers_of(const std::string& component) const;
};

enum class LinkMedium { Wired, Wireless };
enum class LinkState { Up, Down };

struct Link {
    std::string id;  // m_k
    std::string a;   // endpoints, unordered
    std::string b;
    LinkMedium medium = LinkMedium::Wired;
    Duration latency;
    LinkState state = LinkState::Up;

    bool connects(const std::string& x, const std::string& y) const {
        return (a == x && b == y) || (a == y && b == x);
    }
};

struct PlatformGraph {
    std::vector<std::string> nodes;
    std::vector<Link> links;

    const Link* find_link(const std::string& id) const;
    Link* find_link(const std::string& id);
};

// Total map component id -> platform node id.
using Mapping = std::map<std::string, std::string>;

// Execution and communication time per behavior.
struct CostModel {
    std::map<std::string, Duration> ec;
    std::map<std::string, Duration> cc;
};

struct TopologyDefect {
    enum class Kind {
        NotADag,
        UnmappedComponent,
        UnknownNode,
        MissingCost,
        BadLinkEndpoint,
        NonPositiveLatency,
        NonPositiveCost,
    };
    Kind kind;
    std::string detail;
};

std::vector<TopologyDefect> validate_topology(const ApplicationGraph& app,
                                              const PlatformGraph& platform,
                                              const Mapping& mapping,
                                              const CostModel& costs,
                                              const std::vector<std::string>& behaviors);

struct Route {
    std::vector<std::string> nodes;  // src .. dst
    std::vector<std::string> links;  // one per hop
    Duration latency;                // sum of link latencies
};

using LinkPredicate = std::function<bool(const Link&)>;

// Minimal-total-latency path over Up links satisfying the predicate.
// Ties broken by hop count, then by lexicographic node sequence, then by
// lexicographic link ids, so the result is fully deterministic.
std::optional<Route> route(const PlatformGraph& g, const std::string& src,
                           const std::string& dst, const LinkPredicate& pred);

inline bool any_up(const Link& l) { return l.state == LinkState::Up; }

struct MissingBehaviorError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Sum of EC + CC + extra over the chosen behaviors of the given chain.
Duration end_to_end_estimate(const std::vector<std::string>& chain_behaviors,
                             const CostModel& costs,
                             const std::map<std::string, Duration>& extra,
                             const std::vector<std::string>& chain_components);

const char* to_string(TopologyDefect::Kind k);

}  // namespace cresim
