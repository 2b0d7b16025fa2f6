#include "cresim/topology.hpp"

#include <algorithm>
#include <map>
#include <queue>
#include <set>

namespace cresim {

const char* to_string(TopologyDefect::Kind k) {
    switch (k) {
        case TopologyDefect::Kind::NotADag: return "NotADag";
        case TopologyDefect::Kind::UnmappedComponent: return "UnmappedComponent";
        case TopologyDefect::Kind::UnknownNode: return "UnknownNode";
        case TopologyDefect::Kind::MissingCost: return "MissingCost";
        case TopologyDefect::Kind::BadLinkEndpoint: return "BadLinkEndpoint";
        case TopologyDefect::Kind::NonPositiveLatency: return "NonPositiveLatency";
        case TopologyDefect::Kind::NonPositiveCost: return "NonPositiveCost";
    }
    return "?";
}

std::vector<std::string> ApplicationGraph::consumers_of(const std::string& component) const {
    std::vector<std::string> out;
    for (const auto& [p, c] : edges)
        if (p == component) out.push_back(c);
    return out;
}

const Link* PlatformGraph::find_link(const std::string& id) const {
    for (const auto& l : links)
        if (l.id == id) return &l;
    return nullptr;
}

Link* PlatformGraph::find_link(const std::string& id) {
    for (auto& l : links)
        if (l.id == id) return &l;
    return nullptr;
}

namespace {

bool is_dag(const ApplicationGraph& app) {
    std::map<std::string, int> indeg;
    for (const auto& c : app.components) indeg[c] = 0;
    for (const auto& [p, c] : app.edges) {
        if (indeg.count(c)) ++indeg[c];
    }
    std::queue<std::string> q;
    for (const auto& [c, d] : indeg)
        if (d == 0) q.push(c);
    std::size_t seen = 0;
    while (!q.empty()) {
        auto c = q.front();
        q.pop();
        ++seen;
        for (const auto& [p, s] : app.edges) {
            if (p != c || !indeg.count(s)) continue;
            if (--indeg[s] == 0) q.push(s);
        }
    }
    return seen == app.components.size();
}

}  // namespace

std::vector<TopologyDefect> validate_topology(const ApplicationGraph& app,
                                              const PlatformGraph& platform,
                                              const Mapping& mapping,
                                              const CostModel& costs,
                                              const std::vector<std::string>& behaviors) {
    std::vector<TopologyDefect> defects;
    using K = TopologyDefect::Kind;

    if (!is_dag(app)) defects.push_back({K::NotADag, "application graph has a cycle"});

    std::set<std::string> nodes(platform.nodes.begin(), platform.nodes.end());
    for (const auto& c : app.components) {
        auto it = mapping.find(c);
        if (it == mapping.end()) {
            defects.push_back({K::UnmappedComponent, c});
        } else if (!nodes.count(it->second)) {
            defects.push_back({K::UnknownNode, c + " -> " + it->second});
        }
    }
    for (const auto& l : platform.links) {
        if (!nodes.count(l.a) || !nodes.count(l.b))
            defects.push_back({K::BadLinkEndpoint, l.id});
        if (l.latency.micros <= 0) defects.push_back({K::NonPositiveLatency, l.id});
    }
    for (const auto& beh : behaviors) {
        auto e = costs.ec.find(beh);
        auto c = costs.cc.find(beh);
        if (e == costs.ec.end() || c == costs.cc.end()) {
            defects.push_back({K::MissingCost, beh});
        } else if (e->second.micros <= 0 || c->second.micros <= 0) {
            defects.push_back({K::NonPositiveCost, beh});
        }
    }
    return defects;
}

namespace {

struct PathKey {
    Duration latency;
    std::size_t hops;
    std::vector<std::string> nodes;
    std::vector<std::string> links;

    bool operator<(const PathKey& o) const {
        if (latency != o.latency) return latency < o.latency;
        if (hops != o.hops) return hops < o.hops;
        if (nodes != o.nodes) return nodes < o.nodes;
        return links < o.links;
    }
};

// The platform graphs here are a handful of nodes; exhaustive simple-path
// enumeration keeps the deterministic tie-break trivially correct.
void enumerate(const PlatformGraph& g, const LinkPredicate& pred,
               const std::string& dst, std::vector<std::string>& nodes,
               std::vector<std::string>& links, Duration latency,
               std::set<std::string>& visited, std::optional<PathKey>& best) {
    // By value: push_back below may reallocate the vector.
    const std::string cur = nodes.back();
    if (cur == dst) {
        PathKey key{latency, links.size(), nodes, links};
        if (!best || key < *best) best = key;
        return;
    }
    for (const auto& l : g.links) {
        if (l.state != LinkState::Up || !pred(l)) continue;
        std::string next;
        if (l.a == cur) next = l.b;
        else if (l.b == cur) next = l.a;
        else continue;
        if (visited.count(next)) continue;
        visited.insert(next);
        nodes.push_back(next);
        links.push_back(l.id);
        enumerate(g, pred, dst, nodes, links, latency + l.latency, visited, best);
        links.pop_back();
        nodes.pop_back();
        visited.erase(next);
    }
}

}  // namespace

std::optional<Route> route(const PlatformGraph& g, const std::string& src,
                           const std::string& dst, const LinkPredicate& pred) {
    std::vector<std::string> nodes{src};
    std::vector<std::string> links;
    std::set<std::string> visited{src};
    std::optional<PathKey> best;
    enumerate(g, pred, dst, nodes, links, Duration{0}, visited, best);
    if (!best) return std::nullopt;
    return Route{best->nodes, best->links, best->latency};
}

Duration end_to_end_estimate(const std::vector<std::string>& chain_behaviors,
                             const CostModel& costs,
                             const std::map<std::string, Duration>& extra,
                             const std::vector<std::string>& chain_components) {
    if (chain_behaviors.size() != chain_components.size())
        throw MissingBehaviorError("behavior list does not cover the chain");
    Duration total{0};
    for (std::size_t i = 0; i < chain_behaviors.size(); ++i) {
        auto e = costs.ec.find(chain_behaviors[i]);
        auto c = costs.cc.find(chain_behaviors[i]);
        if (e == costs.ec.end() || c == costs.cc.end())
            throw MissingBehaviorError("no cost entry for " + chain_behaviors[i]);
        total += e->second;
        total += c->second;
        if (auto x = extra.find(chain_components[i]); x != extra.end())
            total += x->second;
    }
    return total;
}

}  // namespace cresim
