#include "cresim/resilience.hpp"

#include <algorithm>

namespace cresim {

const std::string* ApplicationState::contract_of(const std::string& component) const {
    for (const auto& [c, id] : entries)
        if (c == component) return &id;
    return nullptr;
}

std::vector<std::string> ApplicationState::contract_ids() const {
    std::vector<std::string> out;
    out.reserve(entries.size());
    for (const auto& [c, id] : entries) out.push_back(id);
    return out;
}

std::vector<std::string> PlatformState::contract_ids() const {
    std::vector<std::string> out;
    out.reserve(entries.size());
    for (const auto& [r, id] : entries) out.push_back(id);
    return out;
}

void ResponsePolicy::normalize() {
    if (strategies.empty() ||
        !std::holds_alternative<EscalateStrategy>(strategies.back()))
        strategies.push_back(EscalateStrategy{});
}

std::optional<std::string> select_behavior(const std::vector<BehaviorOption>& options,
                                           Duration budget) {
    const BehaviorOption* best = nullptr;
    for (const auto& o : options) {
        Duration cost = o.ec + o.cc;
        if (cost > budget) continue;
        if (!best) {
            best = &o;
            continue;
        }
        Duration best_cost = best->ec + best->cc;
        if (o.qos > best->qos ||
            (o.qos == best->qos && cost < best_cost) ||
            (o.qos == best->qos && cost == best_cost && o.id < best->id)) {
            best = &o;
        }
    }
    if (!best) return std::nullopt;
    return best->id;
}

std::pair<ApplicationState, std::optional<ReconfigurationRecord>>
apply_app_reconfiguration(const ApplicationState& s, const std::string& component,
                          const std::string& new_contract, SimTime at,
                          const std::map<std::string, Contract>& declared,
                          const Mapping& mapping,
                          ReconfigurationTrigger trigger) {
    auto decl = declared.find(new_contract);
    if (decl == declared.end())
        throw UnknownContractError("unknown contract " + new_contract);
    auto host = mapping.find(component);
    if (host == mapping.end() || decl->second.subject != host->second) {
        throw SubjectMismatchError("contract " + new_contract + " has subject " +
                                   decl->second.subject + ", component " + component +
                                   " is hosted elsewhere");
    }

    ApplicationState next = s;
    bool found = false;
    for (auto& [c, id] : next.entries) {
        if (c != component) continue;
        found = true;
        if (id == new_contract) return {s, std::nullopt};  // no-op
        id = new_contract;
    }
    if (!found)
        throw UnknownContractError("component " + component + " not in application state");

    ReconfigurationRecord rec;
    rec.level = ReconfigurationLevel::Application;
    rec.time = at;
    rec.from = s.contract_ids();
    rec.to = next.contract_ids();
    rec.trigger = trigger;
    return {next, rec};
}

std::pair<PlatformState, std::optional<ReconfigurationRecord>>
apply_platform_reconfiguration(const PlatformState& p, const std::string& relation,
                               const std::string& renegotiated_contract, SimTime at,
                               ReconfigurationTrigger trigger) {
    PlatformState next = p;
    bool found = false;
    for (auto& [r, id] : next.entries) {
        if (r != relation) continue;
        found = true;
        if (id == renegotiated_contract) return {p, std::nullopt};
        id = renegotiated_contract;
    }
    if (!found) throw UnknownRelationError("unknown relation " + relation);

    ReconfigurationRecord rec;
    rec.level = ReconfigurationLevel::Platform;
    rec.time = at;
    rec.from = p.contract_ids();
    rec.to = next.contract_ids();
    rec.trigger = trigger;
    return {next, rec};
}

Contract negotiate_link_contract(const std::string& src, const std::string& dst,
                                 const PlatformGraph& g, int safety_factor,
                                 const std::string& contract_id) {
    auto r = route(g, src, dst, any_up);
    if (!r) throw NoRouteError("no route " + src + " -> " + dst);
    Contract c;
    c.id = contract_id;
    c.subject = src;
    c.tag = "link " + src + "->" + dst;
    c.inputs = {{"msg_sent", "real"}};
    c.outputs = {{"msg_delivered", "real"}};
    c.guarantees = {{"msg_delivered", "msg_sent", Within{r->latency * safety_factor}}};
    return c;
}

}  // namespace cresim
