#include "cresim/scenario.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "cresim/observers.hpp"

namespace cresim {

using nlohmann::json;

ScenarioError::ScenarioError(std::vector<std::string> errs)
    : std::runtime_error(errs.empty() ? "scenario error"
                                      : "scenario error: " + errs.front()),
      errors(std::move(errs)) {}

std::vector<Behavior> ScenarioConfig::behaviors_of(const std::string& component) const {
    std::vector<Behavior> out;
    for (const auto& b : behaviors)
        if (b.owner == component) out.push_back(b);
    return out;
}

std::optional<BehaviorOption> ScenarioConfig::behavior_option(
    const std::string& behavior_id) const {
    for (const auto& b : behaviors) {
        if (b.id != behavior_id) continue;
        auto e = costs.ec.find(behavior_id);
        auto c = costs.cc.find(behavior_id);
        if (e == costs.ec.end() || c == costs.cc.end()) return std::nullopt;
        return BehaviorOption{b.id, e->second, c->second, b.qos};
    }
    return std::nullopt;
}

std::vector<BehaviorOption> ScenarioConfig::behavior_options_of(
    const std::string& component) const {
    std::vector<BehaviorOption> out;
    for (const auto& b : behaviors_of(component))
        if (auto o = behavior_option(b.id)) out.push_back(*o);
    return out;
}

const ResponsePolicy* ScenarioConfig::policy_for(const std::string& subject) const {
    for (const auto& p : policies)
        if (p.subject == subject) return &p;
    return nullptr;
}

namespace {

class Parser {
public:
    Parser(const json& j, const std::string& origin) : j_(j), origin_(origin) {}

    ScenarioConfig parse() {
        ScenarioConfig cfg;
        cfg.name = str_or(j_, "name", "unnamed");
        cfg.horizon = dur(j_, "horizon", "horizon");
        cfg.seed = j_.value("seed", std::uint64_t{0});

        parse_application(cfg);
        parse_platform(cfg);
        parse_mapping(cfg);
        parse_behaviors(cfg);
        parse_budgets(cfg);
        parse_contracts(cfg);
        parse_observers(cfg);
        parse_policies(cfg);
        parse_faults(cfg);

        cfg.conveyor_travel = j_.contains("conveyor_travel")
                                  ? dur(j_, "conveyor_travel", "conveyor_travel")
                                  : cfg.budgets.delta_s1_a1;
        cfg.revert_on_recovery = j_.value("revert_on_recovery", true);

        if (!errors_.empty()) throw ScenarioError(errors_);
        auto validation = validate_config(cfg);
        if (!validation.empty()) throw ScenarioError(validation);
        return cfg;
    }

private:
    void err(const std::string& where, const std::string& what) {
        errors_.push_back(origin_ + ": " + where + ": " + what);
    }

    static std::string str_or(const json& o, const char* key, const std::string& dflt) {
        return o.contains(key) ? o.at(key).get<std::string>() : dflt;
    }

    Duration dur(const json& o, const char* key, const std::string& where) {
        if (!o.contains(key)) {
            err(where, "missing duration field '" + std::string(key) + "'");
            return Duration{0};
        }
        try {
            return parse_duration(o.at(key).get<std::string>());
        } catch (const DurationParseError& e) {
            err(where, e.what());
            return Duration{0};
        }
    }

    void parse_application(ScenarioConfig& cfg) {
        if (!j_.contains("application")) {
            err("application", "missing section");
            return;
        }
        const json& a = j_.at("application");
        for (const auto& c : a.value("components", json::array()))
            cfg.application.components.push_back(c.get<std::string>());
        cfg.component_order = cfg.application.components;
        for (const auto& e : a.value("edges", json::array())) {
            if (!e.is_array() || e.size() != 2) {
                err("application.edges", "edge must be a [producer, consumer] pair");
                continue;
            }
            cfg.application.edges.push_back({e[0].get<std::string>(),
                                             e[1].get<std::string>()});
        }
        for (const auto& s : a.value("sources", json::array())) {
            SensorSource src;
            src.id = str_or(s, "id", "?");
            src.feeds = str_or(s, "feeds", "");
            src.period = dur(s, "period", "application.sources[" + src.id + "]");
            cfg.application.sources.push_back(src);
        }
        for (const auto& s : a.value("sinks", json::array())) {
            ActuatorSink sink;
            sink.id = str_or(s, "id", "?");
            sink.fed_by = str_or(s, "fed_by", "");
            cfg.application.sinks.push_back(sink);
        }
    }

    void parse_platform(ScenarioConfig& cfg) {
        if (!j_.contains("platform")) {
            err("platform", "missing section");
            return;
        }
        const json& p = j_.at("platform");
        for (const auto& n : p.value("nodes", json::array()))
            cfg.platform.nodes.push_back(n.get<std::string>());
        for (const auto& l : p.value("links", json::array())) {
            Link link;
            link.id = str_or(l, "id", "?");
            auto ends = l.value("ends", json::array());
            if (ends.size() != 2) {
                err("platform.links[" + link.id + "]", "needs two endpoints");
                continue;
            }
            link.a = ends[0].get<std::string>();
            link.b = ends[1].get<std::string>();
            std::string medium = str_or(l, "medium", "wired");
            if (medium == "wired") link.medium = LinkMedium::Wired;
            else if (medium == "wireless") link.medium = LinkMedium::Wireless;
            else err("platform.links[" + link.id + "]", "bad medium '" + medium + "'");
            link.latency = dur(l, "latency", "platform.links[" + link.id + "]");
            cfg.platform.links.push_back(link);
        }
        for (const auto& r : p.value("relations", json::array())) {
            RelationSpec rel;
            rel.id = str_or(r, "id", "?");
            rel.src = str_or(r, "src", "");
            rel.dst = str_or(r, "dst", "");
            rel.safety_factor = r.value("safety_factor", 2);
            cfg.relations.push_back(rel);
        }
    }

    void parse_mapping(ScenarioConfig& cfg) {
        if (!j_.contains("mapping")) {
            err("mapping", "missing section");
            return;
        }
        for (const auto& [c, n] : j_.at("mapping").items())
            cfg.mapping[c] = n.get<std::string>();
    }

    void parse_behaviors(ScenarioConfig& cfg) {
        for (const auto& b : j_.value("behaviors", json::array())) {
            Behavior beh;
            beh.id = str_or(b, "id", "?");
            beh.owner = str_or(b, "owner", "");
            beh.qos = b.value("qos", 0.0);
            if (beh.qos < 0.0 || beh.qos > 1.0)
                err("behaviors[" + beh.id + "]", "qos outside [0,1]");
            cfg.behaviors.push_back(beh);
            cfg.costs.ec[beh.id] = dur(b, "ec", "behaviors[" + beh.id + "]");
            cfg.costs.cc[beh.id] = dur(b, "cc", "behaviors[" + beh.id + "]");
        }
    }

    void parse_budgets(ScenarioConfig& cfg) {
        if (!j_.contains("budgets")) {
            err("budgets", "missing section");
            return;
        }
        const json& b = j_.at("budgets");
        cfg.budgets.t_s1_c1 = dur(b, "T_s1_c1", "budgets");
        cfg.budgets.t_c1_c3 = dur(b, "T_c1_c3", "budgets");
        cfg.budgets.t_c3_c4 = dur(b, "T_c3_c4", "budgets");
        cfg.budgets.t_c4_a1 = dur(b, "T_c4_a1", "budgets");
        cfg.budgets.delta_s1_a1 = dur(b, "delta_s1_a1", "budgets");
        cfg.budgets.t_samp = dur(b, "T_samp", "budgets");
        cfg.budgets.t_n4_c3 = b.contains("T_n4_c3") ? dur(b, "T_n4_c3", "budgets")
                                                    : Duration{100000};
        if (j_.contains("component_budgets")) {
            for (const auto& [c, v] : j_.at("component_budgets").items()) {
                try {
                    cfg.component_budgets[c] = parse_duration(v.get<std::string>());
                } catch (const DurationParseError& e) {
                    err("component_budgets[" + c + "]", e.what());
                }
            }
        }
    }

    GuaranteePattern parse_pattern(const json& g, const std::string& where) {
        std::string p = str_or(g, "pattern", "within");
        if (p == "within") return Within{dur(g, "deadline", where)};
        if (p == "every") return Every{dur(g, "period", where)};
        if (p == "within_every")
            return WithinEvery{dur(g, "deadline", where), dur(g, "period", where)};
        err(where, "unknown pattern '" + p + "'");
        return Within{Duration{1}};
    }

    void parse_contracts(ScenarioConfig& cfg) {
        for (const auto& c : j_.value("contracts", json::array())) {
            Contract contract;
            contract.id = str_or(c, "id", "?");
            contract.subject = str_or(c, "subject", "");
            contract.tag = str_or(c, "tag", "");
            for (const auto& p : c.value("inputs", json::array()))
                contract.inputs.push_back({p.get<std::string>(), "real"});
            for (const auto& p : c.value("outputs", json::array()))
                contract.outputs.push_back({p.get<std::string>(), "real"});
            for (const auto& a : c.value("assumptions", json::array()))
                contract.assumptions.push_back(a.get<std::string>());
            for (const auto& g : c.value("guarantees", json::array())) {
                TimedGuarantee tg;
                tg.output = str_or(g, "output", "");
                tg.input = str_or(g, "input", "");
                tg.pattern = parse_pattern(g, "contracts[" + contract.id + "]");
                contract.guarantees.push_back(tg);
            }
            cfg.contracts[contract.id] = contract;
        }
        for (const auto& id : j_.value("initial_application_state", json::array())) {
            std::string cid = id.get<std::string>();
            auto it = cfg.contracts.find(cid);
            std::string component;
            if (it != cfg.contracts.end()) {
                // Resolve the owning component via the behavior tag.
                for (const auto& b : cfg.behaviors)
                    if (b.id == it->second.tag) component = b.owner;
            }
            if (component.empty()) {
                err("initial_application_state",
                    "contract '" + cid + "' does not name a declared behavior");
                continue;
            }
            cfg.initial_application_state.entries.push_back({component, cid});
        }
    }

    void parse_observers(ScenarioConfig& cfg) {
        for (const auto& o : j_.value("observers", json::array())) {
            ObserverSpec spec;
            spec.id = str_or(o, "id", "?");
            std::string type = str_or(o, "type", "deadline");
            std::string where = "observers[" + spec.id + "]";
            if (type == "deadline") {
                spec.type = ObserverType::Deadline;
                spec.deadline = dur(o, "deadline", where);
            } else if (type == "periodic") {
                spec.type = ObserverType::Periodic;
                spec.period = dur(o, "period", where);
            } else if (type == "deadline_periodic") {
                spec.type = ObserverType::DeadlinePeriodic;
                spec.deadline = dur(o, "deadline", where);
                spec.period = dur(o, "period", where);
            } else if (type == "heartbeat") {
                spec.type = ObserverType::Heartbeat;
                spec.period = dur(o, "period", where);
                spec.miss_threshold = o.value("miss_threshold", 1);
            } else {
                err(where, "unknown observer type '" + type + "'");
            }
            spec.host = str_or(o, "host", "");
            spec.contract = str_or(o, "contract", "");
            spec.watch = str_or(o, "watch", "");
            cfg.observers.push_back(spec);
        }
    }

    void parse_policies(ScenarioConfig& cfg) {
        for (const auto& p : j_.value("policies", json::array())) {
            ResponsePolicy policy;
            policy.subject = str_or(p, "subject", "");
            std::string where = "policies[" + policy.subject + "]";
            for (const auto& s : p.value("strategies", json::array())) {
                std::string type = str_or(s, "type", "");
                if (type == "restart") {
                    policy.strategies.push_back(RestartComponent{dur(s, "duration", where)});
                } else if (type == "notify_consumers") {
                    policy.strategies.push_back(NotifyConsumers{});
                } else if (type == "switch_behavior") {
                    policy.strategies.push_back(SwitchBehaviorStrategy{});
                } else if (type == "switch_link") {
                    SwitchLinkStrategy sl;
                    std::string medium = str_or(s, "medium", "wireless");
                    sl.medium = medium == "wired" ? LinkMedium::Wired
                                                  : LinkMedium::Wireless;
                    policy.strategies.push_back(sl);
                } else if (type == "escalate") {
                    policy.strategies.push_back(EscalateStrategy{});
                } else {
                    err(where, "unknown strategy '" + type + "'");
                }
            }
            policy.normalize();
            cfg.policies.push_back(policy);
        }
    }

    void parse_faults(ScenarioConfig& cfg) {
        for (const auto& f : j_.value("faults", json::array())) {
            FaultSpec spec;
            spec.id = str_or(f, "id", "?");
            std::string kind = str_or(f, "kind", "");
            std::string where = "faults[" + spec.id + "]";
            if (kind == "hanging_process") spec.kind = FaultKind::HangingProcess;
            else if (kind == "network_outage") spec.kind = FaultKind::NetworkOutage;
            else if (kind == "intermittent_link") spec.kind = FaultKind::IntermittentLink;
            else err(where, "unknown fault kind '" + kind + "'");
            spec.target = str_or(f, "target", "");
            spec.onset = dur(f, "onset", where);
            if (!f.value("permanent", false)) {
                if (f.contains("duration")) spec.duration = dur(f, "duration", where);
                else if (spec.kind == FaultKind::NetworkOutage)
                    err(where, "outage needs duration or permanent: true");
            }
            if (spec.kind == FaultKind::HangingProcess) {
                spec.hang_forever = f.value("hang_forever", false);
                if (!spec.hang_forever)
                    spec.extra_delay = dur(f, "extra_delay", where);
            }
            if (spec.kind == FaultKind::IntermittentLink) {
                spec.drop_probability = f.value("drop_probability", 0.0);
                if (spec.drop_probability < 0.0 || spec.drop_probability > 1.0)
                    err(where, "drop_probability outside [0,1]");
                spec.seed = f.value("seed", std::uint64_t{0});
            }
            cfg.faults.push_back(spec);
        }
    }

    const json& j_;
    std::string origin_;
    std::vector<std::string> errors_;
};

}  // namespace

std::vector<std::string> validate_config(const ScenarioConfig& cfg) {
    std::vector<std::string> errors;

    std::vector<std::string> behavior_ids;
    for (const auto& b : cfg.behaviors) behavior_ids.push_back(b.id);
    for (const auto& d : validate_topology(cfg.application, cfg.platform, cfg.mapping,
                                           cfg.costs, behavior_ids)) {
        errors.push_back(std::string("topology: ") + to_string(d.kind) + " " + d.detail);
    }

    auto decomposition = validate_decomposition(cfg.budgets);
    if (!decomposition.ok) {
        errors.push_back("budgets: per-hop budgets exceed the end-to-end bound by " +
                         format_duration(decomposition.surplus));
    }

    if (cfg.horizon.micros <= 0) errors.push_back("horizon must be positive");

    std::set<std::string> components(cfg.application.components.begin(),
                                     cfg.application.components.end());
    for (const auto& c : components) {
        if (cfg.behaviors_of(c).empty())
            errors.push_back("component " + c + " declares no behavior");
    }

    // Initial application state must cover each component exactly once, with
    // matching contract subjects.
    std::set<std::string> covered;
    for (const auto& [component, cid] : cfg.initial_application_state.entries) {
        if (!covered.insert(component).second)
            errors.push_back("initial state lists " + component + " twice");
        auto it = cfg.contracts.find(cid);
        if (it == cfg.contracts.end()) {
            errors.push_back("initial state references unknown contract " + cid);
            continue;
        }
        auto host = cfg.mapping.find(component);
        if (host != cfg.mapping.end() && it->second.subject != host->second)
            errors.push_back("contract " + cid + " subject " + it->second.subject +
                             " does not match host of " + component);
    }
    if (!cfg.initial_application_state.entries.empty() && covered != components)
        errors.push_back("initial application state does not cover every component");

    for (const auto& o : cfg.observers) {
        if (!o.contract.empty() && !cfg.contracts.count(o.contract))
            errors.push_back("observer " + o.id + " references unknown contract " +
                             o.contract);
        if (o.type == ObserverType::DeadlinePeriodic && o.deadline > o.period)
            errors.push_back("observer " + o.id + ": deadline exceeds period");
        if (o.type == ObserverType::Heartbeat) {
            bool known = std::any_of(cfg.relations.begin(), cfg.relations.end(),
                                     [&](const RelationSpec& r) { return r.id == o.watch; });
            if (!known)
                errors.push_back("observer " + o.id + " watches unknown relation " +
                                 o.watch);
        }
        if (o.miss_threshold < 1)
            errors.push_back("observer " + o.id + ": miss_threshold must be >= 1");
    }

    for (const auto& rel : cfg.relations) {
        auto nodes = cfg.platform.nodes;
        if (std::find(nodes.begin(), nodes.end(), rel.src) == nodes.end() ||
            std::find(nodes.begin(), nodes.end(), rel.dst) == nodes.end())
            errors.push_back("relation " + rel.id + " has unknown endpoint");
    }

    for (const auto& f : cfg.faults) {
        bool known = components.count(f.target) ||
                     cfg.platform.find_link(f.target) != nullptr;
        if (!known)
            errors.push_back("fault " + f.id + " targets unknown entity " + f.target);
        if (f.onset > cfg.horizon)
            errors.push_back("fault " + f.id + " onset beyond run horizon");
    }
    return errors;
}

ScenarioConfig parse_scenario_text(const std::string& json_text, const std::string& origin) {
    json j;
    try {
        j = json::parse(json_text);
    } catch (const json::parse_error& e) {
        throw ScenarioError({origin + ": " + e.what()});
    }
    return Parser(j, origin).parse();
}

ScenarioConfig parse_scenario(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw ScenarioError({path + ": cannot open"});
    std::stringstream ss;
    ss << f.rdbuf();
    return parse_scenario_text(ss.str(), path);
}

}  // namespace cresim
