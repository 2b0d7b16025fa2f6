#include "cresim/simulation.hpp"

#include <algorithm>
#include <cassert>
#include <cstdio>

namespace cresim {

namespace {

std::string fmt_qos(double q) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.6f", q);
    return buf;
}

std::string i64(std::int64_t v) { return std::to_string(v); }

const char* trigger_name(ReconfigurationTrigger t) {
    switch (t) {
        case ReconfigurationTrigger::Violation: return "violation";
        case ReconfigurationTrigger::FaultMsg: return "fault_msg";
        case ReconfigurationTrigger::Renegotiation: return "renegotiation";
    }
    return "?";
}

std::string join(const std::vector<std::string>& parts) {
    std::string out;
    for (const auto& p : parts) {
        if (!out.empty()) out += "|";
        out += p;
    }
    return out;
}

bool starts_with(const std::string& s, const char* prefix) {
    return s.rfind(prefix, 0) == 0;
}

}  // namespace

namespace {

// The scenario seed perturbs every fault stream so one knob reseeds the run.
std::vector<FaultSpec> seeded_faults(const ScenarioConfig& cfg) {
    std::vector<FaultSpec> out = cfg.faults;
    for (auto& f : out) f.seed ^= cfg.seed * 0x9E3779B97F4A7C15ull;
    return out;
}

}  // namespace

Simulation::Simulation(ScenarioConfig cfg)
    : cfg_(std::move(cfg)), faults_(seeded_faults(cfg_)) {
    init_components();
    init_relations();
    init_observers();
    schedule_faults();
    schedule_sampling();
    schedule_heartbeats();
}

const ComponentState& Simulation::component(const std::string& id) const {
    return components_.at(id);
}

void Simulation::init_components() {
    for (const auto& c : cfg_.application.components) {
        ComponentState st;
        st.id = c;
        for (const auto& b : cfg_.behaviors_of(c)) st.behaviors.push_back(b.id);
        if (const std::string* cid = cfg_.initial_application_state.contract_of(c)) {
            auto it = cfg_.contracts.find(*cid);
            if (it != cfg_.contracts.end()) st.declared_behavior = it->second.tag;
        }
        if (st.declared_behavior.empty() && !st.behaviors.empty())
            st.declared_behavior = st.behaviors.front();
        st.active_behavior = st.declared_behavior;
        components_.emplace(c, std::move(st));
    }
    // Chain predecessors: walk from the first sensor's component to the sink.
    if (!cfg_.application.sources.empty() && !cfg_.application.sinks.empty()) {
        std::string cur = cfg_.application.sources.front().feeds;
        std::string last = cfg_.application.sinks.front().fed_by;
        std::set<std::string> seen{cur};
        while (cur != last) {
            bool advanced = false;
            for (const auto& [p, c] : cfg_.application.edges) {
                if (p != cur || seen.count(c)) continue;
                chain_pred_[c] = cur;
                cur = c;
                seen.insert(c);
                advanced = true;
                break;
            }
            if (!advanced) break;
        }
    }

    app_state_ = cfg_.initial_application_state;
    if (app_state_.entries.empty()) {
        // Derive the initial state from the declared behaviors where per
        // behavior contracts exist.
        const auto& order = cfg_.component_order.empty() ? cfg_.application.components
                                                         : cfg_.component_order;
        for (const auto& c : order) {
            const auto& st = components_.at(c);
            auto node = cfg_.mapping.find(c);
            for (const auto& [id, ct] : cfg_.contracts) {
                if (ct.tag == st.declared_behavior && node != cfg_.mapping.end() &&
                    ct.subject == node->second) {
                    app_state_.entries.push_back({c, id});
                    break;
                }
            }
        }
    }
}

void Simulation::init_relations() {
    for (const auto& spec : cfg_.relations) {
        RelationRuntime rr;
        rr.spec = spec;
        auto r = route(cfg_.platform, spec.src, spec.dst, any_up);
        if (!r) {
            rr.disconnected = true;
            std::string report = "infeasible: relation " + spec.id + " has no route " +
                                 spec.src + " -> " + spec.dst;
            summary_.infeasible_reports.push_back(report);
            record_action(SimTime{0}, spec.id, "escalate_infeasible", {{"report", report}});
            relations_.emplace(spec.id, std::move(rr));
            continue;
        }
        rr.current_route = *r;
        rr.current_bound = r->latency * spec.safety_factor;
        rr.initial_bound = rr.current_bound;
        rr.active_contract = spec.id + "#0";
        Contract c = negotiate_link_contract(spec.src, spec.dst, cfg_.platform,
                                             spec.safety_factor, rr.active_contract);
        negotiated_contracts_.emplace(rr.active_contract, std::move(c));
        platform_state_.entries.push_back({spec.id, rr.active_contract});
        relations_.emplace(spec.id, std::move(rr));
    }
}

void Simulation::init_observers() {
    for (const auto& spec : cfg_.observers) {
        TimedAutomaton ta;
        switch (spec.type) {
            case ObserverType::Deadline: ta = deadline_template(spec.deadline); break;
            case ObserverType::Periodic: ta = periodic_template(spec.period); break;
            case ObserverType::DeadlinePeriodic:
                ta = deadline_periodic_template(spec.deadline, spec.period);
                break;
            case ObserverType::Heartbeat:
                ta = heartbeat_template(spec.period, spec.miss_threshold);
                break;
        }
        ObserverInstance inst(spec.id, std::move(ta), spec.host, spec.contract);
        if (spec.type == ObserverType::Heartbeat) {
            // Arm the liveness clock from the start of the run.
            inst.reset(SimTime{0});
        }
        auto [it, ok] = observers_.emplace(spec.id, std::move(inst));
        if (ok) arm_observer_timer(it->second);
    }
}

void Simulation::schedule_faults() {
    for (const auto& f : cfg_.faults) {
        engine_.schedule(f.onset, PriorityClass::Fault, "fault_on:" + f.id);
        if (f.duration)
            engine_.schedule(f.onset + *f.duration, PriorityClass::Fault,
                             "fault_clear:" + f.id);
    }
}

void Simulation::schedule_sampling() {
    // First sample one period in; then strictly periodic.
    for (const auto& src : cfg_.application.sources)
        engine_.schedule(src.period, PriorityClass::Data, "sample:" + src.id);
}

void Simulation::schedule_heartbeats() {
    for (const auto& spec : cfg_.observers) {
        if (spec.type != ObserverType::Heartbeat) continue;
        if (!relations_.count(spec.watch)) continue;
        engine_.schedule(Duration{0}, PriorityClass::Timer, "hb_due:" + spec.watch);
    }
}

RunSummary Simulation::run() { return run_until(cfg_.horizon); }

RunSummary Simulation::run_until(SimTime horizon) {
    ran_ = true;
    engine_.run_until(horizon, [this](const Event& ev) { dispatch(ev); });
    summary_.horizon = horizon;
    bool unresolved = false;
    for (const auto& [id, o] : observers_)
        if (o.violated()) unresolved = true;
    summary_.exit_code = (!summary_.infeasible_reports.empty() || unresolved) ? 1 : 0;
    return summary_;
}

MetricsReport Simulation::metrics() const {
    SimTime h = ran_ ? summary_.horizon : cfg_.horizon;
    return compute_metrics(trace_, cfg_, h);
}

void Simulation::dispatch(const Event& ev) {
    const SimTime t = ev.time;
    if (starts_with(ev.target, "sample:")) {
        std::string sid = ev.target.substr(7);
        for (const auto& src : cfg_.application.sources)
            if (src.id == sid) return on_sample(src.feeds, src, t);
    } else if (ev.target == "exec") {
        on_execution_complete(ev.payload, t);
    } else if (ev.target == "deliv") {
        on_delivery(ev.payload, t);
    } else if (starts_with(ev.target, "hb_due:")) {
        on_heartbeat_due(ev.target.substr(7), t);
    } else if (ev.target == "hb_arr") {
        auto it = heartbeat_arrivals_.find(ev.payload);
        if (it == heartbeat_arrivals_.end()) return;
        auto [relation, origin] = it->second;
        heartbeat_arrivals_.erase(it);
        on_heartbeat_arrival(relation, origin, t);
    } else if (ev.target == "obs") {
        on_observer_timer(ev.payload, t);
    } else if (starts_with(ev.target, "fault_on:")) {
        on_fault_onset(ev.target.substr(9), t);
    } else if (starts_with(ev.target, "fault_clear:")) {
        on_fault_clear(ev.target.substr(12), t);
    } else if (starts_with(ev.target, "restart:")) {
        on_restart_complete(ev.target.substr(8), t);
    } else if (ev.target == "fmsg") {
        on_fault_msg(ev.payload, t);
    }
}

// ---------------------------------------------------------------------------
// Data pipeline

void Simulation::on_sample(const std::string& component, const SensorSource& source,
                           SimTime t) {
    engine_.schedule(source.period, PriorityClass::Data, "sample:" + source.id);
    auto& st = components_.at(component);
    if (!st.running()) {
        record(t, source.id, RecordKind::SuppressedSample, {{"component", component}});
        return;
    }
    record(t, source.id, RecordKind::Sample, {{"component", component}});
    for (ObserverInstance* o : observers_watching_component(component)) {
        if (std::holds_alternative<HeartbeatPattern>(o->automaton().pattern)) continue;
        feed_observer(*o, {Trigger::InputArrival, t, std::nullopt}, t);
    }
    DataMsg in;
    in.sampled_at = t;
    in.source = source.id;
    execute_component(component, in, t);
}

void Simulation::execute_component(const std::string& component, const DataMsg& in,
                                   SimTime t) {
    auto extra = faults_.extra_delay(component, t);
    if (!extra) return;  // hung: no completion will ever be produced
    auto& st = components_.at(component);
    Duration ec;
    if (auto it = cfg_.costs.ec.find(st.active_behavior); it != cfg_.costs.ec.end())
        ec = it->second;
    std::uint64_t h = next_handle_++;
    PendingExecution pe;
    pe.component = component;
    pe.msg = in;
    executions_.emplace(h, std::move(pe));
    EventId eid = engine_.schedule(ec + *extra, PriorityClass::Data, "exec", h);
    exec_event_of_[h] = eid;
    st.pending_executions.insert(eid);
}

void Simulation::on_execution_complete(std::uint64_t handle, SimTime t) {
    auto it = executions_.find(handle);
    if (it == executions_.end()) return;
    PendingExecution pe = std::move(it->second);
    executions_.erase(it);
    auto eid = exec_event_of_.find(handle);
    auto& st = components_.at(pe.component);
    if (eid != exec_event_of_.end()) {
        st.pending_executions.erase(eid->second);
        exec_event_of_.erase(eid);
    }
    if (!st.running()) return;

    DataMsg msg = pe.msg;
    msg.produced_at = t;
    msg.source = pe.component;
    record(t, pe.component, RecordKind::Production,
           {{"behavior", st.active_behavior}, {"sampled_at_us", i64(msg.sampled_at.micros)}});
    for (ObserverInstance* o : observers_watching_component(pe.component)) {
        if (!std::holds_alternative<DeadlinePattern>(o->automaton().pattern) &&
            !std::holds_alternative<DeadlinePeriodicPattern>(o->automaton().pattern))
            continue;
        feed_observer(*o, {Trigger::OutputProduced, t, std::nullopt}, t);
    }

    auto consumers = cfg_.application.consumers_of(pe.component);
    if (consumers.empty()) {
        for (const auto& sink : cfg_.application.sinks) {
            if (sink.fed_by != pe.component) continue;
            Duration cc;
            if (auto c = cfg_.costs.cc.find(st.active_behavior); c != cfg_.costs.cc.end())
                cc = c->second;
            DataMsg out = msg;
            out.destination = sink.id;
            std::uint64_t h = next_handle_++;
            deliveries_.emplace(h, PendingDelivery{std::move(out)});
            engine_.schedule(cc, PriorityClass::Data, "deliv", h);
        }
        return;
    }
    for (const auto& consumer : consumers) {
        for (ObserverInstance* o : observers_watching_edge(pe.component, consumer))
            feed_observer(*o, {Trigger::InputArrival, t, std::nullopt}, t);
        DataMsg out = msg;
        out.destination = consumer;
        send_output(pe.component, out, t);
    }
}

void Simulation::send_output(const std::string& component, const DataMsg& msg, SimTime t) {
    const auto& st = components_.at(component);
    Duration cc;
    if (auto c = cfg_.costs.cc.find(st.active_behavior); c != cfg_.costs.cc.end())
        cc = c->second;
    const std::string& src_node = cfg_.mapping.at(component);
    const std::string& dst_node = cfg_.mapping.at(msg.destination);

    DataMsg out = msg;
    Duration transit{0};
    if (src_node != dst_node) {
        const Route* r = nullptr;
        RelationRuntime* rel = relation_for_nodes(src_node, dst_node);
        std::optional<Route> dynamic;
        if (rel) {
            if (rel->disconnected) {
                record(t, component, RecordKind::Undeliverable,
                       {{"destination", msg.destination}, {"reason", "no_route"},
                        {"sampled_at_us", i64(msg.sampled_at.micros)}});
                return;
            }
            r = &rel->current_route;
        } else {
            dynamic = route_between_nodes(src_node, dst_node);
            if (!dynamic) {
                record(t, component, RecordKind::Undeliverable,
                       {{"destination", msg.destination}, {"reason", "no_route"},
                        {"sampled_at_us", i64(msg.sampled_at.micros)}});
                return;
            }
            r = &*dynamic;
        }
        for (const auto& lid : r->links) {
            const Link* l = cfg_.platform.find_link(lid);
            if (l && l->state == LinkState::Down) {
                record(t, component, RecordKind::Undeliverable,
                       {{"destination", msg.destination}, {"reason", "link_down"},
                        {"link", lid}, {"sampled_at_us", i64(msg.sampled_at.micros)}});
                return;
            }
        }
        bool dropped = false;
        std::string dropped_on;
        for (const auto& lid : r->links) {
            // Draw for every hop so drop patterns are independent of outcomes.
            if (faults_.should_drop(lid, t) && !dropped) {
                dropped = true;
                dropped_on = lid;
            }
        }
        if (dropped) {
            record(t, component, RecordKind::Undeliverable,
                   {{"destination", msg.destination}, {"reason", "dropped"},
                    {"link", dropped_on}, {"sampled_at_us", i64(msg.sampled_at.micros)}});
            return;
        }
        out.route_nodes = r->nodes;
        out.route_links = r->links;
        transit = r->latency;
    }
    std::uint64_t h = next_handle_++;
    deliveries_.emplace(h, PendingDelivery{std::move(out)});
    engine_.schedule(cc + transit, PriorityClass::Data, "deliv", h);
}

void Simulation::on_delivery(std::uint64_t handle, SimTime t) {
    auto it = deliveries_.find(handle);
    if (it == deliveries_.end()) return;
    DataMsg msg = std::move(it->second.msg);
    deliveries_.erase(it);

    for (const auto& sink : cfg_.application.sinks) {
        if (sink.id != msg.destination) continue;
        record(t, sink.id, RecordKind::Delivery,
               {{"source", msg.source},
                {"sampled_at_us", i64(msg.sampled_at.micros)},
                {"produced_at_us", i64(msg.produced_at.micros)}});
        return;
    }

    std::vector<std::pair<std::string, std::string>> fields = {
        {"source", msg.source},
        {"sampled_at_us", i64(msg.sampled_at.micros)},
        {"produced_at_us", i64(msg.produced_at.micros)}};
    if (!msg.route_nodes.empty()) {
        if (RelationRuntime* rel = relation_for_nodes(msg.route_nodes.front(),
                                                      msg.route_nodes.back()))
            fields.push_back({"via_relation", rel->spec.id});
    }
    record(t, msg.destination, RecordKind::Delivery, std::move(fields));

    for (ObserverInstance* o : observers_watching_edge(msg.source, msg.destination))
        feed_observer(*o, {Trigger::OutputProduced, t, std::nullopt}, t);

    auto& st = components_.at(msg.destination);
    std::vector<std::string> producers;
    for (const auto& [p, c] : cfg_.application.edges)
        if (c == msg.destination) producers.push_back(p);

    bool is_trigger = producers.size() <= 1;
    auto pred = chain_pred_.find(msg.destination);
    if (!is_trigger && pred != chain_pred_.end() && msg.source == pred->second)
        is_trigger = true;

    if (is_trigger) {
        if (!st.running()) {
            record(t, msg.destination, RecordKind::ExecutionSkipped,
                   {{"source", msg.source}, {"reason", "not_running"}});
            return;
        }
        if (producers.size() > 1 && !has_pair_input_[msg.destination]) {
            record(t, msg.destination, RecordKind::ExecutionSkipped,
                   {{"source", msg.source}, {"reason", "awaiting_pair"}});
            pending_chain_[msg.destination] = msg;
            return;
        }
        execute_component(msg.destination, msg, t);
    } else {
        latest_input_[msg.destination + "/" + msg.source] = msg.payload;
        has_pair_input_[msg.destination] = true;
        auto pc = pending_chain_.find(msg.destination);
        if (pc != pending_chain_.end() && st.running()) {
            DataMsg trigger = std::move(pc->second);
            pending_chain_.erase(pc);
            execute_component(msg.destination, trigger, t);
        }
    }
}

// ---------------------------------------------------------------------------
// Heartbeats

void Simulation::on_heartbeat_due(const std::string& relation, SimTime t) {
    const ObserverSpec* spec = nullptr;
    for (const auto& s : cfg_.observers)
        if (s.type == ObserverType::Heartbeat && s.watch == relation) spec = &s;
    auto rit = relations_.find(relation);
    if (!spec || rit == relations_.end()) return;
    engine_.schedule(spec->period, PriorityClass::Timer, "hb_due:" + relation);
    RelationRuntime& rel = rit->second;
    if (rel.disconnected) return;
    for (const auto& lid : rel.current_route.links) {
        const Link* l = cfg_.platform.find_link(lid);
        if (l && l->state == LinkState::Down) return;  // beat lost
    }
    bool dropped = false;
    for (const auto& lid : rel.current_route.links)
        if (faults_.should_drop(lid, t)) dropped = true;
    if (dropped) return;
    std::uint64_t h = next_handle_++;
    heartbeat_arrivals_.emplace(h, std::make_pair(relation, t));
    engine_.schedule(rel.current_route.latency, PriorityClass::Data, "hb_arr", h);
}

void Simulation::on_heartbeat_arrival(const std::string& relation, SimTime origin,
                                      SimTime t) {
    record(t, relation, RecordKind::Heartbeat, {{"origin_us", i64(origin.micros)}});
    for (const auto& s : cfg_.observers) {
        if (s.type != ObserverType::Heartbeat || s.watch != relation) continue;
        auto it = observers_.find(s.id);
        if (it != observers_.end())
            feed_observer(it->second, {Trigger::HeartbeatReceived, t, origin}, t);
    }
}

// ---------------------------------------------------------------------------
// Observer plumbing

void Simulation::feed_observer(ObserverInstance& o, const ObserverEvent& ev, SimTime t) {
    if (o.paused() || o.violated()) return;
    if (auto v = o.observe(ev)) {
        summary_.violations.push_back(*v);
        std::string scope;
        for (const auto& s : cfg_.observers)
            if (s.id == o.id()) scope = s.watch;
        record(t, o.id(), RecordKind::Violation,
               {{"violation_kind", to_string(v->kind)},
                {"violation_time_us", i64(v->time.micros)},
                {"contract", v->contract_id},
                {"scope", scope}});
        on_violation(*v, t);
    } else {
        arm_observer_timer(o);
    }
}

void Simulation::arm_observer_timer(ObserverInstance& o) {
    auto nb = o.next_bound();
    if (!nb) return;
    Duration delay = *nb - engine_.now();
    if (delay < Duration{0}) delay = Duration{0};
    std::uint64_t h = next_handle_++;
    observer_timers_.emplace(h, ObserverTimer{o.id(), o.generation(), *nb});
    engine_.schedule(delay, PriorityClass::Timer, "obs", h);
}

void Simulation::on_observer_timer(std::uint64_t handle, SimTime t) {
    auto it = observer_timers_.find(handle);
    if (it == observer_timers_.end()) return;
    ObserverTimer timer = it->second;
    observer_timers_.erase(it);
    auto oit = observers_.find(timer.observer);
    if (oit == observers_.end()) return;
    ObserverInstance& o = oit->second;
    if (o.paused() || o.violated() || o.generation() != timer.generation) return;
    if (auto v = o.advance_to(timer.bound)) {
        summary_.violations.push_back(*v);
        std::string scope;
        for (const auto& s : cfg_.observers)
            if (s.id == o.id()) scope = s.watch;
        record(t, o.id(), RecordKind::Violation,
               {{"violation_kind", to_string(v->kind)},
                {"violation_time_us", i64(v->time.micros)},
                {"contract", v->contract_id},
                {"scope", scope}});
        on_violation(*v, t);
    }
}

void Simulation::pause_observers_of(const std::string& component) {
    for (ObserverInstance* o : observers_watching_component(component))
        o->set_paused(true);
}

void Simulation::reset_observers_of(const std::string& component, SimTime t) {
    for (ObserverInstance* o : observers_watching_component(component)) {
        o->reset(t);
        arm_observer_timer(*o);
    }
}

std::vector<ObserverInstance*> Simulation::observers_watching_component(
    const std::string& component) {
    std::vector<ObserverInstance*> out;
    for (const auto& s : cfg_.observers) {
        if (s.watch != component) continue;
        auto it = observers_.find(s.id);
        if (it != observers_.end()) out.push_back(&it->second);
    }
    return out;
}

std::vector<ObserverInstance*> Simulation::observers_watching_edge(
    const std::string& producer, const std::string& consumer) {
    std::vector<ObserverInstance*> out;
    std::string edge = producer + "->" + consumer;
    for (const auto& s : cfg_.observers) {
        if (s.watch != edge) continue;
        auto it = observers_.find(s.id);
        if (it != observers_.end()) out.push_back(&it->second);
    }
    return out;
}

// ---------------------------------------------------------------------------
// Faults

void Simulation::on_fault_onset(const std::string& fault_id, SimTime t) {
    const FaultSpec* f = faults_.find(fault_id);
    if (!f) return;
    record(t, fault_id, RecordKind::FaultOnset,
           {{"fault_kind", to_string(f->kind)}, {"target", f->target}});
    if (f->kind == FaultKind::NetworkOutage) {
        if (Link* l = cfg_.platform.find_link(f->target)) l->state = LinkState::Down;
    }
}

void Simulation::on_fault_clear(const std::string& fault_id, SimTime t) {
    const FaultSpec* f = faults_.find(fault_id);
    if (!f) return;
    record(t, fault_id, RecordKind::FaultCleared, {{"by", "duration"}});
    if (f->kind == FaultKind::NetworkOutage && !faults_.outage_active(f->target, t)) {
        if (Link* l = cfg_.platform.find_link(f->target)) l->state = LinkState::Up;
    }
}

// ---------------------------------------------------------------------------
// Resilience managers

void Simulation::on_violation(const Violation& v, SimTime t) {
    std::string scope;
    for (const auto& s : cfg_.observers)
        if (s.id == v.observer_id) scope = s.watch;
    auto rit = relations_.find(scope);
    if (rit != relations_.end()) {
        handle_relation_violation(rit->second, v, t);
        return;
    }
    // Edge scopes are handled by the producer's manager.
    std::string component = scope;
    if (auto pos = scope.find("->"); pos != std::string::npos)
        component = scope.substr(0, pos);
    handle_component_violation(component, v, t);
}

void Simulation::handle_component_violation(const std::string& component,
                                            const Violation& v, SimTime t) {
    static const ResponsePolicy kDefault = [] {
        ResponsePolicy p;
        p.normalize();
        return p;
    }();
    const ResponsePolicy* policy = cfg_.policy_for(component);
    if (!policy) policy = &kDefault;

    bool handled = false;
    Duration expected_recovery{0};
    for (const auto& s : policy->strategies) {
        if (const auto* r = std::get_if<RestartComponent>(&s)) {
            restart_component(component, r->duration, t);
            expected_recovery = r->duration;
            handled = true;
        } else if (std::holds_alternative<NotifyConsumers>(s)) {
            FaultMsgKind kind = v.kind == ViolationKind::HeartbeatLoss
                                    ? FaultMsgKind::NetworkOutage
                                    : FaultMsgKind::HangingProcess;
            notify_consumers(component, kind, expected_recovery, t);
        } else if (std::holds_alternative<SwitchBehaviorStrategy>(s)) {
            auto bit = cfg_.component_budgets.find(component);
            if (bit == cfg_.component_budgets.end()) continue;
            auto sel = select_behavior(cfg_.behavior_options_of(component), bit->second);
            auto cit = components_.find(component);
            if (sel && cit != components_.end() && *sel != cit->second.active_behavior) {
                switch_component_behavior(component, *sel, t,
                                          ReconfigurationTrigger::Violation);
                handled = true;
                break;
            }
        } else if (std::holds_alternative<SwitchLinkStrategy>(s)) {
            continue;  // not applicable to a component subject
        } else if (std::holds_alternative<EscalateStrategy>(s)) {
            if (handled) break;
            std::string report = "infeasible: component " + component + " violation " +
                                 to_string(v.kind) + " unhandled";
            summary_.infeasible_reports.push_back(report);
            record_action(t, component, "escalate_infeasible", {{"report", report}});
            break;
        }
    }
}

void Simulation::handle_relation_violation(RelationRuntime& rel, const Violation& v,
                                           SimTime t) {
    static const ResponsePolicy kDefault = [] {
        ResponsePolicy p;
        p.normalize();
        return p;
    }();
    const ResponsePolicy* policy = cfg_.policy_for(rel.spec.id);
    if (!policy) policy = &kDefault;

    bool handled = false;
    for (const auto& s : policy->strategies) {
        if (const auto* sw = std::get_if<SwitchLinkStrategy>(&s)) {
            if (switch_link(rel, sw->medium, t)) {
                handled = true;
                break;
            }
        } else if (std::holds_alternative<EscalateStrategy>(s)) {
            if (handled) break;
            EscalationResult res = escalate_relation(rel, t);
            if (const auto* inf = std::get_if<Infeasible>(&res)) {
                summary_.infeasible_reports.push_back(inf->report);
                record_action(t, rel.spec.id, "escalate_infeasible",
                              {{"report", inf->report}});
                rel.disconnected = true;
            }
            break;
        }
        // Restart/Notify/SwitchBehavior do not apply to a relation subject.
    }
}

void Simulation::handle_fault_msg(const std::string& consumer, const FaultMsg& m,
                                  SimTime t) {
    auto cit = components_.find(consumer);
    if (cit == components_.end()) return;
    ComponentState& st = cit->second;
    if (m.kind == FaultMsgKind::ProducerRecovered) {
        if (cfg_.revert_on_recovery && st.active_behavior != st.declared_behavior)
            switch_component_behavior(consumer, st.declared_behavior, t,
                                      ReconfigurationTrigger::FaultMsg);
        return;
    }
    auto bit = cfg_.component_budgets.find(consumer);
    if (bit == cfg_.component_budgets.end()) return;
    Duration effective = bit->second - m.expected_recovery;
    if (effective < Duration{0}) effective = Duration{0};
    auto sel = select_behavior(cfg_.behavior_options_of(consumer), effective);
    if (!sel) {
        std::string report = "infeasible: component " + consumer +
                             " has no behavior within " + format_duration(effective);
        summary_.infeasible_reports.push_back(report);
        record_action(t, consumer, "escalate_infeasible", {{"report", report}});
        return;
    }
    if (*sel != st.active_behavior)
        switch_component_behavior(consumer, *sel, t, ReconfigurationTrigger::FaultMsg);
}

void Simulation::restart_component(const std::string& component, Duration duration,
                                   SimTime t) {
    auto& st = components_.at(component);
    SimTime until = t + duration;
    if (st.status == ComponentStatus::Restarting) {
        if (until < st.restarting_until) until = st.restarting_until;
    }
    st.status = ComponentStatus::Restarting;
    st.restarting_until = until;

    for (EventId eid : st.pending_executions) {
        engine_.cancel(eid);
        for (auto it = exec_event_of_.begin(); it != exec_event_of_.end();) {
            if (it->second == eid) {
                executions_.erase(it->first);
                it = exec_event_of_.erase(it);
            } else {
                ++it;
            }
        }
    }
    st.pending_executions.clear();
    pause_observers_of(component);

    for (const auto& fid : faults_.clear_hanging(component, t))
        record(t, fid, RecordKind::FaultCleared, {{"by", "restart"}});

    record_action(t, component, "restart",
                  {{"until_us", i64(until.micros)},
                   {"expected_recovery_us", i64(duration.micros)}});

    auto prev = restart_timers_.find(component);
    if (prev != restart_timers_.end()) engine_.cancel(prev->second);
    // Data class so the component is back up before data arriving at the
    // same instant as the restart deadline.
    restart_timers_[component] =
        engine_.schedule(until - t, PriorityClass::Data, "restart:" + component);
}

void Simulation::on_restart_complete(const std::string& component, SimTime t) {
    auto& st = components_.at(component);
    st.status = ComponentStatus::Running;
    restart_timers_.erase(component);
    record_action(t, component, "restart_complete");
    reset_observers_of(component, t);
    notify_consumers(component, FaultMsgKind::ProducerRecovered, Duration{0}, t);
}

void Simulation::notify_consumers(const std::string& component, FaultMsgKind kind,
                                  Duration expected_recovery, SimTime t) {
    const std::string& src_node = cfg_.mapping.at(component);
    for (const auto& consumer : cfg_.application.consumers_of(component)) {
        FaultMsg m;
        m.kind = kind;
        m.source = component;
        m.expected_recovery = expected_recovery;
        m.issued_at = t;
        const std::string& dst_node = cfg_.mapping.at(consumer);
        Duration transit{0};
        if (src_node != dst_node) {
            // The fault channel routes dynamically over whatever is up.
            auto r = route_between_nodes(src_node, dst_node);
            if (!r) {
                record(t, consumer, RecordKind::Undeliverable,
                       {{"channel", "fault"}, {"source", component},
                        {"reason", "no_route"}});
                continue;
            }
            transit = r->latency;
        }
        record_action(t, component, "notify_consumers",
                      {{"consumer", consumer},
                       {"msg_kind", to_string(kind)},
                       {"expected_recovery_us", i64(expected_recovery.micros)}});
        std::uint64_t h = next_handle_++;
        fault_msgs_.emplace(h, PendingFaultMsg{consumer, std::move(m)});
        engine_.schedule(transit, PriorityClass::Data, "fmsg", h);
    }
}

void Simulation::on_fault_msg(std::uint64_t handle, SimTime t) {
    auto it = fault_msgs_.find(handle);
    if (it == fault_msgs_.end()) return;
    PendingFaultMsg pf = std::move(it->second);
    fault_msgs_.erase(it);
    record(t, pf.destination, RecordKind::Delivery,
           {{"channel", "fault"},
            {"source", pf.msg.source},
            {"msg_kind", to_string(pf.msg.kind)},
            {"expected_recovery_us", i64(pf.msg.expected_recovery.micros)}});
    handle_fault_msg(pf.destination, pf.msg, t);
}

bool Simulation::switch_link(RelationRuntime& rel, LinkMedium medium, SimTime t) {
    auto r = route(cfg_.platform, rel.spec.src, rel.spec.dst,
                   [&](const Link& l) { return any_up(l) && l.medium == medium; });
    if (!r || r->links == rel.current_route.links) return false;
    adopt_relation_contract(rel, *r, t, ReconfigurationTrigger::Violation);
    record_action(t, rel.spec.id, "switch_link",
                  {{"route", join(r->links)},
                   {"medium", medium == LinkMedium::Wireless ? "wireless" : "wired"},
                   {"bound_us", i64(rel.current_bound.micros)}});
    for (const auto& s : cfg_.observers) {
        if (s.watch != rel.spec.id) continue;
        auto oit = observers_.find(s.id);
        if (oit != observers_.end()) {
            oit->second.reset(t);
            arm_observer_timer(oit->second);
        }
    }
    return true;
}

EscalationResult Simulation::escalate_relation(RelationRuntime& rel, SimTime t) {
    auto r = route(cfg_.platform, rel.spec.src, rel.spec.dst, any_up);
    if (!r || r->links == rel.current_route.links) {
        return Infeasible{"infeasible: relation " + rel.spec.id +
                          " cannot be re-established between " + rel.spec.src + " and " +
                          rel.spec.dst};
    }
    adopt_relation_contract(rel, *r, t, ReconfigurationTrigger::Violation);
    record_action(t, rel.spec.id, "reroute",
                  {{"route", join(r->links)}, {"bound_us", i64(rel.current_bound.micros)}});
    for (const auto& s : cfg_.observers) {
        if (s.watch != rel.spec.id) continue;
        auto oit = observers_.find(s.id);
        if (oit != observers_.end()) {
            oit->second.reset(t);
            arm_observer_timer(oit->second);
        }
    }
    return Rerouted{*r};
}

void Simulation::switch_component_behavior(const std::string& component,
                                           const std::string& behavior, SimTime t,
                                           ReconfigurationTrigger trigger) {
    auto& st = components_.at(component);
    if (st.active_behavior == behavior) return;
    double from_qos = 0.0, to_qos = 0.0;
    if (auto o = cfg_.behavior_option(st.active_behavior)) from_qos = o->qos;
    if (auto o = cfg_.behavior_option(behavior)) to_qos = o->qos;
    std::string previous = st.active_behavior;
    st.active_behavior = behavior;
    record(t, component, RecordKind::QosChange,
           {{"from_qos", fmt_qos(from_qos)},
            {"to_qos", fmt_qos(to_qos)},
            {"behavior", behavior}});
    record_action(t, component, "switch_behavior",
                  {{"from", previous}, {"to", behavior}});

    // An application reconfiguration record is emitted when the behavior has
    // a declared contract to switch to.
    const std::string* current = app_state_.contract_of(component);
    if (!current) return;
    auto node = cfg_.mapping.find(component);
    for (const auto& [cid, ct] : cfg_.contracts) {
        if (ct.tag != behavior) continue;
        if (node == cfg_.mapping.end() || ct.subject != node->second) continue;
        auto [next, rec] = apply_app_reconfiguration(app_state_, component, cid, t,
                                                     cfg_.contracts, cfg_.mapping, trigger);
        app_state_ = std::move(next);
        if (rec) {
            summary_.reconfigurations.push_back(*rec);
            record(t, component, RecordKind::Reconfiguration,
                   {{"level", "application"},
                    {"trigger", trigger_name(trigger)},
                    {"from", join(rec->from)},
                    {"to", join(rec->to)}});
        }
        return;
    }
}

void Simulation::adopt_relation_contract(RelationRuntime& rel, const Route& r, SimTime t,
                                         ReconfigurationTrigger trigger) {
    rel.current_route = r;
    rel.current_bound = r.latency * rel.spec.safety_factor;
    ++rel.negotiation_count;
    std::string cid = rel.spec.id + "#" + std::to_string(rel.negotiation_count);
    Contract c = negotiate_link_contract(rel.spec.src, rel.spec.dst, cfg_.platform,
                                         rel.spec.safety_factor, cid);
    negotiated_contracts_.emplace(cid, std::move(c));
    rel.active_contract = cid;
    auto [next, rec] = apply_platform_reconfiguration(platform_state_, rel.spec.id, cid,
                                                      t, trigger);
    platform_state_ = std::move(next);
    if (rec) {
        summary_.reconfigurations.push_back(*rec);
        record(t, rel.spec.id, RecordKind::Reconfiguration,
               {{"level", "platform"},
                {"trigger", trigger_name(trigger)},
                {"from", join(rec->from)},
                {"to", join(rec->to)}});
    }

    // A degraded delivery bound can break the consumer's budget, in which
    // case the platform reconfiguration cascades into an application one.
    // Nothing happens while the active behavior still fits.
    Duration excess = rel.current_bound - rel.initial_bound;
    if (excess <= Duration{0}) return;
    for (const auto& [cname, node] : cfg_.mapping) {
        if (node != rel.spec.dst) continue;
        auto bit = cfg_.component_budgets.find(cname);
        if (bit == cfg_.component_budgets.end()) continue;
        Duration effective = bit->second - excess;
        if (effective < Duration{0}) effective = Duration{0};
        auto cit = components_.find(cname);
        if (cit == components_.end()) continue;
        auto active = cfg_.behavior_option(cit->second.active_behavior);
        if (active && active->ec + active->cc <= effective) continue;
        auto sel = select_behavior(cfg_.behavior_options_of(cname), effective);
        if (!sel) {
            std::string report = "infeasible: component " + cname +
                                 " has no behavior within " + format_duration(effective);
            summary_.infeasible_reports.push_back(report);
            record_action(t, cname, "escalate_infeasible", {{"report", report}});
        } else if (*sel != cit->second.active_behavior) {
            switch_component_behavior(cname, *sel, t,
                                      ReconfigurationTrigger::Renegotiation);
        }
    }
}

// ---------------------------------------------------------------------------
// Helpers

std::optional<Route> Simulation::route_between_nodes(const std::string& src,
                                                     const std::string& dst) const {
    return route(cfg_.platform, src, dst, any_up);
}

Simulation::RelationRuntime* Simulation::relation_for_nodes(const std::string& a,
                                                            const std::string& b) {
    for (auto& [id, rel] : relations_) {
        if ((rel.spec.src == a && rel.spec.dst == b) ||
            (rel.spec.src == b && rel.spec.dst == a))
            return &rel;
    }
    return nullptr;
}

void Simulation::record(SimTime t, const std::string& entity, RecordKind kind,
                        std::vector<std::pair<std::string, std::string>> fields) {
    trace_.append({t, entity, kind, std::move(fields)});
}

void Simulation::record_action(SimTime t, const std::string& entity,
                               const std::string& action,
                               std::vector<std::pair<std::string, std::string>> extra) {
    std::vector<std::pair<std::string, std::string>> fields;
    fields.push_back({"action", action});
    for (auto& f : extra) fields.push_back(std::move(f));
    record(t, entity, RecordKind::Action, std::move(fields));
}

}  // namespace cresim
