#include "cresim/observers.hpp"

#include <algorithm>

namespace cresim {

namespace {

TimedAutomaton base_automaton() {
    TimedAutomaton ta;
    ta.initial = "idle";
    return ta;
}

void require_positive(Duration d, const char* what) {
    if (d.micros <= 0)
        throw IllFormedTemplate(std::string(what) + " must be positive");
}

}  // namespace

TimedAutomaton deadline_template(Duration deadline) {
    require_positive(deadline, "deadline");
    TimedAutomaton ta = base_automaton();
    ta.locations = {"idle", "await", "fault_deadline"};
    ta.fault_locations = {"fault_deadline"};
    ta.clocks = {"x"};
    ta.edges = {
        {"idle", "await", Trigger::InputArrival, {}, {"x"}},
        {"await", "await", Trigger::InputArrival, {}, {"x"}},
        {"await", "idle", Trigger::OutputProduced, {{"x", true, deadline}}, {}},
        {"await", "fault_deadline", Trigger::OutputProduced, {{"x", false, deadline}}, {}},
    };
    ta.invariants["await"] = {{"x", deadline}};
    ta.pattern = DeadlinePattern{deadline};
    return ta;
}

TimedAutomaton periodic_template(Duration period) {
    require_positive(period, "period");
    TimedAutomaton ta = base_automaton();
    ta.locations = {"idle", "active", "fault_period"};
    ta.fault_locations = {"fault_period"};
    ta.clocks = {"y"};
    ta.edges = {
        {"idle", "active", Trigger::InputArrival, {}, {"y"}},
        {"active", "active", Trigger::InputArrival, {{"y", true, period}}, {"y"}},
        {"active", "fault_period", Trigger::InputArrival, {{"y", false, period}}, {}},
    };
    ta.invariants["active"] = {{"y", period}};
    ta.pattern = PeriodicPattern{period};
    return ta;
}

TimedAutomaton deadline_periodic_template(Duration deadline, Duration period) {
    require_positive(deadline, "deadline");
    require_positive(period, "period");
    if (deadline > period)
        throw IllFormedTemplate("deadline " + format_duration(deadline) +
                                " exceeds period " + format_duration(period));
    TimedAutomaton ta = base_automaton();
    ta.locations = {"idle", "await", "idle_armed", "fault_deadline", "fault_period"};
    ta.fault_locations = {"fault_deadline", "fault_period"};
    ta.clocks = {"x", "y"};
    ta.edges = {
        {"idle", "await", Trigger::InputArrival, {}, {"x", "y"}},
        {"await", "await", Trigger::InputArrival, {{"y", true, period}}, {"x", "y"}},
        {"await", "fault_period", Trigger::InputArrival, {{"y", false, period}}, {}},
        {"await", "idle_armed", Trigger::OutputProduced, {{"x", true, deadline}}, {}},
        {"await", "fault_deadline", Trigger::OutputProduced, {{"x", false, deadline}}, {}},
        {"idle_armed", "await", Trigger::InputArrival, {{"y", true, period}}, {"x", "y"}},
        {"idle_armed", "fault_period", Trigger::InputArrival, {{"y", false, period}}, {}},
    };
    ta.invariants["await"] = {{"x", deadline}, {"y", period}};
    ta.invariants["idle_armed"] = {{"y", period}};
    ta.pattern = DeadlinePeriodicPattern{deadline, period};
    return ta;
}

TimedAutomaton heartbeat_template(Duration period, int miss_threshold) {
    require_positive(period, "period");
    if (miss_threshold < 1)
        throw IllFormedTemplate("miss_threshold must be >= 1");
    Duration bound = period * miss_threshold;
    TimedAutomaton ta = base_automaton();
    ta.locations = {"idle", "alive", "fault_heartbeat"};
    ta.fault_locations = {"fault_heartbeat"};
    ta.clocks = {"z"};
    ta.edges = {
        {"idle", "alive", Trigger::HeartbeatReceived, {}, {"z"}},
        {"alive", "alive", Trigger::HeartbeatReceived, {{"z", true, bound}}, {"z"}},
        {"alive", "fault_heartbeat", Trigger::HeartbeatReceived, {{"z", false, bound}}, {}},
    };
    ta.invariants["alive"] = {{"z", bound}};
    ta.pattern = HeartbeatPattern{period, miss_threshold};
    return ta;
}

std::vector<std::string> validate_automaton(const TimedAutomaton& ta) {
    std::vector<std::string> defects;
    auto known = [&](const std::string& loc) {
        return std::find(ta.locations.begin(), ta.locations.end(), loc) !=
               ta.locations.end();
    };
    if (!known(ta.initial)) defects.push_back("initial location missing");
    if (ta.fault_locations.empty()) defects.push_back("no fault location");
    for (const auto& f : ta.fault_locations)
        if (!known(f)) defects.push_back("unknown fault location " + f);
    for (const auto& e : ta.edges) {
        if (!known(e.source) || !known(e.target))
            defects.push_back("edge with unknown location");
        // Fault locations are sinks.
        if (std::find(ta.fault_locations.begin(), ta.fault_locations.end(), e.source) !=
            ta.fault_locations.end())
            defects.push_back("outgoing edge from fault location " + e.source);
        for (const auto& g : e.guards) {
            if (g.bound.micros < 0) defects.push_back("negative guard constant");
            if (std::find(ta.clocks.begin(), ta.clocks.end(), g.clock) == ta.clocks.end())
                defects.push_back("guard on unknown clock " + g.clock);
        }
        for (const auto& r : e.resets)
            if (std::find(ta.clocks.begin(), ta.clocks.end(), r) == ta.clocks.end())
                defects.push_back("reset of unknown clock " + r);
    }
    for (const auto& [loc, invs] : ta.invariants) {
        if (!known(loc)) defects.push_back("invariant on unknown location " + loc);
        for (const auto& inv : invs)
            if (inv.bound.micros < 0) defects.push_back("negative invariant bound");
    }
    // Determinism: at most one guard-free edge per (location, trigger); guarded
    // pairs must partition on a single clock bound.
    for (std::size_t i = 0; i < ta.edges.size(); ++i) {
        for (std::size_t j = i + 1; j < ta.edges.size(); ++j) {
            const auto& a = ta.edges[i];
            const auto& b = ta.edges[j];
            if (a.source == b.source && a.trigger == b.trigger) {
                bool partitioned = !a.guards.empty() && !b.guards.empty() &&
                                   a.guards[0].clock == b.guards[0].clock &&
                                   a.guards[0].upper != b.guards[0].upper;
                if (!partitioned)
                    defects.push_back("nondeterministic edges from " + a.source);
            }
        }
    }
    return defects;
}

ObserverInstance::ObserverInstance(std::string id, TimedAutomaton automaton,
                                   std::string host, std::string contract_id)
    : id_(std::move(id)),
      automaton_(std::move(automaton)),
      host_(std::move(host)),
      contract_id_(std::move(contract_id)) {}

std::optional<std::pair<SimTime, ViolationKind>> ObserverInstance::earliest_bound() const {
    std::optional<std::pair<SimTime, ViolationKind>> best;
    auto consider = [&](SimTime t, ViolationKind k) {
        if (!best || t < best->first ||
            (t == best->first && k == ViolationKind::DeadlineMiss))
            best = {t, k};
    };
    if (const auto* d = std::get_if<DeadlinePattern>(&automaton_.pattern)) {
        if (!pending_inputs_.empty())
            consider(pending_inputs_.front() + d->deadline, ViolationKind::DeadlineMiss);
    } else if (const auto* p = std::get_if<PeriodicPattern>(&automaton_.pattern)) {
        if (last_input_) consider(*last_input_ + p->period, ViolationKind::PeriodMiss);
    } else if (const auto* dp = std::get_if<DeadlinePeriodicPattern>(&automaton_.pattern)) {
        if (!pending_inputs_.empty())
            consider(pending_inputs_.front() + dp->deadline, ViolationKind::DeadlineMiss);
        if (last_input_) consider(*last_input_ + dp->period, ViolationKind::PeriodMiss);
    } else {
        const auto& hb = std::get<HeartbeatPattern>(automaton_.pattern);
        std::optional<SimTime> anchor = last_heartbeat_;
        if (epoch_ && (!anchor || *epoch_ > *anchor)) anchor = epoch_;
        if (anchor)
            consider(*anchor + hb.period * hb.miss_threshold, ViolationKind::HeartbeatLoss);
    }
    return best;
}

std::optional<SimTime> ObserverInstance::next_bound() const {
    if (violation_ || paused_) return std::nullopt;
    auto b = earliest_bound();
    if (!b) return std::nullopt;
    return b->first;
}

std::optional<Violation> ObserverInstance::latch(ViolationKind kind, SimTime at) {
    Violation v;
    v.observer_id = id_;
    v.kind = kind;
    v.time = at;
    v.contract_id = contract_id_;
    violation_ = v;
    return v;
}

std::optional<Violation> ObserverInstance::observe(const ObserverEvent& ev) {
    if (violation_ || paused_) return std::nullopt;  // latched / suspended

    // Any bound strictly crossed before this event fires first.
    if (auto b = earliest_bound(); b && b->first < ev.time)
        return latch(b->second, b->first);

    switch (ev.trigger) {
        case Trigger::InputArrival: {
            if (const auto* p = std::get_if<PeriodicPattern>(&automaton_.pattern)) {
                if (last_input_ && ev.time - *last_input_ > p->period)
                    return latch(ViolationKind::PeriodMiss, *last_input_ + p->period);
                last_input_ = ev.time;
            } else if (const auto* dp =
                           std::get_if<DeadlinePeriodicPattern>(&automaton_.pattern)) {
                if (last_input_ && ev.time - *last_input_ > dp->period)
                    return latch(ViolationKind::PeriodMiss, *last_input_ + dp->period);
                last_input_ = ev.time;
                pending_inputs_.push_back(ev.time);
            } else if (std::holds_alternative<DeadlinePattern>(automaton_.pattern)) {
                pending_inputs_.push_back(ev.time);
            } else {
                throw UnboundTrigger("observer " + id_ + ": input trigger unbound");
            }
            break;
        }
        case Trigger::OutputProduced: {
            const bool deadline_kind =
                std::holds_alternative<DeadlinePattern>(automaton_.pattern) ||
                std::holds_alternative<DeadlinePeriodicPattern>(automaton_.pattern);
            if (!deadline_kind)
                throw UnboundTrigger("observer " + id_ + ": output trigger unbound");
            if (!pending_inputs_.empty()) {
                SimTime in = pending_inputs_.front();
                pending_inputs_.pop_front();
                Duration d = std::holds_alternative<DeadlinePattern>(automaton_.pattern)
                                 ? std::get<DeadlinePattern>(automaton_.pattern).deadline
                                 : std::get<DeadlinePeriodicPattern>(automaton_.pattern)
                                       .deadline;
                // Closed bound: an output exactly at the deadline is accepted.
                if (ev.time - in > d)
                    return latch(ViolationKind::DeadlineMiss, in + d);
            }
            break;
        }
        case Trigger::HeartbeatReceived: {
            const auto* hb = std::get_if<HeartbeatPattern>(&automaton_.pattern);
            if (!hb)
                throw UnboundTrigger("observer " + id_ + ": heartbeat trigger unbound");
            SimTime origin = ev.origin.value_or(ev.time);
            std::optional<SimTime> anchor = last_heartbeat_;
            if (epoch_ && (!anchor || *epoch_ > *anchor)) anchor = epoch_;
            Duration bound = hb->period * hb->miss_threshold;
            if (anchor && origin - *anchor > bound)
                return latch(ViolationKind::HeartbeatLoss, *anchor + bound);
            if (!last_heartbeat_ || origin > *last_heartbeat_) last_heartbeat_ = origin;
            break;
        }
    }
    ++generation_;
    return std::nullopt;
}

std::optional<Violation> ObserverInstance::advance_to(SimTime t) {
    if (violation_ || paused_) return std::nullopt;
    if (auto b = earliest_bound(); b && b->first <= t)
        return latch(b->second, b->first);
    return std::nullopt;
}

std::optional<Violation> ObserverInstance::finalize() {
    if (violation_ || paused_) return std::nullopt;
    Duration d;
    if (const auto* dl = std::get_if<DeadlinePattern>(&automaton_.pattern)) d = dl->deadline;
    else if (const auto* dp = std::get_if<DeadlinePeriodicPattern>(&automaton_.pattern))
        d = dp->deadline;
    else return std::nullopt;
    if (!pending_inputs_.empty())
        return latch(ViolationKind::DeadlineMiss, pending_inputs_.front() + d);
    return std::nullopt;
}

void ObserverInstance::reset(SimTime at) {
    pending_inputs_.clear();
    last_input_.reset();
    last_heartbeat_.reset();
    epoch_ = at;
    violation_.reset();
    paused_ = false;
    ++generation_;
}

}  // namespace cresim
