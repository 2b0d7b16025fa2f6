#include "cresim/contracts.hpp"

#include <algorithm>
#include <limits>
#include <map>
#include <set>

namespace cresim {

const char* to_string(ViolationKind k) {
    switch (k) {
        case ViolationKind::DeadlineMiss: return "DeadlineMiss";
        case ViolationKind::PeriodMiss: return "PeriodMiss";
        case ViolationKind::HeartbeatLoss: return "HeartbeatLoss";
    }
    return "?";
}

namespace {

void merge_ports(std::vector<Port>& into, const std::vector<Port>& from) {
    for (const auto& p : from) {
        auto it = std::find_if(into.begin(), into.end(),
                               [&](const Port& q) { return q.name == p.name; });
        if (it == into.end()) into.push_back(p);
    }
}

}  // namespace

Contract compose(const Contract& a, const Contract& b) {
    if (a.subject != b.subject) {
        throw ComposeError(ComposeError::Kind::SubjectMismatch,
                           "compose: subjects " + a.subject + " vs " + b.subject);
    }
    Contract out;
    out.id = a.id + "+" + b.id;
    out.subject = a.subject;
    out.tag = a.tag.empty() ? b.tag : a.tag;
    out.inputs = a.inputs;
    merge_ports(out.inputs, b.inputs);
    out.outputs = a.outputs;
    merge_ports(out.outputs, b.outputs);
    out.assumptions = a.assumptions;
    out.assumptions.insert(out.assumptions.end(), b.assumptions.begin(),
                           b.assumptions.end());

    // Same output port must carry the same pass-through relation.
    auto relation_of = [](const Contract& c, const std::string& output)
        -> std::optional<std::string> {
        for (const auto& g : c.guarantees)
            if (g.output == output) return g.input;
        return std::nullopt;
    };
    for (const auto& g : b.guarantees) {
        auto rel = relation_of(a, g.output);
        if (rel && *rel != g.input) {
            throw ComposeError(ComposeError::Kind::ConflictingGuarantee,
                               "compose: output " + g.output +
                                   " bound to both " + *rel + " and " + g.input);
        }
    }

    out.guarantees = a.guarantees;
    for (const auto& g : b.guarantees) {
        // A Within and an Every over the same I/O pair merge into WithinEvery.
        auto it = std::find_if(
            out.guarantees.begin(), out.guarantees.end(), [&](const TimedGuarantee& h) {
                if (h.output != g.output || h.input != g.input) return false;
                bool hw = std::holds_alternative<Within>(h.pattern);
                bool he = std::holds_alternative<Every>(h.pattern);
                bool gw = std::holds_alternative<Within>(g.pattern);
                bool ge = std::holds_alternative<Every>(g.pattern);
                return (hw && ge) || (he && gw);
            });
        if (it != out.guarantees.end()) {
            Duration d = std::holds_alternative<Within>(it->pattern)
                             ? std::get<Within>(it->pattern).deadline
                             : std::get<Within>(g.pattern).deadline;
            Duration p = std::holds_alternative<Every>(it->pattern)
                             ? std::get<Every>(it->pattern).period
                             : std::get<Every>(g.pattern).period;
            if (d > p) {
                throw ComposeError(ComposeError::Kind::IllFormedMerge,
                                   "compose: merged deadline " + format_duration(d) +
                                       " exceeds period " + format_duration(p));
            }
            it->pattern = WithinEvery{d, p};
        } else {
            out.guarantees.push_back(g);
        }
    }
    return out;
}

DecompositionResult validate_decomposition(const BudgetSet& b) {
    std::int64_t sum = b.t_s1_c1.micros + b.t_c1_c3.micros + b.t_c3_c4.micros +
                       b.t_c4_a1.micros;
    if (sum <= b.delta_s1_a1.micros) return {true, Duration{0}};
    return {false, Duration{sum - b.delta_s1_a1.micros}};
}

namespace {

struct PendingViolation {
    SimTime time;
    ViolationKind kind;
};

// Earliest wins; deadline misses win ties against period misses.
void consider(std::optional<PendingViolation>& best, SimTime t, ViolationKind k) {
    if (!best || t < best->time ||
        (t == best->time && k == ViolationKind::DeadlineMiss &&
         best->kind != ViolationKind::DeadlineMiss)) {
        best = PendingViolation{t, k};
    }
}

std::optional<PendingViolation> check_within(const TimedGuarantee& g, Duration deadline,
                                             const std::vector<PortEvent>& trace) {
    // FIFO matching in chronological order: an output discharges the oldest
    // pending input; an output with nothing pending is ignored. An input not
    // discharged within the deadline is a miss at input + deadline.
    std::optional<PendingViolation> best;
    std::vector<SimTime> pending;
    std::size_t head = 0;
    for (const auto& ev : trace) {
        if (ev.port == g.input) {
            pending.push_back(ev.time);
        } else if (ev.port == g.output && head < pending.size()) {
            SimTime in = pending[head++];
            if (ev.time - in > deadline) {
                consider(best, in + deadline, ViolationKind::DeadlineMiss);
                break;
            }
        }
    }
    if (!best && head < pending.size())
        consider(best, pending[head] + deadline, ViolationKind::DeadlineMiss);
    return best;
}

std::optional<PendingViolation> check_every(const TimedGuarantee& g, Duration period,
                                            const std::vector<PortEvent>& trace) {
    std::optional<PendingViolation> best;
    std::optional<SimTime> prev;
    for (const auto& ev : trace) {
        if (ev.port != g.input) continue;
        if (prev && ev.time - *prev > period) {
            consider(best, *prev + period, ViolationKind::PeriodMiss);
            break;
        }
        prev = ev.time;
    }
    return best;
}

}  // namespace

std::vector<TraceVerdict> check_trace(const Contract& c,
                                      const std::vector<PortEvent>& trace) {
    std::set<std::string> known;
    for (const auto& p : c.inputs) known.insert(p.name);
    for (const auto& p : c.outputs) known.insert(p.name);
    for (const auto& ev : trace) {
        if (!known.count(ev.port))
            throw UnknownPortError("check_trace: unknown port '" + ev.port + "'");
    }

    std::vector<TraceVerdict> verdicts;
    for (std::size_t i = 0; i < c.guarantees.size(); ++i) {
        const auto& g = c.guarantees[i];
        std::optional<PendingViolation> best;
        if (const auto* w = std::get_if<Within>(&g.pattern)) {
            best = check_within(g, w->deadline, trace);
        } else if (const auto* e = std::get_if<Every>(&g.pattern)) {
            best = check_every(g, e->period, trace);
        } else {
            const auto& we = std::get<WithinEvery>(g.pattern);
            auto a = check_within(g, we.deadline, trace);
            auto b = check_every(g, we.period, trace);
            if (a) consider(best, a->time, a->kind);
            if (b) consider(best, b->time, b->kind);
        }
        TraceVerdict v;
        v.guarantee_index = i;
        if (best) {
            v.violated = true;
            v.violation_time = best->time;
            v.kind = best->kind;
        }
        verdicts.push_back(v);
    }
    return verdicts;
}

}  // namespace cresim
