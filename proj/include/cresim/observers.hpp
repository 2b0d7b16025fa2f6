#pragma once

#include <deque>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "cresim/contracts.hpp"
#include "cresim/time.hpp"

namespace cresim {

// Restricted timed-automata dialect: one initial location, designated sink
// fault locations, upper-bound invariants with nonnegative integer constants,
// at most one edge per (location, trigger).
enum class Trigger { InputArrival, OutputProduced, HeartbeatReceived };

struct ClockGuard {
    std::string clock;
    bool upper = true;  // clock <= bound when true, clock >= bound otherwise
    Duration bound;
};

struct TaEdge {
    std::string source;
    std::string target;
    Trigger trigger;
    std::vector<ClockGuard> guards;
    std::vector<std::string> resets;
};

struct TaInvariant {
    std::string clock;
    Duration bound;  // clock <= bound must hold in the location
};

// Observer pattern the automaton was instantiated from. The instance
// interpreter dispatches on this; the location/edge structure documents the
// template shape and is validated for well-formedness.
struct DeadlinePattern { Duration deadline; };
struct PeriodicPattern { Duration period; };
struct DeadlinePeriodicPattern { Duration deadline; Duration period; };
struct HeartbeatPattern { Duration period; int miss_threshold; };
using ObserverPattern = std::variant<DeadlinePattern, PeriodicPattern,
                                     DeadlinePeriodicPattern, HeartbeatPattern>;

struct TimedAutomaton {
    std::vector<std::string> locations;
    std::string initial;
    std::vector<std::string> fault_locations;
    std::vector<std::string> clocks;
    std::vector<TaEdge> edges;
    std::map<std::string, std::vector<TaInvariant>> invariants;
    ObserverPattern pattern;
};

struct IllFormedTemplate : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct UnboundTrigger : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Canonical observer template constructors.
TimedAutomaton deadline_template(Duration deadline);
TimedAutomaton periodic_template(Duration period);
TimedAutomaton deadline_periodic_template(Duration deadline, Duration period);
TimedAutomaton heartbeat_template(Duration period, int miss_threshold);

// Structural well-formedness of the restricted dialect.
std::vector<std::string> validate_automaton(const TimedAutomaton& ta);

struct Violation {
    std::string observer_id;
    ViolationKind kind = ViolationKind::DeadlineMiss;
    SimTime time;  // the exact bound-crossing instant
    std::string contract_id;
};

struct ObserverEvent {
    Trigger trigger;
    SimTime time;
    // For heartbeats: the emission instant at the sender. The liveness clock
    // measures from emission, not receipt, so link latency does not shift the
    // miss threshold.
    std::optional<SimTime> origin;
};

// Online monitor instance. Deadline instances are tracked as a FIFO of
// outstanding input times (one deadline clock per in-flight instance), which
// keeps the online verdicts aligned with the offline trace checker when
// instances overlap. Once violated the status latches until reset().
class ObserverInstance {
public:
    ObserverInstance() = default;
    ObserverInstance(std::string id, TimedAutomaton automaton,
                     std::string host, std::string contract_id);

    const std::string& id() const { return id_; }
    const std::string& host() const { return host_; }
    const std::string& contract_id() const { return contract_id_; }
    const TimedAutomaton& automaton() const { return automaton_; }

    bool violated() const { return violation_.has_value(); }
    const std::optional<Violation>& violation() const { return violation_; }

    bool paused() const { return paused_; }
    void set_paused(bool p) { paused_ = p; }

    // Bumped on every reset/discharge; lets the host invalidate stale
    // bound-expiry timers scheduled against an earlier observer state.
    std::uint64_t generation() const { return generation_; }

    // Earliest pending bound-crossing instant, if any clock is running.
    std::optional<SimTime> next_bound() const;

    // Feeds one bound trigger occurring at ev.time. Clocks advance first;
    // a bound crossed strictly before the event, or at the event without the
    // event discharging that bound, latches a violation timestamped at the
    // bound.
    std::optional<Violation> observe(const ObserverEvent& ev);

    // Pure time advance (bound-expiry timer): any bound <= t fires.
    std::optional<Violation> advance_to(SimTime t);

    // End-of-observation: resolves outstanding deadline instances (an input
    // with no output is a miss at input + deadline) without advancing the
    // recurrence clocks, matching check_trace end-of-trace semantics.
    std::optional<Violation> finalize();

    void reset(SimTime at);

private:
    std::optional<Violation> latch(ViolationKind kind, SimTime at);
    // Earliest bound among pending clocks; kind tie broken deadline-first.
    std::optional<std::pair<SimTime, ViolationKind>> earliest_bound() const;

    std::string id_;
    TimedAutomaton automaton_;
    std::string host_;
    std::string contract_id_;

    std::deque<SimTime> pending_inputs_;       // deadline instances in flight
    std::optional<SimTime> last_input_;        // recurrence clock anchor
    std::optional<SimTime> last_heartbeat_;    // liveness clock anchor
    std::optional<SimTime> epoch_;             // reset instant (heartbeat baseline)
    std::optional<Violation> violation_;
    bool paused_ = false;
    std::uint64_t generation_ = 0;
};

}  // namespace cresim
