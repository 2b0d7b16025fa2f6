#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <set>
#include <string>

#include "cresim/time.hpp"

namespace cresim {

using EventId = std::uint64_t;

// Tie-break classes for events at equal time. Data-delivery events order
// before timer expiries so an output arriving exactly at a deadline is
// accepted; fault injections order last.
enum class PriorityClass : int { Data = 0, Timer = 1, Fault = 2 };

struct Event {
    SimTime time;
    PriorityClass cls = PriorityClass::Timer;
    EventId seq = 0;
    std::string target;
    std::uint64_t payload = 0;  // opaque handle owned by the scheduler's client

    // Total order: (time, class, seq) lexicographic.
    bool operator<(const Event& o) const {
        if (time != o.time) return time < o.time;
        if (cls != o.cls) return static_cast<int>(cls) < static_cast<int>(o.cls);
        return seq < o.seq;
    }
};

// Deterministic single-threaded discrete-event core. One engine per scenario
// run; state may be moved between threads but never shared mutably.
class Engine {
public:
    using Sink = std::function<void(const Event&)>;

    SimTime now() const { return now_; }
    bool halted() const { return halted_; }
    void halt() { halted_ = true; }
    std::size_t pending() const { return queue_.size(); }

    // Enqueues an event at now + delay with a fresh sequence number.
    EventId schedule(Duration delay, PriorityClass cls, std::string target,
                     std::uint64_t payload = 0);

    // Returns whether the event was still pending.
    bool cancel(EventId id);

    // Processes every event with time <= t in total order; afterwards
    // now == t. Returns the number of events processed. The sink may
    // schedule and cancel further events.
    std::size_t run_until(SimTime t, const Sink& sink);

private:
    SimTime now_;
    std::set<Event> queue_;
    std::map<EventId, std::set<Event>::iterator> by_id_;
    EventId next_seq_ = 1;
    bool halted_ = false;
};

}  // namespace cresim
