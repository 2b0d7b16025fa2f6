#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <string>
#include <vector>

#include "cresim/engine.hpp"

using namespace cresim;

namespace {

std::vector<std::string> drain(Engine& e, SimTime until) {
    std::vector<std::string> order;
    e.run_until(until, [&](const Event& ev) { order.push_back(ev.target); });
    return order;
}

}  // namespace

TEST_CASE("events fire in time order and the clock is additive") {
    Engine e;
    e.schedule(SimTime::from_millis(30), PriorityClass::Timer, "c");
    e.schedule(SimTime::from_millis(10), PriorityClass::Timer, "a");
    e.schedule(SimTime::from_millis(20), PriorityClass::Timer, "b");
    std::vector<std::pair<std::string, std::int64_t>> seen;
    e.run_until(SimTime::from_millis(100), [&](const Event& ev) {
        seen.push_back({ev.target, e.now().micros});
    });
    REQUIRE(seen.size() == 3);
    CHECK(seen[0] == std::pair<std::string, std::int64_t>{"a", 10'000});
    CHECK(seen[1] == std::pair<std::string, std::int64_t>{"b", 20'000});
    CHECK(seen[2] == std::pair<std::string, std::int64_t>{"c", 30'000});
    CHECK(e.now() == SimTime::from_millis(100));
}

TEST_CASE("delays compose from the current instant, not absolute zero") {
    Engine e;
    std::vector<std::int64_t> fired;
    e.schedule(SimTime::from_millis(10), PriorityClass::Timer, "outer");
    e.run_until(SimTime::from_millis(100), [&](const Event& ev) {
        fired.push_back(e.now().micros);
        if (ev.target == "outer")
            e.schedule(SimTime::from_millis(5), PriorityClass::Timer, "inner");
    });
    REQUIRE(fired.size() == 2);
    CHECK(fired[1] == 15'000);
}

TEST_CASE("equal-time events of one class keep FIFO scheduling order") {
    Engine e;
    for (const char* name : {"first", "second", "third"})
        e.schedule(SimTime::from_millis(5), PriorityClass::Timer, name);
    CHECK(drain(e, SimTime::from_millis(5)) ==
          std::vector<std::string>{"first", "second", "third"});
}

TEST_CASE("at equal time, data orders before timers and faults come last") {
    Engine e;
    e.schedule(SimTime::from_millis(5), PriorityClass::Fault, "fault");
    e.schedule(SimTime::from_millis(5), PriorityClass::Timer, "timer");
    e.schedule(SimTime::from_millis(5), PriorityClass::Data, "data");
    CHECK(drain(e, SimTime::from_millis(5)) ==
          std::vector<std::string>{"data", "timer", "fault"});
}

TEST_CASE("cancel removes a pending event; cancelling twice reports false") {
    Engine e;
    EventId id = e.schedule(SimTime::from_millis(5), PriorityClass::Timer, "x");
    CHECK(e.pending() == 1);
    CHECK(e.cancel(id));
    CHECK_FALSE(e.cancel(id));
    CHECK(e.pending() == 0);
    CHECK(drain(e, SimTime::from_millis(10)).empty());
}

TEST_CASE("cancelling a fired event reports false") {
    Engine e;
    EventId id = e.schedule(SimTime::from_millis(5), PriorityClass::Timer, "x");
    CHECK(drain(e, SimTime::from_millis(10)).size() == 1);
    CHECK_FALSE(e.cancel(id));
}

TEST_CASE("run_until processes events at exactly t and returns the count") {
    Engine e;
    e.schedule(SimTime::from_millis(5), PriorityClass::Timer, "at");
    e.schedule(SimTime::from_millis(6), PriorityClass::Timer, "after");
    std::size_t n = e.run_until(SimTime::from_millis(5), [](const Event&) {});
    CHECK(n == 1);
    CHECK(e.pending() == 1);
    CHECK(e.now() == SimTime::from_millis(5));
}

TEST_CASE("halt stops processing mid-run") {
    Engine e;
    e.schedule(SimTime::from_millis(1), PriorityClass::Timer, "a");
    e.schedule(SimTime::from_millis(2), PriorityClass::Timer, "b");
    std::vector<std::string> seen;
    e.run_until(SimTime::from_millis(10), [&](const Event& ev) {
        seen.push_back(ev.target);
        e.halt();
    });
    CHECK(seen == std::vector<std::string>{"a"});
    CHECK(e.halted());
}

TEST_CASE("identical schedules replay identically") {
    auto run = [] {
        Engine e;
        e.schedule(SimTime::from_millis(3), PriorityClass::Data, "d");
        e.schedule(SimTime::from_millis(3), PriorityClass::Timer, "t1");
        e.schedule(SimTime::from_millis(1), PriorityClass::Timer, "t0");
        e.schedule(SimTime::from_millis(3), PriorityClass::Fault, "f");
        return drain(e, SimTime::from_millis(5));
    };
    CHECK(run() == run());
}
