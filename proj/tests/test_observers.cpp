#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "cresim/observers.hpp"

using namespace cresim;

namespace {

ObserverInstance deadline_obs(Duration d) {
    return ObserverInstance("obs", deadline_template(d), "n3", "C");
}
ObserverInstance periodic_obs(Duration p) {
    return ObserverInstance("obs", periodic_template(p), "n3", "C");
}
ObserverInstance combined_obs(Duration d, Duration p) {
    return ObserverInstance("obs", deadline_periodic_template(d, p), "n3", "C");
}
ObserverInstance heartbeat_obs(Duration p, int k) {
    return ObserverInstance("obs", heartbeat_template(p, k), "n3", "C");
}

ObserverEvent input(std::int64_t ms) {
    return {Trigger::InputArrival, SimTime::from_millis(ms), std::nullopt};
}
ObserverEvent output(std::int64_t ms) {
    return {Trigger::OutputProduced, SimTime::from_millis(ms), std::nullopt};
}
ObserverEvent beat(std::int64_t origin_ms, std::int64_t arrive_ms) {
    return {Trigger::HeartbeatReceived, SimTime::from_millis(arrive_ms),
            SimTime::from_millis(origin_ms)};
}

}  // namespace

TEST_CASE("template constructors reject ill-formed parameters") {
    CHECK_THROWS_AS(deadline_template(Duration{0}), IllFormedTemplate);
    CHECK_THROWS_AS(periodic_template(Duration{-1}), IllFormedTemplate);
    CHECK_THROWS_AS(heartbeat_template(SimTime::from_millis(200), 0), IllFormedTemplate);
    // A combined observer whose deadline exceeds its recurrence period can
    // never be satisfied by any run and is rejected at construction.
    CHECK_THROWS_AS(
        deadline_periodic_template(SimTime::from_seconds(1), SimTime::from_millis(500)),
        IllFormedTemplate);
}

TEST_CASE("generated templates pass structural validation") {
    CHECK(validate_automaton(deadline_template(SimTime::from_seconds(1))).empty());
    CHECK(validate_automaton(periodic_template(SimTime::from_millis(500))).empty());
    CHECK(validate_automaton(
              deadline_periodic_template(SimTime::from_millis(300), SimTime::from_millis(500)))
              .empty());
    CHECK(validate_automaton(heartbeat_template(SimTime::from_millis(200), 3)).empty());
}

TEST_CASE("validate_automaton flags dialect violations") {
    TimedAutomaton ta = deadline_template(SimTime::from_seconds(1));
    SUBCASE("unknown initial location") {
        ta.initial = "nowhere";
        CHECK_FALSE(validate_automaton(ta).empty());
    }
    SUBCASE("missing fault location") {
        ta.fault_locations.clear();
        CHECK_FALSE(validate_automaton(ta).empty());
    }
    SUBCASE("edge out of a fault location") {
        ta.edges.push_back({"fault_deadline", "idle", Trigger::InputArrival, {}, {}});
        CHECK_FALSE(validate_automaton(ta).empty());
    }
    SUBCASE("guard on an undeclared clock") {
        ta.edges[0].guards.push_back({"ghost", true, SimTime::from_seconds(1)});
        CHECK_FALSE(validate_automaton(ta).empty());
    }
    SUBCASE("nondeterministic edge pair") {
        ta.edges.push_back({"idle", "idle", Trigger::InputArrival, {}, {}});
        CHECK_FALSE(validate_automaton(ta).empty());
    }
}

TEST_CASE("deadline observer: output within the bound keeps it clean") {
    auto o = deadline_obs(SimTime::from_seconds(1));
    CHECK_FALSE(o.observe(input(0)));
    CHECK_FALSE(o.observe(output(800)));
    CHECK_FALSE(o.violated());
}

TEST_CASE("deadline observer: output exactly at the bound is accepted") {
    auto o = deadline_obs(SimTime::from_seconds(1));
    o.observe(input(0));
    CHECK_FALSE(o.observe(output(1000)));
    CHECK_FALSE(o.violated());
}

TEST_CASE("deadline observer: a late output latches a miss at the bound") {
    auto o = deadline_obs(SimTime::from_seconds(1));
    o.observe(input(0));
    auto v = o.observe(output(1001));
    REQUIRE(v);
    CHECK(v->kind == ViolationKind::DeadlineMiss);
    CHECK(v->time == SimTime::from_seconds(1));
}

TEST_CASE("deadline observer: a bound-expiry timer fires the miss with no output") {
    auto o = deadline_obs(SimTime::from_seconds(1));
    o.observe(input(0));
    REQUIRE(o.next_bound());
    CHECK(*o.next_bound() == SimTime::from_seconds(1));
    CHECK_FALSE(o.advance_to(SimTime::from_millis(999)));
    auto v = o.advance_to(SimTime::from_seconds(1));
    REQUIRE(v);
    CHECK(v->time == SimTime::from_seconds(1));
    CHECK(v->kind == ViolationKind::DeadlineMiss);
}

TEST_CASE("deadline observer: violation time stays the bound under a late advance") {
    auto o = deadline_obs(SimTime::from_seconds(1));
    o.observe(input(0));
    auto v = o.advance_to(SimTime::from_seconds(40));
    REQUIRE(v);
    CHECK(v->time == SimTime::from_seconds(1));
}

TEST_CASE("deadline observer: overlapping instances are tracked FIFO") {
    auto o = deadline_obs(SimTime::from_millis(400));
    o.observe(input(0));
    o.observe(input(100));
    CHECK_FALSE(o.observe(output(300)));
    CHECK_FALSE(o.observe(output(450)));
    CHECK_FALSE(o.violated());
}

TEST_CASE("deadline observer: finalize resolves a dangling input") {
    auto o = deadline_obs(SimTime::from_seconds(1));
    o.observe(input(5000));
    auto v = o.finalize();
    REQUIRE(v);
    CHECK(v->time == SimTime::from_seconds(6));
}

TEST_CASE("violations latch until reset") {
    auto o = deadline_obs(SimTime::from_millis(100));
    o.observe(input(0));
    REQUIRE(o.advance_to(SimTime::from_millis(100)));
    CHECK(o.violated());
    CHECK_FALSE(o.observe(input(200)));  // latched: later events are ignored
    CHECK(o.violated());
    o.reset(SimTime::from_millis(300));
    CHECK_FALSE(o.violated());
    o.observe(input(300));
    CHECK_FALSE(o.observe(output(350)));
}

TEST_CASE("paused observers ignore events and report no bound") {
    auto o = deadline_obs(SimTime::from_millis(100));
    o.set_paused(true);
    CHECK_FALSE(o.observe(input(0)));
    CHECK_FALSE(o.next_bound());
    CHECK_FALSE(o.advance_to(SimTime::from_seconds(10)));
}

TEST_CASE("generation changes invalidate previously armed bounds") {
    auto o = deadline_obs(SimTime::from_millis(100));
    o.observe(input(0));
    auto gen = o.generation();
    CHECK_FALSE(o.observe(output(50)));
    CHECK(o.generation() != gen);  // the 100ms bound timer is now stale
    CHECK_FALSE(o.next_bound());
}

TEST_CASE("periodic observer: recurring inputs inside the period stay clean") {
    auto o = periodic_obs(SimTime::from_millis(500));
    for (int ms : {0, 500, 1000, 1500}) CHECK_FALSE(o.observe(input(ms)));
    CHECK_FALSE(o.violated());
}

TEST_CASE("periodic observer: a gap beyond the period misses at last + period") {
    auto o = periodic_obs(SimTime::from_millis(500));
    o.observe(input(0));
    o.observe(input(500));
    auto v = o.observe(input(1700));
    REQUIRE(v);
    CHECK(v->kind == ViolationKind::PeriodMiss);
    CHECK(v->time == SimTime::from_millis(1000));
}

TEST_CASE("periodic observer: the period bound is closed") {
    auto o = periodic_obs(SimTime::from_millis(500));
    o.observe(input(0));
    CHECK_FALSE(o.observe(input(500)));
    CHECK_FALSE(o.violated());
}

TEST_CASE("combined observer: period miss surfaces via the bound timer") {
    auto o = combined_obs(SimTime::from_millis(300), SimTime::from_millis(500));
    o.observe(input(0));
    o.observe(output(300));
    REQUIRE(o.next_bound());
    CHECK(*o.next_bound() == SimTime::from_millis(500));
    auto v = o.advance_to(SimTime::from_millis(500));
    REQUIRE(v);
    CHECK(v->kind == ViolationKind::PeriodMiss);
    CHECK(v->time == SimTime::from_millis(500));
}

TEST_CASE("combined observer: deadline and period bounds are both tracked") {
    auto o = combined_obs(SimTime::from_millis(300), SimTime::from_millis(500));
    o.observe(input(0));
    // The pending deadline at 300ms is earlier than the recurrence at 500ms.
    REQUIRE(o.next_bound());
    CHECK(*o.next_bound() == SimTime::from_millis(300));
    auto v = o.advance_to(SimTime::from_millis(300));
    REQUIRE(v);
    CHECK(v->kind == ViolationKind::DeadlineMiss);
}

TEST_CASE("heartbeat observer: regular beats keep it alive") {
    auto o = heartbeat_obs(SimTime::from_millis(200), 3);
    o.reset(SimTime{0});
    for (int ms = 200; ms <= 4000; ms += 200)
        CHECK_FALSE(o.observe(beat(ms, ms + 10)));
    CHECK_FALSE(o.violated());
}

TEST_CASE("heartbeat observer: a silent link misses at last beat + 3 periods") {
    auto o = heartbeat_obs(SimTime::from_millis(200), 3);
    o.reset(SimTime{0});
    for (int ms = 200; ms <= 4000; ms += 200) o.observe(beat(ms, ms + 10));
    // Link goes down at 4100ms: no further beats; the liveness bound expires
    // at 4000 + 600 = 4600ms.
    REQUIRE(o.next_bound());
    CHECK(*o.next_bound() == SimTime::from_millis(4600));
    auto v = o.advance_to(SimTime::from_millis(4600));
    REQUIRE(v);
    CHECK(v->kind == ViolationKind::HeartbeatLoss);
    CHECK(v->time == SimTime::from_millis(4600));
}

TEST_CASE("heartbeat observer: liveness clock measures from beat origin, not receipt") {
    auto o = heartbeat_obs(SimTime::from_millis(200), 3);
    o.reset(SimTime{0});
    o.observe(beat(200, 240));  // 40ms link latency
    CHECK(*o.next_bound() == SimTime::from_millis(800));
}

TEST_CASE("heartbeat observer: threshold one tolerates exactly one period") {
    auto o = heartbeat_obs(SimTime::from_millis(200), 1);
    o.reset(SimTime{0});
    o.observe(beat(200, 200));
    CHECK_FALSE(o.observe(beat(400, 400)));
    auto v = o.advance_to(SimTime::from_millis(601));
    REQUIRE(v);
    CHECK(v->time == SimTime::from_millis(600));
}

TEST_CASE("heartbeat observer: reset re-anchors the liveness clock") {
    auto o = heartbeat_obs(SimTime::from_millis(200), 3);
    o.reset(SimTime{0});
    o.advance_to(SimTime::from_millis(600));
    CHECK(o.violated());
    o.reset(SimTime::from_millis(700));
    CHECK_FALSE(o.violated());
    CHECK(*o.next_bound() == SimTime::from_millis(1300));
}

TEST_CASE("irrelevant triggers are rejected as unbound") {
    auto d = deadline_obs(SimTime::from_seconds(1));
    CHECK_THROWS_AS(d.observe(beat(0, 0)), UnboundTrigger);
    auto p = periodic_obs(SimTime::from_millis(500));
    CHECK_THROWS_AS(p.observe(output(0)), UnboundTrigger);
    auto h = heartbeat_obs(SimTime::from_millis(200), 3);
    CHECK_THROWS_AS(h.observe(input(0)), UnboundTrigger);
}
