#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "cresim/time.hpp"

namespace cresim {

// A typed data port. Payloads are real-valued throughout.
struct Port {
    std::string name;
    std::string domain = "real";

    bool operator==(const Port&) const = default;
};

// Timed guarantee patterns: the output must reproduce the input within a
// deadline, the input must recur within a period, or both.
struct Within {
    Duration deadline;
    bool operator==(const Within&) const = default;
};
struct Every {
    Duration period;
    bool operator==(const Every&) const = default;
};
struct WithinEvery {
    Duration deadline;
    Duration period;
    bool operator==(const WithinEvery&) const = default;
};
using GuaranteePattern = std::variant<Within, Every, WithinEvery>;

struct TimedGuarantee {
    std::string output;
    std::string input;
    GuaranteePattern pattern;

    bool operator==(const TimedGuarantee&) const = default;
};

// Assume/guarantee contract on a component or platform node. An empty
// assumption list denotes "assumes nothing".
struct Contract {
    std::string id;
    std::string subject;
    std::vector<Port> inputs;
    std::vector<Port> outputs;
    std::vector<std::string> assumptions;
    std::vector<TimedGuarantee> guarantees;
    std::string tag;  // behavior or link this contract covers
};

struct ComposeError : std::runtime_error {
    enum class Kind { SubjectMismatch, ConflictingGuarantee, IllFormedMerge };
    Kind kind;
    ComposeError(Kind k, const std::string& what)
        : std::runtime_error(what), kind(k) {}
};

// Minimal composition rule: same subject, union of ports, concatenated
// assumptions; a Within and an Every over the same output/input pair merge
// into a WithinEvery, everything else is concatenated.
Contract compose(const Contract& a, const Contract& b);

// Named per-hop budgets of the end-to-end latency decomposition.
struct BudgetSet {
    Duration t_s1_c1;
    Duration t_c1_c3;
    Duration t_c3_c4;
    Duration t_c4_a1;
    Duration delta_s1_a1;
    Duration t_samp;
    Duration t_n4_c3;
};

struct DecompositionResult {
    bool ok = false;
    Duration surplus;  // excess over the end-to-end bound when not ok

    bool operator==(const DecompositionResult&) const = default;
};

// Ok iff the per-hop budgets sum to at most the end-to-end bound.
DecompositionResult validate_decomposition(const BudgetSet& b);

enum class ViolationKind { DeadlineMiss, PeriodMiss, HeartbeatLoss };

struct TraceVerdict {
    std::size_t guarantee_index = 0;
    bool violated = false;
    SimTime violation_time;     // meaningful iff violated
    ViolationKind kind = ViolationKind::DeadlineMiss;
};

struct PortEvent {
    std::string port;
    double value = 0.0;
    SimTime time;
};

struct UnknownPortError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Offline trace checker; the ground-truth oracle for the online observers.
// Deadlines match inputs to outputs in FIFO order; an input with no output
// within the deadline (or none at all) is a miss at input + deadline.
// Periods are checked between consecutive input occurrences only. Each
// guarantee yields exactly one verdict; the earliest violation is reported.
std::vector<TraceVerdict> check_trace(const Contract& c,
                                      const std::vector<PortEvent>& trace);

const char* to_string(ViolationKind k);

}  // namespace cresim
