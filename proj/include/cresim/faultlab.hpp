#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "cresim/time.hpp"

namespace cresim {

// Deterministic counter-based RNG (splitmix64). Pinned so that drop
// patterns are bit-exact across platforms and runs.
class RngStream {
public:
    explicit RngStream(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next_u64() {
        state_ += 0x9E3779B97F4A7C15ull;
        std::uint64_t z = state_;
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
        return z ^ (z >> 31);
    }

    // Uniform in [0, 1) with 53 bits of precision.
    double next_double() {
        return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    }

private:
    std::uint64_t state_;
};

enum class FaultKind { HangingProcess, NetworkOutage, IntermittentLink };

struct FaultSpec {
    std::string id;
    FaultKind kind = FaultKind::HangingProcess;
    std::string target;          // component id or link id
    SimTime onset;
    std::optional<Duration> duration;  // absent = permanent
    Duration extra_delay;        // hanging: added execution latency
    bool hang_forever = false;   // hanging: suppress completion entirely
    double drop_probability = 0.0;  // intermittent link
    std::uint64_t seed = 0;         // intermittent link stream seed
};

struct UnknownTargetError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct FaultNotActiveError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Runtime state of the injected fault schedule. Effects are queried by
// timestamp so that an execution sampled at the onset instant is already
// affected regardless of same-instant event ordering.
class FaultLab {
public:
    explicit FaultLab(std::vector<FaultSpec> schedule);

    const std::vector<FaultSpec>& schedule() const { return schedule_; }

    // Total extra execution delay for the component's execution starting at t;
    // nullopt means a hang_forever fault suppresses the completion.
    std::optional<Duration> extra_delay(const std::string& component, SimTime t) const;

    // Draws drop decisions for every active intermittent fault on the link.
    bool should_drop(const std::string& link, SimTime t);

    bool outage_active(const std::string& link, SimTime t) const;

    // Restart kills the hung process: hanging faults on the component stop
    // applying from `at` on. Returns ids of faults this cleared.
    std::vector<std::string> clear_hanging(const std::string& component, SimTime at);

    // Explicit clear of a still-active fault (duration expiry path).
    void clear(const std::string& fault_id, SimTime at);

    bool active(const FaultSpec& f, SimTime t) const;
    const FaultSpec* find(const std::string& fault_id) const;

private:
    std::vector<FaultSpec> schedule_;
    std::map<std::string, SimTime> cleared_at_;  // fault id -> clear instant
    std::map<std::string, RngStream> streams_;   // fault id -> drop stream
};

const char* to_string(FaultKind k);

}  // namespace cresim
