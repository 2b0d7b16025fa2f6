#pragma once

#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "cresim/time.hpp"

namespace cresim {

enum class RecordKind {
    Sample,
    SuppressedSample,
    ExecutionSkipped,
    Production,
    Delivery,
    Undeliverable,
    Heartbeat,
    Violation,
    Action,
    Reconfiguration,
    FaultOnset,
    FaultCleared,
    QosChange,
};

// One structured trace line. Payload fields keep insertion order so exports
// are byte-stable.
struct TraceRecord {
    SimTime time;
    std::string entity;
    RecordKind kind = RecordKind::Sample;
    std::vector<std::pair<std::string, std::string>> fields;

    const std::string* field(const std::string& key) const;
};

class Trace {
public:
    void append(TraceRecord r);
    const std::vector<TraceRecord>& records() const { return records_; }
    std::vector<const TraceRecord*> of_kind(RecordKind k) const;

private:
    std::vector<TraceRecord> records_;
};

struct FaultMetrics {
    std::string fault_id;
    std::optional<Duration> detection_latency;  // violation time - onset
    std::optional<Duration> recovery_time;      // restored - violation time
    std::optional<SimTime> service_restored;
};

struct MetricsReport {
    bool empty_trace = false;  // exported as a header-only file
    std::vector<FaultMetrics> faults;
    Duration downtime;       // total time a chain component is not Running
    double mean_qos = 0.0;   // time-weighted mean over the chain
    int reconfigurations_application = 0;
    int reconfigurations_platform = 0;
    int deadline_misses = 0;
    std::vector<std::pair<SimTime, Duration>> actuation_latencies;  // (actuation, e2e)
};

struct IncompleteTraceError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct IoFailure : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct ScenarioConfig;  // forward; metrics need scenario budgets and chain

MetricsReport compute_metrics(const Trace& trace, const ScenarioConfig& scenario,
                              SimTime horizon);

// Line-delimited records, one object per line, stable field ordering. The
// first line is a meta record carrying format_version.
void export_trace(const Trace& trace, const std::string& path);
std::string trace_to_string(const Trace& trace);

// Comma-separated metric rows with a documented header.
void export_metrics(const MetricsReport& report, const std::string& path);
std::string metrics_to_string(const MetricsReport& report);

const char* to_string(RecordKind k);

}  // namespace cresim
