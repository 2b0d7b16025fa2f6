#include "cresim/telemetry.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <set>

#include <json.hpp>

#include "cresim/scenario.hpp"

namespace cresim {

const char* to_string(RecordKind k) {
    switch (k) {
        case RecordKind::Sample: return "Sample";
        case RecordKind::SuppressedSample: return "SuppressedSample";
        case RecordKind::ExecutionSkipped: return "ExecutionSkipped";
        case RecordKind::Production: return "Production";
        case RecordKind::Delivery: return "Delivery";
        case RecordKind::Undeliverable: return "Undeliverable";
        case RecordKind::Heartbeat: return "Heartbeat";
        case RecordKind::Violation: return "Violation";
        case RecordKind::Action: return "Action";
        case RecordKind::Reconfiguration: return "Reconfiguration";
        case RecordKind::FaultOnset: return "FaultOnset";
        case RecordKind::FaultCleared: return "FaultCleared";
        case RecordKind::QosChange: return "QosChange";
    }
    return "?";
}

const std::string* TraceRecord::field(const std::string& key) const {
    for (const auto& [k, v] : fields)
        if (k == key) return &v;
    return nullptr;
}

void Trace::append(TraceRecord r) {
    if (!records_.empty() && r.time < records_.back().time)
        throw IncompleteTraceError("trace records out of order");
    records_.push_back(std::move(r));
}

std::vector<const TraceRecord*> Trace::of_kind(RecordKind k) const {
    std::vector<const TraceRecord*> out;
    for (const auto& r : records_)
        if (r.kind == k) out.push_back(&r);
    return out;
}

namespace {

std::int64_t to_i64(const std::string& s) { return std::strtoll(s.c_str(), nullptr, 10); }

// Components on the sensor->actuator chain (the path the end-to-end budget
// decomposes over).
std::vector<std::string> chain_components(const ScenarioConfig& cfg) {
    if (cfg.application.sources.empty() || cfg.application.sinks.empty()) return {};
    std::string cur = cfg.application.sources.front().feeds;
    std::string last = cfg.application.sinks.front().fed_by;
    std::vector<std::string> chain{cur};
    std::set<std::string> seen{cur};
    while (cur != last) {
        bool advanced = false;
        for (const auto& [p, c] : cfg.application.edges) {
            if (p != cur || seen.count(c)) continue;
            // Follow the edge that can still reach the sink.
            cur = c;
            chain.push_back(c);
            seen.insert(c);
            advanced = true;
            break;
        }
        if (!advanced) break;
    }
    return chain;
}

double initial_qos(const ScenarioConfig& cfg, const std::string& component) {
    for (const auto& b : cfg.behaviors) {
        if (b.owner != component) continue;
        // declared behavior is resolved by the simulation via the initial
        // application state; the scenario stores it in the contract tag.
        if (const std::string* cid = cfg.initial_application_state.contract_of(component)) {
            auto it = cfg.contracts.find(*cid);
            if (it != cfg.contracts.end() && it->second.tag == b.id) return b.qos;
        }
    }
    // Fall back to the first declared behavior of the component.
    for (const auto& b : cfg.behaviors)
        if (b.owner == component) return b.qos;
    return 0.0;
}

}  // namespace

MetricsReport compute_metrics(const Trace& trace, const ScenarioConfig& cfg,
                              SimTime horizon) {
    MetricsReport rep;
    const auto& records = trace.records();
    rep.empty_trace = records.empty();
    for (std::size_t i = 1; i < records.size(); ++i) {
        if (records[i].time < records[i - 1].time)
            throw IncompleteTraceError("trace records out of order");
    }

    std::set<std::string> sink_ids;
    for (const auto& s : cfg.application.sinks) sink_ids.insert(s.id);

    for (const auto& r : records) {
        if (r.kind == RecordKind::Violation) {
            if (const auto* k = r.field("violation_kind"); k && *k == "DeadlineMiss")
                ++rep.deadline_misses;
        } else if (r.kind == RecordKind::Reconfiguration) {
            if (const auto* l = r.field("level")) {
                if (*l == "application") ++rep.reconfigurations_application;
                else ++rep.reconfigurations_platform;
            }
        } else if (r.kind == RecordKind::Delivery && sink_ids.count(r.entity)) {
            if (const auto* s = r.field("sampled_at_us"))
                rep.actuation_latencies.push_back({r.time, r.time - SimTime{to_i64(*s)}});
        }
    }

    // Per-fault detection latency, recovery time, service restoration.
    for (const auto& f : cfg.faults) {
        FaultMetrics fm;
        fm.fault_id = f.id;

        // Link fault: the violation scope is the relation spanning the
        // link's endpoints.
        std::string relation_scope;
        if (f.kind != FaultKind::HangingProcess) {
            if (const Link* link = cfg.platform.find_link(f.target)) {
                for (const auto& rel : cfg.relations)
                    if (link->connects(rel.src, rel.dst)) relation_scope = rel.id;
            }
        }
        auto violation_matches = [&](const TraceRecord& r) {
            const auto* scope = r.field("scope");
            if (!scope) return false;
            if (f.kind == FaultKind::HangingProcess) return *scope == f.target;
            return !relation_scope.empty() && *scope == relation_scope;
        };

        const TraceRecord* violation = nullptr;
        for (const auto& r : records) {
            if (r.kind != RecordKind::Violation || r.time < f.onset) continue;
            if (violation_matches(r)) {
                violation = &r;
                break;
            }
        }
        if (violation) {
            fm.detection_latency = violation->time - f.onset;
            for (const auto& r : records) {
                if (r.time <= violation->time) continue;
                if (f.kind == FaultKind::HangingProcess && r.kind == RecordKind::Delivery) {
                    const auto* src = r.field("source");
                    const auto* sampled = r.field("sampled_at_us");
                    const auto* produced = r.field("produced_at_us");
                    if (!src || *src != f.target || !sampled || !produced) continue;
                    auto budget = cfg.component_budgets.find(f.target);
                    Duration stage = SimTime{to_i64(*produced)} - SimTime{to_i64(*sampled)};
                    if (budget == cfg.component_budgets.end() || stage <= budget->second) {
                        fm.service_restored = r.time;
                        break;
                    }
                } else if (f.kind != FaultKind::HangingProcess) {
                    // Restored once traffic flows over the (possibly new)
                    // route of the affected relation again.
                    bool beat = r.kind == RecordKind::Heartbeat &&
                                r.entity == relation_scope;
                    const auto* via = r.field("via_relation");
                    bool data = r.kind == RecordKind::Delivery && via &&
                                *via == relation_scope;
                    if (beat || data) {
                        fm.service_restored = r.time;
                        break;
                    }
                }
            }
            if (fm.service_restored)
                fm.recovery_time = *fm.service_restored - violation->time;
        } else if (f.duration) {
            // No violation: the fault window ends when the pipeline has
            // drained, i.e. at the first actuation fed by a sample taken at
            // or after the fault cleared.
            SimTime cleared = f.onset + *f.duration;
            for (const auto& r : records) {
                if (r.kind != RecordKind::Delivery || !sink_ids.count(r.entity)) continue;
                const auto* s = r.field("sampled_at_us");
                if (s && SimTime{to_i64(*s)} >= cleared) {
                    fm.service_restored = r.time;
                    break;
                }
            }
        }
        rep.faults.push_back(fm);
    }

    // Downtime: union of restart windows per chain component.
    auto chain = chain_components(cfg);
    std::set<std::string> chain_set(chain.begin(), chain.end());
    for (const auto& c : chain) {
        std::vector<std::pair<SimTime, SimTime>> windows;
        for (const auto& r : records) {
            if (r.kind != RecordKind::Action || r.entity != c) continue;
            const auto* a = r.field("action");
            const auto* until = r.field("until_us");
            if (a && *a == "restart" && until)
                windows.push_back({r.time, std::min(SimTime{to_i64(*until)}, horizon)});
        }
        std::sort(windows.begin(), windows.end());
        SimTime covered_until{-1};
        for (auto [s, e] : windows) {
            SimTime start = std::max(s, covered_until);
            if (e > start) {
                rep.downtime += e - start;
                covered_until = e;
            }
        }
    }

    // Time-weighted mean QoS across the chain.
    if (!chain.empty() && horizon.micros > 0) {
        double acc = 0.0;
        for (const auto& c : chain) {
            double q = initial_qos(cfg, c);
            SimTime last{0};
            double integral = 0.0;
            for (const auto& r : records) {
                if (r.kind != RecordKind::QosChange || r.entity != c) continue;
                const auto* to = r.field("to_qos");
                if (!to) continue;
                integral += q * static_cast<double>((r.time - last).micros);
                q = std::strtod(to->c_str(), nullptr);
                last = r.time;
            }
            integral += q * static_cast<double>((horizon - last).micros);
            acc += integral / static_cast<double>(horizon.micros);
        }
        rep.mean_qos = acc / static_cast<double>(chain.size());
    }
    return rep;
}

std::string trace_to_string(const Trace& trace) {
    std::string out;
    out += "{\"kind\":\"meta\",\"format_version\":1}\n";
    for (const auto& r : trace.records()) {
        nlohmann::ordered_json line;
        line["t_us"] = r.time.micros;
        line["entity"] = r.entity;
        line["kind"] = to_string(r.kind);
        for (const auto& [k, v] : r.fields) line[k] = v;
        out += line.dump();
        out += '\n';
    }
    return out;
}

void export_trace(const Trace& trace, const std::string& path) {
    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f) throw IoFailure("cannot open " + path);
    f << trace_to_string(trace);
    if (!f) throw IoFailure("write failed: " + path);
}

namespace {

std::string fmt_qos(double q) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.6f", q);
    return buf;
}

}  // namespace

std::string metrics_to_string(const MetricsReport& rep) {
    std::string out = "format_version,metric,scope,value\n";
    if (rep.empty_trace) return out;
    auto row = [&](const std::string& metric, const std::string& scope,
                   const std::string& value) {
        out += "1," + metric + "," + scope + "," + value + "\n";
    };
    for (const auto& f : rep.faults) {
        if (f.detection_latency)
            row("detection_latency_us", "fault:" + f.fault_id,
                std::to_string(f.detection_latency->micros));
        if (f.recovery_time)
            row("recovery_time_us", "fault:" + f.fault_id,
                std::to_string(f.recovery_time->micros));
        if (f.service_restored)
            row("service_restored_us", "fault:" + f.fault_id,
                std::to_string(f.service_restored->micros));
    }
    row("downtime_us", "run", std::to_string(rep.downtime.micros));
    row("mean_qos", "run", fmt_qos(rep.mean_qos));
    row("reconfigurations_application", "run",
        std::to_string(rep.reconfigurations_application));
    row("reconfigurations_platform", "run",
        std::to_string(rep.reconfigurations_platform));
    row("deadline_misses", "run", std::to_string(rep.deadline_misses));
    for (const auto& [at, latency] : rep.actuation_latencies)
        row("e2e_latency_us", "actuation:" + std::to_string(at.micros),
            std::to_string(latency.micros));
    return out;
}

void export_metrics(const MetricsReport& rep, const std::string& path) {
    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f) throw IoFailure("cannot open " + path);
    f << metrics_to_string(rep);
    if (!f) throw IoFailure("write failed: " + path);
}

}  // namespace cresim
