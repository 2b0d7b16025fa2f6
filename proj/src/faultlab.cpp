#include "cresim/faultlab.hpp"

#include <algorithm>

namespace cresim {

const char* to_string(FaultKind k) {
    switch (k) {
        case FaultKind::HangingProcess: return "HangingProcess";
        case FaultKind::NetworkOutage: return "NetworkOutage";
        case FaultKind::IntermittentLink: return "IntermittentLink";
    }
    return "?";
}

FaultLab::FaultLab(std::vector<FaultSpec> schedule) : schedule_(std::move(schedule)) {
    // Independent stream per fault so adding a fault does not perturb the
    // draws of another.
    for (const auto& f : schedule_) {
        if (f.kind == FaultKind::IntermittentLink)
            streams_.emplace(f.id, RngStream{f.seed});
    }
}

bool FaultLab::active(const FaultSpec& f, SimTime t) const {
    if (t < f.onset) return false;
    if (f.duration && t >= f.onset + *f.duration) return false;
    auto it = cleared_at_.find(f.id);
    if (it != cleared_at_.end() && t >= it->second) return false;
    return true;
}

const FaultSpec* FaultLab::find(const std::string& fault_id) const {
    for (const auto& f : schedule_)
        if (f.id == fault_id) return &f;
    return nullptr;
}

std::optional<Duration> FaultLab::extra_delay(const std::string& component,
                                              SimTime t) const {
    Duration total{0};
    for (const auto& f : schedule_) {
        if (f.kind != FaultKind::HangingProcess || f.target != component) continue;
        if (!active(f, t)) continue;
        if (f.hang_forever) return std::nullopt;
        total += f.extra_delay;
    }
    return total;
}

bool FaultLab::should_drop(const std::string& link, SimTime t) {
    bool drop = false;
    for (const auto& f : schedule_) {
        if (f.kind != FaultKind::IntermittentLink || f.target != link) continue;
        if (!active(f, t)) continue;
        // Always draw so the pattern only depends on message order, not on
        // the outcome of other faults.
        double u = streams_.at(f.id).next_double();
        if (u < f.drop_probability) drop = true;
    }
    return drop;
}

bool FaultLab::outage_active(const std::string& link, SimTime t) const {
    for (const auto& f : schedule_) {
        if (f.kind == FaultKind::NetworkOutage && f.target == link && active(f, t))
            return true;
    }
    return false;
}

std::vector<std::string> FaultLab::clear_hanging(const std::string& component, SimTime at) {
    std::vector<std::string> cleared;
    for (const auto& f : schedule_) {
        if (f.kind != FaultKind::HangingProcess || f.target != component) continue;
        if (!active(f, at)) continue;
        cleared_at_[f.id] = at;
        cleared.push_back(f.id);
    }
    return cleared;
}

void FaultLab::clear(const std::string& fault_id, SimTime at) {
    const FaultSpec* f = find(fault_id);
    if (!f) throw UnknownTargetError("unknown fault " + fault_id);
    if (!active(*f, at)) throw FaultNotActiveError("fault " + fault_id + " not active");
    cleared_at_[fault_id] = at;
}

}  // namespace cresim
