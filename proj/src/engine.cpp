#include "cresim/engine.hpp"

#include <cassert>
#include <stdexcept>

namespace cresim {

EventId Engine::schedule(Duration delay, PriorityClass cls, std::string target,
                         std::uint64_t payload) {
    if (halted_) throw std::logic_error("schedule on halted engine");
    if (delay.micros < 0) throw std::logic_error("negative delay");
    Event ev;
    ev.time = now_ + delay;
    ev.cls = cls;
    ev.seq = next_seq_++;
    ev.target = std::move(target);
    ev.payload = payload;
    auto [it, inserted] = queue_.insert(std::move(ev));
    assert(inserted);
    by_id_[it->seq] = it;
    return it->seq;
}

bool Engine::cancel(EventId id) {
    auto it = by_id_.find(id);
    if (it == by_id_.end()) return false;
    queue_.erase(it->second);
    by_id_.erase(it);
    return true;
}

std::size_t Engine::run_until(SimTime t, const Sink& sink) {
    if (t < now_) throw std::logic_error("run_until into the past");
    std::size_t processed = 0;
    while (!halted_ && !queue_.empty() && queue_.begin()->time <= t) {
        Event ev = *queue_.begin();
        queue_.erase(queue_.begin());
        by_id_.erase(ev.seq);
        assert(ev.time >= now_);
        now_ = ev.time;
        ++processed;
        sink(ev);
    }
    if (!halted_) now_ = t;
    return processed;
}

}  // namespace cresim
