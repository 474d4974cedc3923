#include "cpes/cyber/event_queue.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "cpes/error.hpp"

namespace cpes::cyber {

std::uint64_t EventQueue::schedule(double t, Callback cb) {
    if (!std::isfinite(t)) throw ValidationError("event time must be finite");
    if (t < now_) throw ValidationError("event scheduled in the past: " + std::to_string(t));
    const std::uint64_t seq = next_seq_++;
    heap_.push({t, seq, std::move(cb)});
    return seq;
}

bool EventQueue::step() {
    if (heap_.empty()) return false;
    Entry e = heap_.top();
    heap_.pop();
    now_ = e.t;
    if (e.cb) e.cb();
    return true;
}

std::size_t EventQueue::run_until(double t_end) {
    std::size_t n = 0;
    while (!heap_.empty() && heap_.top().t < t_end) {
        step();
        ++n;
    }
    return n;
}

double EventQueue::next_time() const {
    return heap_.empty() ? std::numeric_limits<double>::infinity() : heap_.top().t;
}

}  // namespace cpes::cyber
