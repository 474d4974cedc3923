#pragma once

#include <cstdint>
#include <functional>
#include <queue>
#include <vector>

namespace cpes::cyber {

/// Virtual-time future event list. Events run in (time, insertion sequence)
/// order, so ties are broken deterministically.
class EventQueue {
public:
    using Callback = std::function<void()>;

    /// Throws cpes::ValidationError if t is earlier than now() or not finite.
    std::uint64_t schedule(double t, Callback cb);

    /// Dispatch every pending event with time < t_end, including events
    /// scheduled by callbacks that also fall before t_end. Returns the count.
    std::size_t run_until(double t_end);

    /// Dispatch the next event, if any.
    bool step();

    double now() const { return now_; }
    bool empty() const { return heap_.empty(); }
    std::size_t size() const { return heap_.size(); }
    /// Time of the next pending event; +inf when empty.
    double next_time() const;

private:
    struct Entry {
        double t;
        std::uint64_t seq;
        Callback cb;
    };
    struct Later {
        bool operator()(const Entry& a, const Entry& b) const {
            return a.t != b.t ? a.t > b.t : a.seq > b.seq;
        }
    };

    std::priority_queue<Entry, std::vector<Entry>, Later> heap_;
    std::uint64_t next_seq_ = 0;
    double now_ = 0.0;
};

}  // namespace cpes::cyber
