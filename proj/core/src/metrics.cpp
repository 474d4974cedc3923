#include "cpes/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "cpes/error.hpp"

namespace cpes::metrics {

void check(const TimeSeries& s) {
    if (s.t.empty() || s.t.size() != s.v.size())
        throw ValidationError("trace " + s.name + ": needs equal-length, non-empty t and v");
    for (std::size_t i = 1; i < s.t.size(); ++i)
        if (!(s.t[i] > s.t[i - 1])) throw ValidationError("trace " + s.name + ": time must be strictly increasing");
}

double steady_state(const TimeSeries& s, double fraction) {
    check(s);
    const std::size_t n = s.v.size();
    const auto tail = std::max<std::size_t>(1, static_cast<std::size_t>(std::floor(fraction * static_cast<double>(n))));
    double sum = 0.0;
    for (std::size_t i = n - tail; i < n; ++i) sum += s.v[i];
    return sum / static_cast<double>(tail);
}

namespace {

std::optional<double> first_up_crossing(const TimeSeries& s, double level) {
    if (s.v[0] >= level) return s.t[0];
    for (std::size_t i = 1; i < s.v.size(); ++i) {
        if (s.v[i] >= level) {
            const double f = (level - s.v[i - 1]) / (s.v[i] - s.v[i - 1]);
            return s.t[i - 1] + f * (s.t[i] - s.t[i - 1]);
        }
    }
    return std::nullopt;
}

std::vector<Interval> runs(const TimeSeries& s, const std::vector<bool>& flag) {
    std::vector<Interval> out;
    for (std::size_t i = 0; i < flag.size(); ++i) {
        if (!flag[i]) continue;
        if (i > 0 && flag[i - 1]) out.back().end = s.t[i];
        else out.push_back({s.t[i], s.t[i]});
    }
    return out;
}

}  // namespace

std::optional<double> rise_time(const TimeSeries& s, double lo, double hi, double fraction) {
    if (!(lo > 0.0 && lo < hi && hi < 1.0)) throw ValidationError("rise_time: need 0 < lo < hi < 1");
    const double ss = steady_state(s, fraction);
    if (ss <= 0.0 || ss < s.v[0]) return std::nullopt;
    const auto t_lo = first_up_crossing(s, lo * ss);
    const auto t_hi = first_up_crossing(s, hi * ss);
    if (!t_lo || !t_hi) return std::nullopt;
    return *t_hi - *t_lo;
}

double percent_overshoot(const TimeSeries& s, double step_value) {
    check(s);
    if (step_value == 0.0) throw ValidationError("percent_overshoot: step value must be non-zero");
    const double peak = *std::max_element(s.v.begin(), s.v.end());
    return std::max(0.0, 100.0 * (peak - step_value) / step_value);
}

std::optional<double> settling_time(const TimeSeries& s, double band, double fraction) {
    const double ss = steady_state(s, fraction);
    const double b = band * std::abs(ss);
    const std::size_t n = s.v.size();
    std::optional<std::size_t> last;
    for (std::size_t i = 0; i < n; ++i)
        if (std::abs(s.v[i] - ss) > b) last = i;
    if (!last) return 0.0;
    if (*last == n - 1) return std::nullopt;
    const std::size_t i = *last;
    const double e0 = std::abs(s.v[i] - ss), e1 = std::abs(s.v[i + 1] - ss);
    const double f = (e0 - b) / (e0 - e1);
    return s.t[i] + f * (s.t[i + 1] - s.t[i]) - s.t[0];
}

double steady_state_error(const TimeSeries& s, double command, double fraction) {
    return command - steady_state(s, fraction);
}

double iae(const TimeSeries& s, double reference) {
    check(s);
    double sum = 0.0;
    for (std::size_t i = 1; i < s.v.size(); ++i)
        sum += 0.5 * (std::abs(s.v[i] - reference) + std::abs(s.v[i - 1] - reference)) * (s.t[i] - s.t[i - 1]);
    return sum;
}

double iae(const TimeSeries& s, const TimeSeries& reference) {
    check(s);
    check(reference);
    if (s.t != reference.t) throw ValidationError("iae: reference must share the sample grid");
    double sum = 0.0;
    for (std::size_t i = 1; i < s.v.size(); ++i)
        sum += 0.5 * (std::abs(s.v[i] - reference.v[i]) + std::abs(s.v[i - 1] - reference.v[i - 1])) *
               (s.t[i] - s.t[i - 1]);
    return sum;
}

std::vector<double> rocof(const TimeSeries& s) {
    check(s);
    const std::size_t n = s.v.size();
    std::vector<double> r(n, 0.0);
    if (n < 2) return r;
    r[0] = (s.v[1] - s.v[0]) / (s.t[1] - s.t[0]);
    r[n - 1] = (s.v[n - 1] - s.v[n - 2]) / (s.t[n - 1] - s.t[n - 2]);
    for (std::size_t i = 1; i + 1 < n; ++i) r[i] = (s.v[i + 1] - s.v[i - 1]) / (s.t[i + 1] - s.t[i - 1]);
    return r;
}

bool FrequencyReport::has(phys::ProtectionAction a) const {
    auto it = violations.find(a);
    return it != violations.end() && !it->second.empty();
}

FrequencyReport frequency_stability(const TimeSeries& s, const phys::FrequencyProtection& p, double f_nom) {
    check(s);
    FrequencyReport out;
    const auto mn = std::min_element(s.v.begin(), s.v.end());
    const auto mx = std::max_element(s.v.begin(), s.v.end());
    out.nadir = *mn;
    out.t_nadir = s.t[static_cast<std::size_t>(mn - s.v.begin())];
    out.peak = *mx;
    out.t_peak = s.t[static_cast<std::size_t>(mx - s.v.begin())];
    for (double r : rocof(s)) out.max_rocof = std::max(out.max_rocof, std::abs(r));

    using A = phys::ProtectionAction;
    std::vector<A> cls(s.v.size());
    for (std::size_t i = 0; i < s.v.size(); ++i) cls[i] = phys::protection_check(s.v[i], p, f_nom);
    for (A a : {A::Governor, A::LoadShed, A::UnderfreqTrip, A::OverfreqTrip}) {
        std::vector<bool> flag(cls.size());
        for (std::size_t i = 0; i < cls.size(); ++i) flag[i] = cls[i] == a;
        out.violations[a] = runs(s, flag);
    }
    return out;
}

VoltageReport voltage_stability(const TimeSeries& s, double lo, double hi) {
    check(s);
    if (!(lo < hi)) throw ValidationError("voltage_stability: need lo < hi");
    VoltageReport out;
    const auto mn = std::min_element(s.v.begin(), s.v.end());
    out.min = *mn;
    out.t_min = s.t[static_cast<std::size_t>(mn - s.v.begin())];
    out.max = *std::max_element(s.v.begin(), s.v.end());
    std::vector<bool> low(s.v.size()), high(s.v.size());
    for (std::size_t i = 0; i < s.v.size(); ++i) {
        low[i] = s.v[i] < lo;
        high[i] = s.v[i] > hi;
    }
    out.low = runs(s, low);
    out.high = runs(s, high);
    return out;
}

std::size_t disturbance_count(const TimeSeries& s, double threshold, double refractory) {
    const auto r = rocof(s);
    std::size_t count = 0;
    std::optional<double> last;
    for (std::size_t i = 1; i < r.size(); ++i) {
        if (std::abs(r[i] - r[i - 1]) <= threshold) continue;
        if (!last || s.t[i] - *last > refractory) ++count;
        last = s.t[i];
    }
    return count;
}

CyberReport cyber_metrics(const cyber::EventLog& log, double horizon) {
    CyberReport out;
    double delay_sum = 0.0, rtt_sum = 0.0, bits = 0.0;
    std::size_t rtt_n = 0;
    std::map<std::string, double> last_delay;
    std::map<std::string, std::pair<double, std::size_t>> jit_acc, hops_acc;
    std::map<std::string, double> busy;
    for (const auto& r : log.records()) {
        if (r.event == "send") {
            ++out.sent;
        } else if (r.event == "deliver") {
            ++out.delivered;
            const double d = r.number("delay");
            delay_sum += d;
            out.max_delay = std::max(out.max_delay, d);
            if (d > r.number("baseline") + kDelayedTolerance) ++out.packets_delayed;
            bits += 8.0 * r.number("bytes");
            const std::string flow(*r.get("flow"));
            if (auto it = last_delay.find(flow); it != last_delay.end()) {
                auto& acc = jit_acc[flow];
                acc.first += std::abs(d - it->second);
                ++acc.second;
            }
            last_delay[flow] = d;
            auto& h = hops_acc[r.node];
            h.first += r.number("hops");
            ++h.second;
        } else if (r.event == "drop") {
            ++out.dropped;
            ++out.dropped_by_reason[std::string(r.get("reason").value_or("unknown"))];
        } else if (r.event == "link_tx") {
            busy[std::string(*r.get("link"))] += r.number("duration");
        } else if (r.event == "attack_delay") {
            ++out.attack_delayed;
        } else if (r.event == "command_lost") {
            ++out.commands_lost;
        } else if (r.event == "poll_rtt") {
            const double rtt = r.number("rtt");
            rtt_sum += rtt;
            ++rtt_n;
            out.max_poll_rtt = std::max(out.max_poll_rtt, rtt);
        }
    }
    out.in_flight = out.sent - out.delivered - out.dropped;
    out.on_time = out.delivered - out.packets_delayed;
    if (out.delivered) out.avg_delay = delay_sum / static_cast<double>(out.delivered);
    if (rtt_n) out.avg_poll_rtt = rtt_sum / static_cast<double>(rtt_n);
    if (out.sent) out.packet_error_rate = static_cast<double>(out.dropped) / static_cast<double>(out.sent);
    double jit_sum = 0.0;
    for (const auto& [flow, acc] : jit_acc) {
        out.jitter_by_flow[flow] = acc.first / static_cast<double>(acc.second);
        jit_sum += out.jitter_by_flow[flow];
    }
    if (!jit_acc.empty()) out.jitter = jit_sum / static_cast<double>(jit_acc.size());
    for (const auto& [node, acc] : hops_acc) out.avg_hops_by_node[node] = acc.first / static_cast<double>(acc.second);
    if (horizon > 0.0) {
        out.throughput = bits / horizon;
        for (const auto& [link, b] : busy) out.utilization_by_link[link] = b / horizon;
    }
    return out;
}

// ---------------------------------------------------------------------------

namespace {

double param(const MetricRequest& r, const std::string& key, double fallback) {
    auto it = r.params.find(key);
    return it == r.params.end() ? fallback : it->second;
}

TimeSeries slice(const TimeSeries& s, const MetricRequest& r) {
    const double t0 = param(r, "t0", -std::numeric_limits<double>::infinity());
    const double t1 = param(r, "t1", std::numeric_limits<double>::infinity());
    if (!r.params.count("t0") && !r.params.count("t1")) return s;
    TimeSeries out{s.name, s.unit, {}, {}};
    for (std::size_t i = 0; i < s.t.size(); ++i) {
        if (s.t[i] < t0 || s.t[i] > t1) continue;
        out.t.push_back(s.t[i]);
        out.v.push_back(s.v[i]);
    }
    if (out.t.empty()) throw ValidationError("metric on " + s.name + ": empty time slice");
    return out;
}

void optional_scalar(MetricResult& m, const char* name, const std::optional<double>& v) {
    if (v) m.scalars.emplace_back(name, *v);
    else m.not_reached.emplace_back(name);
}

}  // namespace

MetricReport evaluate(const std::vector<MetricRequest>& requests, const std::map<std::string, TimeSeries>& traces,
                      const cyber::EventLog& log, double horizon, const phys::FrequencyProtection& protection,
                      double f_nom) {
    MetricReport report;
    for (const auto& req : requests) {
        MetricResult m{req.kind, req.trace, {}, {}, {}};
        if (req.kind == "cyber") {
            const CyberReport c = cyber_metrics(log, horizon);
            m.scalars = {{"sent", static_cast<double>(c.sent)},
                         {"delivered", static_cast<double>(c.delivered)},
                         {"dropped", static_cast<double>(c.dropped)},
                         {"in_flight", static_cast<double>(c.in_flight)},
                         {"avg_delay", c.avg_delay},
                         {"max_delay", c.max_delay},
                         {"jitter", c.jitter},
                         {"throughput", c.throughput},
                         {"packet_error_rate", c.packet_error_rate},
                         {"packets_delayed", static_cast<double>(c.packets_delayed)},
                         {"on_time", static_cast<double>(c.on_time)},
                         {"attack_delayed", static_cast<double>(c.attack_delayed)},
                         {"commands_lost", static_cast<double>(c.commands_lost)},
                         {"avg_poll_rtt", c.avg_poll_rtt},
                         {"max_poll_rtt", c.max_poll_rtt}};
            for (const auto& [k, v] : c.dropped_by_reason) m.scalars.emplace_back("dropped:" + k, static_cast<double>(v));
            for (const auto& [k, v] : c.utilization_by_link) m.scalars.emplace_back("utilization:" + k, v);
            for (const auto& [k, v] : c.avg_hops_by_node) m.scalars.emplace_back("hops:" + k, v);
            for (const auto& [k, v] : c.jitter_by_flow) m.scalars.emplace_back("jitter:" + k, v);
            report.results.push_back(std::move(m));
            continue;
        }
        auto it = traces.find(req.trace);
        if (it == traces.end()) throw ValidationError("metric " + req.kind + ": unknown trace " + req.trace);
        const TimeSeries s = slice(it->second, req);
        const double frac = param(req, "steady_fraction", kSteadyFraction);
        if (req.kind == "frequency") {
            const double fn = param(req, "f_nom", f_nom);
            const auto f = frequency_stability(s, protection, fn);
            m.scalars = {{"nadir", f.nadir},         {"t_nadir", f.t_nadir},
                         {"peak", f.peak},           {"t_peak", f.t_peak},
                         {"max_rocof", f.max_rocof}, {"nadir_deviation", fn - f.nadir}};
            for (const auto& [a, iv] : f.violations) m.intervals.emplace_back(std::string(phys::to_string(a)), iv);
        } else if (req.kind == "voltage") {
            const auto v = voltage_stability(s, param(req, "lo", 0.95), param(req, "hi", 1.05));
            m.scalars = {{"min", v.min}, {"t_min", v.t_min}, {"max", v.max}};
            m.intervals = {{"low", v.low}, {"high", v.high}};
        } else if (req.kind == "rise_time") {
            optional_scalar(m, "rise_time", rise_time(s, param(req, "lo", 0.1), param(req, "hi", 0.9), frac));
        } else if (req.kind == "overshoot") {
            m.scalars = {{"percent_overshoot", percent_overshoot(s, param(req, "step", steady_state(s, frac)))}};
        } else if (req.kind == "settling") {
            optional_scalar(m, "settling_time", settling_time(s, param(req, "band", 0.02), frac));
        } else if (req.kind == "sse") {
            m.scalars = {{"steady_state_error", steady_state_error(s, param(req, "command", 0.0), frac)}};
        } else if (req.kind == "iae") {
            m.scalars = {{"iae", iae(s, param(req, "reference", 0.0))}};
        } else if (req.kind == "disturbances") {
            m.scalars = {{"count", static_cast<double>(disturbance_count(s, param(req, "threshold", 0.1),
                                                                         param(req, "refractory", 0.05)))}};
        } else {
            throw ValidationError("unknown metric kind: " + req.kind);
        }
        report.results.push_back(std::move(m));
    }
    return report;
}

}  // namespace cpes::metrics
