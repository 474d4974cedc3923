#pragma once

// Physical and cyber performance metrics. Every function here is a pure
// function of a trace or an event log.

#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "cpes/cyber/event_log.hpp"
#include "cpes/physical/protection.hpp"

namespace cpes::metrics {

struct TimeSeries {
    std::string name;
    std::string unit;
    std::vector<double> t;  // strictly increasing
    std::vector<double> v;
};

/// Throws cpes::ValidationError unless len(t) = len(v) >= 1 and t is strictly increasing.
void check(const TimeSeries& s);

inline constexpr double kSteadyFraction = 0.1;

/// Mean of the final `fraction` of samples (at least one sample).
double steady_state(const TimeSeries& s, double fraction = kSteadyFraction);

/// Time from the first upward crossing of lo*ss to the first upward crossing
/// of hi*ss, linearly interpolated. nullopt (not reached) if either level is
/// never crossed, or the trace does not rise (ss <= 0 or ss < v[0]).
std::optional<double> rise_time(const TimeSeries& s, double lo = 0.1, double hi = 0.9,
                                double fraction = kSteadyFraction);

/// 100 (max(v) - step) / step, floored at 0. Throws for step == 0.
double percent_overshoot(const TimeSeries& s, double step_value);

/// Time (from t[0]) of the last exit from ss +- band*|ss|; 0 if never outside,
/// nullopt if the final sample is outside the band.
std::optional<double> settling_time(const TimeSeries& s, double band = 0.02, double fraction = kSteadyFraction);

/// command - steady_state(s).
double steady_state_error(const TimeSeries& s, double command, double fraction = kSteadyFraction);

/// Trapezoidal integral of |v - reference|.
double iae(const TimeSeries& s, double reference);
/// Same against a reference trace sampled on the same grid.
double iae(const TimeSeries& s, const TimeSeries& reference);

struct Interval {
    double start = 0.0;
    double end = 0.0;
};

/// Central differences inside, one-sided at the ends.
std::vector<double> rocof(const TimeSeries& s);

struct FrequencyReport {
    double nadir = 0.0;
    double t_nadir = 0.0;
    double peak = 0.0;
    double t_peak = 0.0;
    double max_rocof = 0.0;  // max |df/dt|
    /// Sample classification runs per protection region (governor, load_shed,
    /// underfreq_trip, overfreq_trip); an interval spans first to last sample.
    std::map<phys::ProtectionAction, std::vector<Interval>> violations;

    bool has(phys::ProtectionAction a) const;
};

FrequencyReport frequency_stability(const TimeSeries& s, const phys::FrequencyProtection& p, double f_nom = 60.0);

struct VoltageReport {
    double min = 0.0;
    double t_min = 0.0;
    double max = 0.0;
    std::vector<Interval> low;
    std::vector<Interval> high;
};

VoltageReport voltage_stability(const TimeSeries& s, double lo = 0.95, double hi = 1.05);

/// Discrete disturbances: sample-to-sample jumps in ROCOF above `threshold`
/// (Hz/s), with jumps closer than `refractory` seconds merged into one.
std::size_t disturbance_count(const TimeSeries& s, double threshold, double refractory);

struct CyberReport {
    std::size_t sent = 0;
    std::size_t delivered = 0;
    std::size_t dropped = 0;
    std::map<std::string, std::size_t> dropped_by_reason;
    std::size_t in_flight = 0;
    double avg_delay = 0.0;
    double max_delay = 0.0;
    double jitter = 0.0;  // mean over flows with >= 2 deliveries
    std::map<std::string, double> jitter_by_flow;
    double throughput = 0.0;  // delivered bits per second of horizon
    std::map<std::string, double> utilization_by_link;
    double packet_error_rate = 0.0;
    std::size_t packets_delayed = 0;
    std::size_t on_time = 0;
    std::size_t attack_delayed = 0;
    std::size_t commands_lost = 0;
    std::map<std::string, double> avg_hops_by_node;
    double avg_poll_rtt = 0.0;
    double max_poll_rtt = 0.0;
};

/// Slack over the analytic path delay before a delivery counts as delayed.
inline constexpr double kDelayedTolerance = 1e-9;

CyberReport cyber_metrics(const cyber::EventLog& log, double horizon);

// ---------------------------------------------------------------------------
// Requested-metric evaluation, shared by the engine and by recomputation
// from exported traces.

struct MetricRequest {
    std::string kind;   // frequency, voltage, rise_time, overshoot, settling, sse, iae, disturbances, cyber
    std::string trace;  // empty for cyber
    std::map<std::string, double> params;
};

struct MetricResult {
    std::string kind;
    std::string trace;
    std::vector<std::pair<std::string, double>> scalars;
    std::vector<std::pair<std::string, std::vector<Interval>>> intervals;
    std::vector<std::string> not_reached;
};

struct MetricReport {
    std::vector<MetricResult> results;
};

/// Throws cpes::ValidationError for unknown kinds or missing traces.
MetricReport evaluate(const std::vector<MetricRequest>& requests, const std::map<std::string, TimeSeries>& traces,
                      const cyber::EventLog& log, double horizon, const phys::FrequencyProtection& protection,
                      double f_nom);

}  // namespace cpes::metrics
