#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "cpes/cosim/scenario.hpp"
#include "cpes/cyber/event_log.hpp"
#include "cpes/metrics.hpp"
#include "cpes/risk.hpp"
#include "cpes/threat_model.hpp"

namespace cpes::cosim {

struct Manifest {
    std::uint64_t seed = 0;
    std::string version;
    std::string scenario_sha256;  // over the canonical scenario document
};

struct RunResult {
    std::string scenario_json;  // canonical form the hash is taken over
    std::map<std::string, metrics::TimeSeries> traces;
    cyber::EventLog events;
    metrics::MetricReport metrics;
    std::optional<risk::RiskReport> risk;
    std::optional<threat::ValidationResult> threat;
    Manifest manifest;
};

/// Requested metrics, or frequency on f_coi (plus cyber with a network) when
/// the scenario asks for none.
std::vector<metrics::MetricRequest> effective_metrics(const Scenario& sc);

/// Macro-step k covers [k dt, (k+1) dt): due grid mutations are applied,
/// plants and the grid are sampled at k dt, cyber events in the interval are
/// dispatched, then the physics advances. Commands delivered inside the
/// interval take effect at step k+1.
/// Throws cpes::ValidationError before the first step and
/// cpes::SimulationError (with step and asset) during it.
RunResult run(const Scenario& sc);

struct BatchOutcome {
    std::optional<RunResult> result;
    int exit_code = 0;  // 0 ok, 2 validation, 3 simulation
    std::string error;
};

/// Runs each scenario in isolation on up to `jobs` threads; outcomes keep input order.
std::vector<BatchOutcome> run_batch(const std::vector<Scenario>& scenarios, unsigned jobs);

}  // namespace cpes::cosim
