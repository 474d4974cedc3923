#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "cpes/attack.hpp"
#include "cpes/cyber/network.hpp"
#include "cpes/metrics.hpp"
#include "cpes/physical/grid.hpp"
#include "cpes/risk.hpp"
#include "cpes/threat_model.hpp"

namespace cpes::cosim {

/// Declarative run description: grid, optional network, attacks, optional
/// threat and risk inputs, requested metrics and the master seed.
struct Scenario {
    std::string name;
    std::string description;
    double horizon = 1.0;
    double dt = 1e-3;
    bool equilibrium = true;  // trim dispatch so t = 0 is an exact equilibrium
    phys::GridModel grid;
    std::optional<cyber::NetworkModel> network;
    std::vector<attack::AttackSpec> attacks;
    std::optional<threat::ThreatModel> threat;
    std::optional<risk::RiskInput> risk;
    std::vector<metrics::MetricRequest> metrics;
    std::uint64_t seed = 0;

    /// Number of macro-steps; traces hold steps() + 1 samples.
    std::size_t steps() const;
};

/// Structural and cross-reference checks: horizon and dt, grid and network
/// invariants, every attack tap, outstation asset and command target.
/// Throws cpes::ValidationError naming the offending element.
void validate(const Scenario& sc);

/// JSON, schema_version 1. Network bandwidths are in Mbps and network
/// delays in ms; everything else is SI or per-unit. Loads may give
/// "demand_kw" instead of "demand" when grid.base_kw is set.
/// Throws cpes::ParseError naming the field path.
Scenario parse_scenario(std::string_view document);
/// Canonical document (stable key order, shortest round-trip numbers).
std::string emit_scenario(const Scenario& sc);

}  // namespace cpes::cosim
