#include <benchmark/benchmark.h>

#include <random>
#include <string>

#include "cpes/cosim/engine.hpp"
#include "cpes/cosim/presets.hpp"
#include "cpes/cyber/event_queue.hpp"
#include "cpes/physical/nodal.hpp"
#include "cpes/physical/swing.hpp"
#include "cpes/risk.hpp"

namespace {

void BM_SwingStep(benchmark::State& state) {
    cpes::phys::Machine m;
    m.id = "g";
    m.p_mech = 0.8;
    m.delta = 0.3;
    m.omega = m.omega_sync;
    const cpes::phys::PowerFn pe = [](double delta, double) { return cpes::phys::electrical_power(1.0, 1.0, 0.5, delta); };
    std::size_t k = 0;
    for (auto _ : state) {
        m = cpes::phys::swing_step(m, pe, 1e-3, ++k);
        benchmark::DoNotOptimize(m.delta);
    }
}
BENCHMARK(BM_SwingStep);

void BM_NodalSolve(benchmark::State& state) {
    const auto n = static_cast<Eigen::Index>(state.range(0));
    std::mt19937_64 rng(1);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    cpes::phys::ComplexBoundary b;
    b.Y = Eigen::MatrixXcd::Zero(n, n);
    b.I = Eigen::VectorXcd::Zero(n);
    for (Eigen::Index r = 0; r < n; ++r) {
        double off = 0.0;
        for (Eigen::Index c = 0; c < n; ++c) {
            if (r == c) continue;
            b.Y(r, c) = {u(rng), u(rng)};
            off += std::abs(b.Y(r, c));
        }
        b.Y(r, r) = {off + 1.0, u(rng)};
        b.I(r) = {u(rng), u(rng)};
    }
    for (auto _ : state) benchmark::DoNotOptimize(cpes::phys::nodal_solve(b));
    state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_NodalSolve)->RangeMultiplier(2)->Range(8, 256)->Complexity(benchmark::oNCubed);

void BM_EventQueue(benchmark::State& state) {
    const auto n = state.range(0);
    std::mt19937_64 rng(2);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (auto _ : state) {
        cpes::cyber::EventQueue q;
        std::size_t fired = 0;
        for (std::int64_t i = 0; i < n; ++i) q.schedule(u(rng), [&fired] { ++fired; });
        q.run_until(2.0);
        benchmark::DoNotOptimize(fired);
    }
    state.SetItemsProcessed(state.iterations() * n);
}
BENCHMARK(BM_EventQueue)->Arg(1000)->Arg(100000);

void BM_RiskAssess(benchmark::State& state) {
    const auto p = cpes::risk::PrioritySet::cpes_default();
    cpes::risk::ImpactVector i;
    i.impact = {cpes::risk::Impact::High, cpes::risk::Impact::Medium, cpes::risk::Impact::Low,
                cpes::risk::Impact::High};
    for (auto _ : state) benchmark::DoNotOptimize(cpes::risk::assess({3}, p, i));
}
BENCHMARK(BM_RiskAssess);

void BM_PresetRun(benchmark::State& state, const std::string& spec) {
    const auto sc = cpes::cosim::preset_scenario(spec);
    for (auto _ : state) benchmark::DoNotOptimize(cpes::cosim::run(sc));
    state.counters["steps"] = static_cast<double>(sc.steps());
}
BENCHMARK_CAPTURE(BM_PresetRun, case1, std::string("case1_dia"))->Unit(benchmark::kMillisecond);
BENCHMARK_CAPTURE(BM_PresetRun, case2, std::string("case2_load:d"))->Unit(benchmark::kMillisecond);
BENCHMARK_CAPTURE(BM_PresetRun, case3, std::string("case3_tda:5"))->Unit(benchmark::kMillisecond);
BENCHMARK_CAPTURE(BM_PresetRun, case4, std::string("case4_td:n-1-1"))->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
