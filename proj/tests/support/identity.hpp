#pragma once

// Identity properties of every attack operator: outside its window and for
// its degenerate parameters the operator must leave its tap untouched.
// Each check returns (cases, failures) so both the unit tests and the
// acceptance binary can report it.

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "cpes/attack.hpp"
#include "cpes/cyber/network.hpp"
#include "gen.hpp"

namespace cpes::test {

struct IdentityTally {
    int cases = 0;
    int failures = 0;
    std::string first_failure;

    void expect(bool ok, const std::string& what) {
        ++cases;
        if (ok) return;
        if (failures++ == 0) first_failure = what;
    }
};

/// 1-3 sorted, disjoint intervals within [0, 10].
inline attack::AttackWindow random_window(Gen& g) {
    attack::AttackWindow w;
    const int n = g.integer(1, 3);
    double at = g.uniform(0.0, 2.0);
    for (int i = 0; i < n; ++i) {
        const double s = at + g.uniform(0.01, 1.0);
        const double e = s + g.uniform(0.01, 2.0);
        w.intervals.push_back({s, e});
        at = e;
    }
    return w;
}

/// A time clearly outside every interval (margin well above the window guard).
inline double time_outside(Gen& g, const attack::AttackWindow& w, double margin = 1e-6) {
    while (true) {
        const double t = g.uniform(-1.0, 14.0);
        bool clear = true;
        for (const auto& iv : w.intervals)
            if (t > iv.start - margin && t < iv.end + margin) clear = false;
        if (clear) return t;
    }
}

inline double time_inside(Gen& g, const attack::AttackWindow& w) {
    const auto& iv = w.intervals[g.index(w.intervals.size())];
    return g.uniform(iv.start + 1e-6, iv.end - 1e-6);
}

inline attack::Noise random_noise(Gen& g) {
    switch (g.integer(0, 2)) {
        case 0: return attack::NoNoise{};
        case 1: return attack::GaussianNoise{g.uniform(0.0, 2.0)};
        default: return attack::SinusoidNoise{g.uniform(-2.0, 2.0), g.uniform(0.1, 10.0)};
    }
}

inline attack::Schedule random_schedule(Gen& g, double lo, double hi) {
    attack::Schedule s;
    double t = g.uniform(-1.0, 1.0);
    for (int i = g.integer(1, 4); i > 0; --i) {
        s.push_back({t, g.uniform(lo, hi)});
        t += g.uniform(0.1, 3.0);
    }
    return s;
}

inline IdentityTally dia_identity(std::uint64_t seed, int n) {
    Gen g(seed);
    IdentityTally tally;
    Rng rng(seed);
    for (int i = 0; i < n; ++i) {
        attack::DiaCombined spec{"a", "p", 0, g.uniform(-3.0, 3.0), random_noise(g), random_window(g)};
        const double y = g.uniform(-100.0, 100.0);
        tally.expect(attack::apply_dia(y, time_outside(g, spec.window), spec, rng) == y, "dia outside window");

        spec.beta = 1.0;
        switch (g.integer(0, 2)) {
            case 0: spec.noise = attack::NoNoise{}; break;
            case 1: spec.noise = attack::GaussianNoise{0.0}; break;
            default: spec.noise = attack::SinusoidNoise{0.0, g.uniform(0.1, 10.0)}; break;
        }
        tally.expect(attack::apply_dia(y, time_inside(g, spec.window), spec, rng) == y, "dia beta=1, W=0");
    }
    return tally;
}

inline IdentityTally control_dia_identity(std::uint64_t seed, int n) {
    Gen g(seed);
    IdentityTally tally;
    for (int i = 0; i < n; ++i) {
        attack::ControlDia spec{"a", "p", 0, random_schedule(g, -1.0, 1.0), random_window(g)};
        const double u = g.uniform(-10.0, 10.0);
        tally.expect(attack::apply_control_dia(u, time_outside(g, spec.window), spec) == u, "control dia outside");
        spec.delta_u = g.coin() ? attack::Schedule{} : random_schedule(g, 0.0, 0.0);
        tally.expect(attack::apply_control_dia(u, time_inside(g, spec.window), spec) == u, "control dia zero schedule");
    }
    return tally;
}

inline IdentityTally load_change_identity(std::uint64_t seed, int n) {
    Gen g(seed);
    IdentityTally tally;
    for (int i = 0; i < n; ++i) {
        phys::Load load{"l" + std::to_string(g.integer(0, 3)), g.uniform(0.0, 5.0)};
        attack::LoadChange spec{"a", {"l0", "l1", "l2", "l3"}, g.uniform(-0.9, 2.0), g.coin(), random_window(g)};
        tally.expect(attack::load_delta(load, time_outside(g, spec.window), spec) == 0.0, "load change outside");
        spec.delta = 0.0;
        tally.expect(attack::load_delta(load, time_inside(g, spec.window), spec) == 0.0, "load change delta 0");

        phys::GridModel grid;
        grid.loads = {{"l0", 1.0}, {"l1", 2.0}, {"l2", 0.5}, {"l3", 0.0}};
        const double before = phys::demand_total(grid);
        attack::apply_load_change(grid, time_inside(g, spec.window), spec);
        tally.expect(phys::demand_total(grid) == before, "load change delta 0 on grid");
    }
    return tally;
}

inline IdentityTally signal_delay_identity(std::uint64_t seed, int n) {
    Gen g(seed);
    IdentityTally tally;
    const double dt = 0.01;
    for (int i = 0; i < n; ++i) {
        const auto w = random_window(g);
        std::vector<double> h(1400);
        for (auto& x : h) x = g.uniform(-1.0, 1.0);
        const auto d = static_cast<std::size_t>(g.integer(1, 50));
        const double t_out = std::max(0.0, time_outside(g, w));
        const auto k_out = static_cast<std::size_t>(std::floor(t_out / dt));
        if (!w.contains(static_cast<double>(k_out) * dt))
            tally.expect(attack::apply_delay(h, k_out, d, w, dt) == h[k_out], "signal delay outside");
        const auto k_in = static_cast<std::size_t>(g.index(h.size()));
        tally.expect(attack::apply_delay(h, k_in, 0, w, dt) == h[k_in], "signal delay d=0");
        tally.expect(attack::apply_delay(h, k_in, 0, w, dt, attack::PreHistory::Error) == h[k_in],
                     "signal delay d=0 (error mode)");
    }
    return tally;
}

namespace detail {

inline std::string link_run(const std::vector<double>& sends, const cyber::LinkImpairment* imp) {
    cyber::NetworkModel m;
    m.nodes = {{"a", cyber::NodeRole::Endpoint, 64, 0.0, {}, {}}, {"b", cyber::NodeRole::Endpoint, 64, 0.0, {}, {}}};
    m.links = {{"ab", "a", "b", 10e6, 1e-3, 0.0, 0.0}};
    cyber::EventQueue q;
    cyber::EventLog log;
    cyber::Network net(m, q, log, 1);
    if (imp) net.add_impairment(*imp);
    for (double t : sends)
        q.schedule(t, [&net] { net.send("a", "b", cyber::PacketKind::Poll, std::monostate{}, 292); });
    q.run_until(100.0);
    return log.to_json();
}

}  // namespace detail

inline IdentityTally link_delay_identity(std::uint64_t seed, int n) {
    Gen g(seed);
    IdentityTally tally;
    for (int i = 0; i < n; ++i) {
        attack::TimeDelay spec;
        spec.id = "tda";
        spec.link = "ab";
        spec.window = random_window(g);
        spec.delay = random_schedule(g, 0.0, 5.0);
        const double t = time_outside(g, spec.window);
        const auto imp = attack::link_delay(spec);
        tally.expect(!imp.active(t), "link delay active outside window");

        std::vector<double> sends;
        for (int k = g.integer(1, 4); k > 0; --k) sends.push_back(std::max(0.0, time_outside(g, spec.window, 1e-2)));
        std::sort(sends.begin(), sends.end());
        tally.expect(detail::link_run(sends, &imp) == detail::link_run(sends, nullptr), "link delay log outside");

        spec.delay = g.coin() ? attack::Schedule{} : random_schedule(g, 0.0, 0.0);
        const auto zero = attack::link_delay(spec);
        std::vector<double> inside{time_inside(g, spec.window)};
        tally.expect(detail::link_run(inside, &zero) == detail::link_run(inside, nullptr), "link delay d=0");
    }
    return tally;
}

inline IdentityTally dos_identity(std::uint64_t seed, int n) {
    Gen g(seed);
    IdentityTally tally;
    for (int i = 0; i < n; ++i) {
        attack::DoS spec{"dos", "ab", random_window(g)};
        const auto imp = attack::apply_dos(spec);
        tally.expect(!imp.active(time_outside(g, spec.window)), "dos active outside window");
        std::vector<double> sends;
        for (int k = g.integer(1, 4); k > 0; --k) sends.push_back(std::max(0.0, time_outside(g, spec.window, 1e-2)));
        std::sort(sends.begin(), sends.end());
        tally.expect(detail::link_run(sends, &imp) == detail::link_run(sends, nullptr), "dos log outside");

        const auto empty = attack::apply_dos({"dos", "ab", {}});
        tally.expect(!empty.active(g.uniform(0.0, 10.0)), "dos empty window");
    }
    return tally;
}

inline IdentityTally breaker_identity(std::uint64_t seed, int n) {
    Gen g(seed);
    IdentityTally tally;
    phys::GridModel grid;
    grid.breakers = {{"cb", true, {}}};
    for (int i = 0; i < n; ++i) {
        const double dt = g.uniform(1e-4, 1e-2);
        tally.expect(attack::apply_breaker_attack(grid, {"x", "cb", {}}, dt).empty(), "breaker empty schedule");
    }
    return tally;
}

}  // namespace cpes::test
