#include "catch_amalgamated.hpp"

#include <cmath>

#include "cpes/error.hpp"
#include "cpes/physical/grid.hpp"
#include "gen.hpp"

using namespace cpes::phys;
using cpes::test::Gen;

namespace {

Machine machine(const std::string& id, double h, double pm) {
    Machine m;
    m.id = id;
    m.inertia_const = h;
    m.p_mech = pm;
    m.v_internal = 1.05;
    m.damping = 2.0;
    m.governor = Governor{1.0, 0.036, 0.4, 0.0, 1.2};
    return m;
}

GridModel three_machine() {
    GridModel g;
    g.tier = GridTier::CommonBus;
    g.machines = {machine("g1", 5.0, 0.6), machine("g2", 4.0, 0.6), machine("g3", 3.5, 0.6)};
    g.loads = {{"l1", 0.6}, {"l2", 0.6}, {"l3", 0.6}};
    return g;
}

GridModel microgrid() {
    GridModel g;
    g.tier = GridTier::Aggregate;
    g.machines = {machine("gen", 4.0, 0.8)};
    g.loads = {{"a", 0.3}, {"b", 0.6}};
    g.breakers = {{"pcc", true, {}}};
    g.tie = GridTie{"pcc", 0.2, 1.0};
    g.bess = Bess{0.1, 0.5};
    return g;
}

}  // namespace

TEST_CASE("protection regions", "[protection]") {
    const FrequencyProtection p;
    CHECK(protection_check(60.0, p) == ProtectionAction::None);
    CHECK(protection_check(59.87, p) == ProtectionAction::Governor);
    CHECK(protection_check(55.75, p) == ProtectionAction::UnderfreqTrip);
    CHECK(protection_check(59.0, p) == ProtectionAction::LoadShed);
    CHECK(protection_check(62.5, p) == ProtectionAction::OverfreqTrip);
    CHECK(protection_check(60.02, p) == ProtectionAction::None);
    FrequencyProtection bad;
    bad.shed_low = 59.6;
    CHECK_THROWS_AS(check(bad, 60.0), cpes::ValidationError);
}

TEST_CASE("protection partitions the positive axis", "[protection][property]") {
    const FrequencyProtection p;
    Gen g(51);
    for (int n = 0; n < 100000; ++n) {
        const double f = g.uniform(1e-6, 120.0);
        const auto a = protection_check(f, p);
        const bool uf = f <= p.underfreq_trip;
        const bool of = f >= p.overfreq_trip;
        const bool shed = !uf && !of && f >= p.shed_low && f <= p.shed_high;
        const bool gov = !uf && !of && !shed && std::abs(f - 60.0) > p.governor_deadband;
        const ProtectionAction expect = of    ? ProtectionAction::OverfreqTrip
                                        : uf  ? ProtectionAction::UnderfreqTrip
                                        : shed ? ProtectionAction::LoadShed
                                        : gov ? ProtectionAction::Governor
                                              : ProtectionAction::None;
        INFO("f=" << f);
        REQUIRE(a == expect);
    }
}

TEST_CASE("demand total", "[grid]") {
    GridModel g;
    CHECK(demand_total(g) == 0.0);
    g.loads = {{"a", 100.0}, {"b", 250.0}};
    g.loads[1].delta_demand = 50.0;
    g.p_loss = 5.0;
    CHECK(demand_total(g) == 405.0);
    g.loads[0].shed = true;
    CHECK(demand_total(g) == 305.0);
}

TEST_CASE("demand total matches a summation oracle", "[grid][property]") {
    Gen gen(52);
    for (int n = 0; n < 200; ++n) {
        GridModel g;
        g.p_loss = gen.uniform(0.0, 5.0);
        double expect = g.p_loss;
        for (int i = 0; i < 20; ++i) {
            Load l{"l" + std::to_string(i), gen.uniform(0.0, 100.0)};
            l.delta_demand = gen.uniform(-10.0, 10.0);
            l.shed = gen.coin(0.2);
            if (!l.shed) expect += l.base_demand + l.delta_demand;
            g.loads.push_back(l);
        }
        CHECK(demand_total(g) == Catch::Approx(expect).epsilon(1e-12));
    }
}

TEST_CASE("step boundaries", "[grid]") {
    CHECK(step_at_or_after(0.0, 1e-3) == 0);
    CHECK(step_at_or_after(1.5, 1e-3) == 1500);
    CHECK(step_at_or_after(1.5000001, 1e-3) == 1501);
    CHECK(step_at_or_after(0.1 + 0.2, 0.1) == 3);
}

TEST_CASE("contingencies and mutations", "[grid]") {
    auto g = three_machine();
    CHECK(apply_contingency(g, {}, 1e-3, 3.0).empty());
    const auto muts = apply_contingency(g, {{1.6, "g3"}, {1.5, "g2"}}, 1e-3, 3.0);
    REQUIRE(muts.size() == 2);
    CHECK(muts[0].target == "g2");
    CHECK(muts[0].step == 1500);
    CHECK(muts[1].step == 1600);
    CHECK_THROWS_AS(apply_contingency(g, {{1.0, "gx"}}, 1e-3, 3.0), cpes::ValidationError);
    CHECK_THROWS_AS(apply_contingency(g, {{4.0, "g1"}}, 1e-3, 3.0), cpes::ValidationError);

    CHECK(apply_mutation(g, muts[0]));
    CHECK_FALSE(apply_mutation(g, muts[0]));
    CHECK_FALSE(g.machines[1].connected);

    g.breakers = {{"cb", true, {}}};
    CHECK(apply_mutation(g, {0, GridMutation::Kind::OpenBreaker, "cb", "attack"}));
    CHECK_FALSE(g.breaker_closed("cb"));
    CHECK_FALSE(apply_mutation(g, {0, GridMutation::Kind::OpenBreaker, "cb", "attack"}));
    CHECK(apply_mutation(g, {0, GridMutation::Kind::ShedLoad, "l1", "command"}));
    CHECK(g.loads[0].demand() == 0.0);
    CHECK(apply_mutation(g, {0, GridMutation::Kind::RestoreLoad, "l1", "command"}));
    CHECK(g.loads[0].demand() == 0.6);
}

TEST_CASE("breaker schedule mutations", "[grid]") {
    const auto m = breaker_schedule("cb", {{1.0, false}, {1.5, true}}, 1e-3);
    REQUIRE(m.size() == 2);
    CHECK(m[0].kind == GridMutation::Kind::OpenBreaker);
    CHECK(m[0].step == 1000);
    CHECK(m[1].kind == GridMutation::Kind::CloseBreaker);
    CHECK(m[1].source == "schedule");
}

TEST_CASE("trimmed grids sit at an exact equilibrium", "[grid]") {
    for (auto g : {three_machine(), microgrid()}) {
        PhysicalSystem sys(g, true);
        for (std::size_t k = 0; k < 2000; ++k) {
            sys.solve(k);
            REQUIRE(std::abs(sys.coi_frequency() - 60.0) < 1e-9);
            sys.advance(1e-3, k);
        }
    }
}

TEST_CASE("losing two of three machines drives frequency down", "[grid]") {
    PhysicalSystem sys(three_machine(), true);
    const double dt = 1e-3;
    double f_before = 0.0;
    for (std::size_t k = 0; k < 3000; ++k) {
        if (k == 1500) {
            apply_mutation(sys.grid(), {k, GridMutation::Kind::DisconnectMachine, "g2", "contingency"});
            apply_mutation(sys.grid(), {k, GridMutation::Kind::DisconnectMachine, "g3", "contingency"});
            f_before = sys.coi_frequency();
        }
        sys.solve(k);
        sys.advance(dt, k);
    }
    const auto& g1 = sys.grid().machines[0];
    const double capacity = g1.governor->p_max;
    CHECK(demand_total(sys.grid()) > capacity);
    CHECK(sys.coi_frequency() < f_before - 0.5);
}

TEST_CASE("opening the tie removes its flow", "[grid]") {
    PhysicalSystem sys(microgrid(), true);
    sys.solve(0);
    const double tie0 = sys.tie_power();
    CHECK(tie0 != 0.0);
    apply_mutation(sys.grid(), {1, GridMutation::Kind::OpenBreaker, "pcc", "command"});
    sys.solve(1);
    CHECK(sys.tie_power() == 0.0);
}

TEST_CASE("invalid grids are rejected", "[grid]") {
    GridModel g;
    CHECK_THROWS_AS(check(g), cpes::ValidationError);
    auto agg = microgrid();
    agg.machines.push_back(machine("second", 3.0, 0.1));
    CHECK_THROWS_AS(check(agg), cpes::ValidationError);
    auto neg = three_machine();
    neg.loads[0].base_demand = -1.0;
    CHECK_THROWS_AS(check(neg), cpes::ValidationError);
}
