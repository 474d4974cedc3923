#include "catch_amalgamated.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "cpes/cosim/engine.hpp"
#include "cpes/cosim/presets.hpp"
#include "cpes/error.hpp"
#include "cpes/metrics.hpp"

using namespace cpes;
using namespace cpes::cosim;

namespace {

const metrics::TimeSeries& trace(const RunResult& r, const std::string& name) {
    const auto it = r.traces.find(name);
    REQUIRE(it != r.traces.end());
    return it->second;
}

double min_of(const metrics::TimeSeries& s) { return *std::min_element(s.v.begin(), s.v.end()); }

double max_dev_before(const metrics::TimeSeries& s, double f_nom, double t_end) {
    double dev = 0.0;
    for (std::size_t i = 0; i < s.t.size() && s.t[i] < t_end; ++i) dev = std::max(dev, std::abs(s.v[i] - f_nom));
    return dev;
}

std::vector<const cyber::LogRecord*> events(const RunResult& r, const std::string& name) {
    std::vector<const cyber::LogRecord*> out;
    for (const auto& rec : r.events.records())
        if (rec.event == name) out.push_back(&rec);
    return out;
}

bool same_output(const RunResult& a, const RunResult& b) {
    if (a.traces.size() != b.traces.size()) return false;
    for (const auto& [name, s] : a.traces) {
        const auto it = b.traces.find(name);
        if (it == b.traces.end() || it->second.t != s.t || it->second.v != s.v) return false;
    }
    return a.events.to_json() == b.events.to_json();
}

}  // namespace

TEST_CASE("attack-free common-bus grid sits at nominal frequency", "[engine]") {
    auto sc = preset_scenario("case2_load");
    sc.attacks.clear();
    sc.horizon = 2.0;
    const auto r = run(sc);
    const auto& f = trace(r, "f_coi");
    CHECK(f.t.size() == sc.steps() + 1);
    CHECK(max_dev_before(f, 60.0, 1e9) < 1e-9);
    const auto rep = metrics::frequency_stability(f, sc.grid.protection);
    for (auto a : {phys::ProtectionAction::Governor, phys::ProtectionAction::LoadShed,
                   phys::ProtectionAction::UnderfreqTrip, phys::ProtectionAction::OverfreqTrip})
        CHECK_FALSE(rep.has(a));
}

TEST_CASE("trace sampling grid is k*dt", "[engine]") {
    auto sc = preset_scenario("case2_load:b");
    sc.horizon = 0.5;
    const auto r = run(sc);
    for (const auto& [name, s] : r.traces) {
        INFO(name);
        REQUIRE(s.t.size() == 501);
        for (std::size_t k = 0; k < s.t.size(); k += 50) CHECK(s.t[k] == Catch::Approx(k * 1e-3).margin(1e-12));
    }
}

TEST_CASE("zero delay is indistinguishable from no attack", "[engine]") {
    const auto a = run(preset_scenario("case3_tda:0"));
    const auto b = run(preset_scenario("case3_tda:none"));
    for (const auto& [name, s] : b.traces) {
        INFO(name);
        CHECK(trace(a, name).v == s.v);
    }
    CHECK(events(a, "load_shed").size() == 1);
    CHECK(events(a, "load_shed")[0]->t == events(b, "load_shed")[0]->t);
}

TEST_CASE("runs are deterministic in the seed", "[engine]") {
    const auto sc = preset_scenario("case1_dia");
    CHECK(same_output(run(sc), run(sc)));
    auto noisy = sc;
    std::get<attack::DiaCombined>(noisy.attacks[0]).noise = attack::GaussianNoise{0.1};
    auto noisy2 = noisy;
    noisy2.seed = noisy.seed + 1;
    CHECK(same_output(run(noisy), run(noisy)));
    CHECK_FALSE(same_output(run(noisy), run(noisy2)));

    const auto c3 = preset_scenario("case3_tda:5");
    CHECK(same_output(run(c3), run(c3)));
}

TEST_CASE("attack-free variants stay inside the governor deadband", "[engine]") {
    const double band = 0.036;
    CHECK(max_dev_before(trace(run(preset_scenario("case1_dia:none")), "f_coi"), 60.0, 1e9) <= band);
    CHECK(max_dev_before(trace(run(preset_scenario("case4_td:none")), "f_coi"), 60.0, 1e9) <= band);
    CHECK(max_dev_before(trace(run(preset_scenario("case3_tda:none")), "f_coi"), 60.0, 10.0) <= band);
}

TEST_CASE("longer command delay deepens the nadir", "[engine]") {
    double last = 1e9;
    for (const char* v : {"0", "0.5", "5", "15"}) {
        INFO(v);
        const double nadir = min_of(trace(run(preset_scenario(std::string("case3_tda:") + v)), "f_coi"));
        CHECK(nadir <= last + 1e-12);
        last = nadir;
    }
}

TEST_CASE("commands take effect at the next macro-step", "[engine]") {
    const auto r = run(preset_scenario("case3_tda:0.5"));
    const auto received = events(r, "command_received");
    REQUIRE(received.size() == 2);
    const auto shed = events(r, "load_shed");
    REQUIRE(shed.size() == 1);
    const cyber::LogRecord* cmd = nullptr;
    for (const auto* rec : received)
        if (rec->get("action") == "shed_load") cmd = rec;
    REQUIRE(cmd != nullptr);
    const double step = cmd->number("effective_step");
    CHECK(step == std::floor(cmd->t / 1e-3) + 1);
    CHECK(shed[0]->t == Catch::Approx(step * 1e-3).margin(1e-12));
    CHECK(shed[0]->get("source") == "command");
}

TEST_CASE("a delay attack postpones the shed by the injected delay", "[engine]") {
    const auto base = run(preset_scenario("case3_tda:none"));
    const auto late = run(preset_scenario("case3_tda:5"));
    const double t0 = events(base, "load_shed").at(0)->t;
    const double t1 = events(late, "load_shed").at(0)->t;
    CHECK(t1 - t0 == Catch::Approx(5.0).margin(2e-3));
    CHECK(min_of(trace(late, "f_coi")) < min_of(trace(base, "f_coi")));
    CHECK(events(late, "attack_delay").size() >= 1);
}

TEST_CASE("DoS on the shed path loses the command", "[engine]") {
    auto sc = preset_scenario("case3_tda:none");
    sc.attacks = {attack::DoS{"dos", "r1-load1", attack::AttackWindow{{{9.5, 10.5}}}}};
    const auto r = run(sc);
    const auto lost = events(r, "command_lost");
    REQUIRE(lost.size() == 1);
    CHECK(lost[0]->get("action") == "shed_load");
    CHECK(events(r, "load_shed").empty());
    const auto cyber = metrics::cyber_metrics(r.events, sc.horizon);
    CHECK(cyber.commands_lost == 1);
    CHECK(cyber.dropped_by_reason.at("attack") >= 1);
}

TEST_CASE("breaker schedule isolates the tie", "[engine]") {
    auto sc = preset_scenario("case1_dia:none");
    sc.horizon = 3.0;
    auto* pcc = sc.grid.find_breaker(sc.grid.tie->breaker);
    REQUIRE(pcc != nullptr);
    pcc->schedule = {{1.5, false}, {1.75, true}};
    const auto r = run(sc);
    const auto& tie = trace(r, "p_tie");
    bool nonzero_before = false;
    for (std::size_t i = 0; i < tie.t.size(); ++i) {
        if (tie.t[i] >= 1.5 - 1e-9 && tie.t[i] < 1.75 - 1e-9) CHECK(tie.v[i] == 0.0);
        if (tie.t[i] < 1.5 && tie.v[i] != 0.0) nonzero_before = true;
    }
    CHECK(nonzero_before);
    CHECK(events(r, "breaker_open").size() == 1);
    CHECK(events(r, "breaker_close").size() == 1);
}

TEST_CASE("batch runs match sequential runs", "[engine]") {
    std::vector<Scenario> batch;
    for (const char* v : {"a", "b", "c", "d"}) batch.push_back(preset_scenario(std::string("case2_load:") + v));
    batch.push_back(preset_scenario("case3_tda:5"));
    auto bad = preset_scenario("case2_load");
    bad.dt = 0.5;
    batch.push_back(bad);
    const auto out = run_batch(batch, 4);
    REQUIRE(out.size() == batch.size());
    for (std::size_t i = 0; i + 1 < batch.size(); ++i) {
        INFO(i);
        REQUIRE(out[i].result);
        CHECK(out[i].exit_code == 0);
        CHECK(same_output(*out[i].result, run(batch[i])));
    }
    CHECK_FALSE(out.back().result);
    CHECK(out.back().exit_code == 2);
    CHECK_FALSE(out.back().error.empty());
}

TEST_CASE("event log is time ordered", "[engine]") {
    for (const char* spec : {"case3_tda:5", "case4_td:cb3", "case2_load:d"}) {
        INFO(spec);
        const auto r = run(preset_scenario(spec));
        double last = -1.0;
        for (const auto& rec : r.events.records()) {
            CHECK(rec.t >= last);
            last = rec.t;
        }
    }
}

TEST_CASE("manifest and reports are populated", "[engine]") {
    const auto r = run(preset_scenario("case3_tda:5"));
    CHECK(r.manifest.scenario_sha256.size() == 64);
    CHECK(r.manifest.seed == preset_scenario("case3_tda:5").seed);
    CHECK(r.risk.has_value());
    CHECK(r.threat.has_value());
    CHECK_FALSE(r.metrics.results.empty());
    CHECK(emit_scenario(parse_scenario(r.scenario_json)) == r.scenario_json);
}

TEST_CASE("invalid scenarios fail before stepping", "[engine]") {
    auto sc = preset_scenario("case2_load");
    std::get<attack::LoadChange>(sc.attacks[0]).targets = {"nowhere"};
    CHECK_THROWS_AS(run(sc), ValidationError);
}
