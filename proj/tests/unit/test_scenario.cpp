#include "catch_amalgamated.hpp"

#include <string>

#include "cpes/cosim/presets.hpp"
#include "cpes/cosim/scenario.hpp"
#include "cpes/error.hpp"
#include "gen.hpp"
#include "json.hpp"

using namespace cpes::cosim;
using json = nlohmann::json;

namespace {

std::string with(const std::string& doc, const std::function<void(json&)>& edit) {
    json j = json::parse(doc);
    edit(j);
    return j.dump();
}

template <class E>
std::string error_of(const std::string& doc) {
    try {
        validate(parse_scenario(doc));
    } catch (const E& e) {
        return e.what();
    }
    return "";
}

}  // namespace

TEST_CASE("every preset variant round-trips through JSON", "[scenario]") {
    const auto& list = preset_list();
    CHECK(list.size() == 4);
    for (const auto& p : list) {
        for (const auto& v : p.variants) {
            const std::string spec = std::string(p.name) + ":" + std::string(v);
            INFO(spec);
            const auto sc = preset_scenario(spec);
            CHECK_NOTHROW(validate(sc));
            const auto doc = emit_scenario(sc);
            CHECK(emit_scenario(parse_scenario(doc)) == doc);
        }
    }
    CHECK_THROWS_AS(preset_scenario("nope"), cpes::ValidationError);
    CHECK_THROWS_AS(preset_scenario("case2_load:z"), cpes::ValidationError);
}

TEST_CASE("preset shapes", "[scenario]") {
    const auto a = preset_scenario("case2_load:a");
    REQUIRE(a.attacks.size() == 1);
    const auto& lc = std::get<cpes::attack::LoadChange>(a.attacks[0]);
    CHECK(lc.targets.size() == 1);
    CHECK(lc.delta == 0.2);
    CHECK(lc.window.intervals.front().start == 4.0);
    CHECK(lc.window.intervals.front().end == 4.5);

    const auto d = preset_scenario("case3_tda:15");
    const auto& td = std::get<cpes::attack::TimeDelay>(d.attacks[0]);
    CHECK(cpes::attack::schedule_value(td.delay, 10.0) == 15.0);

    const auto n2 = preset_scenario("case4_td:n-2");
    REQUIRE(n2.grid.contingencies.size() == 2);
    CHECK(n2.grid.contingencies[0].time == n2.grid.contingencies[1].time);
    CHECK(n2.grid.contingencies[0].machine != n2.grid.contingencies[1].machine);
}

TEST_CASE("seed and horizon edits survive a round trip", "[scenario][property]") {
    cpes::test::Gen g(131);
    const auto base = emit_scenario(preset_scenario("case1_dia"));
    for (int n = 0; n < 100; ++n) {
        const auto seed = g.next();
        const double horizon = g.integer(1, 40) * 0.5;
        const auto doc = with(base, [&](json& j) {
            j["seed"] = seed;
            j["meta"]["horizon"] = horizon;
            j["attacks"][0]["window"] = json::array({json::array({0.5, horizon})});
        });
        const auto sc = parse_scenario(doc);
        CHECK(sc.seed == seed);
        CHECK(sc.horizon == horizon);
        CHECK(emit_scenario(parse_scenario(emit_scenario(sc))) == emit_scenario(sc));
    }
}

TEST_CASE("malformed documents report a location", "[scenario]") {
    try {
        parse_scenario("{\"schema_version\": 1,\n \"meta\": {");
        FAIL("expected a parse error");
    } catch (const cpes::ParseError& e) {
        CHECK(std::string(e.what()).find("line 2") != std::string::npos);
    }
    const auto base = emit_scenario(preset_scenario("case2_load"));
    CHECK_THROWS_AS(parse_scenario(with(base, [](json& j) { j["schema_version"] = 2; })), cpes::ParseError);
    CHECK_THROWS_AS(parse_scenario(with(base, [](json& j) { j.erase("grid"); })), cpes::ParseError);
    CHECK_THROWS_AS(parse_scenario(with(base, [](json& j) { j["grid"]["tier"] = "quantum"; })), cpes::ParseError);
    CHECK_THROWS_AS(parse_scenario(with(base, [](json& j) { j["attacks"][0]["type"] = "gremlin"; })), cpes::ParseError);
}

TEST_CASE("validation names the offending element", "[scenario]") {
    const auto c2 = emit_scenario(preset_scenario("case2_load"));
    CHECK(error_of<cpes::ValidationError>(with(c2, [](json& j) { j["attacks"][0]["targets"] = {"zzz"}; }))
              .find("zzz") != std::string::npos);
    CHECK(error_of<cpes::ValidationError>(with(c2, [](json& j) { j["meta"]["dt"] = 0.5; })).find("dt") !=
          std::string::npos);
    CHECK_FALSE(error_of<cpes::ValidationError>(with(c2, [](json& j) { j["meta"]["horizon"] = -1.0; })).empty());
    CHECK_FALSE(error_of<cpes::ValidationError>(with(c2, [](json& j) { j["attacks"].push_back(j["attacks"][0]); })).empty());
    CHECK_FALSE(error_of<cpes::ValidationError>(with(c2, [](json& j) { j["metrics"][0]["kind"] = "vibes"; })).empty());

    const auto c3 = emit_scenario(preset_scenario("case3_tda"));
    CHECK(error_of<cpes::ValidationError>(with(c3, [](json& j) { j["attacks"][0]["link"] = "nowhere"; }))
              .find("nowhere") != std::string::npos);
    CHECK_FALSE(error_of<cpes::ValidationError>(with(c3, [](json& j) { j["network"]["commands"][0]["target"] = "ghost"; })).empty());

    const auto c1 = emit_scenario(preset_scenario("case1_dia"));
    CHECK_FALSE(error_of<cpes::ValidationError>(with(c1, [](json& j) { j["attacks"][0]["plant"] = "nope"; })).empty());
    CHECK_FALSE(error_of<cpes::ValidationError>(with(c1, [](json& j) { j["attacks"][0]["channel"] = 7; })).empty());
}

TEST_CASE("kW loads scale by the base", "[scenario]") {
    const auto base = emit_scenario(preset_scenario("case2_load"));
    const auto doc = with(base, [](json& j) {
        j["grid"]["base_kw"] = 1000.0;
        j["grid"]["loads"][0].erase("demand");
        j["grid"]["loads"][0]["demand_kw"] = 300.0;
    });
    CHECK(parse_scenario(doc).grid.loads[0].base_demand == Catch::Approx(0.3));
}
