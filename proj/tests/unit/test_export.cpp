#include "catch_amalgamated.hpp"

#include <filesystem>
#include <string>

#include "cpes/cosim/engine.hpp"
#include "cpes/cosim/export.hpp"
#include "cpes/cosim/presets.hpp"
#include "cpes/error.hpp"
#include "gen.hpp"

using namespace cpes;
using namespace cpes::cosim;
namespace fs = std::filesystem;

TEST_CASE("sha256 of known vectors", "[export]") {
    CHECK(sha256_hex("") == "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
    CHECK(sha256_hex("abc") == "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
}

TEST_CASE("trace CSV round-trips bit for bit", "[export][property]") {
    test::Gen g(404);
    for (int n = 0; n < 200; ++n) {
        metrics::TimeSeries s;
        s.name = "x" + std::to_string(n);
        s.unit = g.coin() ? "Hz" : "pu";
        const auto len = g.integer(1, 200);
        double t = g.uniform(-1.0, 1.0);
        for (int i = 0; i < len; ++i) {
            t += g.uniform(1e-6, 1.0);
            s.t.push_back(t);
            s.v.push_back(g.normal() * std::pow(10.0, g.integer(-300, 300)));
        }
        const auto back = trace_from_csv(trace_to_csv(s));
        CHECK(back.name == s.name);
        CHECK(back.unit == s.unit);
        CHECK(back.t == s.t);
        CHECK(back.v == s.v);
    }
}

TEST_CASE("malformed CSV names the line", "[export]") {
    CHECK_THROWS_AS(trace_from_csv(""), ParseError);
    CHECK_THROWS_AS(trace_from_csv("time,x,unit\n"), ParseError);
    try {
        trace_from_csv("t,x,unit\n0,1,Hz\n0.1,abc,Hz\n");
        FAIL("expected a parse error");
    } catch (const ParseError& e) {
        CHECK(e.where() == "line 3");
    }
    CHECK_THROWS_AS(trace_from_csv("t,x,unit\n0,1\n"), ParseError);
}

TEST_CASE("empty trace set writes only the manifest", "[export]") {
    test::TempDir dir("export-empty");
    RunResult r;
    r.manifest.seed = 7;
    export_run(r, dir.path());
    std::size_t files = 0;
    for (const auto& e : fs::recursive_directory_iterator(dir.path())) files += e.is_regular_file();
    CHECK(files == 1);
    CHECK(fs::exists(dir.path() / "manifest.json"));
}

TEST_CASE("exported runs recompute identically and detect tampering", "[export]") {
    test::TempDir dir("export-run");
    const auto r = run(preset_scenario("case3_tda:5"));
    export_run(r, dir.path(), ExportOptions{true});
    for (const char* f : {"scenario.json", "events.json", "events.csv", "report.json", "report.txt", "manifest.json",
                          "traces/f_coi.csv", "plot/f_coi.dat"})
        CHECK(fs::exists(dir.path() / f));
    CHECK(verify_manifest(dir.path()).ok());
    CHECK(recompute_matches(dir.path()));

    const auto loaded = load_traces(dir.path());
    REQUIRE(loaded.size() == r.traces.size());
    for (const auto& [name, s] : r.traces) CHECK(loaded.at(name).v == s.v);

    SECTION("edited scenario") {
        auto text = test::slurp(dir.path() / "scenario.json");
        text += " ";
        test::spit(dir.path() / "scenario.json", text);
        const auto m = verify_manifest(dir.path());
        REQUIRE(m.mismatches.size() == 1);
        CHECK(m.mismatches[0] == "scenario.json");
    }
    SECTION("tampered trace") {
        auto text = test::slurp(dir.path() / "traces/f_coi.csv");
        const auto pos = text.find("\n1,");
        REQUIRE(pos != std::string::npos);
        text.insert(pos + 3, "0");
        test::spit(dir.path() / "traces/f_coi.csv", text);
        const auto m = verify_manifest(dir.path());
        REQUIRE(m.mismatches.size() == 1);
        CHECK(m.mismatches[0] == "traces/f_coi.csv");
    }
    SECTION("missing file") {
        fs::remove(dir.path() / "events.csv");
        const auto m = verify_manifest(dir.path());
        REQUIRE(m.mismatches.size() == 1);
        CHECK(m.mismatches[0] == "events.csv (missing)");
    }
}

TEST_CASE("re-export is byte identical", "[export]") {
    test::TempDir a("export-a"), b("export-b");
    const auto sc = preset_scenario("case4_td:cb3");
    export_run(run(sc), a.path());
    export_run(run(sc), b.path());
    for (const auto& e : fs::recursive_directory_iterator(a.path())) {
        if (!e.is_regular_file()) continue;
        const auto rel = fs::relative(e.path(), a.path());
        INFO(rel.string());
        CHECK(test::slurp(e.path()) == test::slurp(b.path() / rel));
    }
}
