// cpes: run co-simulation scenarios, inspect presets, score risk, validate
// threat models and recompute metrics from exported runs.
//
// Exit codes: 0 success, 1 negative domain result, 2 input error, 3 runtime error.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <thread>

#include "CLI11.hpp"
#include "json.hpp"

#include "cpes/cosim/engine.hpp"
#include "cpes/cosim/export.hpp"
#include "cpes/cosim/presets.hpp"
#include "cpes/error.hpp"
#include "cpes/risk.hpp"
#include "cpes/threat_model.hpp"

namespace fs = std::filesystem;
using json = nlohmann::json;

namespace {

enum Exit { kOk = 0, kNegative = 1, kInput = 2, kRuntime = 3 };

std::string read_file(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    if (!in) throw cpes::ParseError(p.string(), "cannot open file");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

fs::path default_out() {
    if (const char* env = std::getenv("CPES_OUT"); env && *env) return env;
    return "out";
}

cpes::cosim::Scenario load_scenario(const std::string& source) {
    if (source.rfind("preset:", 0) == 0) return cpes::cosim::preset_scenario(source.substr(7));
    return cpes::cosim::parse_scenario(read_file(source));
}

template <class F>
int guarded(F&& f) {
    try {
        return f();
    } catch (const cpes::SimulationError& e) {
        std::cerr << "simulation error: " << e.what() << "\n";
        return kRuntime;
    } catch (const cpes::ParseError& e) {
        std::cerr << "input error: " << e.what() << "\n";
        return kInput;
    } catch (const cpes::ValidationError& e) {
        std::cerr << "validation error: " << e.what() << "\n";
        return kInput;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kRuntime;
    }
}

json run_summary(const cpes::cosim::RunResult& r, const fs::path& out) {
    return json{{"out", out.string()},
                {"seed", r.manifest.seed},
                {"scenario_sha256", r.manifest.scenario_sha256},
                {"report", json::parse(cpes::cosim::report_to_json(r))}};
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Cyber-physical energy system co-simulation toolkit"};
    app.require_subcommand(1);
    bool as_json = false;
    int verbosity = 0;
    app.add_flag("--json", as_json, "Machine-readable JSON on stdout");
    app.add_flag("-v,--verbose", verbosity, "More diagnostics on stderr");

    // run
    auto* run = app.add_subcommand("run", "Run a scenario file (or preset:<name>[:variant]) and export results");
    std::string scenario_src, batch_dir, out_dir;
    std::optional<std::uint64_t> seed;
    unsigned jobs = std::max(1u, std::thread::hardware_concurrency());
    bool plot = false;
    run->add_option("scenario", scenario_src, "Scenario JSON path or preset:<name>[:variant]");
    run->add_option("--batch", batch_dir, "Run every *.json in a directory")->check(CLI::ExistingDirectory);
    run->add_option("--out", out_dir, "Output directory (default $CPES_OUT or ./out)");
    run->add_option("--seed", seed, "Override the scenario seed");
    run->add_option("--jobs", jobs, "Concurrent runs for --batch")->check(CLI::PositiveNumber);
    run->add_flag("--emit-plot-data", plot, "Also write plot/<trace>.dat two-column files");
    run->add_flag("--json", as_json, "Machine-readable JSON on stdout");

    // preset
    auto* preset = app.add_subcommand("preset", "List or emit preset scenarios");
    preset->require_subcommand(1);
    auto* preset_list = preset->add_subcommand("list", "List presets and variants");
    preset_list->add_flag("--json", as_json, "Machine-readable JSON on stdout");
    auto* preset_emit = preset->add_subcommand("emit", "Write a preset scenario JSON to stdout");
    std::string preset_name;
    preset_emit->add_option("name", preset_name, "name[:variant]")->required();

    // risk
    auto* risk = app.add_subcommand("risk", "Score a risk input document");
    std::string risk_path;
    risk->add_option("input", risk_path, "Risk input JSON")->required()->check(CLI::ExistingFile);
    risk->add_flag("--json", as_json, "Machine-readable JSON on stdout");

    // threat
    auto* threat = app.add_subcommand("threat", "Threat model tools");
    threat->require_subcommand(1);
    auto* threat_validate = threat->add_subcommand("validate", "Validate a threat model (path or preset:<name>)");
    std::string threat_src;
    threat_validate->add_option("model", threat_src, "Threat model JSON or preset:<name>")->required();
    threat_validate->add_flag("--json", as_json, "Machine-readable JSON on stdout");

    // metrics
    auto* metrics = app.add_subcommand("metrics", "Recompute metrics from an exported run directory");
    std::string run_dir, spec_path;
    bool check = false;
    metrics->add_option("dir", run_dir, "Exported run directory")->required()->check(CLI::ExistingDirectory);
    metrics->add_option("--spec", spec_path, "Scenario JSON whose metric requests replace the exported ones")
        ->check(CLI::ExistingFile);
    metrics->add_flag("--check", check, "Compare with report.json and verify the manifest; exit 1 on mismatch");
    metrics->add_flag("--json", as_json, "Machine-readable JSON on stdout");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kOk : kInput;
    }

    if (run->parsed()) {
        return guarded([&] {
            const fs::path out = out_dir.empty() ? default_out() : fs::path(out_dir);
            cpes::cosim::ExportOptions opt{plot};
            if (!batch_dir.empty()) {
                std::vector<fs::path> files;
                for (const auto& e : fs::directory_iterator(batch_dir))
                    if (e.path().extension() == ".json") files.push_back(e.path());
                std::sort(files.begin(), files.end());
                std::vector<cpes::cosim::Scenario> scenarios;
                for (const auto& f : files) {
                    try {
                        scenarios.push_back(cpes::cosim::parse_scenario(read_file(f)));
                    } catch (const cpes::Error& e) {
                        throw cpes::ParseError(f.filename().string(), e.what());
                    }
                    if (seed) scenarios.back().seed = *seed;
                }
                const auto outcomes = cpes::cosim::run_batch(scenarios, jobs);
                int worst = kOk;
                json summary = json::array();
                for (std::size_t i = 0; i < outcomes.size(); ++i) {
                    const fs::path dir = out / files[i].stem();
                    if (outcomes[i].result) {
                        cpes::cosim::export_run(*outcomes[i].result, dir, opt);
                        summary.push_back(run_summary(*outcomes[i].result, dir));
                        if (!as_json) std::cout << files[i].filename().string() << ": ok -> " << dir.string() << "\n";
                    } else {
                        std::cerr << files[i].filename().string() << ": " << outcomes[i].error << "\n";
                        summary.push_back(json{{"file", files[i].string()}, {"error", outcomes[i].error}});
                        worst = std::max(worst, outcomes[i].exit_code);
                    }
                }
                if (as_json) std::cout << summary.dump(2) << "\n";
                return worst;
            }
            if (scenario_src.empty()) throw cpes::ParseError("run", "a scenario path or --batch is required");
            auto sc = load_scenario(scenario_src);
            if (seed) sc.seed = *seed;
            if (verbosity > 0) std::cerr << "running " << sc.name << " (" << sc.steps() << " steps)\n";
            const auto result = cpes::cosim::run(sc);
            cpes::cosim::export_run(result, out, opt);
            if (as_json) std::cout << run_summary(result, out).dump(2) << "\n";
            else std::cout << cpes::cosim::report_to_text(result) << "\nwritten to " << out.string() << "\n";
            return static_cast<int>(kOk);
        });
    }

    if (preset_list->parsed()) {
        json arr = json::array();
        for (const auto& p : cpes::cosim::preset_list()) {
            if (as_json) {
                arr.push_back(json{{"name", p.name}, {"description", p.description}, {"variants", p.variants}});
                continue;
            }
            std::cout << p.name << "  " << p.description << "  [";
            for (std::size_t i = 0; i < p.variants.size(); ++i) std::cout << (i ? ", " : "") << p.variants[i];
            std::cout << "]\n";
        }
        if (as_json) std::cout << arr.dump(2) << "\n";
        return kOk;
    }

    if (preset_emit->parsed()) {
        return guarded([&] {
            std::cout << cpes::cosim::emit_scenario(cpes::cosim::preset_scenario(preset_name));
            return static_cast<int>(kOk);
        });
    }

    if (risk->parsed()) {
        return guarded([&] {
            const auto in = cpes::risk::parse_risk_input(read_file(risk_path));
            const auto report = cpes::risk::assess(in.probability, in.priorities, in.impacts, in.thresholds);
            std::cout << (as_json ? cpes::risk::report_to_json(report) + "\n" : cpes::risk::report_to_text(report));
            return static_cast<int>(kOk);
        });
    }

    if (threat_validate->parsed()) {
        return guarded([&] {
            const auto tm = threat_src.rfind("preset:", 0) == 0 ? cpes::threat::preset(threat_src.substr(7))
                                                                 : cpes::threat::deserialize(read_file(threat_src));
            const auto res = cpes::threat::validate(tm);
            if (as_json) {
                json v = json::array();
                for (const auto& x : res.violations)
                    v.push_back(json{{"rule", x.rule}, {"field", x.field}, {"message", x.message}});
                std::cout << json{{"ok", res.ok()}, {"violations", v}, {"warnings", res.warnings}}.dump(2) << "\n";
            } else {
                if (res.ok()) std::cout << "ok\n";
                for (const auto& x : res.violations) std::cout << x.rule << " " << x.field << ": " << x.message << "\n";
                for (const auto& w : res.warnings) std::cerr << "warning: " << w << "\n";
            }
            return static_cast<int>(res.ok() ? kOk : kNegative);
        });
    }

    if (metrics->parsed()) {
        return guarded([&] {
            cpes::metrics::MetricReport report;
            if (spec_path.empty()) {
                report = cpes::cosim::recompute(run_dir);
            } else {
                const auto spec = cpes::cosim::parse_scenario(read_file(spec_path));
                const auto exported = cpes::cosim::parse_scenario(read_file(fs::path(run_dir) / "scenario.json"));
                const auto log = cpes::cyber::EventLog::from_json(read_file(fs::path(run_dir) / "events.json"));
                report = cpes::metrics::evaluate(cpes::cosim::effective_metrics(spec),
                                                 cpes::cosim::load_traces(run_dir), log, exported.horizon,
                                                 exported.grid.protection, exported.grid.f_nom);
            }
            const std::string text = cpes::cosim::metrics_to_json(report);
            if (as_json || !check) std::cout << text;
            if (!check) return static_cast<int>(kOk);
            const auto manifest = cpes::cosim::verify_manifest(run_dir);
            const bool same = cpes::cosim::recompute_matches(run_dir);
            for (const auto& m : manifest.mismatches) std::cerr << "manifest mismatch: " << m << "\n";
            if (!same) std::cerr << "recomputed metrics differ from report.json\n";
            if (!as_json) std::cout << (manifest.ok() && same ? "match\n" : "mismatch\n");
            return static_cast<int>(manifest.ok() && same ? kOk : kNegative);
        });
    }
    return kInput;
}
