#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "cpes/cosim/engine.hpp"
#include "cpes/metrics.hpp"

namespace cpes::cosim {

/// Lower-case hex SHA-256.
std::string sha256_hex(std::string_view data);

/// Header "t,<name>,unit"; one "t,value,unit" row per sample, numbers in
/// shortest round-trip form.
std::string trace_to_csv(const metrics::TimeSeries& s);
/// Throws cpes::ParseError naming the line.
metrics::TimeSeries trace_from_csv(std::string_view text);

std::string metrics_to_json(const metrics::MetricReport& r);
/// report.json: scenario name, metrics, risk and threat sections.
std::string report_to_json(const RunResult& r);
std::string report_to_text(const RunResult& r);

struct ExportOptions {
    bool plot_data = false;  // plot/<trace>.dat, two whitespace-separated columns
};

/// Writes scenario.json, traces/*.csv, events.json, events.csv, report.json,
/// report.txt and manifest.json (seed, version, scenario hash, per-file
/// hashes). Each file is written to a temporary name and renamed. An empty
/// trace set writes the manifest only.
void export_run(const RunResult& r, const std::filesystem::path& dir, const ExportOptions& opt = {});

std::map<std::string, metrics::TimeSeries> load_traces(const std::filesystem::path& dir);

struct ManifestCheck {
    std::vector<std::string> mismatches;
    bool ok() const { return mismatches.empty(); }
};

/// Re-hashes scenario.json and every listed file.
ManifestCheck verify_manifest(const std::filesystem::path& dir);

/// Metrics evaluated from the exported scenario, traces and event log.
metrics::MetricReport recompute(const std::filesystem::path& dir);
/// True when recompute(dir) serializes identically to report.json's metrics.
bool recompute_matches(const std::filesystem::path& dir);

}  // namespace cpes::cosim
