#include "cpes/cosim/export.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include <openssl/evp.h>

#include "cpes/error.hpp"
#include "cpes/format.hpp"
#include "json_io.hpp"
#include "risk_json.hpp"

namespace cpes::cosim {

namespace fs = std::filesystem;
using cpes::json;

std::string sha256_hex(std::string_view data) {
    unsigned char md[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    if (EVP_Digest(data.data(), data.size(), md, &len, EVP_sha256(), nullptr) != 1)
        throw Error("sha256: digest failed");
    static constexpr char hex[] = "0123456789abcdef";
    std::string out;
    for (unsigned int i = 0; i < len; ++i) {
        out.push_back(hex[md[i] >> 4]);
        out.push_back(hex[md[i] & 0xF]);
    }
    return out;
}

std::string trace_to_csv(const metrics::TimeSeries& s) {
    std::string out = "t," + s.name + ",unit\n";
    for (std::size_t i = 0; i < s.t.size(); ++i) {
        out += format_double(s.t[i]);
        out += ',';
        out += format_double(s.v[i]);
        out += ',';
        out += s.unit;
        out += '\n';
    }
    return out;
}

namespace {

std::vector<std::string_view> split(std::string_view line, char sep) {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    while (true) {
        const auto pos = line.find(sep, start);
        out.push_back(line.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start));
        if (pos == std::string_view::npos) break;
        start = pos + 1;
    }
    return out;
}

std::string read_file(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    if (!in) throw ParseError(p.string(), "cannot open file");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_atomic(const fs::path& p, std::string_view data) {
    fs::create_directories(p.parent_path());
    fs::path tmp = p;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw Error("cannot write " + tmp.string());
        out.write(data.data(), static_cast<std::streamsize>(data.size()));
        if (!out) throw Error("write failed: " + tmp.string());
    }
    fs::rename(tmp, p);
}

json number_json(double v) {
    if (std::isfinite(v)) return v;
    if (std::isnan(v)) return "nan";
    return v > 0 ? "inf" : "-inf";
}

json metrics_json(const metrics::MetricReport& r) {
    json arr = json::array();
    for (const auto& m : r.results) {
        json scalars = json::array();
        for (const auto& [name, v] : m.scalars) scalars.push_back(json::array({name, number_json(v)}));
        json intervals = json::array();
        for (const auto& [name, ivs] : m.intervals) {
            json list = json::array();
            for (const auto& iv : ivs) list.push_back(json::array({iv.start, iv.end}));
            intervals.push_back(json::array({name, list}));
        }
        arr.push_back(json{{"kind", m.kind},
                           {"trace", m.trace},
                           {"scalars", scalars},
                           {"intervals", intervals},
                           {"not_reached", m.not_reached}});
    }
    return arr;
}

json threat_json(const threat::ValidationResult& v) {
    json violations = json::array();
    for (const auto& x : v.violations)
        violations.push_back(json{{"rule", x.rule}, {"field", x.field}, {"message", x.message}});
    return json{{"ok", v.ok()}, {"violations", violations}, {"warnings", v.warnings}};
}

std::string trace_file(const std::string& name) { return "traces/" + name + ".csv"; }

}  // namespace

metrics::TimeSeries trace_from_csv(std::string_view text) {
    metrics::TimeSeries s;
    std::size_t line_no = 0;
    std::size_t pos = 0;
    while (pos < text.size()) {
        const auto nl = text.find('\n', pos);
        std::string_view line = text.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos);
        pos = nl == std::string_view::npos ? text.size() : nl + 1;
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
        const auto cols = split(line, ',');
        const std::string where = "line " + std::to_string(line_no);
        if (line_no == 1) {
            if (cols.size() != 3 || cols[0] != "t" || cols[2] != "unit")
                throw ParseError(where, "expected header t,<name>,unit");
            s.name = std::string(cols[1]);
            continue;
        }
        if (line.empty()) continue;
        if (cols.size() != 3) throw ParseError(where, "expected 3 columns");
        auto t = parse_double(cols[0]);
        auto v = parse_double(cols[1]);
        if (!t || !v) throw ParseError(where, "malformed number");
        s.t.push_back(*t);
        s.v.push_back(*v);
        s.unit = std::string(cols[2]);
    }
    if (line_no == 0) throw ParseError("line 1", "empty trace file");
    return s;
}

std::string metrics_to_json(const metrics::MetricReport& r) { return metrics_json(r).dump(2) + "\n"; }

std::string report_to_json(const RunResult& r) {
    json doc;
    doc["scenario"] = io::parse(r.scenario_json).at("meta").at("name");
    doc["seed"] = r.manifest.seed;
    doc["metrics"] = metrics_json(r.metrics);
    if (r.risk) doc["risk"] = io::risk_report_to_json(*r.risk);
    if (r.threat) doc["threat"] = threat_json(*r.threat);
    return doc.dump(2) + "\n";
}

std::string report_to_text(const RunResult& r) {
    std::ostringstream os;
    os << "scenario " << io::parse(r.scenario_json).at("meta").at("name").get<std::string>() << "\n";
    os << "seed     " << r.manifest.seed << "\n";
    os << "events   " << r.events.size() << "\n";
    for (const auto& m : r.metrics.results) {
        os << "\n[" << m.kind << (m.trace.empty() ? "" : " " + m.trace) << "]\n";
        for (const auto& [name, v] : m.scalars) os << "  " << name << " = " << format_double(v) << "\n";
        for (const auto& [name, ivs] : m.intervals) {
            os << "  " << name << ":";
            if (ivs.empty()) os << " none";
            for (const auto& iv : ivs) os << " [" << format_double(iv.start) << ", " << format_double(iv.end) << "]";
            os << "\n";
        }
        for (const auto& name : m.not_reached) os << "  " << name << " = not reached\n";
    }
    if (r.risk) os << "\n[risk]\n" << risk::report_to_text(*r.risk);
    if (r.threat) {
        os << "\n[threat]\n" << (r.threat->ok() ? "  ok\n" : "");
        for (const auto& v : r.threat->violations) os << "  " << v.rule << " " << v.field << ": " << v.message << "\n";
        for (const auto& w : r.threat->warnings) os << "  warning: " << w << "\n";
    }
    return os.str();
}

void export_run(const RunResult& r, const fs::path& dir, const ExportOptions& opt) {
    fs::create_directories(dir);
    json files = json::object();
    auto put = [&](const std::string& rel, const std::string& data) {
        write_atomic(dir / rel, data);
        files[rel] = sha256_hex(data);
    };
    if (!r.traces.empty()) {
        put("scenario.json", r.scenario_json);
        for (const auto& [name, s] : r.traces) put(trace_file(name), trace_to_csv(s));
        put("events.json", r.events.to_json());
        put("events.csv", r.events.to_csv());
        put("report.json", report_to_json(r));
        put("report.txt", report_to_text(r));
        if (opt.plot_data) {
            for (const auto& [name, s] : r.traces) {
                std::string dat = "# t " + name + "\n";
                for (std::size_t i = 0; i < s.t.size(); ++i) dat += format_double(s.t[i]) + " " + format_double(s.v[i]) + "\n";
                put("plot/" + name + ".dat", dat);
            }
        }
    }
    const json manifest{{"seed", r.manifest.seed},
                        {"version", r.manifest.version},
                        {"scenario_sha256", r.manifest.scenario_sha256},
                        {"files", files}};
    write_atomic(dir / "manifest.json", manifest.dump(2) + "\n");
}

std::map<std::string, metrics::TimeSeries> load_traces(const fs::path& dir) {
    std::map<std::string, metrics::TimeSeries> out;
    const fs::path tdir = dir / "traces";
    if (!fs::is_directory(tdir)) throw ParseError(tdir.string(), "no traces directory");
    for (const auto& e : fs::directory_iterator(tdir)) {
        if (e.path().extension() != ".csv") continue;
        metrics::TimeSeries s;
        try {
            s = trace_from_csv(read_file(e.path()));
        } catch (const ParseError& err) {
            throw ParseError(e.path().filename().string(), err.what());
        }
        auto name = s.name;
        out.emplace(std::move(name), std::move(s));
    }
    return out;
}

ManifestCheck verify_manifest(const fs::path& dir) {
    ManifestCheck check;
    const json m = io::parse(read_file(dir / "manifest.json"));
    const json& files = io::require(m, "files", "");
    if (files.contains("scenario.json")) {
        const std::string hash = sha256_hex(read_file(dir / "scenario.json"));
        if (hash != io::get_string(m, "scenario_sha256", "")) check.mismatches.push_back("scenario.json");
    }
    for (auto it = files.begin(); it != files.end(); ++it) {
        const fs::path p = dir / it.key();
        if (!fs::exists(p)) {
            check.mismatches.push_back(it.key() + " (missing)");
            continue;
        }
        if (sha256_hex(read_file(p)) != it.value().get<std::string>()) {
            if (it.key() != "scenario.json") check.mismatches.push_back(it.key());
        }
    }
    return check;
}

metrics::MetricReport recompute(const fs::path& dir) {
    const Scenario sc = parse_scenario(read_file(dir / "scenario.json"));
    const auto traces = load_traces(dir);
    const auto log = cyber::EventLog::from_json(read_file(dir / "events.json"));
    return metrics::evaluate(effective_metrics(sc), traces, log, sc.horizon, sc.grid.protection, sc.grid.f_nom);
}

bool recompute_matches(const fs::path& dir) {
    const json report = io::parse(read_file(dir / "report.json"));
    return metrics_json(recompute(dir)).dump() == io::require(report, "metrics", "").dump();
}

}  // namespace cpes::cosim
