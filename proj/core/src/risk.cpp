#include "cpes/risk.hpp"

#include <algorithm>
#include <sstream>

#include "cpes/error.hpp"
#include "json_io.hpp"
#include "risk_json.hpp"

namespace cpes::risk {

std::string_view to_string(ObjectiveId id) {
    switch (id) {
        case ObjectiveId::PeopleHealthSafety: return "people_health_safety";
        case ObjectiveId::UninterruptedOperation: return "uninterrupted_operation";
        case ObjectiveId::FinancialProfit: return "financial_profit";
        case ObjectiveId::EquipmentDamageLegal: return "equipment_damage_legal";
    }
    return "<invalid>";
}

std::string_view to_string(Impact i) {
    switch (i) {
        case Impact::Low: return "low";
        case Impact::Medium: return "medium";
        case Impact::High: return "high";
    }
    return "<invalid>";
}

PrioritySet PrioritySet::cpes_default() {
    PrioritySet p;
    p[ObjectiveId::PeopleHealthSafety] = 4;
    p[ObjectiveId::UninterruptedOperation] = 3;
    p[ObjectiveId::EquipmentDamageLegal] = 2;
    p[ObjectiveId::FinancialProfit] = 1;
    return p;
}

void check_priorities(const PrioritySet& p) {
    std::array<int, kObjectiveCount> sorted = p.priority;
    std::sort(sorted.begin(), sorted.end());
    for (std::size_t k = 0; k < kObjectiveCount; ++k)
        if (sorted[k] != static_cast<int>(k) + 1)
            throw ValidationError("objective priorities must be a permutation of {1,2,3,4}");
}

void check_impacts(const ImpactVector& i) {
    for (Impact v : i.impact) {
        const int x = static_cast<int>(v);
        if (x < 1 || x > 3) throw ValidationError("attack impact must be 1 (low), 2 (medium) or 3 (high)");
    }
}

void check_probability(ThreatProbability prob) {
    if (prob.level < 1 || prob.level > 3) throw ValidationError("threat probability must be 1, 2 or 3");
}

void check_thresholds(const PoolThresholds& t) {
    if (!(t.pool1 > t.pool2 && t.pool2 > t.pool3))
        throw ValidationError("pool thresholds must be strictly descending");
    if (t.pool1 > 90 || t.pool3 < 10) throw ValidationError("pool thresholds must lie within [10, 90]");
}

DamageBreakdown damage(const PrioritySet& p, const ImpactVector& i) {
    check_priorities(p);
    check_impacts(i);
    DamageBreakdown out;
    for (std::size_t k = 0; k < kObjectiveCount; ++k) {
        out.per_objective[k] = p.priority[k] * static_cast<int>(i.impact[k]);
        out.total += out.per_objective[k];
    }
    return out;
}

int assign_pool(int risk, const PoolThresholds& t) {
    if (risk >= t.pool1) return 1;
    if (risk >= t.pool2) return 2;
    if (risk >= t.pool3) return 3;
    return 4;
}

RiskReport assess(ThreatProbability prob, const PrioritySet& p, const ImpactVector& i, const PoolThresholds& t) {
    check_probability(prob);
    check_thresholds(t);
    const DamageBreakdown d = damage(p, i);
    RiskReport r;
    r.probability = prob.level;
    r.damage = d.total;
    r.risk = prob.level * d.total;
    r.per_objective_scores = d.per_objective;
    r.pool = assign_pool(r.risk, t);
    return r;
}

std::vector<RankedRisk> pool_rank(const std::vector<NamedRisk>& risks, const PoolThresholds& t) {
    check_thresholds(t);
    std::vector<RankedRisk> out;
    out.reserve(risks.size());
    for (const auto& r : risks) out.push_back({r.name, r.report.risk, assign_pool(r.report.risk, t)});
    std::stable_sort(out.begin(), out.end(), [](const RankedRisk& a, const RankedRisk& b) { return a.risk > b.risk; });
    return out;
}

namespace {

ObjectiveId objective_from(const std::string& key, const std::string& path) {
    for (ObjectiveId id : kObjectives)
        if (to_string(id) == key) return id;
    throw ParseError(path, "unknown objective \"" + key + "\"");
}

Impact impact_from(const json& v, const std::string& path) {
    if (v.is_string()) {
        const auto s = v.get<std::string>();
        if (s == "low") return Impact::Low;
        if (s == "medium") return Impact::Medium;
        if (s == "high") return Impact::High;
        throw ParseError(path, "unknown impact \"" + s + "\" (expected low, medium or high)");
    }
    if (v.is_number_integer()) {
        const int x = v.get<int>();
        if (x >= 1 && x <= 3) return static_cast<Impact>(x);
    }
    throw ParseError(path, "impact must be low/medium/high or 1..3");
}

}  // namespace

}  // namespace cpes::risk

namespace cpes::io {

using namespace cpes::risk;

RiskInput risk_input_from_json(const json& doc, const std::string& path) {
    if (!doc.is_object()) throw ParseError(path, "expected an object");
    RiskInput in;
    const json& prob = require(doc, "probability", path);
    if (prob.is_string()) {
        in.probability.level = static_cast<int>(impact_from(prob, join(path, "probability")));
    } else if (prob.is_number_integer()) {
        in.probability.level = prob.get<int>();
    } else {
        throw ParseError(join(path, "probability"), "expected 1..3 or low/medium/high");
    }
    if (in.probability.level < 1 || in.probability.level > 3)
        throw ParseError(join(path, "probability"), "threat probability must be 1, 2 or 3");

    const std::string ppath = join(path, "priorities");
    const json& pri = require(doc, "priorities", path);
    if (!pri.is_object() || pri.size() != kObjectiveCount)
        throw ParseError(ppath, "expected an object with the four objectives");
    for (auto it = pri.begin(); it != pri.end(); ++it) {
        const ObjectiveId id = objective_from(it.key(), join(ppath, it.key()));
        if (!it->is_number_integer()) throw ParseError(join(ppath, it.key()), "expected an integer priority");
        in.priorities[id] = it->get<int>();
    }
    try {
        check_priorities(in.priorities);
    } catch (const ValidationError& e) {
        throw ParseError(ppath, e.what());
    }

    const std::string ipath = join(path, "impacts");
    const json& imp = require(doc, "impacts", path);
    if (!imp.is_object() || imp.size() != kObjectiveCount)
        throw ParseError(ipath, "expected an object with the four objectives");
    for (auto it = imp.begin(); it != imp.end(); ++it)
        in.impacts[objective_from(it.key(), join(ipath, it.key()))] = impact_from(*it, join(ipath, it.key()));

    if (doc.contains("thresholds")) {
        const auto t = get_vector(doc.at("thresholds"), join(path, "thresholds"));
        if (t.size() != 3) throw ParseError(join(path, "thresholds"), "expected three integers");
        in.thresholds = {static_cast<int>(t[0]), static_cast<int>(t[1]), static_cast<int>(t[2])};
        try {
            check_thresholds(in.thresholds);
        } catch (const ValidationError& e) {
            throw ParseError(join(path, "thresholds"), e.what());
        }
    }
    return in;
}

json risk_input_to_json(const RiskInput& in) {
    json pri = json::object();
    json imp = json::object();
    for (ObjectiveId id : kObjectives) {
        pri[std::string(to_string(id))] = in.priorities[id];
        imp[std::string(to_string(id))] = std::string(to_string(in.impacts[id]));
    }
    return json{{"probability", in.probability.level},
                {"priorities", pri},
                {"impacts", imp},
                {"thresholds", {in.thresholds.pool1, in.thresholds.pool2, in.thresholds.pool3}}};
}

json risk_report_to_json(const RiskReport& r) {
    json scores = json::object();
    for (ObjectiveId id : kObjectives)
        scores[std::string(to_string(id))] = r.per_objective_scores[static_cast<std::size_t>(id)];
    return json{{"probability", r.probability},
                {"damage", r.damage},
                {"risk", r.risk},
                {"pool", r.pool},
                {"per_objective_scores", scores}};
}

}  // namespace cpes::io

namespace cpes::risk {

RiskInput parse_risk_input(std::string_view document) { return io::risk_input_from_json(io::parse(document), ""); }

std::string risk_input_to_json(const RiskInput& in) { return io::risk_input_to_json(in).dump(2); }

std::string report_to_json(const RiskReport& r) { return io::risk_report_to_json(r).dump(2); }

std::string report_to_text(const RiskReport& r) {
    std::ostringstream os;
    os << "objective                   score\n";
    for (ObjectiveId id : kObjectives) {
        std::string name(to_string(id));
        name.resize(28, ' ');
        os << name << r.per_objective_scores[static_cast<std::size_t>(id)] << '\n';
    }
    os << "damage                      " << r.damage << '\n'
       << "threat probability          " << r.probability << '\n'
       << "risk                        " << r.risk << '\n'
       << "pool                        " << r.pool << '\n';
    return os.str();
}

}  // namespace cpes::risk
