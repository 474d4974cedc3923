#pragma once

// Risk = Threat Probability x Damage, Damage = sum over objectives of
// Objective Priority x Attack Impact. Integer arithmetic throughout.

#include <array>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace cpes::risk {

enum class ObjectiveId : std::uint8_t {
    PeopleHealthSafety,
    UninterruptedOperation,
    FinancialProfit,
    EquipmentDamageLegal,
};

inline constexpr std::size_t kObjectiveCount = 4;
inline constexpr std::array<ObjectiveId, kObjectiveCount> kObjectives{
    ObjectiveId::PeopleHealthSafety, ObjectiveId::UninterruptedOperation, ObjectiveId::FinancialProfit,
    ObjectiveId::EquipmentDamageLegal};

enum class Impact : std::uint8_t { Low = 1, Medium = 2, High = 3 };

std::string_view to_string(ObjectiveId id);
std::string_view to_string(Impact i);

/// Values must be a permutation of {1,2,3,4}; 4 is the most critical objective.
struct PrioritySet {
    std::array<int, kObjectiveCount> priority{};

    int operator[](ObjectiveId id) const { return priority[static_cast<std::size_t>(id)]; }
    int& operator[](ObjectiveId id) { return priority[static_cast<std::size_t>(id)]; }

    /// health=4, operation=3, equipment=2, profit=1.
    static PrioritySet cpes_default();
};

struct ImpactVector {
    std::array<Impact, kObjectiveCount> impact{Impact::Low, Impact::Low, Impact::Low, Impact::Low};

    Impact operator[](ObjectiveId id) const { return impact[static_cast<std::size_t>(id)]; }
    Impact& operator[](ObjectiveId id) { return impact[static_cast<std::size_t>(id)]; }
};

/// Low=1, Medium=2, High=3.
struct ThreatProbability {
    int level = 1;
};

struct DamageBreakdown {
    int total = 0;
    std::array<int, kObjectiveCount> per_objective{};
};

struct PoolThresholds {
    int pool1 = 70;
    int pool2 = 50;
    int pool3 = 30;
};

struct RiskReport {
    int probability = 0;
    int damage = 0;
    int risk = 0;
    std::array<int, kObjectiveCount> per_objective_scores{};
    int pool = 4;
};

/// Throws cpes::ValidationError when the priorities are not a permutation of 1..4.
void check_priorities(const PrioritySet& p);
/// Throws cpes::ValidationError for impacts outside {1,2,3}.
void check_impacts(const ImpactVector& i);
/// Throws cpes::ValidationError for levels outside {1,2,3}.
void check_probability(ThreatProbability prob);
/// Throws cpes::ValidationError unless strictly descending and within [10, 90].
void check_thresholds(const PoolThresholds& t);

DamageBreakdown damage(const PrioritySet& p, const ImpactVector& i);

int assign_pool(int risk, const PoolThresholds& t = {});

RiskReport assess(ThreatProbability prob, const PrioritySet& p, const ImpactVector& i,
                  const PoolThresholds& t = {});

struct NamedRisk {
    std::string name;
    RiskReport report;
};

struct RankedRisk {
    std::string name;
    int risk = 0;
    int pool = 4;
};

/// Sorted by descending risk; ties keep input order.
std::vector<RankedRisk> pool_rank(const std::vector<NamedRisk>& risks, const PoolThresholds& t = {});

struct RiskInput {
    ThreatProbability probability;
    PrioritySet priorities;
    ImpactVector impacts;
    PoolThresholds thresholds;
};

/// {"probability": 2, "priorities": {...}, "impacts": {...}, "thresholds": [70,50,30]?}
/// Impacts accept "low"/"medium"/"high" or 1..3. Throws cpes::ParseError.
RiskInput parse_risk_input(std::string_view document);
std::string risk_input_to_json(const RiskInput& in);
std::string report_to_json(const RiskReport& r);
std::string report_to_text(const RiskReport& r);

}  // namespace cpes::risk
