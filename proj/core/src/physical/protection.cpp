#include "cpes/physical/protection.hpp"

#include <cmath>

#include "cpes/error.hpp"

namespace cpes::phys {

std::string_view to_string(ProtectionAction a) {
    switch (a) {
        case ProtectionAction::None: return "none";
        case ProtectionAction::Governor: return "governor";
        case ProtectionAction::LoadShed: return "load_shed";
        case ProtectionAction::UnderfreqTrip: return "underfreq_trip";
        case ProtectionAction::OverfreqTrip: return "overfreq_trip";
    }
    return "<invalid>";
}

void check(const FrequencyProtection& p, double f_nom) {
    if (!(p.underfreq_trip < p.shed_low && p.shed_low < p.shed_high && p.shed_high < f_nom &&
          f_nom < p.overfreq_trip))
        throw ValidationError("protection thresholds must satisfy underfreq_trip < shed_low < shed_high < f_nom < overfreq_trip");
    if (!(p.governor_deadband >= 0.0)) throw ValidationError("governor deadband must be >= 0");
}

ProtectionAction protection_check(double f, const FrequencyProtection& p, double f_nom) {
    if (f >= p.overfreq_trip) return ProtectionAction::OverfreqTrip;
    if (f <= p.underfreq_trip) return ProtectionAction::UnderfreqTrip;
    if (f >= p.shed_low && f <= p.shed_high) return ProtectionAction::LoadShed;
    if (std::abs(f - f_nom) > p.governor_deadband) return ProtectionAction::Governor;
    return ProtectionAction::None;
}

}  // namespace cpes::phys
