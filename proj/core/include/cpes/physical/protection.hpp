#pragma once

#include <cstdint>
#include <string_view>

namespace cpes::phys {

struct FrequencyProtection {
    double governor_deadband = 0.036;
    double shed_low = 58.4;
    double shed_high = 59.5;
    double underfreq_trip = 57.8;
    double overfreq_trip = 62.2;
};

enum class ProtectionAction : std::uint8_t { None, Governor, LoadShed, UnderfreqTrip, OverfreqTrip };

std::string_view to_string(ProtectionAction a);

/// Throws cpes::ValidationError unless
/// underfreq_trip < shed_low < shed_high < f_nom < overfreq_trip.
void check(const FrequencyProtection& p, double f_nom);

/// Total over f; precedence: overfreq trip, underfreq trip, shed band, governor, none.
ProtectionAction protection_check(double f, const FrequencyProtection& p, double f_nom = 60.0);

}  // namespace cpes::phys
