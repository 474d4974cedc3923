#pragma once

#include <string_view>
#include <vector>

#include "cpes/cosim/scenario.hpp"

namespace cpes::cosim {

struct PresetInfo {
    std::string_view name;
    std::string_view description;
    std::vector<std::string_view> variants;  // first entry is the default
};

const std::vector<PresetInfo>& preset_list();

/// "name" or "name:variant". The result is in canonical form, so
/// parse_scenario(emit_scenario(s)) reproduces it exactly.
/// Throws cpes::ValidationError for an unknown name or variant.
Scenario preset_scenario(std::string_view spec);

}  // namespace cpes::cosim
