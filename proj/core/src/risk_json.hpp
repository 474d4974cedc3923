#pragma once

#include "cpes/risk.hpp"
#include "json_io.hpp"

namespace cpes::io {

risk::RiskInput risk_input_from_json(const json& doc, const std::string& path);
json risk_input_to_json(const risk::RiskInput& in);
json risk_report_to_json(const risk::RiskReport& r);

}  // namespace cpes::io
