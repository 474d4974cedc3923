#pragma once

// Private JSON helpers shared by the document readers. Not installed.

#include <string>
#include <string_view>
#include <vector>

#include "cpes/error.hpp"
#include "json.hpp"

namespace cpes {

using json = nlohmann::json;

namespace threat {
struct ThreatModel;
}

namespace io {

inline std::string join(const std::string& parent, std::string_view key) {
    return parent.empty() ? std::string(key) : parent + "." + std::string(key);
}

inline std::string index(const std::string& parent, std::size_t i) {
    return parent + "[" + std::to_string(i) + "]";
}

inline json parse(std::string_view text) {
    try {
        return json::parse(text.begin(), text.end());
    } catch (const json::parse_error& e) {
        throw ParseError("byte " + std::to_string(e.byte), std::string("malformed JSON: ") + e.what());
    }
}

inline const json& require(const json& obj, std::string_view key, const std::string& parent) {
    if (!obj.is_object()) throw ParseError(parent, "expected an object");
    auto it = obj.find(key);
    if (it == obj.end()) throw ParseError(join(parent, key), "missing required field");
    return *it;
}

inline double get_number(const json& obj, std::string_view key, const std::string& parent) {
    const json& v = require(obj, key, parent);
    if (!v.is_number()) throw ParseError(join(parent, key), "expected a number");
    return v.get<double>();
}

inline double get_number_or(const json& obj, std::string_view key, const std::string& parent, double fallback) {
    return obj.contains(key) ? get_number(obj, key, parent) : fallback;
}

inline long long get_integer(const json& obj, std::string_view key, const std::string& parent) {
    const json& v = require(obj, key, parent);
    if (!v.is_number_integer()) throw ParseError(join(parent, key), "expected an integer");
    return v.get<long long>();
}

inline std::string get_string(const json& obj, std::string_view key, const std::string& parent) {
    const json& v = require(obj, key, parent);
    if (!v.is_string()) throw ParseError(join(parent, key), "expected a string");
    return v.get<std::string>();
}

inline bool get_bool_or(const json& obj, std::string_view key, const std::string& parent, bool fallback) {
    if (!obj.contains(key)) return fallback;
    const json& v = obj.at(std::string(key));
    if (!v.is_boolean()) throw ParseError(join(parent, key), "expected a boolean");
    return v.get<bool>();
}

inline std::vector<double> get_vector(const json& v, const std::string& path) {
    if (!v.is_array()) throw ParseError(path, "expected an array of numbers");
    std::vector<double> out;
    out.reserve(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (!v[i].is_number()) throw ParseError(index(path, i), "expected a number");
        out.push_back(v[i].get<double>());
    }
    return out;
}

json threat_to_json(const threat::ThreatModel& tm);
threat::ThreatModel threat_from_json(const json& doc, const std::string& path);

}  // namespace io
}  // namespace cpes
