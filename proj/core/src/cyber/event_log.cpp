#include "cpes/cyber/event_log.hpp"

#include <algorithm>

#include "cpes/error.hpp"
#include "cpes/format.hpp"
#include "json_io.hpp"

namespace cpes::cyber {

std::optional<std::string_view> LogRecord::get(std::string_view key) const {
    for (const auto& [k, v] : detail)
        if (k == key) return std::string_view(v);
    return std::nullopt;
}

double LogRecord::number(std::string_view key) const {
    auto s = get(key);
    if (!s) throw ParseError(event + "." + std::string(key), "missing detail field");
    auto v = parse_double(*s);
    if (!v) throw ParseError(event + "." + std::string(key), "not a number: " + std::string(*s));
    return *v;
}

std::size_t EventLog::count(std::string_view event) const {
    return static_cast<std::size_t>(
        std::count_if(records_.begin(), records_.end(), [&](const LogRecord& r) { return r.event == event; }));
}

std::string EventLog::to_json() const {
    json arr = json::array();
    for (const auto& r : records_) {
        json d = json::object();
        for (const auto& [k, v] : r.detail) d[k] = v;
        json o = json::object();
        o["t"] = format_double(r.t);
        o["event"] = r.event;
        o["node"] = r.node;
        o["packet_id"] = r.packet_id ? json(*r.packet_id) : json(nullptr);
        o["detail"] = std::move(d);
        arr.push_back(std::move(o));
    }
    return arr.dump(1) + "\n";
}

std::string EventLog::to_csv() const {
    std::string out = "t,event,node,packet_id,detail\n";
    for (const auto& r : records_) {
        out += format_double(r.t);
        out += ',';
        out += r.event;
        out += ',';
        out += r.node;
        out += ',';
        if (r.packet_id) out += std::to_string(*r.packet_id);
        out += ',';
        for (std::size_t i = 0; i < r.detail.size(); ++i) {
            if (i) out += ';';
            out += r.detail[i].first;
            out += '=';
            out += r.detail[i].second;
        }
        out += '\n';
    }
    return out;
}

EventLog EventLog::from_json(std::string_view document) {
    const json doc = io::parse(document);
    if (!doc.is_array()) throw ParseError("", "event log must be a JSON array");
    EventLog log;
    for (std::size_t i = 0; i < doc.size(); ++i) {
        const std::string path = io::index("", i);
        const json& o = doc[i];
        LogRecord r;
        const std::string t = io::get_string(o, "t", path);
        auto tv = parse_double(t);
        if (!tv) throw ParseError(io::join(path, "t"), "not a number");
        r.t = *tv;
        r.event = io::get_string(o, "event", path);
        r.node = io::get_string(o, "node", path);
        const json& pid = io::require(o, "packet_id", path);
        if (pid.is_number_unsigned()) r.packet_id = pid.get<std::uint64_t>();
        else if (!pid.is_null()) throw ParseError(io::join(path, "packet_id"), "expected an id or null");
        const json& d = io::require(o, "detail", path);
        if (!d.is_object()) throw ParseError(io::join(path, "detail"), "expected an object");
        for (auto it = d.begin(); it != d.end(); ++it) {
            if (!it.value().is_string()) throw ParseError(io::join(path, "detail." + it.key()), "expected a string");
            r.detail.emplace_back(it.key(), it.value().get<std::string>());
        }
        log.add(std::move(r));
    }
    return log;
}

std::pair<std::string, std::string> kv(std::string key, double value) {
    return {std::move(key), format_double(value)};
}
std::pair<std::string, std::string> kv(std::string key, std::string value) {
    return {std::move(key), std::move(value)};
}
std::pair<std::string, std::string> kv(std::string key, const char* value) { return {std::move(key), value}; }
std::pair<std::string, std::string> kv(std::string key, std::uint64_t value) {
    return {std::move(key), std::to_string(value)};
}

}  // namespace cpes::cyber
