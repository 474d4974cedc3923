#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace cpes::cyber {

/// One run event. Numeric detail values are stored in shortest round-trip
/// form so metrics recomputed from an exported log match bit-for-bit.
struct LogRecord {
    double t = 0.0;
    std::string event;  // send, link_tx, drop, attack_delay, deliver, poll_rtt, command_applied, ...
    std::string node;
    std::optional<std::uint64_t> packet_id;
    std::vector<std::pair<std::string, std::string>> detail;

    std::optional<std::string_view> get(std::string_view key) const;
    /// Throws cpes::ParseError if the key is missing or not a number.
    double number(std::string_view key) const;
};

class EventLog {
public:
    void add(LogRecord r) { records_.push_back(std::move(r)); }
    const std::vector<LogRecord>& records() const { return records_; }
    std::size_t size() const { return records_.size(); }
    std::size_t count(std::string_view event) const;

    /// JSON array of {t, event, node, packet_id, detail{...}}.
    std::string to_json() const;
    /// Columns t,event,node,packet_id,detail with detail as "k=v;k=v".
    std::string to_csv() const;
    /// Throws cpes::ParseError naming the offending record.
    static EventLog from_json(std::string_view document);

private:
    std::vector<LogRecord> records_;
};

/// Builder for detail lists: kv("delay", 0.5), kv("reason", "loss").
std::pair<std::string, std::string> kv(std::string key, double value);
std::pair<std::string, std::string> kv(std::string key, std::string value);
std::pair<std::string, std::string> kv(std::string key, const char* value);
std::pair<std::string, std::string> kv(std::string key, std::uint64_t value);

}  // namespace cpes::cyber
