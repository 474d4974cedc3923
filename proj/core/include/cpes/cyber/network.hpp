#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "cpes/cyber/event_log.hpp"
#include "cpes/cyber/event_queue.hpp"
#include "cpes/rng.hpp"

namespace cpes::cyber {

enum class NodeRole { Endpoint, Router };
enum class PacketKind { MeasurementReport, ControlCommand, Poll, Ack };

std::string_view to_string(NodeRole r);
std::string_view to_string(PacketKind k);

/// Polls each listed outstation once per period. Outstation j is offset by
/// j * period / N so replies do not contend for shared links.
struct MasterApp {
    double poll_period = 0.0;  // 0: no polling
    std::vector<std::string> outstations;
};

/// Reports the latest sensed values of its bound grid asset ("load:L1",
/// "breaker:pcc", "machine:G1", "plant:pv") and applies received commands.
struct OutstationApp {
    std::string asset;
};

struct NetNode {
    std::string id;
    NodeRole role = NodeRole::Endpoint;
    std::size_t queue_capacity = 64;
    double processing_delay = 0.0;
    std::optional<MasterApp> master;
    std::optional<OutstationApp> outstation;
};

struct NetLink {
    std::string id;
    std::string a;
    std::string b;
    double bandwidth = 100e6;  // bit/s
    double prop_delay = 1e-3;  // s
    double jitter = 0.0;       // uniform +-jitter, s
    double loss_rate = 0.0;
};

/// Breaker or load action carried by a ControlCommand.
struct Command {
    std::string action;  // open_breaker, close_breaker, shed_load, restore_load
    std::string target;  // asset id
};

struct ScheduledCommand {
    double time = 0.0;
    std::string from;
    std::string to;
    Command command;
};

struct NetworkModel {
    std::vector<NetNode> nodes;
    std::vector<NetLink> links;
    std::vector<ScheduledCommand> commands;
    std::size_t message_bytes = 292;

    std::optional<std::size_t> node_index(const std::string& id) const;
    std::optional<std::size_t> link_index(const std::string& id) const;
};

/// Throws cpes::ValidationError naming the first broken invariant.
void check(const NetworkModel& m);

/// Minimum-hop path from src to dst as link ids; ties go to the
/// lexicographically smallest node sequence. Empty for src == dst.
/// Throws cpes::ValidationError if dst is unreachable.
std::vector<std::string> route(const NetworkModel& m, const std::string& src, const std::string& dst);

using Payload = std::variant<std::monostate, std::vector<double>, Command>;

struct Packet {
    std::uint64_t id = 0;
    std::string src;
    std::string dst;
    std::size_t size = 0;
    double created = 0.0;
    PacketKind kind = PacketKind::Poll;
    Payload payload;
    std::uint64_t reply_to = 0;    // request id for replies
    double request_created = 0.0;  // creation time of the request, for round trips
    double baseline = 0.0;         // analytic delay of the static path
    std::size_t hops = 0;
};

/// Link-level attack hook. `active(t)` gates by transmit start time; `delay(t)`
/// is the extra latency in seconds (ignored for drop hooks).
struct LinkImpairment {
    enum class Kind { Delay, Drop };
    std::string link;
    std::string attack_id;
    Kind kind = Kind::Delay;
    std::function<bool(double)> active;
    std::function<double(double)> delay;
};

/// Discrete-event network bound to an external queue and log.
class Network {
public:
    Network(NetworkModel model, EventQueue& queue, EventLog& log, std::uint64_t seed);

    void add_impairment(LinkImpairment imp);

    /// Snapshot of a bound asset for measurement reports.
    std::function<std::vector<double>(const std::string& asset)> measure;
    /// Invoked when a command reaches its outstation.
    std::function<void(const Command& cmd, double t, std::uint64_t packet_id, const std::string& node)> on_command;

    /// Schedule polls and commands up to (excluding) the horizon.
    void start(double horizon);

    /// Create a packet at the queue's current time and start forwarding it.
    std::uint64_t send(const std::string& src, const std::string& dst, PacketKind kind, Payload payload,
                       std::size_t bytes, std::uint64_t reply_to = 0, double request_created = 0.0);

    /// Analytic delay of the static path: sum over links of size*8/bandwidth + prop.
    double baseline_delay(const std::string& src, const std::string& dst, std::size_t bytes) const;

    const NetworkModel& model() const { return model_; }

private:
    struct NodeState {
        std::size_t occupancy = 0;
        double busy_until = 0.0;
    };
    struct LinkState {
        double busy_until[2] = {0.0, 0.0};
        Rng rng;
    };

    void forward(std::size_t node, Packet pkt);
    void arrive(std::size_t node, Packet pkt);
    void process(std::size_t node, Packet pkt);
    void deliver(std::size_t node, Packet pkt);
    void drop(const std::string& node, const Packet& pkt, const char* reason, const std::string& where);
    double poll_time(std::size_t master, std::size_t j, std::size_t k) const;
    void schedule_poll(std::size_t master, std::size_t j, std::size_t k);
    std::string flow(const Packet& p) const;

    NetworkModel model_;
    EventQueue& queue_;
    EventLog& log_;
    std::vector<NodeState> nodes_;
    std::vector<LinkState> links_;
    std::vector<LinkImpairment> impairments_;
    // next_link_[from][to]: index of the first link on the route, or npos.
    std::vector<std::vector<std::size_t>> next_link_;
    std::uint64_t next_packet_ = 1;
    double horizon_ = 0.0;
};

}  // namespace cpes::cyber
