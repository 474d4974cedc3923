#include "cpes/cyber/network.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <random>
#include <set>

#include "cpes/error.hpp"

namespace cpes::cyber {

namespace {

constexpr std::size_t npos = std::numeric_limits<std::size_t>::max();
constexpr double kPollGuard = 1e-9;

struct Adjacent {
    std::size_t node;
    std::size_t link;
};

std::vector<std::vector<Adjacent>> adjacency(const NetworkModel& m) {
    std::vector<std::vector<Adjacent>> adj(m.nodes.size());
    for (std::size_t l = 0; l < m.links.size(); ++l) {
        const auto a = *m.node_index(m.links[l].a);
        const auto b = *m.node_index(m.links[l].b);
        adj[a].push_back({b, l});
        adj[b].push_back({a, l});
    }
    return adj;
}

// Only routers relay, so BFS expands through routers and the destination.
std::vector<std::size_t> hops_to(const NetworkModel& m, const std::vector<std::vector<Adjacent>>& adj,
                                 std::size_t dst) {
    std::vector<std::size_t> dist(m.nodes.size(), npos);
    std::deque<std::size_t> q{dst};
    dist[dst] = 0;
    while (!q.empty()) {
        const auto u = q.front();
        q.pop_front();
        if (u != dst && m.nodes[u].role != NodeRole::Router) continue;
        for (const auto& e : adj[u]) {
            if (dist[e.node] != npos) continue;
            dist[e.node] = dist[u] + 1;
            q.push_back(e.node);
        }
    }
    return dist;
}

std::vector<std::vector<std::size_t>> next_links(const NetworkModel& m) {
    const auto adj = adjacency(m);
    const auto n = m.nodes.size();
    std::vector<std::vector<std::size_t>> table(n, std::vector<std::size_t>(n, npos));
    for (std::size_t dst = 0; dst < n; ++dst) {
        const auto dist = hops_to(m, adj, dst);
        for (std::size_t u = 0; u < n; ++u) {
            if (u == dst || dist[u] == npos) continue;
            const Adjacent* best = nullptr;
            for (const auto& e : adj[u]) {
                if (dist[e.node] == npos || dist[e.node] + 1 != dist[u]) continue;
                if (e.node != dst && m.nodes[e.node].role != NodeRole::Router) continue;
                if (!best || m.nodes[e.node].id < m.nodes[best->node].id ||
                    (e.node == best->node && m.links[e.link].id < m.links[best->link].id))
                    best = &e;
            }
            if (best) table[u][dst] = best->link;
        }
    }
    return table;
}

std::size_t other_end(const NetworkModel& m, std::size_t link, std::size_t from) {
    const auto a = *m.node_index(m.links[link].a);
    return a == from ? *m.node_index(m.links[link].b) : a;
}

}  // namespace

std::string_view to_string(NodeRole r) { return r == NodeRole::Router ? "router" : "endpoint"; }

std::string_view to_string(PacketKind k) {
    switch (k) {
        case PacketKind::MeasurementReport: return "measurement_report";
        case PacketKind::ControlCommand: return "control_command";
        case PacketKind::Poll: return "poll";
        case PacketKind::Ack: return "ack";
    }
    return "<invalid>";
}

std::optional<std::size_t> NetworkModel::node_index(const std::string& id) const {
    for (std::size_t i = 0; i < nodes.size(); ++i)
        if (nodes[i].id == id) return i;
    return std::nullopt;
}

std::optional<std::size_t> NetworkModel::link_index(const std::string& id) const {
    for (std::size_t i = 0; i < links.size(); ++i)
        if (links[i].id == id) return i;
    return std::nullopt;
}

void check(const NetworkModel& m) {
    if (m.message_bytes == 0) throw ValidationError("network: message size must be > 0");
    std::set<std::string> ids;
    for (const auto& n : m.nodes) {
        if (n.id.empty() || !ids.insert(n.id).second) throw ValidationError("network: duplicate or empty node id " + n.id);
        if (n.queue_capacity == 0) throw ValidationError("node " + n.id + ": queue capacity must be >= 1");
        if (!(n.processing_delay >= 0.0)) throw ValidationError("node " + n.id + ": processing delay must be >= 0");
        if (n.role == NodeRole::Router && (n.master || n.outstation))
            throw ValidationError("node " + n.id + ": apps run on endpoints only");
        if (n.master && n.outstation) throw ValidationError("node " + n.id + ": one app per node");
    }
    std::set<std::string> link_ids;
    std::vector<int> degree(m.nodes.size(), 0);
    for (const auto& l : m.links) {
        if (l.id.empty() || !link_ids.insert(l.id).second)
            throw ValidationError("network: duplicate or empty link id " + l.id);
        auto a = m.node_index(l.a), b = m.node_index(l.b);
        if (!a || !b || *a == *b) throw ValidationError("link " + l.id + ": bad endpoints");
        if (!(l.bandwidth > 0.0)) throw ValidationError("link " + l.id + ": bandwidth must be > 0");
        if (!(l.prop_delay >= 0.0)) throw ValidationError("link " + l.id + ": propagation delay must be >= 0");
        if (!(l.jitter >= 0.0)) throw ValidationError("link " + l.id + ": jitter must be >= 0");
        if (!(l.loss_rate >= 0.0 && l.loss_rate <= 1.0))
            throw ValidationError("link " + l.id + ": loss rate must lie in [0, 1]");
        ++degree[*a];
        ++degree[*b];
    }
    for (std::size_t i = 0; i < m.nodes.size(); ++i)
        if (m.nodes[i].role == NodeRole::Endpoint && degree[i] == 0)
            throw ValidationError("node " + m.nodes[i].id + ": endpoint without an interface");

    auto is_outstation = [&](const std::string& id) {
        auto i = m.node_index(id);
        return i && m.nodes[*i].outstation.has_value();
    };
    for (const auto& n : m.nodes) {
        if (!n.master) continue;
        if (n.master->poll_period < 0.0) throw ValidationError("node " + n.id + ": poll period must be >= 0");
        for (const auto& o : n.master->outstations) {
            if (!is_outstation(o)) throw ValidationError("master " + n.id + " polls unknown outstation " + o);
            route(m, n.id, o);
            route(m, o, n.id);
        }
    }
    for (const auto& c : m.commands) {
        auto from = m.node_index(c.from);
        if (!from || !m.nodes[*from].master) throw ValidationError("command source must be a master: " + c.from);
        if (!is_outstation(c.to)) throw ValidationError("command target must be an outstation: " + c.to);
        if (!(c.time >= 0.0)) throw ValidationError("command time must be >= 0");
        static const std::set<std::string> actions{"open_breaker", "close_breaker", "shed_load", "restore_load"};
        if (!actions.count(c.command.action)) throw ValidationError("unknown command action: " + c.command.action);
        route(m, c.from, c.to);
        route(m, c.to, c.from);
    }
}

std::vector<std::string> route(const NetworkModel& m, const std::string& src, const std::string& dst) {
    auto s = m.node_index(src), d = m.node_index(dst);
    if (!s || !d) throw ValidationError("route: unknown node " + (s ? dst : src));
    std::vector<std::string> path;
    if (*s == *d) return path;
    const auto table = next_links(m);
    std::size_t u = *s;
    while (u != *d) {
        const auto l = table[u][*d];
        if (l == npos) throw ValidationError("no route from " + src + " to " + dst);
        path.push_back(m.links[l].id);
        u = other_end(m, l, u);
    }
    return path;
}

// ---------------------------------------------------------------------------

Network::Network(NetworkModel model, EventQueue& queue, EventLog& log, std::uint64_t seed)
    : model_(std::move(model)), queue_(queue), log_(log) {
    check(model_);
    nodes_.resize(model_.nodes.size());
    for (const auto& l : model_.links) links_.push_back({{0.0, 0.0}, stream(seed, "net:link:" + l.id)});
    next_link_ = next_links(model_);
}

void Network::add_impairment(LinkImpairment imp) {
    if (!model_.link_index(imp.link)) throw ValidationError("attack " + imp.attack_id + ": unknown link " + imp.link);
    impairments_.push_back(std::move(imp));
}

double Network::baseline_delay(const std::string& src, const std::string& dst, std::size_t bytes) const {
    auto u = model_.node_index(src), d = model_.node_index(dst);
    if (!u || !d) throw ValidationError("baseline: unknown node");
    double total = 0.0;
    for (std::size_t at = *u; at != *d;) {
        const auto l = next_link_[at][*d];
        if (l == npos) throw ValidationError("no route from " + src + " to " + dst);
        const auto& link = model_.links[l];
        total += static_cast<double>(bytes) * 8.0 / link.bandwidth + link.prop_delay;
        at = other_end(model_, l, at);
    }
    return total;
}

std::string Network::flow(const Packet& p) const { return p.src + ">" + p.dst + ":" + std::string(to_string(p.kind)); }

void Network::start(double horizon) {
    horizon_ = horizon;
    for (std::size_t i = 0; i < model_.nodes.size(); ++i) {
        const auto& n = model_.nodes[i];
        if (!n.master || n.master->poll_period <= 0.0) continue;
        for (std::size_t j = 0; j < n.master->outstations.size(); ++j) {
            if (poll_time(i, j, 0) < horizon - kPollGuard) schedule_poll(i, j, 0);
        }
    }
    for (const auto& c : model_.commands) {
        if (c.time >= horizon) continue;
        queue_.schedule(c.time, [this, c] {
            send(c.from, c.to, PacketKind::ControlCommand, c.command, model_.message_bytes);
        });
    }
}

double Network::poll_time(std::size_t master, std::size_t j, std::size_t k) const {
    const auto& app = *model_.nodes[master].master;
    const double count = static_cast<double>(app.outstations.size());
    return app.poll_period * (static_cast<double>(k) + static_cast<double>(j) / count);
}

void Network::schedule_poll(std::size_t master, std::size_t j, std::size_t k) {
    queue_.schedule(poll_time(master, j, k), [this, master, j, k] {
        const auto& app = *model_.nodes[master].master;
        send(model_.nodes[master].id, app.outstations[j], PacketKind::Poll, std::monostate{}, model_.message_bytes);
        if (poll_time(master, j, k + 1) < horizon_ - kPollGuard) schedule_poll(master, j, k + 1);
    });
}

std::uint64_t Network::send(const std::string& src, const std::string& dst, PacketKind kind, Payload payload,
                            std::size_t bytes, std::uint64_t reply_to, double request_created) {
    auto s = model_.node_index(src);
    if (!s || !model_.node_index(dst)) throw ValidationError("send: unknown node");
    if (bytes == 0) throw ValidationError("packet size must be > 0");
    Packet p;
    p.id = next_packet_++;
    p.src = src;
    p.dst = dst;
    p.size = bytes;
    p.created = queue_.now();
    p.kind = kind;
    p.payload = std::move(payload);
    p.reply_to = reply_to;
    p.request_created = request_created;
    p.baseline = baseline_delay(src, dst, bytes);
    LogRecord r{p.created, "send", src, p.id,
                {kv("dst", dst), kv("kind", std::string(to_string(kind))), kv("flow", flow(p)),
                 kv("bytes", std::uint64_t{bytes})}};
    if (const auto* c = std::get_if<Command>(&p.payload)) {
        r.detail.push_back(kv("action", c->action));
        r.detail.push_back(kv("target", c->target));
    }
    log_.add(std::move(r));
    const auto id = p.id;
    process(*s, std::move(p));
    return id;
}

void Network::drop(const std::string& node, const Packet& p, const char* reason, const std::string& where) {
    LogRecord r{queue_.now(), "drop", node, p.id, {kv("reason", reason), kv("flow", flow(p))}};
    if (!where.empty()) r.detail.push_back(kv("link", where));
    log_.add(std::move(r));
    if (const auto* c = std::get_if<Command>(&p.payload))
        log_.add({queue_.now(), "command_lost", p.dst, p.id,
                  {kv("action", c->action), kv("target", c->target), kv("reason", reason)}});
}

void Network::forward(std::size_t u, Packet p) {
    const auto dst = *model_.node_index(p.dst);
    const auto l = next_link_[u][dst];
    if (l == npos) {
        drop(model_.nodes[u].id, p, "no_route", "");
        return;
    }
    const NetLink& link = model_.links[l];
    LinkState& st = links_[l];
    const int dir = model_.nodes[u].id == link.a ? 0 : 1;
    const double now = queue_.now();
    const double start = std::max(now, st.busy_until[dir]);
    const double tx = static_cast<double>(p.size) * 8.0 / link.bandwidth;
    const double end = start + tx;
    st.busy_until[dir] = end;
    const std::size_t v = other_end(model_, l, u);
    log_.add({now, "link_tx", model_.nodes[u].id, p.id,
              {kv("link", link.id), kv("to", model_.nodes[v].id), kv("bytes", std::uint64_t{p.size}),
               kv("start", start), kv("end", end), kv("duration", tx)}});

    double extra = 0.0;
    for (const auto& imp : impairments_) {
        if (imp.link != link.id || !imp.active(start)) continue;
        if (imp.kind == LinkImpairment::Kind::Drop) {
            drop(model_.nodes[u].id, p, "attack", link.id);
            return;
        }
        extra += imp.delay(start);
    }
    if (link.loss_rate > 0.0) {
        std::bernoulli_distribution lost(link.loss_rate);
        if (lost(st.rng)) {
            drop(model_.nodes[u].id, p, "loss", link.id);
            return;
        }
    }
    double prop = link.prop_delay;
    if (link.jitter > 0.0) {
        std::uniform_real_distribution<double> jit(-link.jitter, link.jitter);
        prop = std::max(0.0, prop + jit(st.rng));
    }
    if (extra > 0.0)
        log_.add({now, "attack_delay", model_.nodes[u].id, p.id,
                  {kv("link", link.id), kv("delay", extra), kv("flow", flow(p))}});
    ++p.hops;
    const double arrival = end + prop + extra;
    queue_.schedule(arrival, [this, v, p = std::move(p)]() mutable { arrive(v, std::move(p)); });
}

void Network::arrive(std::size_t v, Packet p) {
    const NetNode& node = model_.nodes[v];
    NodeState& st = nodes_[v];
    if (node.processing_delay == 0.0) {
        process(v, std::move(p));
        return;
    }
    if (st.occupancy >= node.queue_capacity) {
        drop(node.id, p, "queue", "");
        return;
    }
    ++st.occupancy;
    const double done = std::max(queue_.now(), st.busy_until) + node.processing_delay;
    st.busy_until = done;
    queue_.schedule(done, [this, v, p = std::move(p)]() mutable {
        --nodes_[v].occupancy;
        process(v, std::move(p));
    });
}

void Network::process(std::size_t v, Packet p) {
    if (model_.nodes[v].id == p.dst) deliver(v, std::move(p));
    else forward(v, std::move(p));
}

void Network::deliver(std::size_t v, Packet p) {
    const NetNode& node = model_.nodes[v];
    const double now = queue_.now();
    log_.add({now, "deliver", node.id, p.id,
              {kv("src", p.src), kv("kind", std::string(to_string(p.kind))), kv("flow", flow(p)),
               kv("created", p.created), kv("delay", now - p.created), kv("baseline", p.baseline),
               kv("hops", std::uint64_t{p.hops}), kv("bytes", std::uint64_t{p.size})}});
    switch (p.kind) {
        case PacketKind::Poll:
            if (node.outstation) {
                std::vector<double> values;
                if (measure) values = measure(node.outstation->asset);
                send(node.id, p.src, PacketKind::MeasurementReport, std::move(values), model_.message_bytes, p.id,
                     p.created);
            }
            break;
        case PacketKind::MeasurementReport:
            if (node.master)
                log_.add({now, "poll_rtt", node.id, p.id,
                          {kv("outstation", p.src), kv("request", p.reply_to), kv("rtt", now - p.request_created)}});
            break;
        case PacketKind::ControlCommand:
            if (const auto* c = std::get_if<Command>(&p.payload)) {
                if (on_command) on_command(*c, now, p.id, node.id);
                send(node.id, p.src, PacketKind::Ack, std::monostate{}, model_.message_bytes, p.id, p.created);
            }
            break;
        case PacketKind::Ack: break;
    }
}

}  // namespace cpes::cyber
