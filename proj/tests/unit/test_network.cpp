#include "catch_amalgamated.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <map>

#include "cpes/attack.hpp"
#include "cpes/cyber/network.hpp"
#include "cpes/error.hpp"
#include "cpes/metrics.hpp"
#include "gen.hpp"

using namespace cpes::cyber;
using cpes::test::Gen;

namespace {

NetNode endpoint(const std::string& id) { return NetNode{id, NodeRole::Endpoint, 64, 0.0, {}, {}}; }
NetNode router(const std::string& id) { return NetNode{id, NodeRole::Router, 64, 0.0, {}, {}}; }
NetLink link(const std::string& id, const std::string& a, const std::string& b, double mbps = 100.0,
             double prop = 1e-3, double loss = 0.0) {
    return NetLink{id, a, b, mbps * 1e6, prop, 0.0, loss};
}

NetworkModel pair(double loss = 0.0) {
    NetworkModel m;
    m.nodes = {endpoint("a"), endpoint("b")};
    m.links = {link("ab", "a", "b", 100.0, 1e-3, loss)};
    return m;
}

/// Master "m" polling outstation "o" over one symmetric link.
NetworkModel polled(double period, double prop) {
    NetworkModel m;
    auto master = endpoint("m");
    master.master = MasterApp{period, {"o"}};
    auto out = endpoint("o");
    out.outstation = OutstationApp{"load:x"};
    m.nodes = {master, out};
    m.links = {link("mo", "m", "o", 10.0, prop)};
    return m;
}

std::vector<const LogRecord*> records(const EventLog& log, const std::string& event) {
    std::vector<const LogRecord*> out;
    for (const auto& r : log.records())
        if (r.event == event) out.push_back(&r);
    return out;
}

using Hop = std::pair<std::string, std::string>;  // (next node id, link id)

/// Exhaustive search over simple paths whose interior nodes are routers.
std::vector<std::string> route_oracle(const NetworkModel& m, const std::string& src, const std::string& dst) {
    std::vector<Hop> best;
    bool found = false;
    std::vector<Hop> path;
    std::vector<std::string> visited{src};
    std::function<void(const std::string&)> dfs = [&](const std::string& u) {
        if (u == dst) {
            if (!found || path.size() < best.size() || (path.size() == best.size() && path < best)) best = path;
            found = true;
            return;
        }
        if (u != src && m.nodes[*m.node_index(u)].role != NodeRole::Router) return;
        for (const auto& l : m.links) {
            std::string v;
            if (l.a == u) v = l.b;
            else if (l.b == u) v = l.a;
            else continue;
            if (std::find(visited.begin(), visited.end(), v) != visited.end()) continue;
            visited.push_back(v);
            path.emplace_back(v, l.id);
            dfs(v);
            path.pop_back();
            visited.pop_back();
        }
    };
    dfs(src);
    if (!found) throw std::runtime_error("unreachable");
    std::vector<std::string> links;
    for (const auto& h : best) links.push_back(h.second);
    return links;
}

}  // namespace

TEST_CASE("single link delay is size*8/bandwidth + prop", "[network]") {
    EventQueue q;
    EventLog log;
    Network net(pair(), q, log, 1);
    q.schedule(0.0, [&] { net.send("a", "b", PacketKind::Poll, std::monostate{}, 1000); });
    q.run_until(1.0);
    const auto d = records(log, "deliver");
    REQUIRE(d.size() == 1);
    CHECK(std::abs(d[0]->number("delay") - 1.08e-3) <= 1e-12);
    CHECK(std::abs(net.baseline_delay("a", "b", 1000) - 1.08e-3) <= 1e-12);
    const auto c = cpes::metrics::cyber_metrics(log, 1.0);
    CHECK(std::abs(c.avg_delay - 1.08e-3) <= 1e-12);
    CHECK(c.jitter == 0.0);
    CHECK(c.packets_delayed == 0);
}

TEST_CASE("loss rate one drops everything", "[network]") {
    EventQueue q;
    EventLog log;
    Network net(pair(1.0), q, log, 1);
    for (int k = 0; k < 100; ++k)
        q.schedule(k * 1e-3, [&] { net.send("a", "b", PacketKind::Poll, std::monostate{}, 100); });
    q.run_until(1.0);
    CHECK(log.count("deliver") == 0);
    CHECK(log.count("drop") == 100);
}

TEST_CASE("loss estimate within binomial bounds", "[network][property]") {
    for (std::uint64_t seed : {1u, 2u, 3u}) {
        EventQueue q;
        EventLog log;
        Network net(pair(0.1), q, log, seed);
        const int n = 100000;
        for (int k = 0; k < n; ++k)
            q.schedule(k * 1e-3, [&] { net.send("a", "b", PacketKind::Poll, std::monostate{}, 100); });
        q.run_until(1e9);
        const double rate = static_cast<double>(log.count("drop")) / n;
        const double sigma = std::sqrt(0.1 * 0.9 / n);
        CHECK(std::abs(rate - 0.1) <= 3.0 * sigma);
        const auto c = cpes::metrics::cyber_metrics(log, n * 1e-3);
        CHECK(c.sent == static_cast<std::size_t>(n));
        CHECK(c.delivered + c.dropped == c.sent);
        CHECK(c.packets_delayed + c.on_time + c.dropped == c.sent);
    }
}

TEST_CASE("routing", "[network]") {
    NetworkModel chain;
    chain.nodes = {endpoint("a"), router("r"), endpoint("b")};
    chain.links = {link("ar", "a", "r"), link("rb", "r", "b")};
    CHECK(route(chain, "a", "b") == std::vector<std::string>{"ar", "rb"});
    CHECK(route(chain, "a", "a").empty());

    NetworkModel ring;
    ring.nodes = {endpoint("a"), router("r2"), router("r1"), endpoint("c")};
    ring.links = {link("l4", "a", "r2"), link("l3", "r2", "c"), link("l1", "a", "r1"), link("l2", "r1", "c")};
    CHECK(route(ring, "a", "c") == std::vector<std::string>{"l1", "l2"});
    CHECK(route(ring, "a", "c") == route(ring, "a", "c"));

    NetworkModel cut = chain;
    cut.nodes[1].role = NodeRole::Endpoint;
    CHECK_THROWS_AS(route(cut, "a", "b"), cpes::ValidationError);
}

TEST_CASE("routing matches exhaustive path enumeration", "[network][property]") {
    Gen g(91);
    int checked = 0;
    for (int trial = 0; trial < 300; ++trial) {
        NetworkModel m;
        const int n = g.integer(3, 7);
        for (int i = 0; i < n; ++i) {
            auto node = g.coin(0.6) ? router("n" + std::to_string(i)) : endpoint("n" + std::to_string(i));
            m.nodes.push_back(node);
        }
        const int links = g.integer(n, 2 * n);
        for (int k = 0; k < links; ++k) {
            const auto a = g.index(static_cast<std::size_t>(n));
            auto b = g.index(static_cast<std::size_t>(n));
            if (a == b) b = (b + 1) % static_cast<std::size_t>(n);
            m.links.push_back(link("l" + std::to_string(g.next() % 100), m.nodes[a].id, m.nodes[b].id));
        }
        std::sort(m.links.begin(), m.links.end(), [](const auto& x, const auto& y) { return x.id < y.id; });
        m.links.erase(std::unique(m.links.begin(), m.links.end(), [](const auto& x, const auto& y) { return x.id == y.id; }),
                      m.links.end());
        g.shuffle(m.links);
        for (const auto& s : m.nodes)
            for (const auto& d : m.nodes) {
                std::vector<std::string> expect;
                bool reachable = true;
                try {
                    expect = route_oracle(m, s.id, d.id);
                } catch (const std::runtime_error&) {
                    reachable = false;
                }
                if (!reachable) {
                    CHECK_THROWS_AS(route(m, s.id, d.id), cpes::ValidationError);
                    continue;
                }
                REQUIRE(route(m, s.id, d.id) == expect);
                ++checked;
            }
    }
    CHECK(checked > 1000);
}

TEST_CASE("master polls once per period", "[network]") {
    EventQueue q;
    EventLog log;
    Network net(polled(0.1, 2e-3), q, log, 1);
    net.start(1.0);
    q.run_until(1.0 + 1.0);
    CHECK(records(log, "send").size() == 20);
    std::size_t polls = 0;
    for (const auto* r : records(log, "send")) polls += *r->get("kind") == "poll";
    CHECK(polls == 10);
}

TEST_CASE("round trip on a symmetric link is twice the one-way delay", "[network]") {
    EventQueue q;
    EventLog log;
    auto model = polled(0.5, 2e-3);
    Network net(model, q, log, 1);
    net.measure = [](const std::string&) { return std::vector<double>{1.0}; };
    net.start(1.0);
    q.run_until(2.0);
    const double one_way = model.message_bytes * 8.0 / 10e6 + 2e-3;
    const auto rtts = records(log, "poll_rtt");
    REQUIRE(rtts.size() == 2);
    for (const auto* r : rtts) CHECK(std::abs(r->number("rtt") - 2.0 * one_way) < 1e-12);
}

TEST_CASE("delay window shifts replies by exactly the attack delay", "[network]") {
    auto run = [](bool attacked) {
        EventQueue q;
        EventLog log;
        Network net(polled(0.1, 1e-3), q, log, 1);
        if (attacked) {
            cpes::attack::TimeDelay td;
            td.id = "tda";
            td.link = "mo";
            // Off the 0.1 s poll grid so delayed traffic never shares a queue with a later poll.
            td.delay = {{0.0, 0.55}};
            td.window = {{{0.3, 0.6}}};
            net.add_impairment(cpes::attack::link_delay(td));
        }
        net.start(1.0);
        q.run_until(5.0);
        return log;
    };
    const auto base = run(false), hit = run(true);
    // Packet ids shift once replies reorder, so match polls by creation time.
    auto rtt_by_poll_time = [](const EventLog& log) {
        std::map<std::uint64_t, double> created;
        for (const auto* r : records(log, "send")) created[*r->packet_id] = r->t;
        std::map<long long, std::pair<double, double>> out;
        for (const auto* r : records(log, "poll_rtt")) {
            const double t0 = created.at(static_cast<std::uint64_t>(r->number("request")));
            out[std::llround(t0 * 1e6)] = {t0, r->number("rtt")};
        }
        return out;
    };
    const auto b = rtt_by_poll_time(base), h = rtt_by_poll_time(hit);
    REQUIRE(b.size() == h.size());
    const cpes::attack::AttackWindow window{{{0.3, 0.6}}};
    int shifted = 0;
    for (const auto& [key, bv] : b) {
        const auto& hv = h.at(key);
        const bool in = window.contains(bv.first);
        CHECK(std::abs(hv.second - bv.second - (in ? 0.55 : 0.0)) < 1e-12);
        shifted += in;
    }
    CHECK(shifted == 3);
}

TEST_CASE("packets_delayed equals in-window sends", "[network][property]") {
    Gen g(92);
    for (int trial = 0; trial < 20; ++trial) {
        EventQueue q;
        EventLog log;
        Network net(pair(), q, log, 1);
        const double s = g.uniform(0.0, 0.5), e = s + g.uniform(0.05, 0.4);
        cpes::attack::TimeDelay td;
        td.id = "tda";
        td.link = "ab";
        td.delay = {{0.0, g.uniform(0.01, 0.5)}};
        td.window = {{{s, e}}};
        net.add_impairment(cpes::attack::link_delay(td));
        std::size_t in_window = 0;
        for (int k = 0; k < 100; ++k) {
            const double t = k * 0.01;
            in_window += td.window.contains(t);
            q.schedule(t, [&] { net.send("a", "b", PacketKind::Poll, std::monostate{}, 292); });
        }
        q.run_until(10.0);
        const auto c = cpes::metrics::cyber_metrics(log, 10.0);
        CHECK(c.packets_delayed == in_window);
        CHECK(c.attack_delayed == in_window);
        CHECK(c.packets_delayed + c.on_time + c.dropped == c.sent);
    }
}

TEST_CASE("DoS window drops exactly the polls inside it", "[network]") {
    EventQueue q;
    EventLog log;
    Network net(polled(0.1, 1e-3), q, log, 1);
    cpes::attack::DoS dos{"dos", "mo", {{{0.25, 0.65}}}};
    net.add_impairment(cpes::attack::apply_dos(dos));
    net.start(1.0);
    q.run_until(2.0);
    std::size_t polls_in = 0;
    for (const auto* r : records(log, "send"))
        if (*r->get("kind") == "poll" && dos.window.contains(r->t)) ++polls_in;
    std::size_t attack_drops = 0;
    for (const auto* r : records(log, "drop")) attack_drops += *r->get("reason") == "attack";
    CHECK(polls_in == 4);
    CHECK(attack_drops == polls_in);

    EventQueue q2;
    EventLog log2;
    Network all(polled(0.1, 1e-3), q2, log2, 1);
    all.add_impairment(cpes::attack::apply_dos({"dos", "mo", {{{0.0, 10.0}}}}));
    all.start(1.0);
    q2.run_until(2.0);
    CHECK(log2.count("deliver") == 0);
}

TEST_CASE("bounded queue drops on overflow and keeps flow order", "[network]") {
    NetworkModel m;
    auto r = router("r");
    r.queue_capacity = 2;
    r.processing_delay = 0.01;
    m.nodes = {endpoint("a"), r, endpoint("b")};
    m.links = {link("ar", "a", "r", 1000.0, 0.0), link("rb", "r", "b", 1000.0, 0.0)};
    EventQueue q;
    EventLog log;
    Network net(m, q, log, 1);
    q.schedule(0.0, [&] {
        for (int i = 0; i < 5; ++i) net.send("a", "b", PacketKind::Poll, std::monostate{}, 100);
    });
    q.run_until(1.0);
    CHECK(log.count("drop") == 3);
    std::uint64_t last = 0;
    for (const auto* d : records(log, "deliver")) {
        CHECK(*d->packet_id > last);
        last = *d->packet_id;
    }
}

TEST_CASE("delay is bounded below by the path analytic delay", "[network][property]") {
    Gen g(93);
    NetworkModel m;
    m.nodes = {endpoint("a"), router("r1"), router("r2"), endpoint("b")};
    m.links = {link("l1", "a", "r1", 5.0, 1e-3), link("l2", "r1", "r2", 2.0, 2e-3), link("l3", "r2", "b", 5.0, 5e-4)};
    m.links[1].jitter = 2e-4;
    EventQueue q;
    EventLog log;
    Network net(m, q, log, 7);
    for (int k = 0; k < 2000; ++k) {
        const double t = g.uniform(0.0, 2.0);
        q.schedule(t, [&] { net.send(g.coin() ? "a" : "b", "a", PacketKind::Poll, std::monostate{}, 200); });
    }
    q.run_until(100.0);
    for (const auto* d : records(log, "deliver")) {
        CHECK(d->number("delay") >= d->number("baseline") - 2e-4 - 1e-12);
    }
    const auto c = cpes::metrics::cyber_metrics(log, 100.0);
    CHECK(c.in_flight == 0);
    CHECK(c.sent == c.delivered + c.dropped);
}

TEST_CASE("identical seeds give identical logs", "[network]") {
    auto run = [](std::uint64_t seed) {
        auto m = polled(0.05, 1e-3);
        m.links[0].jitter = 5e-4;
        m.links[0].loss_rate = 0.05;
        EventQueue q;
        EventLog log;
        Network net(m, q, log, seed);
        net.measure = [](const std::string&) { return std::vector<double>{0.5}; };
        net.start(5.0);
        q.run_until(6.0);
        return log.to_json();
    };
    CHECK(run(3) == run(3));
    CHECK(run(3) != run(4));
}

TEST_CASE("invalid networks are rejected", "[network]") {
    auto m = pair();
    m.links[0].bandwidth = 0.0;
    CHECK_THROWS_AS(check(m), cpes::ValidationError);
    m = pair();
    m.links[0].loss_rate = 1.5;
    CHECK_THROWS_AS(check(m), cpes::ValidationError);
    m = pair();
    m.nodes.push_back(endpoint("lonely"));
    CHECK_THROWS_AS(check(m), cpes::ValidationError);
    m = polled(0.1, 1e-3);
    m.commands.push_back({1.0, "m", "o", {"explode", "x"}});
    CHECK_THROWS_AS(check(m), cpes::ValidationError);
}
