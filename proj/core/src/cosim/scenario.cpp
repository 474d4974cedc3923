#include "cpes/cosim/scenario.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <set>

#include "cpes/error.hpp"
#include "json_io.hpp"
#include "risk_json.hpp"

namespace cpes::cosim {

using namespace io;

std::size_t Scenario::steps() const {
    return static_cast<std::size_t>(std::ceil(horizon / dt - 1e-9));
}

namespace {

// ---- generic helpers ------------------------------------------------------

const json& object_at(const json& obj, std::string_view key, const std::string& parent) {
    const json& v = require(obj, key, parent);
    if (!v.is_object()) throw ParseError(join(parent, key), "expected an object");
    return v;
}

const json& array_at(const json& obj, std::string_view key, const std::string& parent) {
    const json& v = require(obj, key, parent);
    if (!v.is_array()) throw ParseError(join(parent, key), "expected an array");
    return v;
}

const json& array_or_empty(const json& obj, std::string_view key, const std::string& parent) {
    static const json empty = json::array();
    return obj.contains(key) ? array_at(obj, key, parent) : empty;
}

std::string string_or(const json& obj, std::string_view key, const std::string& parent, std::string fallback) {
    return obj.contains(key) ? get_string(obj, key, parent) : std::move(fallback);
}

std::optional<double> optional_number(const json& obj, std::string_view key, const std::string& parent) {
    if (!obj.contains(key)) return std::nullopt;
    return get_number(obj, key, parent);
}

std::size_t get_count(const json& obj, std::string_view key, const std::string& parent, std::size_t fallback) {
    if (!obj.contains(key)) return fallback;
    const long long v = get_integer(obj, key, parent);
    if (v < 0) throw ParseError(join(parent, key), "expected a non-negative integer");
    return static_cast<std::size_t>(v);
}

Eigen::MatrixXd get_matrix(const json& v, const std::string& path) {
    if (!v.is_array()) throw ParseError(path, "expected an array of rows");
    if (v.empty()) return Eigen::MatrixXd(0, 0);
    const auto rows = static_cast<Eigen::Index>(v.size());
    Eigen::Index cols = -1;
    Eigen::MatrixXd m;
    for (Eigen::Index r = 0; r < rows; ++r) {
        const auto row = get_vector(v[static_cast<std::size_t>(r)], index(path, static_cast<std::size_t>(r)));
        if (cols < 0) {
            cols = static_cast<Eigen::Index>(row.size());
            m.resize(rows, cols);
        } else if (static_cast<Eigen::Index>(row.size()) != cols) {
            throw ParseError(index(path, static_cast<std::size_t>(r)), "ragged matrix row");
        }
        for (Eigen::Index c = 0; c < cols; ++c) m(r, c) = row[static_cast<std::size_t>(c)];
    }
    return m;
}

Eigen::VectorXd get_eigen_vector(const json& v, const std::string& path) {
    const auto d = get_vector(v, path);
    return Eigen::Map<const Eigen::VectorXd>(d.data(), static_cast<Eigen::Index>(d.size()));
}

json matrix_json(const Eigen::MatrixXd& m) {
    json out = json::array();
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
        json row = json::array();
        for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
        out.push_back(std::move(row));
    }
    return out;
}

json vector_json(const Eigen::VectorXd& v) {
    json out = json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(v(i));
    return out;
}

std::vector<std::string> get_strings(const json& v, const std::string& path) {
    if (!v.is_array()) throw ParseError(path, "expected an array of strings");
    std::vector<std::string> out;
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (!v[i].is_string()) throw ParseError(index(path, i), "expected a string");
        out.push_back(v[i].get<std::string>());
    }
    return out;
}

// ---- grid -----------------------------------------------------------------

phys::Machine parse_machine(const json& o, const std::string& p, double f_nom) {
    phys::Machine m;
    m.id = get_string(o, "id", p);
    m.inertia_const = get_number(o, "H", p);
    m.p_mech = get_number_or(o, "p_mech", p, 0.0);
    m.reactance = get_number_or(o, "x", p, m.reactance);
    m.v_internal = get_number_or(o, "e", p, 1.0);
    m.v_recv = get_number_or(o, "v_recv", p, 1.0);
    m.damping = get_number_or(o, "damping", p, 0.0);
    m.delta = get_number_or(o, "delta", p, 0.0);
    m.node = string_or(o, "node", p, "");
    m.omega_sync = 2.0 * std::numbers::pi * f_nom;
    m.omega = m.omega_sync;
    if (o.contains("governor")) {
        const std::string gp = join(p, "governor");
        const json& g = object_at(o, "governor", p);
        phys::Governor gov;
        gov.gain = get_number(g, "gain", gp);
        gov.deadband = get_number_or(g, "deadband", gp, gov.deadband);
        gov.time_constant = get_number_or(g, "time_constant", gp, 0.0);
        gov.p_min = get_number_or(g, "p_min", gp, 0.0);
        gov.p_max = get_number_or(g, "p_max", gp, std::numeric_limits<double>::infinity());
        m.governor = gov;
    }
    return m;
}

json machine_json(const phys::Machine& m) {
    json o{{"id", m.id},          {"H", m.inertia_const}, {"p_mech", m.p_mech},   {"x", m.reactance},
           {"e", m.v_internal},   {"v_recv", m.v_recv},   {"damping", m.damping}, {"delta", m.delta}};
    if (!m.node.empty()) o["node"] = m.node;
    if (m.governor) {
        json g{{"gain", m.governor->gain},
               {"deadband", m.governor->deadband},
               {"time_constant", m.governor->time_constant},
               {"p_min", m.governor->p_min}};
        if (std::isfinite(m.governor->p_max)) g["p_max"] = m.governor->p_max;
        o["governor"] = g;
    }
    return o;
}

phys::GridModel parse_grid(const json& g, const std::string& p) {
    phys::GridModel grid;
    const std::string tier = get_string(g, "tier", p);
    if (tier == "aggregate") grid.tier = phys::GridTier::Aggregate;
    else if (tier == "common_bus") grid.tier = phys::GridTier::CommonBus;
    else if (tier == "nodal") grid.tier = phys::GridTier::Nodal;
    else throw ParseError(join(p, "tier"), "unknown tier \"" + tier + "\"");
    grid.f_nom = get_number_or(g, "f_nom", p, 60.0);
    const std::optional<double> base_kw = optional_number(g, "base_kw", p);
    grid.p_loss = get_number_or(g, "p_loss", p, 0.0);
    grid.leakage = get_number_or(g, "leakage", p, grid.leakage);

    if (g.contains("protection")) {
        const std::string pp = join(p, "protection");
        const json& o = object_at(g, "protection", p);
        auto& pr = grid.protection;
        pr.governor_deadband = get_number_or(o, "governor_deadband", pp, pr.governor_deadband);
        pr.shed_low = get_number_or(o, "shed_low", pp, pr.shed_low);
        pr.shed_high = get_number_or(o, "shed_high", pp, pr.shed_high);
        pr.underfreq_trip = get_number_or(o, "underfreq_trip", pp, pr.underfreq_trip);
        pr.overfreq_trip = get_number_or(o, "overfreq_trip", pp, pr.overfreq_trip);
    }

    const json& machines = array_at(g, "machines", p);
    for (std::size_t i = 0; i < machines.size(); ++i)
        grid.machines.push_back(parse_machine(machines[i], index(join(p, "machines"), i), grid.f_nom));

    const json& loads = array_or_empty(g, "loads", p);
    for (std::size_t i = 0; i < loads.size(); ++i) {
        const std::string lp = index(join(p, "loads"), i);
        const json& o = loads[i];
        phys::Load l;
        l.id = get_string(o, "id", lp);
        if (o.contains("demand_kw")) {
            if (!base_kw) throw ParseError(join(lp, "demand_kw"), "requires grid.base_kw");
            l.base_demand = get_number(o, "demand_kw", lp) / *base_kw;
        } else {
            l.base_demand = get_number(o, "demand", lp);
        }
        l.sheddable = get_bool_or(o, "sheddable", lp, false);
        l.shed = get_bool_or(o, "shed", lp, false);
        l.node = string_or(o, "node", lp, "");
        l.power_factor = get_number_or(o, "power_factor", lp, 1.0);
        grid.loads.push_back(l);
    }

    const json& breakers = array_or_empty(g, "breakers", p);
    for (std::size_t i = 0; i < breakers.size(); ++i) {
        const std::string bp = index(join(p, "breakers"), i);
        const json& o = breakers[i];
        phys::Breaker b;
        b.id = get_string(o, "id", bp);
        b.closed = get_bool_or(o, "closed", bp, true);
        const json& sched = array_or_empty(o, "schedule", bp);
        for (std::size_t k = 0; k < sched.size(); ++k) {
            const std::string sp = index(join(bp, "schedule"), k);
            const std::string action = get_string(sched[k], "action", sp);
            if (action != "open" && action != "close") throw ParseError(join(sp, "action"), "expected open or close");
            b.schedule.push_back({get_number(sched[k], "t", sp), action == "close"});
        }
        grid.breakers.push_back(b);
    }

    if (g.contains("bess")) {
        const std::string bp = join(p, "bess");
        const json& o = object_at(g, "bess", p);
        grid.bess = phys::Bess{get_number(o, "p_max", bp), get_number(o, "gain", bp)};
    }
    if (g.contains("tie")) {
        const std::string tp = join(p, "tie");
        const json& o = object_at(g, "tie", p);
        grid.tie = phys::GridTie{string_or(o, "breaker", tp, ""), get_number(o, "x", tp),
                                 get_number_or(o, "v", tp, 1.0)};
    }

    const json& plants = array_or_empty(g, "plants", p);
    for (std::size_t i = 0; i < plants.size(); ++i) {
        const std::string pp = index(join(p, "plants"), i);
        const json& o = plants[i];
        phys::PlantBinding b;
        b.plant.id = get_string(o, "id", pp);
        b.plant.G = get_matrix(require(o, "G", pp), join(pp, "G"));
        b.plant.B = get_matrix(require(o, "B", pp), join(pp, "B"));
        b.plant.C = get_matrix(require(o, "C", pp), join(pp, "C"));
        b.plant.control_matrix = get_matrix(require(o, "K", pp), join(pp, "K"));
        b.plant.x = get_eigen_vector(require(o, "x0", pp), join(pp, "x0"));
        b.plant.u = get_eigen_vector(require(o, "u0", pp), join(pp, "u0"));
        b.plant.noise_std = o.contains("noise_std") ? get_eigen_vector(o.at("noise_std"), join(pp, "noise_std"))
                                                    : Eigen::VectorXd::Zero(b.plant.C.rows());
        b.injection_state = static_cast<Eigen::Index>(get_count(o, "injection_state", pp, 0));
        b.injection_scale = get_number_or(o, "injection_scale", pp, 0.0);
        b.trip_low = optional_number(o, "trip_low", pp);
        b.trip_high = optional_number(o, "trip_high", pp);
        grid.plants.push_back(std::move(b));
    }

    if (g.contains("nodes")) grid.nodes = get_strings(g.at("nodes"), join(p, "nodes"));
    const json& branches = array_or_empty(g, "branches", p);
    for (std::size_t i = 0; i < branches.size(); ++i) {
        const std::string bp = index(join(p, "branches"), i);
        const json& o = branches[i];
        grid.branches.push_back({get_string(o, "from", bp), get_string(o, "to", bp), get_number_or(o, "r", bp, 0.0),
                                 get_number(o, "x", bp), string_or(o, "breaker", bp, "")});
    }

    const json& groups = array_or_empty(g, "groups", p);
    for (std::size_t i = 0; i < groups.size(); ++i) {
        const std::string gp = index(join(p, "groups"), i);
        const json& o = groups[i];
        phys::StateSpaceGroup grp;
        grp.id = get_string(o, "id", gp);
        grp.A = get_matrix(require(o, "A", gp), join(gp, "A"));
        grp.D = get_matrix(require(o, "D", gp), join(gp, "D"));
        grp.E = get_matrix(require(o, "E", gp), join(gp, "E"));
        grp.F = get_matrix(require(o, "F", gp), join(gp, "F"));
        grp.s = o.contains("s0") ? get_eigen_vector(o.at("s0"), join(gp, "s0")) : Eigen::VectorXd::Zero(grp.A.rows());
        grp.inputs = get_strings(require(o, "inputs", gp), join(gp, "inputs"));
        grp.outputs = get_strings(require(o, "outputs", gp), join(gp, "outputs"));
        grid.groups.push_back(std::move(grp));
    }

    const json& cont = array_or_empty(g, "contingencies", p);
    for (std::size_t i = 0; i < cont.size(); ++i) {
        const std::string cp = index(join(p, "contingencies"), i);
        grid.contingencies.push_back({get_number(cont[i], "t", cp), get_string(cont[i], "machine", cp)});
    }
    return grid;
}

json grid_json(const phys::GridModel& g) {
    json o;
    o["tier"] = std::string(phys::to_string(g.tier));
    o["f_nom"] = g.f_nom;
    o["p_loss"] = g.p_loss;
    o["leakage"] = g.leakage;
    const auto& pr = g.protection;
    o["protection"] = json{{"governor_deadband", pr.governor_deadband}, {"shed_low", pr.shed_low},
                           {"shed_high", pr.shed_high},                 {"underfreq_trip", pr.underfreq_trip},
                           {"overfreq_trip", pr.overfreq_trip}};
    json machines = json::array();
    for (const auto& m : g.machines) machines.push_back(machine_json(m));
    o["machines"] = machines;
    json loads = json::array();
    for (const auto& l : g.loads) {
        json lo{{"id", l.id}, {"demand", l.base_demand}, {"sheddable", l.sheddable}, {"shed", l.shed},
                {"power_factor", l.power_factor}};
        if (!l.node.empty()) lo["node"] = l.node;
        loads.push_back(lo);
    }
    o["loads"] = loads;
    json breakers = json::array();
    for (const auto& b : g.breakers) {
        json sched = json::array();
        for (const auto& op : b.schedule) sched.push_back(json{{"t", op.time}, {"action", op.close ? "close" : "open"}});
        breakers.push_back(json{{"id", b.id}, {"closed", b.closed}, {"schedule", sched}});
    }
    o["breakers"] = breakers;
    if (g.bess) o["bess"] = json{{"p_max", g.bess->p_max}, {"gain", g.bess->gain}};
    if (g.tie) o["tie"] = json{{"breaker", g.tie->breaker}, {"x", g.tie->reactance}, {"v", g.tie->v_grid}};
    json plants = json::array();
    for (const auto& b : g.plants) {
        json po{{"id", b.plant.id},
                {"G", matrix_json(b.plant.G)},
                {"B", matrix_json(b.plant.B)},
                {"C", matrix_json(b.plant.C)},
                {"K", matrix_json(b.plant.control_matrix)},
                {"x0", vector_json(b.plant.x)},
                {"u0", vector_json(b.plant.u)},
                {"noise_std", vector_json(b.plant.noise_std)},
                {"injection_state", static_cast<long long>(b.injection_state)},
                {"injection_scale", b.injection_scale}};
        if (b.trip_low) po["trip_low"] = *b.trip_low;
        if (b.trip_high) po["trip_high"] = *b.trip_high;
        plants.push_back(po);
    }
    o["plants"] = plants;
    o["nodes"] = g.nodes;
    json branches = json::array();
    for (const auto& b : g.branches) {
        json bo{{"from", b.from}, {"to", b.to}, {"r", b.r}, {"x", b.x}};
        if (!b.breaker.empty()) bo["breaker"] = b.breaker;
        branches.push_back(bo);
    }
    o["branches"] = branches;
    json groups = json::array();
    for (const auto& grp : g.groups)
        groups.push_back(json{{"id", grp.id},
                              {"A", matrix_json(grp.A)},
                              {"D", matrix_json(grp.D)},
                              {"E", matrix_json(grp.E)},
                              {"F", matrix_json(grp.F)},
                              {"s0", vector_json(grp.s)},
                              {"inputs", grp.inputs},
                              {"outputs", grp.outputs}});
    o["groups"] = groups;
    json cont = json::array();
    for (const auto& c : g.contingencies) cont.push_back(json{{"t", c.time}, {"machine", c.machine}});
    o["contingencies"] = cont;
    return o;
}

// ---- network --------------------------------------------------------------

cyber::NetworkModel parse_network(const json& n, const std::string& p) {
    cyber::NetworkModel net;
    net.message_bytes = get_count(n, "message_bytes", p, net.message_bytes);
    const json& nodes = array_at(n, "nodes", p);
    for (std::size_t i = 0; i < nodes.size(); ++i) {
        const std::string np = index(join(p, "nodes"), i);
        const json& o = nodes[i];
        cyber::NetNode node;
        node.id = get_string(o, "id", np);
        const std::string role = string_or(o, "role", np, "endpoint");
        if (role == "router") node.role = cyber::NodeRole::Router;
        else if (role != "endpoint") throw ParseError(join(np, "role"), "expected endpoint or router");
        node.queue_capacity = get_count(o, "queue_capacity", np, node.queue_capacity);
        node.processing_delay = get_number_or(o, "processing_delay_ms", np, 0.0) / 1e3;
        if (o.contains("app")) {
            const std::string ap = join(np, "app");
            const json& app = object_at(o, "app", np);
            const std::string type = get_string(app, "type", ap);
            if (type == "master") {
                cyber::MasterApp m;
                m.poll_period = get_number_or(app, "poll_period", ap, 0.0);
                if (app.contains("outstations")) m.outstations = get_strings(app.at("outstations"), join(ap, "outstations"));
                node.master = m;
            } else if (type == "outstation") {
                node.outstation = cyber::OutstationApp{get_string(app, "asset", ap)};
            } else {
                throw ParseError(join(ap, "type"), "expected master or outstation");
            }
        }
        net.nodes.push_back(std::move(node));
    }
    const json& links = array_at(n, "links", p);
    for (std::size_t i = 0; i < links.size(); ++i) {
        const std::string lp = index(join(p, "links"), i);
        const json& o = links[i];
        cyber::NetLink l;
        l.id = get_string(o, "id", lp);
        l.a = get_string(o, "a", lp);
        l.b = get_string(o, "b", lp);
        l.bandwidth = get_number(o, "bandwidth_mbps", lp) * 1e6;
        l.prop_delay = get_number_or(o, "prop_delay_ms", lp, 1.0) / 1e3;
        l.jitter = get_number_or(o, "jitter_ms", lp, 0.0) / 1e3;
        l.loss_rate = get_number_or(o, "loss_rate", lp, 0.0);
        net.links.push_back(l);
    }
    const json& cmds = array_or_empty(n, "commands", p);
    for (std::size_t i = 0; i < cmds.size(); ++i) {
        const std::string cp = index(join(p, "commands"), i);
        const json& o = cmds[i];
        net.commands.push_back({get_number(o, "t", cp), get_string(o, "from", cp), get_string(o, "to", cp),
                                {get_string(o, "action", cp), string_or(o, "target", cp, "")}});
    }
    return net;
}

json network_json(const cyber::NetworkModel& n) {
    json nodes = json::array();
    for (const auto& node : n.nodes) {
        json o{{"id", node.id},
               {"role", std::string(cyber::to_string(node.role))},
               {"queue_capacity", node.queue_capacity},
               {"processing_delay_ms", node.processing_delay * 1e3}};
        if (node.master)
            o["app"] = json{{"type", "master"},
                            {"poll_period", node.master->poll_period},
                            {"outstations", node.master->outstations}};
        if (node.outstation) o["app"] = json{{"type", "outstation"}, {"asset", node.outstation->asset}};
        nodes.push_back(o);
    }
    json links = json::array();
    for (const auto& l : n.links)
        links.push_back(json{{"id", l.id},
                             {"a", l.a},
                             {"b", l.b},
                             {"bandwidth_mbps", l.bandwidth / 1e6},
                             {"prop_delay_ms", l.prop_delay * 1e3},
                             {"jitter_ms", l.jitter * 1e3},
                             {"loss_rate", l.loss_rate}});
    json cmds = json::array();
    for (const auto& c : n.commands)
        cmds.push_back(json{{"t", c.time},
                            {"from", c.from},
                            {"to", c.to},
                            {"action", c.command.action},
                            {"target", c.command.target}});
    return json{{"message_bytes", n.message_bytes}, {"nodes", nodes}, {"links", links}, {"commands", cmds}};
}

// ---- attacks --------------------------------------------------------------

attack::AttackWindow parse_window(const json& o, const std::string& p) {
    attack::AttackWindow w;
    const json& arr = array_at(o, "window", p);
    for (std::size_t i = 0; i < arr.size(); ++i) {
        const auto iv = get_vector(arr[i], index(join(p, "window"), i));
        if (iv.size() != 2) throw ParseError(index(join(p, "window"), i), "expected [start, end]");
        w.intervals.push_back({iv[0], iv[1]});
    }
    return w;
}

json window_json(const attack::AttackWindow& w) {
    json arr = json::array();
    for (const auto& iv : w.intervals) arr.push_back(json::array({iv.start, iv.end}));
    return arr;
}

attack::Schedule parse_schedule(const json& v, const std::string& p) {
    attack::Schedule s;
    if (v.is_number()) {
        s.push_back({0.0, v.get<double>()});
        return s;
    }
    if (!v.is_array()) throw ParseError(p, "expected a number or [[t, value], ...]");
    for (std::size_t i = 0; i < v.size(); ++i) {
        const auto st = get_vector(v[i], index(p, i));
        if (st.size() != 2) throw ParseError(index(p, i), "expected [t, value]");
        s.push_back({st[0], st[1]});
    }
    return s;
}

json schedule_json(const attack::Schedule& s) {
    json arr = json::array();
    for (const auto& st : s) arr.push_back(json::array({st.time, st.value}));
    return arr;
}

attack::AttackSpec parse_attack(const json& o, const std::string& p) {
    const std::string type = get_string(o, "type", p);
    const std::string id = get_string(o, "id", p);
    if (type == "dia_combined") {
        attack::DiaCombined a;
        a.id = id;
        a.plant = get_string(o, "plant", p);
        a.channel = static_cast<int>(get_count(o, "channel", p, 0));
        a.beta = get_number_or(o, "beta", p, 1.0);
        if (o.contains("noise")) {
            const std::string np = join(p, "noise");
            const json& n = object_at(o, "noise", p);
            const std::string kind = get_string(n, "type", np);
            if (kind == "gaussian") a.noise = attack::GaussianNoise{get_number(n, "sigma", np)};
            else if (kind == "sinusoid")
                a.noise = attack::SinusoidNoise{get_number(n, "amplitude", np), get_number(n, "freq_hz", np)};
            else if (kind != "none") throw ParseError(join(np, "type"), "expected none, gaussian or sinusoid");
        }
        a.window = parse_window(o, p);
        return a;
    }
    if (type == "control_dia") {
        attack::ControlDia a;
        a.id = id;
        a.plant = get_string(o, "plant", p);
        a.channel = static_cast<int>(get_count(o, "channel", p, 0));
        a.delta_u = parse_schedule(require(o, "delta_u", p), join(p, "delta_u"));
        a.window = parse_window(o, p);
        return a;
    }
    if (type == "load_change") {
        attack::LoadChange a;
        a.id = id;
        a.targets = get_strings(require(o, "targets", p), join(p, "targets"));
        if (o.contains("fraction")) {
            a.fraction = true;
            a.delta = get_number(o, "fraction", p);
        } else {
            a.fraction = false;
            a.delta = get_number(o, "delta", p);
        }
        a.window = parse_window(o, p);
        return a;
    }
    if (type == "time_delay") {
        attack::TimeDelay a;
        a.id = id;
        a.link = string_or(o, "link", p, "");
        a.signal = string_or(o, "signal", p, "");
        const char* key = a.signal.empty() ? "delay" : "delay_steps";
        a.delay = parse_schedule(require(o, key, p), join(p, key));
        const std::string mode = string_or(o, "pre_history", p, "hold");
        if (mode == "error") a.pre_history = attack::PreHistory::Error;
        else if (mode != "hold") throw ParseError(join(p, "pre_history"), "expected hold or error");
        a.window = parse_window(o, p);
        return a;
    }
    if (type == "dos") {
        attack::DoS a;
        a.id = id;
        a.link = get_string(o, "link", p);
        a.window = parse_window(o, p);
        return a;
    }
    if (type == "breaker_attack") {
        attack::BreakerAttack a;
        a.id = id;
        a.breaker = get_string(o, "breaker", p);
        const json& sched = array_at(o, "schedule", p);
        for (std::size_t k = 0; k < sched.size(); ++k) {
            const std::string sp = index(join(p, "schedule"), k);
            const std::string action = get_string(sched[k], "action", sp);
            if (action != "open" && action != "close") throw ParseError(join(sp, "action"), "expected open or close");
            a.schedule.push_back({get_number(sched[k], "t", sp), action == "close"});
        }
        return a;
    }
    throw ParseError(join(p, "type"), "unknown attack type \"" + type + "\"");
}

json attack_json(const attack::AttackSpec& spec) {
    return std::visit(
        [&](const auto& a) -> json {
            using T = std::decay_t<decltype(a)>;
            json o{{"type", std::string(attack::kind_of(spec))}, {"id", a.id}};
            if constexpr (std::is_same_v<T, attack::DiaCombined>) {
                o["plant"] = a.plant;
                o["channel"] = a.channel;
                o["beta"] = a.beta;
                if (const auto* g = std::get_if<attack::GaussianNoise>(&a.noise))
                    o["noise"] = json{{"type", "gaussian"}, {"sigma", g->sigma}};
                else if (const auto* s = std::get_if<attack::SinusoidNoise>(&a.noise))
                    o["noise"] = json{{"type", "sinusoid"}, {"amplitude", s->amplitude}, {"freq_hz", s->freq_hz}};
                else
                    o["noise"] = json{{"type", "none"}};
                o["window"] = window_json(a.window);
            } else if constexpr (std::is_same_v<T, attack::ControlDia>) {
                o["plant"] = a.plant;
                o["channel"] = a.channel;
                o["delta_u"] = schedule_json(a.delta_u);
                o["window"] = window_json(a.window);
            } else if constexpr (std::is_same_v<T, attack::LoadChange>) {
                o["targets"] = a.targets;
                o[a.fraction ? "fraction" : "delta"] = a.delta;
                o["window"] = window_json(a.window);
            } else if constexpr (std::is_same_v<T, attack::TimeDelay>) {
                if (a.on_link()) {
                    o["link"] = a.link;
                    o["delay"] = schedule_json(a.delay);
                } else {
                    o["signal"] = a.signal;
                    o["delay_steps"] = schedule_json(a.delay);
                }
                o["pre_history"] = a.pre_history == attack::PreHistory::Hold ? "hold" : "error";
                o["window"] = window_json(a.window);
            } else if constexpr (std::is_same_v<T, attack::DoS>) {
                o["link"] = a.link;
                o["window"] = window_json(a.window);
            } else {
                o["breaker"] = a.breaker;
                json sched = json::array();
                for (const auto& op : a.schedule)
                    sched.push_back(json{{"t", op.time}, {"action", op.close ? "close" : "open"}});
                o["schedule"] = sched;
            }
            return o;
        },
        spec);
}

// ---- metrics --------------------------------------------------------------

metrics::MetricRequest parse_metric(const json& o, const std::string& p) {
    if (!o.is_object()) throw ParseError(p, "expected an object");
    metrics::MetricRequest r;
    r.kind = get_string(o, "kind", p);
    r.trace = string_or(o, "trace", p, "");
    for (auto it = o.begin(); it != o.end(); ++it) {
        if (it.key() == "kind" || it.key() == "trace") continue;
        if (!it.value().is_number()) throw ParseError(join(p, it.key()), "metric parameters must be numbers");
        r.params[it.key()] = it.value().get<double>();
    }
    return r;
}

json metric_json(const metrics::MetricRequest& r) {
    json o{{"kind", r.kind}};
    if (!r.trace.empty()) o["trace"] = r.trace;
    for (const auto& [k, v] : r.params) o[k] = v;
    return o;
}

// ---- validation helpers ---------------------------------------------------

std::pair<std::string, std::string> split_asset(const std::string& asset) {
    const auto pos = asset.find(':');
    if (pos == std::string::npos) return {asset, ""};
    return {asset.substr(0, pos), asset.substr(pos + 1)};
}

void check_asset(const phys::GridModel& g, const std::string& asset, const std::string& where) {
    auto [kind, id] = split_asset(asset);
    bool ok = false;
    if (kind == "load") ok = g.load_index(id).has_value();
    else if (kind == "breaker") ok = g.find_breaker(id) != nullptr;
    else if (kind == "machine") ok = g.machine_index(id).has_value();
    else if (kind == "plant") ok = g.plant_index(id).has_value();
    else if (kind == "bus") ok = id.empty();
    if (!ok) throw ValidationError(where + ": unresolvable asset " + asset);
}

}  // namespace

void validate(const Scenario& sc) {
    if (!(sc.horizon > 0.0) || !std::isfinite(sc.horizon)) throw ValidationError("scenario: horizon must be > 0");
    if (!(sc.dt > 0.0) || sc.dt > phys::kMaxSwingDt) throw ValidationError("scenario: dt must lie in (0, 10 ms]");
    phys::check(sc.grid);
    for (const auto& b : sc.grid.breakers)
        for (const auto& op : b.schedule)
            if (op.time > sc.horizon) throw ValidationError("breaker " + b.id + ": schedule beyond the horizon");

    if (sc.network) {
        cyber::check(*sc.network);
        for (const auto& n : sc.network->nodes)
            if (n.outstation) check_asset(sc.grid, n.outstation->asset, "outstation " + n.id);
        for (const auto& c : sc.network->commands) {
            std::string target = c.command.target;
            if (target.empty()) target = split_asset(sc.network->nodes[*sc.network->node_index(c.to)].outstation->asset).second;
            const bool breaker_cmd = c.command.action == "open_breaker" || c.command.action == "close_breaker";
            const bool ok = breaker_cmd ? sc.grid.find_breaker(target) != nullptr : sc.grid.load_index(target).has_value();
            if (!ok) throw ValidationError("command " + c.command.action + ": unresolvable target " + target);
        }
    }

    std::set<std::string> ids;
    for (const auto& spec : sc.attacks) {
        attack::check(spec);
        const std::string& id = attack::id_of(spec);
        if (!ids.insert(id).second) throw ValidationError("duplicate attack id: " + id);
        std::visit(
            [&](const auto& a) {
                using T = std::decay_t<decltype(a)>;
                auto need_link = [&](const std::string& link) {
                    if (!sc.network || !sc.network->link_index(link))
                        throw ValidationError("attack " + id + ": unresolvable link tap " + link);
                };
                if constexpr (std::is_same_v<T, attack::DiaCombined>) {
                    auto i = sc.grid.plant_index(a.plant);
                    if (!i || a.channel < 0 || a.channel >= sc.grid.plants[*i].plant.m())
                        throw ValidationError("attack " + id + ": unresolvable measurement tap " + a.plant);
                } else if constexpr (std::is_same_v<T, attack::ControlDia>) {
                    auto i = sc.grid.plant_index(a.plant);
                    if (!i || a.channel < 0 || a.channel >= sc.grid.plants[*i].plant.l())
                        throw ValidationError("attack " + id + ": unresolvable control tap " + a.plant);
                } else if constexpr (std::is_same_v<T, attack::LoadChange>) {
                    for (const auto& t : a.targets)
                        if (!sc.grid.load_index(t)) throw ValidationError("attack " + id + ": unknown load " + t);
                } else if constexpr (std::is_same_v<T, attack::TimeDelay>) {
                    if (a.on_link()) {
                        need_link(a.link);
                    } else {
                        auto [kind, rest] = split_asset(a.signal);
                        auto [plant, ch] = split_asset(rest);
                        auto i = sc.grid.plant_index(plant);
                        const bool ok = kind == "plant" && i && !ch.empty() &&
                                        ch.find_first_not_of("0123456789") == std::string::npos &&
                                        std::stol(ch) < sc.grid.plants[*i].plant.m();
                        if (!ok) throw ValidationError("attack " + id + ": unresolvable signal tap " + a.signal);
                    }
                } else if constexpr (std::is_same_v<T, attack::DoS>) {
                    need_link(a.link);
                } else {
                    if (!sc.grid.find_breaker(a.breaker))
                        throw ValidationError("attack " + id + ": unknown breaker " + a.breaker);
                }
            },
            spec);
    }

    if (sc.risk) {
        risk::check_probability(sc.risk->probability);
        risk::check_priorities(sc.risk->priorities);
        risk::check_impacts(sc.risk->impacts);
        risk::check_thresholds(sc.risk->thresholds);
    }
    static const std::set<std::string> kinds{"frequency", "voltage", "rise_time",    "overshoot", "settling",
                                             "sse",       "iae",     "disturbances", "cyber"};
    for (const auto& m : sc.metrics) {
        if (!kinds.count(m.kind)) throw ValidationError("unknown metric kind: " + m.kind);
        if (m.kind != "cyber" && m.trace.empty()) throw ValidationError("metric " + m.kind + " needs a trace");
    }
}

Scenario parse_scenario(std::string_view document) {
    const json doc = parse(document);
    if (!doc.is_object()) throw ParseError("", "scenario must be a JSON object");
    const long long version = get_integer(doc, "schema_version", "");
    if (version != 1) throw ParseError("schema_version", "unsupported schema_version (expected 1)");
    Scenario sc;
    const json& meta = object_at(doc, "meta", "");
    sc.name = get_string(meta, "name", "meta");
    sc.description = string_or(meta, "description", "meta", "");
    sc.horizon = get_number(meta, "horizon", "meta");
    sc.dt = get_number_or(meta, "dt", "meta", 1e-3);
    sc.equilibrium = get_bool_or(meta, "equilibrium", "meta", true);
    const json& seed = require(doc, "seed", "");
    if (!seed.is_number_unsigned()) throw ParseError("seed", "expected a non-negative integer");
    sc.seed = seed.get<std::uint64_t>();
    sc.grid = parse_grid(object_at(doc, "grid", ""), "grid");
    if (doc.contains("network") && !doc.at("network").is_null())
        sc.network = parse_network(object_at(doc, "network", ""), "network");
    const json& attacks = array_or_empty(doc, "attacks", "");
    for (std::size_t i = 0; i < attacks.size(); ++i) sc.attacks.push_back(parse_attack(attacks[i], index("attacks", i)));
    if (doc.contains("threat") && !doc.at("threat").is_null()) sc.threat = threat_from_json(doc.at("threat"), "threat");
    if (doc.contains("risk") && !doc.at("risk").is_null()) sc.risk = risk_input_from_json(doc.at("risk"), "risk");
    const json& mets = array_or_empty(doc, "metrics", "");
    for (std::size_t i = 0; i < mets.size(); ++i) sc.metrics.push_back(parse_metric(mets[i], index("metrics", i)));
    return sc;
}

std::string emit_scenario(const Scenario& sc) {
    json doc;
    doc["schema_version"] = 1;
    doc["meta"] = json{{"name", sc.name},
                       {"description", sc.description},
                       {"horizon", sc.horizon},
                       {"dt", sc.dt},
                       {"equilibrium", sc.equilibrium}};
    doc["seed"] = sc.seed;
    doc["grid"] = grid_json(sc.grid);
    if (sc.network) doc["network"] = network_json(*sc.network);
    json attacks = json::array();
    for (const auto& a : sc.attacks) attacks.push_back(attack_json(a));
    doc["attacks"] = attacks;
    if (sc.threat) doc["threat"] = io::threat_to_json(*sc.threat);
    if (sc.risk) doc["risk"] = io::risk_input_to_json(*sc.risk);
    json mets = json::array();
    for (const auto& m : sc.metrics) mets.push_back(metric_json(m));
    doc["metrics"] = mets;
    return doc.dump(2) + "\n";
}

}  // namespace cpes::cosim
