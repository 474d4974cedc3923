#include "cpes/cosim/presets.hpp"

#include <cmath>
#include <string>

#include "cpes/error.hpp"

namespace cpes::cosim {

namespace {

using risk::Impact;
using risk::ObjectiveId;

risk::RiskInput risk_inputs(int probability, Impact health, Impact operation, Impact profit, Impact equipment) {
    risk::RiskInput in;
    in.probability.level = probability;
    in.priorities = risk::PrioritySet::cpes_default();
    in.impacts[ObjectiveId::PeopleHealthSafety] = health;
    in.impacts[ObjectiveId::UninterruptedOperation] = operation;
    in.impacts[ObjectiveId::FinancialProfit] = profit;
    in.impacts[ObjectiveId::EquipmentDamageLegal] = equipment;
    return in;
}

phys::Machine machine(std::string id, double h, double p_mech, double x, double f_nom = 60.0) {
    phys::Machine m;
    m.id = std::move(id);
    m.inertia_const = h;
    m.p_mech = p_mech;
    m.reactance = x;
    m.omega_sync = 2.0 * std::numbers::pi * f_nom;
    m.omega = m.omega_sync;
    return m;
}

phys::Governor governor(double gain, double time_constant, double p_max) {
    phys::Governor g;
    g.gain = gain;
    g.deadband = 0.036;
    g.time_constant = time_constant;
    g.p_min = 0.0;
    g.p_max = p_max;
    return g;
}

phys::Load load(std::string id, double demand, bool sheddable, std::string node = {}, double pf = 1.0) {
    phys::Load l;
    l.id = std::move(id);
    l.base_demand = demand;
    l.sheddable = sheddable;
    l.node = std::move(node);
    l.power_factor = pf;
    return l;
}

Eigen::MatrixXd mat(std::initializer_list<std::initializer_list<double>> rows) {
    Eigen::MatrixXd m(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(rows.begin()->size()));
    Eigen::Index r = 0;
    for (const auto& row : rows) {
        Eigen::Index c = 0;
        for (double v : row) m(r, c++) = v;
        ++r;
    }
    return m;
}

Eigen::VectorXd vec(std::initializer_list<double> v) {
    Eigen::VectorXd out(static_cast<Eigen::Index>(v.size()));
    Eigen::Index i = 0;
    for (double x : v) out(i++) = x;
    return out;
}

metrics::MetricRequest metric(std::string kind, std::string trace, std::map<std::string, double> params = {}) {
    return {std::move(kind), std::move(trace), std::move(params)};
}

// ---- case1_dia: inverter measurement DIA in a grid-tied microgrid ---------
// 1 MW base. The PV converter loop tracks its reference r with a first-order
// power stage: p(k+1) = a p + (1 - a) u, u = (1 - kp) y_p + kp y_r.

Scenario case1(std::string_view variant) {
    Scenario sc;
    sc.name = "case1_dia";
    sc.description = "Grid-tied microgrid; DIA on the PV inverter power measurement";
    sc.horizon = 20.0;
    sc.dt = 1e-3;
    sc.seed = 1;

    auto& g = sc.grid;
    g.tier = phys::GridTier::Aggregate;
    auto gen = machine("diesel", 2.0, 0.5, 0.3);
    gen.governor = governor(0.5, 0.5, 1.0);
    g.machines.push_back(gen);
    g.loads = {load("residential", 0.25, false), load("industrial", 0.5, true)};
    g.breakers.push_back({"pcc", true, {}});
    g.tie = phys::GridTie{"pcc", 0.2, 1.0};
    g.bess = phys::Bess{0.1, 0.5};

    const double dt = sc.dt;
    const double a = std::exp(-dt / 0.05);
    const double kp = 0.5;
    phys::PlantBinding pv;
    pv.plant.id = "pv";
    pv.plant.G = mat({{a, 0.0}, {0.0, 1.0}});
    pv.plant.B = mat({{1.0 - a}, {0.0}});
    pv.plant.C = mat({{1.0, 0.0}, {0.0, 1.0}});
    pv.plant.control_matrix = mat({{1.0 - kp, kp}});
    pv.plant.noise_std = vec({0.002, 0.0});
    pv.plant.x = vec({0.8, 0.8});
    pv.plant.u = vec({0.8});
    pv.injection_state = 0;
    pv.injection_scale = 0.25;
    pv.trip_high = 0.3;
    g.plants.push_back(pv);

    if (variant == "attack") {
        attack::DiaCombined dia;
        dia.id = "fw";
        dia.plant = "pv";
        dia.channel = 0;
        dia.beta = 0.6;
        dia.noise = attack::SinusoidNoise{0.5, 2.0};
        dia.window.intervals = {{5.0, 15.0}};
        sc.attacks.push_back(dia);
    }
    sc.threat = threat::preset("cross_layer_firmware");
    sc.risk = risk_inputs(2, Impact::Low, Impact::Low, Impact::Medium, Impact::Low);
    sc.metrics = {metric("frequency", "f_coi"), metric("iae", "pv_y0", {{"reference", 0.8}}),
                  metric("iae", "p_pv", {{"reference", 0.2}})};
    return sc;
}

// ---- case2_load: load-changing attack on a 3-machine grid -----------------

Scenario case2(std::string_view variant) {
    Scenario sc;
    sc.name = "case2_load";
    sc.description = "Three-machine grid; coordinated load increase for 0.5 s at t = 4 s";
    sc.horizon = 10.0;
    sc.dt = 1e-3;
    sc.seed = 2;

    auto& g = sc.grid;
    g.tier = phys::GridTier::CommonBus;
    const double h[] = {5.0, 4.0, 3.5};
    for (int i = 0; i < 3; ++i) {
        auto m = machine("g" + std::to_string(i + 1), h[i], 0.6, 0.3);
        m.v_internal = 1.05;
        m.damping = 2.0;
        m.governor = governor(1.0, 0.4, 1.2);
        g.machines.push_back(m);
    }
    g.loads = {load("l1", 0.6, false), load("l2", 0.6, false), load("l3", 0.6, false)};

    attack::LoadChange lc;
    lc.id = "botnet";
    lc.fraction = true;
    lc.window.intervals = {{4.0, 4.5}};
    if (variant == "a") lc.targets = {"l1"}, lc.delta = 0.2;
    else if (variant == "b") lc.targets = {"l1", "l2"}, lc.delta = 0.2;
    else if (variant == "c") lc.targets = {"l1", "l2"}, lc.delta = 0.5;
    else lc.targets = {"l1", "l2", "l3"}, lc.delta = 0.5;
    sc.attacks.push_back(lc);

    sc.threat = threat::preset("load_changing");
    sc.risk = risk_inputs(2, Impact::Low, Impact::Medium, Impact::Medium, Impact::Low);
    sc.metrics = {metric("frequency", "f_coi"), metric("disturbances", "f_coi", {{"threshold", 0.05}})};
    return sc;
}

// ---- case3_tda: delayed load-shedding command after islanding -------------
// 1 MW base: genset 1 MW, BESS 100 kW, loads 300 kW + 700 kW sheddable and
// 200 kW critical. The controller islands and sheds load #1 at t = 10 s.

Scenario case3(std::string_view variant) {
    Scenario sc;
    sc.name = "case3_tda";
    sc.description = "Islanded microgrid; time-delay attack on the load-shedding command";
    sc.horizon = 30.0;
    sc.dt = 1e-3;
    sc.seed = 3;

    auto& g = sc.grid;
    g.tier = phys::GridTier::Aggregate;
    auto gen = machine("genset", 4.0, 0.8, 0.3);
    gen.governor = governor(0.5, 0.5, 1.0);
    g.machines.push_back(gen);
    g.loads = {load("load1", 0.3, true), load("load2", 0.7, true), load("critical", 0.2, false)};
    g.breakers.push_back({"pcc", true, {}});
    g.tie = phys::GridTie{"pcc", 0.2, 1.0};
    g.bess = phys::Bess{0.1, 0.5};

    cyber::NetworkModel net;
    auto node = [](std::string id, cyber::NodeRole role) {
        cyber::NetNode n;
        n.id = std::move(id);
        n.role = role;
        return n;
    };
    auto mgc = node("mgc", cyber::NodeRole::Endpoint);
    mgc.master = cyber::MasterApp{1.0, {"pcc_ied", "load1_ied", "load2_ied"}};
    net.nodes.push_back(mgc);
    net.nodes.push_back(node("r1", cyber::NodeRole::Router));
    for (const auto& [id, asset] : {std::pair{"pcc_ied", "breaker:pcc"}, std::pair{"load1_ied", "load:load1"},
                                    std::pair{"load2_ied", "load:load2"}}) {
        auto n = node(id, cyber::NodeRole::Endpoint);
        n.outstation = cyber::OutstationApp{asset};
        net.nodes.push_back(n);
    }
    auto link = [](std::string id, std::string a, std::string b, double prop) {
        cyber::NetLink l;
        l.id = std::move(id);
        l.a = std::move(a);
        l.b = std::move(b);
        l.bandwidth = 10e6;
        l.prop_delay = prop;
        return l;
    };
    net.links = {link("mgc-r1", "mgc", "r1", 2e-3), link("r1-pcc", "r1", "pcc_ied", 3e-3),
                 link("r1-load1", "r1", "load1_ied", 4e-3), link("r1-load2", "r1", "load2_ied", 4e-3)};
    net.commands = {{10.0, "mgc", "pcc_ied", {"open_breaker", "pcc"}},
                    {10.0, "mgc", "load1_ied", {"shed_load", "load1"}}};
    sc.network = net;

    if (variant != "none") {
        attack::TimeDelay td;
        td.id = "tda";
        td.link = "r1-load1";
        td.delay = {{0.0, std::stod(std::string(variant))}};
        td.window.intervals = {{9.5, 10.5}};
        sc.attacks.push_back(td);
    }

    sc.threat = threat::preset("time_delay");
    sc.risk = risk_inputs(3, Impact::Low, Impact::Medium, Impact::Low, Impact::High);
    sc.metrics = {metric("frequency", "f_coi"), metric("cyber", "")};
    return sc;
}

// ---- case4_td: transmission contingencies seen at a distribution bus ------
// Nodal transmission grid with three machines feeding a boundary bus. A
// feeder group maps the boundary voltage to bus 632; an under-voltage load
// relief group scales the boundary load.

Scenario case4(std::string_view variant) {
    Scenario sc;
    sc.name = "case4_td";
    sc.description = "T&D boundary; generator contingencies and breaker toggling";
    sc.horizon = 3.0;
    sc.dt = 1e-3;
    sc.seed = 4;

    auto& g = sc.grid;
    g.tier = phys::GridTier::Nodal;
    g.nodes = {"b1", "b2", "b3", "bnd"};
    const double h[] = {6.0, 4.0, 4.0};
    for (int i = 0; i < 3; ++i) {
        auto m = machine("G" + std::to_string(i + 1), h[i], 0.0, 0.3);
        m.v_internal = 1.1;
        m.damping = 2.0;
        m.node = "b" + std::to_string(i + 1);
        m.governor = governor(0.5, 0.5, 2.0);
        g.machines.push_back(m);
    }
    g.branches = {{"b1", "bnd", 0.0, 0.08, ""},
                  {"b1", "bnd", 0.0, 0.08, "cb_l1"},
                  {"b2", "bnd", 0.0, 0.06, ""},
                  {"b3", "bnd", 0.0, 0.06, ""}};
    g.breakers.push_back({"cb_l1", true, {}});
    g.loads = {load("dist", 2.4, false, "bnd", 0.95)};

    const double wn = 100.0, zeta = 0.5, ratio = 0.98;
    phys::StateSpaceGroup feeder;
    feeder.id = "feeder";
    feeder.A = mat({{0.0, 1.0}, {-wn * wn, -2.0 * zeta * wn}});
    feeder.D = mat({{0.0}, {wn * wn * ratio}});
    feeder.E = mat({{1.0, 0.0}});
    feeder.F = mat({{0.0}});
    feeder.s = vec({0.0, 0.0});
    feeder.inputs = {"vmag:bnd"};
    feeder.outputs = {"trace:v_632"};
    g.groups.push_back(feeder);

    const double kr = 0.8, tr = 0.3;
    phys::StateSpaceGroup relief;
    relief.id = "uv_relief";
    relief.A = mat({{-1.0 / tr}});
    relief.D = mat({{-kr / tr, kr / tr}});
    relief.E = mat({{-1.0}});
    relief.F = mat({{0.0, 1.0}});
    relief.s = vec({0.0});
    relief.inputs = {"vmag:bnd", "const"};
    relief.outputs = {"gscale:bnd"};
    g.groups.push_back(relief);

    if (variant == "n-1") g.contingencies = {{1.5, "G2"}};
    else if (variant == "n-1-g3") g.contingencies = {{1.5, "G3"}};
    else if (variant == "n-1-1") g.contingencies = {{1.5, "G2"}, {1.6, "G3"}};
    else if (variant == "n-2") g.contingencies = {{1.5, "G2"}, {1.5, "G3"}};
    else if (variant.substr(0, 2) == "cb") {
        const std::vector<phys::BreakerOp> ops{{1.0, false}, {1.5, true}, {2.0, false}};
        attack::BreakerAttack ba;
        ba.id = "scada_cb";
        ba.breaker = "cb_l1";
        ba.schedule.assign(ops.begin(), ops.begin() + (variant[2] - '0'));
        sc.attacks.push_back(ba);
    }

    sc.threat = threat::preset("td_propagation");
    sc.risk = risk_inputs(3, Impact::High, Impact::High, Impact::Low, Impact::High);
    sc.metrics = {metric("voltage", "v_632", {{"lo", 0.9}, {"hi", 1.1}}), metric("frequency", "f_coi"),
                  metric("disturbances", "f_coi", {{"threshold", 0.01}, {"refractory", 0.05}})};
    return sc;
}

}  // namespace

const std::vector<PresetInfo>& preset_list() {
    static const std::vector<PresetInfo> list{
        {"case1_dia", "Grid-tied microgrid, PV inverter measurement DIA (scaling + sinusoid)", {"attack", "none"}},
        {"case2_load", "Three-machine grid, load-changing attack 4.0-4.5 s on 1-3 loads", {"a", "b", "c", "d"}},
        {"case3_tda", "Microgrid islanding at 10 s, time-delay attack on the shedding command",
         {"0.5", "0", "5", "15", "none"}},
        {"case4_td", "Nodal T&D boundary, N-1 / N-1-1 / N-2 contingencies and breaker toggling",
         {"n-1", "none", "n-1-g3", "n-1-1", "n-2", "cb1", "cb2", "cb3"}},
    };
    return list;
}

Scenario preset_scenario(std::string_view spec) {
    const auto colon = spec.find(':');
    const std::string_view name = spec.substr(0, colon);
    for (const auto& info : preset_list()) {
        if (info.name != name) continue;
        const std::string_view variant = colon == std::string_view::npos ? info.variants.front() : spec.substr(colon + 1);
        bool known = false;
        for (auto v : info.variants) known = known || v == variant;
        if (!known) throw ValidationError("preset " + std::string(name) + ": unknown variant " + std::string(variant));
        Scenario sc;
        if (name == "case1_dia") sc = case1(variant);
        else if (name == "case2_load") sc = case2(variant);
        else if (name == "case3_tda") sc = case3(variant);
        else sc = case4(variant);
        if (colon != std::string_view::npos) sc.name += ":" + std::string(variant);
        return parse_scenario(emit_scenario(sc));
    }
    throw ValidationError("unknown preset: " + std::string(spec));
}

}  // namespace cpes::cosim
