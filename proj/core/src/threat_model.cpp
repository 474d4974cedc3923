#include "cpes/threat_model.hpp"

#include <array>
#include <utility>

#include "cpes/error.hpp"
#include "json_io.hpp"

namespace cpes::threat {

namespace {

template <class E, std::size_t N>
std::string_view lookup(const std::array<std::string_view, N>& names, E v) {
    auto i = static_cast<std::size_t>(v);
    return i < N ? names[i] : std::string_view{"<invalid>"};
}

constexpr std::array<std::string_view, 3> kKnowledge{"strong", "limited", "oblivious"};
constexpr std::array<std::string_view, 2> kAccess{"possession", "non_possession"};
constexpr std::array<std::string_view, 2> kSpecificity{"targeted", "non_targeted"};
constexpr std::array<std::string_view, 2> kResources{"class_i", "class_ii"};
constexpr std::array<std::string_view, 2> kFrequency{"iterative", "non_iterative"};
constexpr std::array<std::string_view, 2> kReproducibility{"one_time", "multiple_times"};
constexpr std::array<std::string_view, 3> kLevel{"l0", "l1", "l2"};
constexpr std::array<std::string_view, 7> kAsset{
    "field_controller", "control_server", "safety_instrumented_system", "engineering_workstation",
    "data_historian",   "hmi",            "io_server"};
constexpr std::array<std::string_view, 8> kTechnique{
    "modify_control_logic", "wireless_compromise", "engineering_workstation_compromise",
    "dos",                  "mitm",                "spoof_reporting",
    "module_firmware",      "rootkit"};
constexpr std::array<std::string_view, 6> kPremise{
    "cyber_communications_protocols", "cyber_asset_control_commands", "cyber_data_storage",
    "physical_invasive",              "physical_non_invasive",        "physical_semi_invasive"};

template <class E>
const auto& names_of() {
    if constexpr (std::is_same_v<E, Knowledge>) return kKnowledge;
    else if constexpr (std::is_same_v<E, Access>) return kAccess;
    else if constexpr (std::is_same_v<E, Specificity>) return kSpecificity;
    else if constexpr (std::is_same_v<E, Resources>) return kResources;
    else if constexpr (std::is_same_v<E, Frequency>) return kFrequency;
    else if constexpr (std::is_same_v<E, Reproducibility>) return kReproducibility;
    else if constexpr (std::is_same_v<E, FunctionalLevel>) return kLevel;
    else if constexpr (std::is_same_v<E, Asset>) return kAsset;
    else if constexpr (std::is_same_v<E, Technique>) return kTechnique;
    else return kPremise;
}

template <class E>
void check_set(const EnumSet<E>& s, const char* field, ValidationResult& out) {
    if (s.empty())
        out.violations.push_back({"empty_attribute_set", field, std::string("empty attribute set: ") + field});
    if (!s.in_range())
        out.violations.push_back(
            {"invalid_enum_member", field, std::string("value outside the enumeration: ") + field});
}

template <class E>
json set_to_json(const EnumSet<E>& s) {
    json arr = json::array();
    for (E v : s.values()) arr.push_back(std::string(to_string(v)));
    return arr;
}

template <class E>
EnumSet<E> set_from_json(const json& obj, const std::string& parent, const char* key) {
    const std::string path = parent + "." + key;
    const json& arr = io::require(obj, key, parent);
    if (!arr.is_array()) throw ParseError(path, "expected an array of enum literals");
    EnumSet<E> out;
    for (std::size_t i = 0; i < arr.size(); ++i) {
        const std::string item_path = path + "[" + std::to_string(i) + "]";
        if (!arr[i].is_string()) throw ParseError(item_path, "expected a string literal");
        const auto lit = arr[i].get<std::string>();
        const auto& names = names_of<E>();
        bool found = false;
        for (std::size_t k = 0; k < names.size(); ++k) {
            if (names[k] == lit) {
                out.insert(static_cast<E>(k));
                found = true;
                break;
            }
        }
        if (!found) throw ParseError(item_path, "unknown enum literal \"" + lit + "\" for field " + key);
    }
    return out;
}

}  // namespace

std::string_view to_string(Knowledge v) { return lookup(kKnowledge, v); }
std::string_view to_string(Access v) { return lookup(kAccess, v); }
std::string_view to_string(Specificity v) { return lookup(kSpecificity, v); }
std::string_view to_string(Resources v) { return lookup(kResources, v); }
std::string_view to_string(Frequency v) { return lookup(kFrequency, v); }
std::string_view to_string(Reproducibility v) { return lookup(kReproducibility, v); }
std::string_view to_string(FunctionalLevel v) { return lookup(kLevel, v); }
std::string_view to_string(Asset v) { return lookup(kAsset, v); }
std::string_view to_string(Technique v) { return lookup(kTechnique, v); }
std::string_view to_string(Premise v) { return lookup(kPremise, v); }

ValidationResult validate(const ThreatModel& tm) {
    ValidationResult out;
    const auto& a = tm.adversary;
    const auto& m = tm.attack;
    check_set(a.knowledge, "adversary.knowledge", out);
    check_set(a.access, "adversary.access", out);
    check_set(a.specificity, "adversary.specificity", out);
    check_set(a.resources, "adversary.resources", out);
    check_set(m.frequency, "attack.frequency", out);
    check_set(m.reproducibility, "attack.reproducibility", out);
    check_set(m.functional_level, "attack.functional_level", out);
    check_set(m.asset, "attack.asset", out);
    check_set(m.technique, "attack.technique", out);
    check_set(m.premise, "attack.premise", out);

    const bool needs_possession =
        m.premise.contains(Premise::PhysicalInvasive) || m.premise.contains(Premise::PhysicalSemiInvasive);
    if (needs_possession && !a.access.contains(Access::Possession))
        out.violations.push_back({"invasive_requires_possession", "adversary.access",
                                  "invasive requires possession"});

    // Advisory cross-field hints; the only hard rule is the one above.
    if (m.premise.contains(Premise::PhysicalNonInvasive) && !a.access.contains(Access::Possession))
        out.warnings.push_back("non-invasive physical premise usually implies proximity to the device");
    if (a.knowledge.contains(Knowledge::Strong) && a.resources == EnumSet<Resources>{Resources::ClassI})
        out.warnings.push_back("strong knowledge with Class I resources only is unusual");
    if (m.technique.contains(Technique::EngineeringWorkstationCompromise) &&
        !m.asset.contains(Asset::EngineeringWorkstation))
        out.warnings.push_back("engineering workstation compromise without an engineering workstation asset");
    return out;
}

ThreatModel preset(std::string_view name) {
    using enum Premise;
    ThreatModel tm;
    tm.name = std::string(name);
    if (name == "cross_layer_firmware") {
        tm.adversary = {{Knowledge::Oblivious}, {Access::Possession}, {Specificity::NonTargeted},
                        {Resources::ClassI, Resources::ClassII}};
        tm.attack = {{Frequency::Iterative},
                     {Reproducibility::MultipleTimes},
                     {FunctionalLevel::L1},
                     {Asset::FieldController},
                     {Technique::ModifyControlLogic},
                     {PhysicalInvasive, PhysicalNonInvasive, CyberAssetControlCommands}};
        tm.notes = "compromised inverter firmware scales and perturbs the sensed PV measurements";
    } else if (name == "load_changing") {
        tm.adversary = {{Knowledge::Limited, Knowledge::Oblivious}, {Access::NonPossession},
                        {Specificity::Targeted}, {Resources::ClassII}};
        tm.attack = {{Frequency::Iterative},
                     {Reproducibility::MultipleTimes},
                     {FunctionalLevel::L1, FunctionalLevel::L2},
                     {Asset::FieldController, Asset::HMI},
                     {Technique::ModifyControlLogic, Technique::WirelessCompromise},
                     {CyberCommunicationsProtocols, CyberAssetControlCommands}};
        tm.notes = "synchronous switching of IoT-controlled high-wattage loads";
    } else if (name == "time_delay") {
        tm.adversary = {{Knowledge::Oblivious}, {Access::NonPossession}, {Specificity::Targeted},
                        {Resources::ClassI, Resources::ClassII}};
        tm.attack = {{Frequency::Iterative},
                     {Reproducibility::MultipleTimes},
                     {FunctionalLevel::L1},
                     {Asset::ControlServer},
                     {Technique::WirelessCompromise, Technique::MitM, Technique::SpoofReporting, Technique::DoS},
                     {CyberCommunicationsProtocols}};
        tm.notes = "delays the load-shedding command between the MG controller and the load IED";
    } else if (name == "td_propagation") {
        tm.adversary = {{Knowledge::Strong}, {Access::Possession}, {Specificity::Targeted}, {Resources::ClassII}};
        tm.attack = {{Frequency::NonIterative},
                     {Reproducibility::OneTime},
                     {FunctionalLevel::L2},
                     {Asset::EngineeringWorkstation},
                     {Technique::EngineeringWorkstationCompromise},
                     {CyberAssetControlCommands}};
        tm.notes = "breaker tampering and generator disconnection propagating from transmission to distribution";
    } else {
        throw ValidationError("unknown threat model preset: " + std::string(name));
    }
    return tm;
}

}  // namespace cpes::threat

namespace cpes::io {

using namespace cpes::threat;

json threat_to_json(const ThreatModel& tm) {
    json adv{{"knowledge", set_to_json(tm.adversary.knowledge)},
             {"access", set_to_json(tm.adversary.access)},
             {"specificity", set_to_json(tm.adversary.specificity)},
             {"resources", set_to_json(tm.adversary.resources)}};
    json atk{{"frequency", set_to_json(tm.attack.frequency)},
             {"reproducibility", set_to_json(tm.attack.reproducibility)},
             {"functional_level", set_to_json(tm.attack.functional_level)},
             {"asset", set_to_json(tm.attack.asset)},
             {"technique", set_to_json(tm.attack.technique)},
             {"premise", set_to_json(tm.attack.premise)}};
    return json{{"schema_version", 1}, {"name", tm.name}, {"adversary", adv}, {"attack", atk}, {"notes", tm.notes}};
}

ThreatModel threat_from_json(const json& doc, const std::string& path) {
    if (!doc.is_object()) throw ParseError(path, "expected an object");
    if (doc.contains("schema_version")) {
        const json& v = doc.at("schema_version");
        if (!v.is_number_integer() || v.get<int>() != 1)
            throw ParseError(join(path, "schema_version"), "unsupported schema_version (expected 1)");
    }
    ThreatModel tm;
    tm.name = get_string(doc, "name", path);
    const std::string adv_path = join(path, "adversary");
    const std::string atk_path = join(path, "attack");
    const json& adv = require(doc, "adversary", path);
    const json& atk = require(doc, "attack", path);
    if (!adv.is_object()) throw ParseError(adv_path, "expected an object");
    if (!atk.is_object()) throw ParseError(atk_path, "expected an object");
    tm.adversary.knowledge = set_from_json<Knowledge>(adv, adv_path, "knowledge");
    tm.adversary.access = set_from_json<Access>(adv, adv_path, "access");
    tm.adversary.specificity = set_from_json<Specificity>(adv, adv_path, "specificity");
    tm.adversary.resources = set_from_json<Resources>(adv, adv_path, "resources");
    tm.attack.frequency = set_from_json<Frequency>(atk, atk_path, "frequency");
    tm.attack.reproducibility = set_from_json<Reproducibility>(atk, atk_path, "reproducibility");
    tm.attack.functional_level = set_from_json<FunctionalLevel>(atk, atk_path, "functional_level");
    tm.attack.asset = set_from_json<Asset>(atk, atk_path, "asset");
    tm.attack.technique = set_from_json<Technique>(atk, atk_path, "technique");
    tm.attack.premise = set_from_json<Premise>(atk, atk_path, "premise");
    tm.notes = doc.contains("notes") ? get_string(doc, "notes", path) : std::string{};
    return tm;
}

}  // namespace cpes::io

namespace cpes::threat {

std::string serialize(const ThreatModel& tm) { return io::threat_to_json(tm).dump(2); }

ThreatModel deserialize(std::string_view document) {
    return io::threat_from_json(io::parse(document), "");
}

}  // namespace cpes::threat
