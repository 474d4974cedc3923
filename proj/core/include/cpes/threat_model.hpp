#pragma once

// Adversary and attack taxonomy for CPES threat modeling.
//
// Every attribute is a set: a singleton fixes the attribute, a larger set
// records a disjunction ("Class I or II", "L1 or L2") without collapsing it.

#include <cstdint>
#include <initializer_list>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace cpes::threat {

enum class Knowledge : std::uint8_t { Strong, Limited, Oblivious };
enum class Access : std::uint8_t { Possession, NonPossession };
enum class Specificity : std::uint8_t { Targeted, NonTargeted };
enum class Resources : std::uint8_t { ClassI, ClassII };

enum class Frequency : std::uint8_t { Iterative, NonIterative };
enum class Reproducibility : std::uint8_t { OneTime, MultipleTimes };
enum class FunctionalLevel : std::uint8_t { L0, L1, L2 };
enum class Asset : std::uint8_t {
    FieldController,
    ControlServer,
    SafetyInstrumentedSystem,
    EngineeringWorkstation,
    DataHistorian,
    HMI,
    IOServer,
};
enum class Technique : std::uint8_t {
    ModifyControlLogic,
    WirelessCompromise,
    EngineeringWorkstationCompromise,
    DoS,
    MitM,
    SpoofReporting,
    ModuleFirmware,
    Rootkit,
};
/// Cyber:: and Physical:: premises flattened into one enum.
enum class Premise : std::uint8_t {
    CyberCommunicationsProtocols,
    CyberAssetControlCommands,
    CyberDataStorage,
    PhysicalInvasive,
    PhysicalNonInvasive,
    PhysicalSemiInvasive,
};

template <class E>
struct EnumTraits;

#define CPES_ENUM_TRAITS(E, N)                         \
    template <>                                         \
    struct EnumTraits<E> {                              \
        static constexpr std::uint8_t count = N;        \
    }
CPES_ENUM_TRAITS(Knowledge, 3);
CPES_ENUM_TRAITS(Access, 2);
CPES_ENUM_TRAITS(Specificity, 2);
CPES_ENUM_TRAITS(Resources, 2);
CPES_ENUM_TRAITS(Frequency, 2);
CPES_ENUM_TRAITS(Reproducibility, 2);
CPES_ENUM_TRAITS(FunctionalLevel, 3);
CPES_ENUM_TRAITS(Asset, 7);
CPES_ENUM_TRAITS(Technique, 8);
CPES_ENUM_TRAITS(Premise, 6);
#undef CPES_ENUM_TRAITS

/// Small bitset over an enum. Bits at or above EnumTraits<E>::count are
/// representable (raw construction) but rejected by validate().
template <class E>
class EnumSet {
public:
    constexpr EnumSet() = default;
    constexpr EnumSet(std::initializer_list<E> values) {
        for (E v : values) insert(v);
    }

    static constexpr EnumSet from_bits(std::uint16_t bits) {
        EnumSet s;
        s.bits_ = bits;
        return s;
    }

    constexpr void insert(E v) { bits_ |= static_cast<std::uint16_t>(1u << static_cast<unsigned>(v)); }
    constexpr bool contains(E v) const { return (bits_ >> static_cast<unsigned>(v)) & 1u; }
    constexpr bool empty() const { return bits_ == 0; }
    constexpr std::uint16_t bits() const { return bits_; }
    constexpr bool in_range() const { return (bits_ >> EnumTraits<E>::count) == 0; }

    std::vector<E> values() const {
        std::vector<E> out;
        for (unsigned i = 0; i < EnumTraits<E>::count; ++i)
            if ((bits_ >> i) & 1u) out.push_back(static_cast<E>(i));
        return out;
    }

    friend constexpr bool operator==(EnumSet, EnumSet) = default;

private:
    std::uint16_t bits_ = 0;
};

struct AdversaryModel {
    EnumSet<Knowledge> knowledge;
    EnumSet<Access> access;
    EnumSet<Specificity> specificity;
    EnumSet<Resources> resources;

    friend bool operator==(const AdversaryModel&, const AdversaryModel&) = default;
};

struct AttackModel {
    EnumSet<Frequency> frequency;
    EnumSet<Reproducibility> reproducibility;
    EnumSet<FunctionalLevel> functional_level;
    EnumSet<Asset> asset;
    EnumSet<Technique> technique;
    EnumSet<Premise> premise;

    friend bool operator==(const AttackModel&, const AttackModel&) = default;
};

struct ThreatModel {
    std::string name;
    AdversaryModel adversary;
    AttackModel attack;
    std::string notes;

    friend bool operator==(const ThreatModel&, const ThreatModel&) = default;
};

struct Violation {
    std::string rule;     // stable identifier, e.g. "empty_attribute_set"
    std::string field;    // "attack.technique"
    std::string message;  // human-readable, e.g. "invasive requires possession"
};

struct ValidationResult {
    std::vector<Violation> violations;
    std::vector<std::string> warnings;  // advisory only, never fail validation

    bool ok() const { return violations.empty(); }
};

/// Pure; never throws on a structurally complete model.
ValidationResult validate(const ThreatModel& tm);

inline constexpr std::string_view kPresetNames[] = {
    "cross_layer_firmware", "load_changing", "time_delay", "td_propagation"};

/// Throws cpes::ValidationError for an unknown name.
ThreatModel preset(std::string_view name);

/// JSON document, schema_version 1, enum literals in lower_snake_case.
std::string serialize(const ThreatModel& tm);
/// Throws cpes::ParseError naming the offending field.
ThreatModel deserialize(std::string_view document);

std::string_view to_string(Knowledge);
std::string_view to_string(Access);
std::string_view to_string(Specificity);
std::string_view to_string(Resources);
std::string_view to_string(Frequency);
std::string_view to_string(Reproducibility);
std::string_view to_string(FunctionalLevel);
std::string_view to_string(Asset);
std::string_view to_string(Technique);
std::string_view to_string(Premise);

}  // namespace cpes::threat
