#pragma once

#include <array>
#include <compare>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <string_view>

namespace chainlens {

// Dense, consecutive, assigned at insertion.
using EntityId = std::uint32_t;

enum class EntityType : std::uint8_t {
    Supplier,
    ManufacturerPart,
    SiemensPart,
    Smelter,
    Substance,
    Component,
    Country,
    BusinessScope,
};
inline constexpr std::size_t kNumEntityTypes = 8;

enum class RelationType : std::uint8_t {
    supplies_to,
    related_to,
    belongs_to,
    located_in,
    includes,
    produces,
    produced_in,
    same_as,
    manufactured_by,
    contains,
    refines,
};
inline constexpr std::size_t kNumRelationTypes = 11;

inline constexpr std::array<EntityType, kNumEntityTypes> kAllEntityTypes = {
    EntityType::Supplier,  EntityType::ManufacturerPart, EntityType::SiemensPart,
    EntityType::Smelter,   EntityType::Substance,        EntityType::Component,
    EntityType::Country,   EntityType::BusinessScope,
};

inline constexpr std::array<RelationType, kNumRelationTypes> kAllRelationTypes = {
    RelationType::supplies_to, RelationType::related_to,   RelationType::belongs_to,
    RelationType::located_in,  RelationType::includes,     RelationType::produces,
    RelationType::produced_in, RelationType::same_as,      RelationType::manufactured_by,
    RelationType::contains,    RelationType::refines,
};

constexpr std::size_t index_of(EntityType t) { return static_cast<std::size_t>(t); }
constexpr std::size_t index_of(RelationType r) { return static_cast<std::size_t>(r); }

std::string_view to_string(EntityType t);
std::string_view to_string(RelationType r);
std::optional<EntityType> parse_entity_type(std::string_view name);
std::optional<RelationType> parse_relation_type(std::string_view name);

struct Triple {
    EntityId subject = 0;
    RelationType predicate = RelationType::supplies_to;
    EntityId object = 0;

    friend auto operator<=>(const Triple&, const Triple&) = default;
};

struct TripleHash {
    std::size_t operator()(const Triple& t) const noexcept {
        std::uint64_t h = (static_cast<std::uint64_t>(t.subject) << 32) | t.object;
        h ^= static_cast<std::uint64_t>(t.predicate) * 0x9e3779b97f4a7c15ULL;
        h ^= h >> 31;
        h *= 0xbf58476d1ce4e5b9ULL;
        h ^= h >> 29;
        return static_cast<std::size_t>(h);
    }
};

}  // namespace chainlens
