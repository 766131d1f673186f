#include "chainlens/types.hpp"

namespace chainlens {

namespace {

constexpr std::array<std::string_view, kNumEntityTypes> kEntityTypeNames = {
    "Supplier", "ManufacturerPart", "SiemensPart", "Smelter",
    "Substance", "Component", "Country", "BusinessScope",
};

constexpr std::array<std::string_view, kNumRelationTypes> kRelationTypeNames = {
    "supplies_to", "related_to", "belongs_to", "located_in",
    "includes", "produces", "produced_in", "same_as",
    "manufactured_by", "contains", "refines",
};

}  // namespace

std::string_view to_string(EntityType t) { return kEntityTypeNames[index_of(t)]; }
std::string_view to_string(RelationType r) { return kRelationTypeNames[index_of(r)]; }

std::optional<EntityType> parse_entity_type(std::string_view name) {
    for (std::size_t i = 0; i < kEntityTypeNames.size(); ++i)
        if (kEntityTypeNames[i] == name) return kAllEntityTypes[i];
    return std::nullopt;
}

std::optional<RelationType> parse_relation_type(std::string_view name) {
    for (std::size_t i = 0; i < kRelationTypeNames.size(); ++i)
        if (kRelationTypeNames[i] == name) return kAllRelationTypes[i];
    return std::nullopt;
}

}  // namespace chainlens
