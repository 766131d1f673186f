#pragma once

#include <array>
#include <bitset>
#include <filesystem>
#include <istream>
#include <string>
#include <vector>

#include "chainlens/types.hpp"

namespace chainlens {

class TypeSet {
public:
    TypeSet() = default;
    TypeSet(std::initializer_list<EntityType> types) {
        for (auto t : types) insert(t);
    }

    void insert(EntityType t) { bits_.set(index_of(t)); }
    bool contains(EntityType t) const { return bits_.test(index_of(t)); }
    bool empty() const { return bits_.none(); }
    std::size_t size() const { return bits_.count(); }
    std::vector<EntityType> members() const;

    friend bool operator==(const TypeSet&, const TypeSet&) = default;

private:
    std::bitset<kNumEntityTypes> bits_;
};

struct RelationSignature {
    TypeSet source;
    TypeSet target;

    friend bool operator==(const RelationSignature&, const RelationSignature&) = default;
};

// Per-relation source/target entity-type constraints.
class Schema {
public:
    // Every relation starts unconstrained-empty; use default_schema() or a schema file.
    Schema() = default;

    const RelationSignature& signature(RelationType r) const { return sigs_[index_of(r)]; }
    void set(RelationType r, RelationSignature sig) { sigs_[index_of(r)] = std::move(sig); }

    bool allows(EntityType subject, RelationType r, EntityType object) const {
        const auto& sig = signature(r);
        return sig.source.contains(subject) && sig.target.contains(object);
    }

    // Throws ConfigError naming the first relation with an empty side.
    void check_complete() const;

    friend bool operator==(const Schema&, const Schema&) = default;

private:
    std::array<RelationSignature, kNumRelationTypes> sigs_{};
};

// The built-in supply-network schema (8 entity types, 11 relation types).
const Schema& default_schema();

// Line format: relation TAB source,types TAB target,types. '#' starts a comment line.
Schema parse_schema(std::istream& in);
Schema load_schema(const std::filesystem::path& path);
std::string format_schema(const Schema& schema);

}  // namespace chainlens
