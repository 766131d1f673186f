#pragma once

#include <array>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "chainlens/schema.hpp"
#include "chainlens/types.hpp"

namespace chainlens {

struct Entity {
    EntityId id = 0;
    std::string label;
    EntityType type = EntityType::Supplier;
};

enum class Direction { in, out, both };

enum class InsertOutcome { added, duplicate };

struct Neighbor {
    EntityId entity;
    RelationType relation;

    friend auto operator<=>(const Neighbor&, const Neighbor&) = default;
};

struct ValidationIssue {
    enum class Kind { schema_violation, dangling_reference };
    Kind kind;
    std::size_t triple_index;
    Triple triple;
    std::string message;
};

struct ValidationReport {
    std::vector<ValidationIssue> issues;
    bool ok() const { return issues.empty(); }
};

struct GraphStats {
    std::array<std::size_t, kNumEntityTypes> entities_by_type{};
    std::array<std::size_t, kNumRelationTypes> triples_by_relation{};
    std::size_t total_entities = 0;
    std::size_t total_triples = 0;
};

// Typed triple store. Triples have set semantics; ids are dense and assigned
// in insertion order. Single writer during construction, read-only afterwards.
class Graph {
public:
    EntityId add_entity(std::string label, EntityType type);

    // Throws UnknownEntity or SchemaViolation; a repeated triple is left as is.
    InsertOutcome add_triple(EntityId subject, RelationType predicate, EntityId object,
                             const Schema& schema = default_schema());
    InsertOutcome add_triple(const Triple& t, const Schema& schema = default_schema()) {
        return add_triple(t.subject, t.predicate, t.object, schema);
    }

    // Skips the schema check (ids must still exist). For ingesting
    // known-inconsistent data that validate() should then report.
    InsertOutcome add_triple_unchecked(const Triple& t);

    std::size_t num_entities() const { return entities_.size(); }
    std::size_t num_triples() const { return triples_.size(); }
    bool empty() const { return entities_.empty(); }

    bool has_entity(EntityId id) const { return id < entities_.size(); }
    const Entity& entity(EntityId id) const;
    EntityType type_of(EntityId id) const { return entity(id).type; }
    const std::vector<Entity>& entities() const { return entities_; }
    const std::vector<Triple>& triples() const { return triples_; }
    bool contains(const Triple& t) const { return triple_set_.contains(t); }

    // First entity inserted with this (label, type), if any.
    std::optional<EntityId> find(std::string_view label, EntityType type) const;

    // Indices into triples().
    const std::vector<std::size_t>& triples_from(EntityId subject) const;
    const std::vector<std::size_t>& triples_to(EntityId object) const;
    const std::vector<std::size_t>& triples_with(RelationType predicate) const {
        return by_predicate_[index_of(predicate)];
    }

    // Sorted by (neighbor id, relation). Self-loops appear once per direction.
    std::vector<Neighbor> neighbors(EntityId entity, Direction direction,
                                    std::optional<RelationType> predicate = std::nullopt) const;

    // Entities of the given types (renumbered densely, original order kept) and
    // the triples of the given relations whose endpoints both survive.
    Graph project_subgraph(const TypeSet& entity_types,
                           std::span<const RelationType> relation_types) const;

    ValidationReport validate(const Schema& schema = default_schema()) const;
    GraphStats stats() const;

    // FNV-1a over (label, type) in id order; identifies the id assignment.
    std::uint64_t vocabulary_fingerprint() const;

    // (subject label, subject type, predicate, object label, object type) rows, sorted.
    std::vector<std::string> canonical_triples() const;

private:
    std::string key_of(std::string_view label, EntityType type) const;
    void require(EntityId id) const;
    InsertOutcome insert(const Triple& t);

    std::vector<Entity> entities_;
    std::unordered_map<std::string, EntityId> label_index_;
    std::vector<Triple> triples_;
    std::unordered_set<Triple, TripleHash> triple_set_;
    std::vector<std::vector<std::size_t>> by_subject_;
    std::vector<std::vector<std::size_t>> by_object_;
    std::array<std::vector<std::size_t>, kNumRelationTypes> by_predicate_{};
};

}  // namespace chainlens
