#include "chainlens/graph.hpp"

#include <algorithm>

#include "chainlens/error.hpp"

namespace chainlens {

std::string Graph::key_of(std::string_view label, EntityType type) const {
    std::string key(label);
    key += '\x1f';
    key += to_string(type);
    return key;
}

void Graph::require(EntityId id) const {
    if (!has_entity(id)) throw UnknownEntity("unknown entity id " + std::to_string(id));
}

EntityId Graph::add_entity(std::string label, EntityType type) {
    auto id = static_cast<EntityId>(entities_.size());
    label_index_.try_emplace(key_of(label, type), id);
    entities_.push_back(Entity{id, std::move(label), type});
    by_subject_.emplace_back();
    by_object_.emplace_back();
    return id;
}

const Entity& Graph::entity(EntityId id) const {
    require(id);
    return entities_[id];
}

std::optional<EntityId> Graph::find(std::string_view label, EntityType type) const {
    auto it = label_index_.find(key_of(label, type));
    if (it == label_index_.end()) return std::nullopt;
    return it->second;
}

InsertOutcome Graph::insert(const Triple& t) {
    if (!triple_set_.insert(t).second) return InsertOutcome::duplicate;
    auto idx = triples_.size();
    triples_.push_back(t);
    by_subject_[t.subject].push_back(idx);
    by_object_[t.object].push_back(idx);
    by_predicate_[index_of(t.predicate)].push_back(idx);
    return InsertOutcome::added;
}

InsertOutcome Graph::add_triple(EntityId subject, RelationType predicate, EntityId object,
                                const Schema& schema) {
    require(subject);
    require(object);
    auto st = entities_[subject].type;
    auto ot = entities_[object].type;
    if (!schema.allows(st, predicate, ot)) {
        throw SchemaViolation("(" + std::string(to_string(st)) + ", " +
                              std::string(to_string(predicate)) + ", " +
                              std::string(to_string(ot)) + ") is not allowed: '" +
                              entities_[subject].label + "' -> '" + entities_[object].label + "'");
    }
    return insert(Triple{subject, predicate, object});
}

InsertOutcome Graph::add_triple_unchecked(const Triple& t) {
    require(t.subject);
    require(t.object);
    return insert(t);
}

const std::vector<std::size_t>& Graph::triples_from(EntityId subject) const {
    require(subject);
    return by_subject_[subject];
}

const std::vector<std::size_t>& Graph::triples_to(EntityId object) const {
    require(object);
    return by_object_[object];
}

std::vector<Neighbor> Graph::neighbors(EntityId entity, Direction direction,
                                       std::optional<RelationType> predicate) const {
    require(entity);
    std::vector<Neighbor> out;
    auto keep = [&](const Triple& t) { return !predicate || t.predicate == *predicate; };
    if (direction != Direction::in) {
        for (auto idx : by_subject_[entity])
            if (keep(triples_[idx])) out.push_back({triples_[idx].object, triples_[idx].predicate});
    }
    if (direction != Direction::out) {
        for (auto idx : by_object_[entity])
            if (keep(triples_[idx])) out.push_back({triples_[idx].subject, triples_[idx].predicate});
    }
    std::sort(out.begin(), out.end());
    return out;
}

Graph Graph::project_subgraph(const TypeSet& entity_types,
                              std::span<const RelationType> relation_types) const {
    Graph out;
    constexpr auto kDropped = static_cast<EntityId>(-1);
    std::vector<EntityId> remap(entities_.size(), kDropped);
    for (const auto& e : entities_)
        if (entity_types.contains(e.type)) remap[e.id] = out.add_entity(e.label, e.type);

    std::array<bool, kNumRelationTypes> keep_rel{};
    for (auto r : relation_types) keep_rel[index_of(r)] = true;
    for (const auto& t : triples_) {
        if (!keep_rel[index_of(t.predicate)]) continue;
        if (remap[t.subject] == kDropped || remap[t.object] == kDropped) continue;
        out.insert(Triple{remap[t.subject], t.predicate, remap[t.object]});
    }
    return out;
}

ValidationReport Graph::validate(const Schema& schema) const {
    ValidationReport report;
    for (std::size_t i = 0; i < triples_.size(); ++i) {
        const auto& t = triples_[i];
        if (!has_entity(t.subject) || !has_entity(t.object)) {
            report.issues.push_back({ValidationIssue::Kind::dangling_reference, i, t,
                                     "triple references a missing entity"});
            continue;
        }
        auto st = entities_[t.subject].type;
        auto ot = entities_[t.object].type;
        if (!schema.allows(st, t.predicate, ot)) {
            report.issues.push_back(
                {ValidationIssue::Kind::schema_violation, i, t,
                 std::string(to_string(st)) + " -" + std::string(to_string(t.predicate)) + "-> " +
                     std::string(to_string(ot)) + " violates the schema"});
        }
    }
    return report;
}

GraphStats Graph::stats() const {
    GraphStats s;
    for (const auto& e : entities_) ++s.entities_by_type[index_of(e.type)];
    for (const auto& t : triples_) ++s.triples_by_relation[index_of(t.predicate)];
    s.total_entities = entities_.size();
    s.total_triples = triples_.size();
    return s;
}

std::uint64_t Graph::vocabulary_fingerprint() const {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    auto mix = [&](unsigned char c) {
        h ^= c;
        h *= 0x100000001b3ULL;
    };
    for (const auto& e : entities_) {
        for (char c : e.label) mix(static_cast<unsigned char>(c));
        mix(0x1f);
        mix(static_cast<unsigned char>(e.type));
        mix(0x1e);
    }
    return h;
}

std::vector<std::string> Graph::canonical_triples() const {
    std::vector<std::string> rows;
    rows.reserve(triples_.size());
    for (const auto& t : triples_) {
        const auto& s = entities_[t.subject];
        const auto& o = entities_[t.object];
        std::string row;
        row.reserve(s.label.size() + o.label.size() + 48);
        row.append(s.label).append("\t").append(to_string(s.type)).append("\t");
        row.append(to_string(t.predicate)).append("\t");
        row.append(o.label).append("\t").append(to_string(o.type));
        rows.push_back(std::move(row));
    }
    std::sort(rows.begin(), rows.end());
    return rows;
}

}  // namespace chainlens
