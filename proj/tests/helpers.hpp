#pragma once

#include <filesystem>
#include <string>

#include <unistd.h>

#include "chainlens/graph.hpp"
#include "chainlens/random.hpp"

namespace chainlens::testing {

// Random schema-legal graph over the built-in schema. Every relation is drawn
// from the legal (subject type, object type) combinations of the entities present.
inline Graph random_graph(Rng& rng, std::size_t num_entities, std::size_t num_triples) {
    Graph g;
    for (std::size_t i = 0; i < num_entities; ++i) {
        auto t = kAllEntityTypes[uniform_index(rng, kNumEntityTypes)];
        g.add_entity("e" + std::to_string(i), t);
    }
    const auto& schema = default_schema();
    std::size_t attempts = 0;
    while (g.num_triples() < num_triples && attempts++ < num_triples * 200) {
        auto s = static_cast<EntityId>(uniform_index(rng, num_entities));
        auto o = static_cast<EntityId>(uniform_index(rng, num_entities));
        auto r = kAllRelationTypes[uniform_index(rng, kNumRelationTypes)];
        if (schema.allows(g.type_of(s), r, g.type_of(o))) g.add_triple(s, r, o);
    }
    return g;
}

// Supplier-only graph with random supplies_to edges (no self-loops).
inline Graph random_supply_graph(Rng& rng, std::size_t n, double edge_prob) {
    Graph g;
    for (std::size_t i = 0; i < n; ++i) g.add_entity("s" + std::to_string(i), EntityType::Supplier);
    for (EntityId a = 0; a < n; ++a)
        for (EntityId b = 0; b < n; ++b)
            if (a != b && uniform01(rng) < edge_prob) g.add_triple(a, RelationType::supplies_to, b);
    return g;
}

// Supplier DAG: edges only from lower to higher ids.
inline Graph random_supply_dag(Rng& rng, std::size_t n, double edge_prob) {
    Graph g;
    for (std::size_t i = 0; i < n; ++i) g.add_entity("s" + std::to_string(i), EntityType::Supplier);
    for (EntityId a = 0; a < n; ++a)
        for (EntityId b = a + 1; b < n; ++b)
            if (uniform01(rng) < edge_prob) g.add_triple(a, RelationType::supplies_to, b);
    return g;
}

class TempDir {
public:
    TempDir() {
        static int counter = 0;
        path_ = std::filesystem::temp_directory_path() /
                ("chainlens_test_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
        std::filesystem::create_directories(path_);
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path_, ec);
    }
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;

    const std::filesystem::path& path() const { return path_; }
    std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

private:
    std::filesystem::path path_;
};

}  // namespace chainlens::testing
