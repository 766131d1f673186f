#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <istream>
#include <ostream>
#include <string>
#include <vector>

#include "chainlens/config.hpp"
#include "chainlens/graph.hpp"

namespace chainlens {

// ---- triple files ----------------------------------------------------------
//
// UTF-8, one triple per line:
//   subject_label TAB subject_type TAB predicate TAB object_label TAB object_type
// Lines starting with '#' are comments. Entities are keyed by (label, type).

inline constexpr std::string_view kTripleFileHeader =
    "# subject_label\tsubject_type\tpredicate\tobject_label\tobject_type";

// Adds the stream's triples to `graph`, reusing entities with matching (label, type).
// Throws ParseError / SchemaViolation carrying the 1-based line number.
void read_triples(std::istream& in, Graph& graph, const Schema& schema = default_schema());
Graph load_triples(const std::filesystem::path& path, const Schema& schema = default_schema());

// Header comment plus one sorted line per triple.
void write_triples(std::ostream& out, const Graph& graph);
void export_triples(const Graph& graph, const std::filesystem::path& path);

// ---- synthetic generation -------------------------------------------------

struct TierSizes {
    std::size_t tier1 = 0;
    std::size_t tier2 = 0;
    std::size_t tier3 = 0;
};

struct GeneratorConfig {
    std::uint64_t seed = 42;
    std::array<std::size_t, kNumEntityTypes> entity_counts{};
    std::array<std::size_t, kNumRelationTypes> relation_counts{};
    // Disjoint tier assignment of non-hub suppliers; suppliers left over join tier 3.
    TierSizes tiers;
    std::string hub_label = "HUB";
    // Tier-1 suppliers that also buy from the hub.
    std::size_t hub_customers = 10;
    // Share of supplies_to edges that skip a tier.
    double shortcut_fraction = 0.05;

    std::size_t& entities(EntityType t) { return entity_counts[index_of(t)]; }
    std::size_t entities(EntityType t) const { return entity_counts[index_of(t)]; }
    std::size_t& relations(RelationType r) { return relation_counts[index_of(r)]; }
    std::size_t relations(RelationType r) const { return relation_counts[index_of(r)]; }

    // About 1/100 of the reference network: ~670 entities, ~3,200 triples.
    static GeneratorConfig defaults();

    // Keys: seed, hub_label, hub_customers, shortcut_fraction, tier1..tier3,
    // entities.<EntityType>, relations.<relation>. Unset keys keep defaults().
    static GeneratorConfig from_config(const KeyValueConfig& kv);
    KeyValueConfig to_config() const;
};

struct GeneratedNetwork {
    Graph graph;
    EntityId hub = 0;
    // Tier (1..3) per Supplier id; hub is tier 0, non-suppliers -1.
    std::vector<int> tier;
};

// Deterministic for a fixed config. Throws ConfigError naming the relation whose
// count cannot be met.
GeneratedNetwork generate_network(const GeneratorConfig& config);
inline Graph generate_synthetic(const GeneratorConfig& config) {
    return generate_network(config).graph;
}

// ---- transductive split ---------------------------------------------------

struct SplitConfig {
    double validation_fraction = 0.1;
    double test_fraction = 0.1;
    std::uint64_t seed = 42;

    // Keys: valid_fraction, test_fraction, seed.
    static SplitConfig from_config(const KeyValueConfig& kv, SplitConfig base);
    static SplitConfig from_config(const KeyValueConfig& kv);
    void check() const;
};

struct SplitResult {
    std::vector<Triple> train;
    std::vector<Triple> validation;
    std::vector<Triple> test;
};

struct SplitSizes {
    std::size_t train = 0;
    std::size_t validation = 0;
    std::size_t test = 0;
};

// Held-out counts are fraction * n rounded to nearest, halves going to train.
SplitSizes split_sizes(std::size_t num_triples, double validation_fraction, double test_fraction);

// Pins one incident triple per entity and relation type into train, then samples
// the held-out sets uniformly from the rest. Throws SplitInfeasible when the
// unpinned triples cannot fill the requested held-out sizes.
SplitResult transductive_split(const Graph& graph, const SplitConfig& config);

struct CoverageReport {
    bool partition = true;
    bool transductive = true;
    std::vector<std::string> problems;
    bool ok() const { return partition && transductive; }
};

// Checks partition of `graph` triples and train coverage of held-out entities/relations.
CoverageReport check_split(const Graph& graph, const SplitResult& split);

// Files train.tsv, valid.tsv, test.tsv in `dir`.
void write_split(const Graph& graph, const SplitResult& split, const std::filesystem::path& dir);

struct LoadedSplit {
    // Entities are numbered by first appearance over train, valid, test.
    Graph graph;
    SplitResult split;
};

LoadedSplit load_split(const std::filesystem::path& dir, const Schema& schema = default_schema());

}  // namespace chainlens
