#pragma once

#include <array>
#include <map>
#include <ostream>
#include <span>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "chainlens/embeddings.hpp"
#include "chainlens/schema.hpp"
#include "chainlens/types.hpp"

namespace chainlens {

enum class RankSetting : std::uint8_t { raw, filtered };
enum class TiePolicy : std::uint8_t { optimistic, realistic, pessimistic };

std::string_view to_string(RankSetting s);
std::string_view to_string(TiePolicy t);
std::optional<RankSetting> parse_rank_setting(std::string_view s);
std::optional<TiePolicy> parse_tie_policy(std::string_view s);

inline constexpr std::array<std::size_t, 3> kHitsAt = {1, 3, 10};

// Object-prediction query (subject, predicate, ?) with its held-out answer.
struct Query {
    EntityId subject = 0;
    RelationType predicate = RelationType::supplies_to;
    EntityId true_object = 0;
};

std::vector<Query> queries_from(std::span<const Triple> triples);

struct RankResult {
    Query query;
    double rank = 1.0;  // fractional under the realistic policy
    RankSetting setting = RankSetting::filtered;
    TiePolicy tie_policy = TiePolicy::realistic;
};

// Known-true objects per (subject, predicate).
class FilterIndex {
public:
    FilterIndex() = default;
    explicit FilterIndex(std::span<const Triple> triples) { add(triples); }

    void add(std::span<const Triple> triples);
    // Sorted, unique.
    std::span<const EntityId> known_objects(EntityId subject, RelationType predicate) const;

private:
    static std::uint64_t key(EntityId s, RelationType p) {
        return (static_cast<std::uint64_t>(s) << 8) | static_cast<std::uint64_t>(p);
    }
    std::unordered_map<std::uint64_t, std::vector<EntityId>> objects_;
};

// Rank of scores[true_index] among the candidates not excluded.
// optimistic: 1 + #greater; pessimistic: 1 + #(others >=); realistic: their mean.
double rank_from_scores(std::span<const double> scores, std::size_t true_index, TiePolicy tie,
                        std::span<const std::uint8_t> excluded = {});

struct EvalOptions {
    RankSetting setting = RankSetting::filtered;
    TiePolicy tie_policy = TiePolicy::realistic;
    // Restrict candidates to entity types allowed as the relation's target.
    bool type_constrained = false;
    const Schema* schema = nullptr;                   // required when type_constrained
    std::span<const EntityType> entity_types = {};    // required when type_constrained
    unsigned threads = 1;
};

// `filter` is required for the filtered setting and must contain every known
// true triple. Throws UnknownEntity for ids outside the model.
RankResult rank_object(const ModelParams& params, const Query& query, const FilterIndex* filter,
                       const EvalOptions& options = {});

struct Metrics {
    double mrr = 0.0;
    std::array<double, kHitsAt.size()> hits{};  // aligned with kHitsAt
    std::size_t count = 0;

    double hits_at(std::size_t k) const;
};

struct EvalReport {
    Metrics overall;
    std::map<RelationType, Metrics> per_relation;
    RankSetting setting = RankSetting::filtered;
    TiePolicy tie_policy = TiePolicy::realistic;
};

// Aggregates ranks (one per query, grouped by `relations`). Sums run over
// sorted values, so the result does not depend on query order.
EvalReport summarize_ranks(std::span<const double> ranks, std::span<const RelationType> relations,
                           RankSetting setting, TiePolicy tie);

// Throws EmptyQuerySet.
EvalReport evaluate(const ModelParams& params, std::span<const Query> queries, const FilterIndex* filter,
                    const EvalOptions& options = {});

struct PairedReport {
    EvalReport raw;
    EvalReport filtered;
};

// Raw and filtered reports over the same queries. Throws std::logic_error when
// a filtered rank exceeds its raw rank or filtered MRR drops below raw MRR.
PairedReport evaluate_both(const ModelParams& params, std::span<const Query> queries, const FilterIndex& filter,
                           const EvalOptions& options = {});

// Throws std::logic_error unless hits are monotone in k, MRR lies in (0, 1]
// and is at least hits@1, and per-relation counts sum to the total.
void check_invariants(const EvalReport& report);

// Structured text: key: value lines followed by the per-relation table.
void write_report_text(std::ostream& out, const EvalReport& report, std::string_view model_name);
// relation,queries,mrr,hits_at_1,hits_at_3,hits_at_10 with an "all" row first.
void write_report_csv(std::ostream& out, const EvalReport& report);

// One row per model: Model, MRR, Hits@1, Hits@3, Hits@10.
void write_results_table(std::ostream& out, std::span<const std::pair<std::string, EvalReport>> reports);

struct PerRelationTable {
    std::vector<std::string> models;
    std::vector<RelationType> relations;
    // mrr[relation][model]; rank[relation][model] is 1 for the model's best relation.
    std::vector<std::vector<double>> mrr;
    std::vector<std::vector<std::size_t>> rank;
};

// Throws VocabularyMismatch when the reports cover different relation sets.
PerRelationTable per_relation_table(std::span<const std::pair<std::string, EvalReport>> reports);
PerRelationTable per_relation_table(const std::map<ModelKind, EvalReport>& reports);
void write_per_relation_table(std::ostream& out, const PerRelationTable& table);

}  // namespace chainlens
