#include "chainlens/evaluation.hpp"

#include <algorithm>
#include <cstdio>
#include <set>
#include <stdexcept>
#include <thread>

#include "chainlens/error.hpp"

namespace chainlens {

std::string_view to_string(RankSetting s) { return s == RankSetting::raw ? "raw" : "filtered"; }

std::string_view to_string(TiePolicy t) {
    switch (t) {
        case TiePolicy::optimistic: return "optimistic";
        case TiePolicy::realistic: return "realistic";
        case TiePolicy::pessimistic: return "pessimistic";
    }
    return "?";
}

std::optional<RankSetting> parse_rank_setting(std::string_view s) {
    if (s == "raw") return RankSetting::raw;
    if (s == "filtered") return RankSetting::filtered;
    return std::nullopt;
}

std::optional<TiePolicy> parse_tie_policy(std::string_view s) {
    if (s == "optimistic") return TiePolicy::optimistic;
    if (s == "realistic") return TiePolicy::realistic;
    if (s == "pessimistic") return TiePolicy::pessimistic;
    return std::nullopt;
}

std::vector<Query> queries_from(std::span<const Triple> triples) {
    std::vector<Query> out;
    out.reserve(triples.size());
    for (const auto& t : triples) out.push_back({t.subject, t.predicate, t.object});
    return out;
}

void FilterIndex::add(std::span<const Triple> triples) {
    for (const auto& t : triples) objects_[key(t.subject, t.predicate)].push_back(t.object);
    for (auto& [_, objs] : objects_) {
        std::sort(objs.begin(), objs.end());
        objs.erase(std::unique(objs.begin(), objs.end()), objs.end());
    }
}

std::span<const EntityId> FilterIndex::known_objects(EntityId subject, RelationType predicate) const {
    auto it = objects_.find(key(subject, predicate));
    if (it == objects_.end()) return {};
    return it->second;
}

double rank_from_scores(std::span<const double> scores, std::size_t true_index, TiePolicy tie,
                        std::span<const std::uint8_t> excluded) {
    const double target = scores[true_index];
    std::size_t greater = 0, equal = 0;
    for (std::size_t i = 0; i < scores.size(); ++i) {
        if (i == true_index) continue;
        if (!excluded.empty() && excluded[i]) continue;
        if (scores[i] > target)
            ++greater;
        else if (scores[i] == target)
            ++equal;
    }
    const double optimistic = 1.0 + double(greater);
    const double pessimistic = 1.0 + double(greater + equal);
    switch (tie) {
        case TiePolicy::optimistic: return optimistic;
        case TiePolicy::pessimistic: return pessimistic;
        case TiePolicy::realistic: return 0.5 * (optimistic + pessimistic);
    }
    return optimistic;
}

namespace {

double rank_with_buffer(const ModelParams& params, const Query& q, const FilterIndex* filter,
                        const EvalOptions& options, std::vector<double>& scores, std::vector<std::uint8_t>& excluded) {
    if (q.subject >= params.num_entities || q.true_object >= params.num_entities)
        throw UnknownEntity("query references an entity outside the model");
    if (index_of(q.predicate) >= params.num_relations)
        throw UnknownEntity("query references a relation outside the model");

    scores.resize(params.num_entities);
    score_objects(params, q.subject, index_of(q.predicate), scores);

    excluded.assign(params.num_entities, 0);
    bool any = false;
    if (options.setting == RankSetting::filtered) {
        if (!filter) throw Error("filtered ranking requires a filter index");
        for (auto o : filter->known_objects(q.subject, q.predicate)) {
            if (o != q.true_object && o < excluded.size()) {
                excluded[o] = 1;
                any = true;
            }
        }
    }
    if (options.type_constrained) {
        if (!options.schema || options.entity_types.size() != params.num_entities)
            throw Error("type-constrained ranking requires a schema and per-entity types");
        const auto& targets = options.schema->signature(q.predicate).target;
        for (EntityId o = 0; o < params.num_entities; ++o) {
            if (o != q.true_object && !targets.contains(options.entity_types[o])) {
                excluded[o] = 1;
                any = true;
            }
        }
    }
    return rank_from_scores(scores, q.true_object, options.tie_policy,
                            any ? std::span<const std::uint8_t>(excluded) : std::span<const std::uint8_t>{});
}

}  // namespace

RankResult rank_object(const ModelParams& params, const Query& query, const FilterIndex* filter,
                       const EvalOptions& options) {
    std::vector<double> scores;
    std::vector<std::uint8_t> excluded;
    return {query, rank_with_buffer(params, query, filter, options, scores, excluded), options.setting,
            options.tie_policy};
}

double Metrics::hits_at(std::size_t k) const {
    for (std::size_t i = 0; i < kHitsAt.size(); ++i)
        if (kHitsAt[i] == k) return hits[i];
    throw Error("hits@" + std::to_string(k) + " is not tracked");
}

namespace {

Metrics metrics_of(std::vector<double> ranks) {
    Metrics m;
    m.count = ranks.size();
    if (ranks.empty()) return m;
    std::sort(ranks.begin(), ranks.end());
    double rr = 0.0;
    // Smallest contributions first.
    for (auto it = ranks.rbegin(); it != ranks.rend(); ++it) rr += 1.0 / *it;
    m.mrr = rr / double(ranks.size());
    for (std::size_t i = 0; i < kHitsAt.size(); ++i) {
        auto within = std::upper_bound(ranks.begin(), ranks.end(), double(kHitsAt[i])) - ranks.begin();
        m.hits[i] = double(within) / double(ranks.size());
    }
    return m;
}

}  // namespace

EvalReport summarize_ranks(std::span<const double> ranks, std::span<const RelationType> relations,
                           RankSetting setting, TiePolicy tie) {
    if (ranks.empty()) throw EmptyQuerySet("evaluation needs at least one query");
    EvalReport report;
    report.setting = setting;
    report.tie_policy = tie;
    report.overall = metrics_of({ranks.begin(), ranks.end()});
    std::map<RelationType, std::vector<double>> grouped;
    if (!relations.empty() && relations.size() != ranks.size())
        throw Error("summarize_ranks: one relation per rank expected");
    for (std::size_t i = 0; i < relations.size(); ++i) grouped[relations[i]].push_back(ranks[i]);
    for (auto& [r, rs] : grouped) report.per_relation[r] = metrics_of(std::move(rs));
    return report;
}

namespace {

std::vector<double> compute_ranks(const ModelParams& params, std::span<const Query> queries,
                                  const FilterIndex* filter, const EvalOptions& options) {
    if (queries.empty()) throw EmptyQuerySet("evaluation needs at least one query");
    std::vector<double> ranks(queries.size());

    auto run = [&](std::size_t begin, std::size_t end) {
        std::vector<double> scores;
        std::vector<std::uint8_t> excluded;
        for (std::size_t i = begin; i < end; ++i)
            ranks[i] = rank_with_buffer(params, queries[i], filter, options, scores, excluded);
    };

    const std::size_t workers = std::clamp<std::size_t>(options.threads, 1, queries.size());
    if (workers == 1) {
        run(0, queries.size());
    } else {
        std::vector<std::thread> pool;
        std::vector<std::exception_ptr> errors(workers);
        const std::size_t chunk = (queries.size() + workers - 1) / workers;
        for (std::size_t w = 0; w < workers; ++w) {
            const std::size_t begin = w * chunk, end = std::min(queries.size(), begin + chunk);
            pool.emplace_back([&, w, begin, end] {
                try {
                    run(begin, end);
                } catch (...) {
                    errors[w] = std::current_exception();
                }
            });
        }
        for (auto& t : pool) t.join();
        for (auto& e : errors)
            if (e) std::rethrow_exception(e);
    }
    return ranks;
}

std::vector<RelationType> relations_of(std::span<const Query> queries) {
    std::vector<RelationType> relations(queries.size());
    for (std::size_t i = 0; i < queries.size(); ++i) relations[i] = queries[i].predicate;
    return relations;
}

}  // namespace

EvalReport evaluate(const ModelParams& params, std::span<const Query> queries, const FilterIndex* filter,
                    const EvalOptions& options) {
    auto ranks = compute_ranks(params, queries, filter, options);
    auto report = summarize_ranks(ranks, relations_of(queries), options.setting, options.tie_policy);
    check_invariants(report);
    return report;
}

PairedReport evaluate_both(const ModelParams& params, std::span<const Query> queries, const FilterIndex& filter,
                           const EvalOptions& options) {
    EvalOptions raw_options = options, filtered_options = options;
    raw_options.setting = RankSetting::raw;
    filtered_options.setting = RankSetting::filtered;
    const auto raw = compute_ranks(params, queries, nullptr, raw_options);
    const auto filtered = compute_ranks(params, queries, &filter, filtered_options);
    for (std::size_t i = 0; i < queries.size(); ++i)
        if (filtered[i] > raw[i])
            throw std::logic_error("filtered rank exceeds raw rank for query " + std::to_string(i));
    const auto relations = relations_of(queries);
    PairedReport out{summarize_ranks(raw, relations, RankSetting::raw, options.tie_policy),
                     summarize_ranks(filtered, relations, RankSetting::filtered, options.tie_policy)};
    check_invariants(out.raw);
    check_invariants(out.filtered);
    if (out.filtered.overall.mrr < out.raw.overall.mrr)
        throw std::logic_error("filtered MRR below raw MRR");
    return out;
}

void check_invariants(const EvalReport& report) {
    auto check = [](const Metrics& m, std::string_view where) {
        auto fail = [&](std::string_view what) {
            throw std::logic_error(std::string(what) + " (" + std::string(where) + ")");
        };
        if (!(m.mrr > 0.0 && m.mrr <= 1.0)) fail("MRR outside (0, 1]");
        for (std::size_t i = 0; i < m.hits.size(); ++i) {
            if (m.hits[i] < 0.0 || m.hits[i] > 1.0) fail("hits outside [0, 1]");
            if (i > 0 && m.hits[i] < m.hits[i - 1]) fail("hits not monotone in k");
        }
        if (m.mrr < m.hits[0]) fail("MRR below hits@1");
    };
    check(report.overall, "overall");
    std::size_t total = 0;
    for (const auto& [rel, m] : report.per_relation) {
        check(m, to_string(rel));
        total += m.count;
    }
    if (!report.per_relation.empty() && total != report.overall.count)
        throw std::logic_error("per-relation query counts do not sum to the total");
}

// ---- reporting -------------------------------------------------------------------

namespace {

std::string fixed(double v, int digits = 4) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*f", digits, v);
    return buf;
}

std::string padded(std::string_view s, std::size_t width) {
    std::string out(s);
    if (out.size() < width) out.append(width - out.size(), ' ');
    return out;
}

}  // namespace

void write_report_text(std::ostream& out, const EvalReport& report, std::string_view model_name) {
    const auto& m = report.overall;
    out << "model: " << model_name << '\n';
    out << "setting: " << to_string(report.setting) << '\n';
    out << "tie_policy: " << to_string(report.tie_policy) << '\n';
    out << "queries: " << m.count << '\n';
    out << "mrr: " << fixed(m.mrr, 6) << '\n';
    for (std::size_t i = 0; i < kHitsAt.size(); ++i)
        out << "hits@" << kHitsAt[i] << ": " << fixed(m.hits[i], 6) << '\n';
    out << '\n';
    out << padded("relation", 18) << padded("queries", 9) << padded("MRR", 9) << padded("Hits@1", 9)
        << padded("Hits@3", 9) << "Hits@10\n";
    for (const auto& [r, pm] : report.per_relation) {
        out << padded(to_string(r), 18) << padded(std::to_string(pm.count), 9) << padded(fixed(pm.mrr), 9)
            << padded(fixed(pm.hits[0]), 9) << padded(fixed(pm.hits[1]), 9) << fixed(pm.hits[2]) << '\n';
    }
}

void write_report_csv(std::ostream& out, const EvalReport& report) {
    out << "relation,queries,mrr,hits_at_1,hits_at_3,hits_at_10\n";
    auto row = [&](std::string_view name, const Metrics& m) {
        out << name << ',' << m.count << ',' << fixed(m.mrr, 9) << ',' << fixed(m.hits[0], 9) << ','
            << fixed(m.hits[1], 9) << ',' << fixed(m.hits[2], 9) << '\n';
    };
    row("all", report.overall);
    for (const auto& [r, m] : report.per_relation) row(to_string(r), m);
}

void write_results_table(std::ostream& out, std::span<const std::pair<std::string, EvalReport>> reports) {
    std::size_t width = 12;
    for (const auto& r : reports) width = std::max(width, r.first.size() + 2);
    out << padded("Model", width) << padded("MRR", 9) << padded("Hits@1", 9) << padded("Hits@3", 9) << "Hits@10\n";
    for (const auto& [name, report] : reports) {
        const auto& m = report.overall;
        out << padded(name, width) << padded(fixed(m.mrr), 9) << padded(fixed(m.hits[0]), 9)
            << padded(fixed(m.hits[1]), 9) << fixed(m.hits[2]) << '\n';
    }
}

PerRelationTable per_relation_table(std::span<const std::pair<std::string, EvalReport>> reports) {
    PerRelationTable table;
    if (reports.empty()) return table;
    std::set<RelationType> vocabulary;
    for (const auto& [r, _] : reports.front().second.per_relation) vocabulary.insert(r);
    for (const auto& [name, report] : reports) {
        std::set<RelationType> mine;
        for (const auto& [r, _] : report.per_relation) mine.insert(r);
        if (mine != vocabulary)
            throw VocabularyMismatch("report for " + name + " covers a different set of relation types");
        table.models.push_back(name);
    }
    table.relations.assign(vocabulary.begin(), vocabulary.end());
    const auto nr = table.relations.size(), nm = reports.size();
    table.mrr.assign(nr, std::vector<double>(nm, 0.0));
    table.rank.assign(nr, std::vector<std::size_t>(nm, 0));
    for (std::size_t m = 0; m < nm; ++m) {
        for (std::size_t r = 0; r < nr; ++r) table.mrr[r][m] = reports[m].second.per_relation.at(table.relations[r]).mrr;
        // Competition ranking within the model: 1 = best relation.
        for (std::size_t r = 0; r < nr; ++r) {
            std::size_t better = 0;
            for (std::size_t q = 0; q < nr; ++q)
                if (table.mrr[q][m] > table.mrr[r][m]) ++better;
            table.rank[r][m] = better + 1;
        }
    }
    return table;
}

PerRelationTable per_relation_table(const std::map<ModelKind, EvalReport>& reports) {
    std::vector<std::pair<std::string, EvalReport>> named;
    for (const auto& [kind, report] : reports) named.emplace_back(std::string(to_string(kind)), report);
    return per_relation_table(named);
}

void write_per_relation_table(std::ostream& out, const PerRelationTable& table) {
    std::vector<std::size_t> width;
    for (const auto& m : table.models) width.push_back(std::max<std::size_t>(16, m.size() + 2));
    out << padded("relation", 18);
    for (std::size_t m = 0; m < table.models.size(); ++m) out << padded(table.models[m], width[m]);
    out << '\n';
    for (std::size_t r = 0; r < table.relations.size(); ++r) {
        out << padded(to_string(table.relations[r]), 18);
        for (std::size_t m = 0; m < table.models.size(); ++m)
            out << padded(fixed(table.mrr[r][m]) + " (#" + std::to_string(table.rank[r][m]) + ")", width[m]);
        out << '\n';
    }
    out << "(#k = rank of the relation within the model's column, 1 = best)\n";
}

}  // namespace chainlens
