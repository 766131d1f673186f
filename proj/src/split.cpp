#include <algorithm>
#include <cmath>
#include <set>

#include "chainlens/dataset.hpp"
#include "chainlens/error.hpp"
#include "chainlens/random.hpp"

namespace chainlens {

SplitConfig SplitConfig::from_config(const KeyValueConfig& kv, SplitConfig base) {
    if (auto v = kv.take_double("valid_fraction")) base.validation_fraction = *v;
    if (auto v = kv.take_double("test_fraction")) base.test_fraction = *v;
    if (auto v = kv.take_uint("seed")) base.seed = *v;
    return base;
}

SplitConfig SplitConfig::from_config(const KeyValueConfig& kv) {
    return from_config(kv, SplitConfig{});
}

void SplitConfig::check() const {
    auto in_open_unit = [](double f) { return f > 0.0 && f < 1.0; };
    if (!in_open_unit(validation_fraction) || !in_open_unit(test_fraction))
        throw ConfigError("split fractions must lie in (0, 1)");
    if (validation_fraction + test_fraction >= 1.0)
        throw ConfigError("validation_fraction + test_fraction must be < 1");
}

namespace {

std::size_t held_out_count(std::size_t n, double fraction) {
    // Nearest integer; an exact .5 rounds down so the spare triple stays in train.
    double c = std::ceil(fraction * static_cast<double>(n) - 0.5);
    return c <= 0.0 ? 0 : static_cast<std::size_t>(c);
}

}  // namespace

SplitSizes split_sizes(std::size_t num_triples, double validation_fraction, double test_fraction) {
    SplitSizes s;
    s.validation = held_out_count(num_triples, validation_fraction);
    s.test = held_out_count(num_triples, test_fraction);
    if (s.validation + s.test > num_triples) s.test = num_triples - s.validation;
    s.train = num_triples - s.validation - s.test;
    return s;
}

SplitResult transductive_split(const Graph& graph, const SplitConfig& config) {
    config.check();
    const auto& triples = graph.triples();
    const std::size_t n = triples.size();
    if (n == 0) throw SplitInfeasible("cannot split an empty graph");

    Rng rng(config.seed);
    std::vector<std::size_t> order(n);
    for (std::size_t i = 0; i < n; ++i) order[i] = i;
    shuffle(order, rng);
    std::vector<std::size_t> rank(n);
    for (std::size_t i = 0; i < n; ++i) rank[order[i]] = i;

    std::vector<bool> pinned(n, false);
    std::vector<bool> covered(graph.num_entities(), false);
    std::array<bool, kNumRelationTypes> rel_covered{};
    auto pin = [&](std::size_t idx) {
        pinned[idx] = true;
        covered[triples[idx].subject] = true;
        covered[triples[idx].object] = true;
        rel_covered[index_of(triples[idx].predicate)] = true;
    };

    // Greedy cover: prefer an incident triple whose other endpoint is also
    // uncovered, then the earliest in shuffled order.
    for (EntityId e = 0; e < graph.num_entities(); ++e) {
        if (covered[e]) continue;
        std::size_t best = n;
        bool best_double = false;
        auto consider = [&](std::size_t idx, EntityId other) {
            bool dbl = !covered[other] && other != e;
            if (best == n || (dbl && !best_double) || (dbl == best_double && rank[idx] < rank[best])) {
                best = idx;
                best_double = dbl;
            }
        };
        for (auto idx : graph.triples_from(e)) consider(idx, triples[idx].object);
        for (auto idx : graph.triples_to(e)) consider(idx, triples[idx].subject);
        if (best != n) pin(best);  // isolated entities need no cover
    }
    for (auto r : kAllRelationTypes) {
        if (rel_covered[index_of(r)]) continue;
        const auto& with = graph.triples_with(r);
        if (with.empty()) continue;
        auto best = *std::min_element(with.begin(), with.end(),
                                      [&](std::size_t a, std::size_t b) { return rank[a] < rank[b]; });
        pin(best);
    }

    std::vector<std::size_t> free;
    for (auto idx : order)
        if (!pinned[idx]) free.push_back(idx);

    auto sizes = split_sizes(n, config.validation_fraction, config.test_fraction);
    if (free.size() < sizes.validation + sizes.test) {
        throw SplitInfeasible("transductive split needs " + std::to_string(sizes.validation + sizes.test) +
                              " held-out triples but only " + std::to_string(free.size()) + " of " +
                              std::to_string(n) + " are not required to cover entities and relations");
    }

    std::vector<int> bucket(n, 0);  // 0 train, 1 validation, 2 test
    for (std::size_t i = 0; i < sizes.validation; ++i) bucket[free[i]] = 1;
    for (std::size_t i = sizes.validation; i < sizes.validation + sizes.test; ++i) bucket[free[i]] = 2;

    SplitResult out;
    for (std::size_t i = 0; i < n; ++i) {
        auto& dst = bucket[i] == 0 ? out.train : (bucket[i] == 1 ? out.validation : out.test);
        dst.push_back(triples[i]);
    }
    return out;
}

CoverageReport check_split(const Graph& graph, const SplitResult& split) {
    CoverageReport report;
    std::set<Triple> seen;
    std::size_t total = 0;
    for (const auto* part : {&split.train, &split.validation, &split.test}) {
        for (const auto& t : *part) {
            ++total;
            if (!graph.contains(t)) {
                report.partition = false;
                report.problems.push_back("triple not in graph");
            }
            if (!seen.insert(t).second) {
                report.partition = false;
                report.problems.push_back("triple assigned twice");
            }
        }
    }
    if (total != graph.num_triples() || seen.size() != graph.num_triples()) {
        report.partition = false;
        report.problems.push_back("split sizes do not add up to the graph");
    }

    std::vector<bool> in_train(graph.num_entities(), false);
    std::array<bool, kNumRelationTypes> rel_in_train{};
    for (const auto& t : split.train) {
        in_train[t.subject] = in_train[t.object] = true;
        rel_in_train[index_of(t.predicate)] = true;
    }
    for (const auto* part : {&split.validation, &split.test}) {
        for (const auto& t : *part) {
            for (auto e : {t.subject, t.object}) {
                if (!in_train[e]) {
                    report.transductive = false;
                    report.problems.push_back("entity '" + graph.entity(e).label + "' missing from train");
                }
            }
            if (!rel_in_train[index_of(t.predicate)]) {
                report.transductive = false;
                report.problems.push_back("relation " + std::string(to_string(t.predicate)) +
                                          " missing from train");
            }
        }
    }
    return report;
}

}  // namespace chainlens
