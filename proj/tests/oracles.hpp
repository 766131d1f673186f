#pragma once

// Independent reference computations used by the unit and acceptance suites.

#include <algorithm>
#include <cstdint>
#include <cmath>
#include <complex>
#include <limits>
#include <queue>
#include <vector>

#include "chainlens/embeddings.hpp"
#include "chainlens/graph.hpp"

namespace chainlens::oracle {

// ---- scores, straight from the defining formulas -------------------------

inline double complex_score(const ModelParams& p, const Triple& t) {
    const std::size_t d = p.dim;
    auto es = p.entity_row(t.subject), eo = p.entity_row(t.object);
    auto w = p.relation_row(index_of(t.predicate));
    std::complex<double> sum = 0.0;
    for (std::size_t k = 0; k < d; ++k) {
        std::complex<double> s(es[k], es[d + k]), r(w[k], w[d + k]), o(eo[k], eo[d + k]);
        sum += s * r * std::conj(o);
    }
    return sum.real();
}

inline double rotate_score(const ModelParams& p, const Triple& t) {
    const std::size_t d = p.dim;
    auto es = p.entity_row(t.subject), eo = p.entity_row(t.object);
    auto th = p.relation_row(index_of(t.predicate));
    double sum = 0.0;
    for (std::size_t k = 0; k < d; ++k) {
        std::complex<double> s(es[k], es[d + k]), o(eo[k], eo[d + k]);
        sum += std::abs(s * std::polar(1.0, th[k]) - o);
    }
    return -sum;
}

inline double tucker_score(const ModelParams& p, const Triple& t) {
    const std::size_t d = p.dim;
    auto es = p.entity_row(t.subject), eo = p.entity_row(t.object);
    auto w = p.relation_row(index_of(t.predicate));
    double sum = 0.0;
    for (std::size_t a = 0; a < d; ++a)
        for (std::size_t b = 0; b < d; ++b)
            for (std::size_t c = 0; c < d; ++c) sum += p.core[(a * d + b) * d + c] * es[a] * w[b] * eo[c];
    return sum;
}

// ---- gradients by central finite differences ------------------------------

struct GradCheck {
    double max_rel_error = 0.0;
    std::size_t checked = 0;
};

inline double rel_error(double analytic, double numeric) {
    const double scale = std::max({std::abs(analytic), std::abs(numeric), 1e-6});
    return std::abs(analytic - numeric) / scale;
}

// Compares the analytic gradient of the margin loss with central differences
// of the loss evaluated through score(); every parameter entry is checked.
inline GradCheck check_gradient(ModelParams p, const Triple& pos, const Triple& neg, double margin,
                                double step = 1e-5) {
    const Gradient analytic = gradients(p, pos, neg, margin);
    auto loss = [&](const ModelParams& q) { return margin + score(q, neg) - score(q, pos); };
    GradCheck out;
    auto sweep = [&](std::vector<double>& block, const std::vector<double>& g) {
        for (std::size_t i = 0; i < block.size(); ++i) {
            const double saved = block[i];
            block[i] = saved + step;
            const double up = loss(p);
            block[i] = saved - step;
            const double down = loss(p);
            block[i] = saved;
            const double numeric = (up - down) / (2.0 * step);
            out.max_rel_error = std::max(out.max_rel_error, rel_error(g[i], numeric));
            ++out.checked;
        }
    };
    sweep(p.entity, analytic.entity);
    sweep(p.relation, analytic.relation);
    sweep(p.core, analytic.core);
    return out;
}

// Smallest distance of any non-differentiable point from the current
// parameters (L1 coordinates for TransE, zero moduli for RotatE).
inline double kink_distance(const ModelParams& p, const Triple& t) {
    const std::size_t d = p.dim;
    auto es = p.entity_row(t.subject), eo = p.entity_row(t.object);
    auto w = p.relation_row(index_of(t.predicate));
    double best = std::numeric_limits<double>::infinity();
    if (p.kind == ModelKind::TransE && p.transe_norm == DistanceNorm::L1) {
        for (std::size_t k = 0; k < d; ++k) best = std::min(best, std::abs(es[k] + w[k] - eo[k]));
    } else if (p.kind == ModelKind::RotatE) {
        for (std::size_t k = 0; k < d; ++k) {
            std::complex<double> s(es[k], es[d + k]), o(eo[k], eo[d + k]);
            best = std::min(best, std::abs(s * std::polar(1.0, w[k]) - o));
        }
    }
    return best;
}

// Random parameters plus a (positive, negative) pair whose hinge is active
// and which sits away from every kink of the loss.
struct GradCase {
    ModelParams params;
    Triple pos;
    Triple neg;
};

inline GradCase random_active_case(ModelKind kind, std::size_t dim, double margin, Rng& rng) {
    constexpr std::size_t kEntities = 7, kRelations = 3;
    for (;;) {
        TrainConfig config;
        config.dim = dim;
        config.seed = rng();
        auto p = init_params(kind, kEntities, kRelations, config);
        // Widen the draws so scores are not all tiny.
        for (auto* block : {&p.entity, &p.relation, &p.core})
            for (double& x : *block) x = uniform(rng, -1.0, 1.0);
        project_constraints(p);
        Triple pos{static_cast<EntityId>(uniform_index(rng, kEntities)),
                   kAllRelationTypes[uniform_index(rng, kRelations)],
                   static_cast<EntityId>(uniform_index(rng, kEntities))};
        Triple neg = negative_sample(pos, kEntities, rng);
        const double slack = margin + score(p, neg) - score(p, pos);
        if (slack < 1e-3) continue;
        if (std::min(kink_distance(p, pos), kink_distance(p, neg)) < 1e-3) continue;
        return {std::move(p), pos, neg};
    }
}

// ---- graph metrics by exhaustive enumeration ------------------------------

using Matrix = std::vector<std::vector<std::int64_t>>;

// Directed adjacency matrix without self-loops or multiplicities.
inline std::vector<std::vector<std::uint8_t>> adjacency(const Graph& g) {
    const std::size_t n = g.num_entities();
    std::vector<std::vector<std::uint8_t>> a(n, std::vector<std::uint8_t>(n, 0));
    for (const auto& t : g.triples())
        if (t.subject != t.object) a[t.subject][t.object] = 1;
    return a;
}

// Floyd-Warshall; -1 marks unreachable.
inline Matrix distances(const Graph& g) {
    const auto a = adjacency(g);
    const std::size_t n = a.size();
    constexpr std::int64_t inf = std::numeric_limits<std::int64_t>::max() / 4;
    Matrix d(n, std::vector<std::int64_t>(n, inf));
    for (std::size_t i = 0; i < n; ++i) {
        d[i][i] = 0;
        for (std::size_t j = 0; j < n; ++j)
            if (a[i][j]) d[i][j] = 1;
    }
    for (std::size_t k = 0; k < n; ++k)
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < n; ++j) d[i][j] = std::min(d[i][j], d[i][k] + d[k][j]);
    for (auto& row : d)
        for (auto& x : row)
            if (x >= inf) x = -1;
    return d;
}

// Shortest-path counts sigma[s][t] from the distance matrix.
inline std::vector<std::vector<std::uint64_t>> path_counts(const Graph& g, const Matrix& d) {
    const auto a = adjacency(g);
    const std::size_t n = a.size();
    std::vector<std::vector<std::uint64_t>> sigma(n, std::vector<std::uint64_t>(n, 0));
    for (std::size_t s = 0; s < n; ++s) {
        sigma[s][s] = 1;
        std::vector<std::size_t> by_distance;
        for (std::size_t t = 0; t < n; ++t)
            if (d[s][t] > 0) by_distance.push_back(t);
        std::sort(by_distance.begin(), by_distance.end(),
                  [&](std::size_t x, std::size_t y) { return d[s][x] < d[s][y]; });
        for (std::size_t t : by_distance)
            for (std::size_t u = 0; u < n; ++u)
                if (a[u][t] && d[s][u] >= 0 && d[s][u] + 1 == d[s][t]) sigma[s][t] += sigma[s][u];
    }
    return sigma;
}

// Sum over ordered pairs (s, t) of sigma_sv * sigma_vt / sigma_st.
inline std::vector<double> betweenness(const Graph& g) {
    const auto d = distances(g);
    const auto sigma = path_counts(g, d);
    const std::size_t n = d.size();
    std::vector<double> bc(n, 0.0);
    for (std::size_t v = 0; v < n; ++v)
        for (std::size_t s = 0; s < n; ++s)
            for (std::size_t t = 0; t < n; ++t) {
                if (s == v || t == v || s == t || d[s][t] < 0 || d[s][v] < 0 || d[v][t] < 0) continue;
                if (d[s][v] + d[v][t] != d[s][t]) continue;
                bc[v] += static_cast<double>(sigma[s][v] * sigma[v][t]) / static_cast<double>(sigma[s][t]);
            }
    return bc;
}

inline std::vector<double> closeness(const Graph& g) {
    const auto d = distances(g);
    const std::size_t n = d.size();
    std::vector<double> c(n, 0.0);
    for (std::size_t u = 0; u < n; ++u) {
        double reached = 0, total = 0;
        for (std::size_t v = 0; v < n; ++v)
            if (v != u && d[u][v] > 0) {
                reached += 1;
                total += static_cast<double>(d[u][v]);
            }
        if (reached > 0) c[u] = reached * reached / (total * static_cast<double>(n - 1));
    }
    return c;
}

inline std::vector<std::uint64_t> triangles(const Graph& g) {
    auto a = adjacency(g);
    const std::size_t n = a.size();
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) a[i][j] = a[i][j] || a[j][i];
    std::vector<std::uint64_t> count(n, 0);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j)
            for (std::size_t k = j + 1; k < n; ++k)
                if (a[i][j] && a[j][k] && a[i][k]) {
                    ++count[i];
                    ++count[j];
                    ++count[k];
                }
    return count;
}

inline bool close(double a, double b, double tol) { return std::abs(a - b) <= tol * std::max(1.0, std::abs(b)); }

}  // namespace chainlens::oracle
