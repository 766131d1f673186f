#include <algorithm>
#include <cctype>
#include <cmath>
#include <numbers>

#include "chainlens/embeddings.hpp"

namespace chainlens {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

}  // namespace

std::string_view to_string(ModelKind kind) {
    switch (kind) {
        case ModelKind::RESCAL: return "RESCAL";
        case ModelKind::ComplEx: return "ComplEx";
        case ModelKind::TuckER: return "TuckER";
        case ModelKind::TransE: return "TransE";
        case ModelKind::RotatE: return "RotatE";
    }
    return "?";
}

std::optional<ModelKind> parse_model_kind(std::string_view name) {
    auto lower = [](std::string_view s) {
        std::string out(s);
        for (auto& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
        return out;
    };
    const auto wanted = lower(name);
    for (auto k : kAllModelKinds)
        if (lower(to_string(k)) == wanted) return k;
    return std::nullopt;
}

std::size_t ModelParams::entity_width() const {
    return (kind == ModelKind::ComplEx || kind == ModelKind::RotatE) ? 2 * dim : dim;
}

std::size_t ModelParams::relation_width() const {
    switch (kind) {
        case ModelKind::RESCAL: return dim * dim;
        case ModelKind::ComplEx: return 2 * dim;
        default: return dim;
    }
}

bool ModelParams::all_finite() const {
    auto finite = [](const std::vector<double>& v) {
        return std::all_of(v.begin(), v.end(), [](double x) { return std::isfinite(x); });
    };
    return finite(entity) && finite(relation) && finite(core);
}

void Gradient::zero() {
    std::fill(entity.begin(), entity.end(), 0.0);
    std::fill(relation.begin(), relation.end(), 0.0);
    std::fill(core.begin(), core.end(), 0.0);
}

bool Gradient::is_zero() const {
    auto z = [](const std::vector<double>& v) {
        return std::all_of(v.begin(), v.end(), [](double x) { return x == 0.0; });
    };
    return z(entity) && z(relation) && z(core);
}

void project_constraints(ModelParams& params) {
    if (params.kind == ModelKind::TransE) {
        for (EntityId e = 0; e < params.num_entities; ++e) {
            auto row = params.entity_row(e);
            double sq = 0.0;
            for (double x : row) sq += x * x;
            if (sq == 0.0) {
                row[0] = 1.0;
                continue;
            }
            const double inv = 1.0 / std::sqrt(sq);
            for (double& x : row) x *= inv;
        }
    } else if (params.kind == ModelKind::RotatE) {
        for (double& theta : params.relation) {
            theta = std::fmod(theta, kTwoPi);
            if (theta < 0.0) theta += kTwoPi;
            if (theta >= kTwoPi) theta = 0.0;
        }
    }
}

ModelParams init_params(ModelKind kind, std::size_t num_entities, std::size_t num_relations,
                        const TrainConfig& config) {
    ModelParams p;
    p.kind = kind;
    p.dim = config.dim;
    p.num_entities = num_entities;
    p.num_relations = num_relations;
    p.seed = config.seed;
    p.transe_norm = config.transe_norm;
    p.entity.resize(num_entities * p.entity_width());
    p.relation.resize(num_relations * p.relation_width());
    if (kind == ModelKind::TuckER) p.core.resize(config.dim * config.dim * config.dim);

    Rng rng(derive_seed(config.seed, 0));
    // Glorot-uniform per block: bound sqrt(6 / (fan_in + fan_out)).
    auto glorot = [&](std::vector<double>& block, double fan_in, double fan_out) {
        const double a = std::sqrt(6.0 / (fan_in + fan_out));
        for (double& x : block) x = uniform(rng, -a, a);
    };
    glorot(p.entity, double(num_entities), double(p.entity_width()));
    if (kind == ModelKind::RotatE) {
        for (double& x : p.relation) x = uniform(rng, 0.0, kTwoPi);
    } else {
        glorot(p.relation, double(num_relations), double(p.relation_width()));
    }
    if (kind == ModelKind::TuckER) {
        const double d = double(config.dim);
        glorot(p.core, d * d, d * d);
    }
    project_constraints(p);
    return p;
}

// ---- scoring ---------------------------------------------------------------

double score(const ModelParams& p, EntityId s, std::size_t r, EntityId o) {
    const std::size_t d = p.dim;
    auto es = p.entity_row(s);
    auto eo = p.entity_row(o);
    auto w = p.relation_row(r);
    double total = 0.0;
    switch (p.kind) {
        case ModelKind::RESCAL:
            for (std::size_t i = 0; i < d; ++i) {
                double row = 0.0;
                for (std::size_t j = 0; j < d; ++j) row += w[i * d + j] * eo[j];
                total += es[i] * row;
            }
            return total;
        case ModelKind::ComplEx:
            for (std::size_t k = 0; k < d; ++k) {
                const double a = es[k], b = es[d + k], c = w[k], dd = w[d + k], e = eo[k], f = eo[d + k];
                total += (a * c - b * dd) * e + (a * dd + b * c) * f;
            }
            return total;
        case ModelKind::TuckER:
            for (std::size_t a = 0; a < d; ++a) {
                double acc_a = 0.0;
                for (std::size_t b = 0; b < d; ++b) {
                    const double* slab = p.core.data() + (a * d + b) * d;
                    double acc_b = 0.0;
                    for (std::size_t c = 0; c < d; ++c) acc_b += slab[c] * eo[c];
                    acc_a += w[b] * acc_b;
                }
                total += es[a] * acc_a;
            }
            return total;
        case ModelKind::TransE:
            if (p.transe_norm == DistanceNorm::L1) {
                for (std::size_t k = 0; k < d; ++k) total += std::abs(es[k] + w[k] - eo[k]);
                return -total;
            }
            for (std::size_t k = 0; k < d; ++k) {
                const double x = es[k] + w[k] - eo[k];
                total += x * x;
            }
            return -std::sqrt(total);
        case ModelKind::RotatE:
            for (std::size_t k = 0; k < d; ++k) {
                const double cs = std::cos(w[k]), sn = std::sin(w[k]);
                const double u = es[k] * cs - es[d + k] * sn - eo[k];
                const double v = es[k] * sn + es[d + k] * cs - eo[d + k];
                total += std::hypot(u, v);
            }
            return -total;
    }
    return 0.0;
}

void score_objects(const ModelParams& p, EntityId s, std::size_t r, std::span<double> out) {
    const std::size_t d = p.dim;
    const std::size_t n = p.num_entities;
    auto es = p.entity_row(s);
    auto w = p.relation_row(r);
    // Query-side vector q so that the score is a simple function of (q, e_o).
    std::vector<double> q(p.entity_width(), 0.0);
    switch (p.kind) {
        case ModelKind::RESCAL:
            for (std::size_t i = 0; i < d; ++i)
                for (std::size_t j = 0; j < d; ++j) q[j] += es[i] * w[i * d + j];
            break;
        case ModelKind::ComplEx:
            for (std::size_t k = 0; k < d; ++k) {
                const double a = es[k], b = es[d + k], c = w[k], dd = w[d + k];
                q[k] = a * c - b * dd;
                q[d + k] = a * dd + b * c;
            }
            break;
        case ModelKind::TuckER:
            for (std::size_t a = 0; a < d; ++a)
                for (std::size_t b = 0; b < d; ++b) {
                    const double f = es[a] * w[b];
                    const double* slab = p.core.data() + (a * d + b) * d;
                    for (std::size_t c = 0; c < d; ++c) q[c] += f * slab[c];
                }
            break;
        case ModelKind::TransE:
            for (std::size_t k = 0; k < d; ++k) q[k] = es[k] + w[k];
            break;
        case ModelKind::RotatE:
            for (std::size_t k = 0; k < d; ++k) {
                const double cs = std::cos(w[k]), sn = std::sin(w[k]);
                q[k] = es[k] * cs - es[d + k] * sn;
                q[d + k] = es[k] * sn + es[d + k] * cs;
            }
            break;
    }

    for (EntityId o = 0; o < n; ++o) {
        auto eo = p.entity_row(o);
        double total = 0.0;
        switch (p.kind) {
            case ModelKind::RESCAL:
            case ModelKind::ComplEx:
            case ModelKind::TuckER:
                for (std::size_t k = 0; k < q.size(); ++k) total += q[k] * eo[k];
                out[o] = total;
                break;
            case ModelKind::TransE:
                if (p.transe_norm == DistanceNorm::L1) {
                    for (std::size_t k = 0; k < d; ++k) total += std::abs(q[k] - eo[k]);
                    out[o] = -total;
                } else {
                    for (std::size_t k = 0; k < d; ++k) total += (q[k] - eo[k]) * (q[k] - eo[k]);
                    out[o] = -std::sqrt(total);
                }
                break;
            case ModelKind::RotatE:
                for (std::size_t k = 0; k < d; ++k) total += std::hypot(q[k] - eo[k], q[d + k] - eo[d + k]);
                out[o] = -total;
                break;
        }
    }
}

Triple negative_sample(const Triple& triple, std::size_t num_entities, Rng& rng) {
    Triple neg = triple;
    const bool corrupt_subject = (rng() >> 63) != 0;
    EntityId& slot = corrupt_subject ? neg.subject : neg.object;
    auto k = static_cast<EntityId>(uniform_index(rng, num_entities - 1));
    slot = k >= slot ? k + 1 : k;
    return neg;
}

// ---- gradients ---------------------------------------------------------------

namespace {

// Adds coeff * d score(s, r, o) / d params into grad.
void add_score_gradient(const ModelParams& p, const Triple& t, double coeff, Gradient& g) {
    const std::size_t d = p.dim;
    const std::size_t r = index_of(t.predicate);
    const std::size_t ew = p.entity_width(), rw = p.relation_width();
    auto es = p.entity_row(t.subject);
    auto eo = p.entity_row(t.object);
    auto w = p.relation_row(r);
    double* gs = g.entity.data() + t.subject * ew;
    double* go = g.entity.data() + t.object * ew;
    double* gr = g.relation.data() + r * rw;

    switch (p.kind) {
        case ModelKind::RESCAL:
            for (std::size_t i = 0; i < d; ++i) {
                double m_eo = 0.0;
                for (std::size_t j = 0; j < d; ++j) {
                    m_eo += w[i * d + j] * eo[j];
                    gr[i * d + j] += coeff * es[i] * eo[j];
                }
                gs[i] += coeff * m_eo;
            }
            for (std::size_t j = 0; j < d; ++j) {
                double mt_es = 0.0;
                for (std::size_t i = 0; i < d; ++i) mt_es += w[i * d + j] * es[i];
                go[j] += coeff * mt_es;
            }
            break;
        case ModelKind::ComplEx:
            for (std::size_t k = 0; k < d; ++k) {
                const double a = es[k], b = es[d + k], c = w[k], dd = w[d + k], e = eo[k], f = eo[d + k];
                gs[k] += coeff * (c * e + dd * f);
                gs[d + k] += coeff * (c * f - dd * e);
                gr[k] += coeff * (a * e + b * f);
                gr[d + k] += coeff * (a * f - b * e);
                go[k] += coeff * (a * c - b * dd);
                go[d + k] += coeff * (a * dd + b * c);
            }
            break;
        case ModelKind::TuckER: {
            double* gw = g.core.data();
            for (std::size_t a = 0; a < d; ++a) {
                for (std::size_t b = 0; b < d; ++b) {
                    const double* slab = p.core.data() + (a * d + b) * d;
                    double* gslab = gw + (a * d + b) * d;
                    const double sr = es[a] * w[b];
                    double w_o = 0.0;
                    for (std::size_t c = 0; c < d; ++c) {
                        w_o += slab[c] * eo[c];
                        gslab[c] += coeff * sr * eo[c];
                        go[c] += coeff * sr * slab[c];
                    }
                    gs[a] += coeff * w[b] * w_o;
                    gr[b] += coeff * es[a] * w_o;
                }
            }
            break;
        }
        case ModelKind::TransE:
            if (p.transe_norm == DistanceNorm::L1) {
                for (std::size_t k = 0; k < d; ++k) {
                    const double x = es[k] + w[k] - eo[k];
                    const double sg = (x > 0.0) - (x < 0.0);
                    gs[k] -= coeff * sg;
                    gr[k] -= coeff * sg;
                    go[k] += coeff * sg;
                }
            } else {
                double sq = 0.0;
                for (std::size_t k = 0; k < d; ++k) {
                    const double x = es[k] + w[k] - eo[k];
                    sq += x * x;
                }
                if (sq == 0.0) break;
                const double inv = 1.0 / std::sqrt(sq);
                for (std::size_t k = 0; k < d; ++k) {
                    const double unit = (es[k] + w[k] - eo[k]) * inv;
                    gs[k] -= coeff * unit;
                    gr[k] -= coeff * unit;
                    go[k] += coeff * unit;
                }
            }
            break;
        case ModelKind::RotatE:
            for (std::size_t k = 0; k < d; ++k) {
                const double a = es[k], b = es[d + k];
                const double cs = std::cos(w[k]), sn = std::sin(w[k]);
                const double u = a * cs - b * sn - eo[k];
                const double v = a * sn + b * cs - eo[d + k];
                const double m = std::hypot(u, v);
                if (m == 0.0) continue;
                const double du = u / m, dv = v / m;  // d|.|/du, d|.|/dv
                // score = -sum m
                gs[k] -= coeff * (du * cs + dv * sn);
                gs[d + k] -= coeff * (-du * sn + dv * cs);
                gr[k] -= coeff * (du * (-a * sn - b * cs) + dv * (a * cs - b * sn));
                go[k] += coeff * du;
                go[d + k] += coeff * dv;
            }
            break;
    }
}

}  // namespace

double accumulate_gradients(const ModelParams& params, const Triple& pos, const Triple& neg, double margin,
                            double scale, Gradient& grad) {
    const double loss = margin_ranking_loss(score(params, pos), score(params, neg), margin);
    if (loss <= 0.0) return 0.0;
    // loss = margin + f(neg) - f(pos)
    add_score_gradient(params, neg, scale, grad);
    add_score_gradient(params, pos, -scale, grad);
    return loss;
}

double accumulate_l2(const ModelParams& params, const Triple& t, double weight, double scale, Gradient& grad) {
    if (weight == 0.0) return 0.0;
    double penalty = 0.0;
    auto add = [&](std::span<const double> x, double* g) {
        for (std::size_t k = 0; k < x.size(); ++k) {
            penalty += x[k] * x[k];
            g[k] += scale * 2.0 * weight * x[k];
        }
    };
    const std::size_t ew = params.entity_width(), r = index_of(t.predicate);
    add(params.entity_row(t.subject), grad.entity.data() + t.subject * ew);
    add(params.entity_row(t.object), grad.entity.data() + t.object * ew);
    if (params.kind != ModelKind::RotatE)
        add(params.relation_row(r), grad.relation.data() + r * params.relation_width());
    return weight * penalty;
}

Gradient gradients(const ModelParams& params, const Triple& pos, const Triple& neg, double margin) {
    Gradient g(params);
    accumulate_gradients(params, pos, neg, margin, 1.0, g);
    return g;
}

// ---- Adam ----------------------------------------------------------------------

AdamState::AdamState(const ModelParams& p)
    : m_entity(p.entity.size(), 0.0),
      v_entity(p.entity.size(), 0.0),
      m_relation(p.relation.size(), 0.0),
      v_relation(p.relation.size(), 0.0),
      m_core(p.core.size(), 0.0),
      v_core(p.core.size(), 0.0) {}

void adam_step(ModelParams& params, const Gradient& grad, AdamState& state, const TrainConfig& config) {
    ++state.step;
    const double t = double(state.step);
    const double bc1 = 1.0 - std::pow(config.adam_beta1, t);
    const double bc2 = 1.0 - std::pow(config.adam_beta2, t);
    const double lr = config.learning_rate;
    const double b1 = config.adam_beta1, b2 = config.adam_beta2, eps = config.adam_epsilon;
    auto block = [&](std::vector<double>& x, const std::vector<double>& g, std::vector<double>& m,
                     std::vector<double>& v) {
        for (std::size_t i = 0; i < x.size(); ++i) {
            m[i] = b1 * m[i] + (1.0 - b1) * g[i];
            v[i] = b2 * v[i] + (1.0 - b2) * g[i] * g[i];
            const double m_hat = m[i] / bc1;
            const double v_hat = v[i] / bc2;
            x[i] -= lr * m_hat / (std::sqrt(v_hat) + eps);
        }
    };
    block(params.entity, grad.entity, state.m_entity, state.v_entity);
    block(params.relation, grad.relation, state.m_relation, state.v_relation);
    block(params.core, grad.core, state.m_core, state.v_core);
    project_constraints(params);
}

}  // namespace chainlens
