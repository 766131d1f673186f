#include <algorithm>
#include <cmath>
#include <cstdio>

#include "chainlens/embeddings.hpp"
#include "chainlens/error.hpp"
#include "chainlens/evaluation.hpp"
#include "text_util.hpp"

namespace chainlens {

void TrainConfig::check() const {
    if (dim == 0) throw ConfigError("dim must be positive");
    if (!(learning_rate > 0.0)) throw ConfigError("learning_rate must be positive");
    if (!(margin >= 0.0)) throw ConfigError("margin must be non-negative");
    if (negatives_per_positive == 0) throw ConfigError("negatives_per_positive must be positive");
    if (eval_every == 0) throw ConfigError("eval_every must be positive");
    if (patience == 0) throw ConfigError("patience must be positive");
    if (batch_size == 0) throw ConfigError("batch_size must be positive");
    if (!(adam_beta1 >= 0.0 && adam_beta1 < 1.0) || !(adam_beta2 >= 0.0 && adam_beta2 < 1.0))
        throw ConfigError("Adam betas must lie in [0, 1)");
    if (!(adam_epsilon > 0.0)) throw ConfigError("adam_epsilon must be positive");
    if (!(regularization >= 0.0)) throw ConfigError("regularization must be non-negative");
}

TrainConfig TrainConfig::from_config(const KeyValueConfig& kv, TrainConfig c) {
    if (auto v = kv.take_uint("dim")) c.dim = *v;
    if (auto v = kv.take_double("learning_rate")) c.learning_rate = *v;
    if (auto v = kv.take_double("margin")) c.margin = *v;
    if (auto v = kv.take_uint("negatives_per_positive")) c.negatives_per_positive = *v;
    if (auto v = kv.take_uint("max_epochs")) c.max_epochs = *v;
    if (auto v = kv.take_uint("eval_every")) c.eval_every = *v;
    if (auto v = kv.take_uint("patience")) c.patience = *v;
    if (auto v = kv.take_uint("batch_size")) c.batch_size = *v;
    if (auto v = kv.take_uint("seed")) c.seed = *v;
    if (auto v = kv.take_double("adam_beta1")) c.adam_beta1 = *v;
    if (auto v = kv.take_double("adam_beta2")) c.adam_beta2 = *v;
    if (auto v = kv.take_double("adam_epsilon")) c.adam_epsilon = *v;
    if (auto v = kv.take_double("regularization")) c.regularization = *v;
    if (auto v = kv.take_string("transe_norm")) {
        if (*v == "L1" || *v == "l1")
            c.transe_norm = DistanceNorm::L1;
        else if (*v == "L2" || *v == "l2")
            c.transe_norm = DistanceNorm::L2;
        else
            throw ConfigError("transe_norm must be L1 or L2");
    }
    return c;
}

KeyValueConfig TrainConfig::to_config() const {
    auto num = [](double v) { return detail::shortest(v); };
    KeyValueConfig kv;
    kv.set("dim", std::to_string(dim));
    kv.set("learning_rate", num(learning_rate));
    kv.set("margin", num(margin));
    kv.set("negatives_per_positive", std::to_string(negatives_per_positive));
    kv.set("max_epochs", std::to_string(max_epochs));
    kv.set("eval_every", std::to_string(eval_every));
    kv.set("patience", std::to_string(patience));
    kv.set("batch_size", std::to_string(batch_size));
    kv.set("seed", std::to_string(seed));
    kv.set("adam_beta1", num(adam_beta1));
    kv.set("adam_beta2", num(adam_beta2));
    kv.set("adam_epsilon", num(adam_epsilon));
    kv.set("regularization", num(regularization));
    kv.set("transe_norm", transe_norm == DistanceNorm::L1 ? "L1" : "L2");
    return kv;
}

void write_history_csv(std::ostream& out, const TrainHistory& history) {
    out << "epoch,hits_at_10,mrr,loss\n";
    char buf[128];
    for (const auto& r : history.records) {
        std::snprintf(buf, sizeof buf, "%zu,%.9f,%.9f,%.9f\n", r.epoch, r.hits_at_10, r.mrr, r.mean_loss);
        out << buf;
    }
}

bool EarlyStopping::observe(std::size_t epoch, double hits_at_10) {
    if (hits_at_10 > best_) {
        best_ = hits_at_10;
        best_epoch_ = epoch;
        bad_evaluations_ = 0;
        return true;
    }
    ++bad_evaluations_;
    return false;
}

TrainResult train(ModelKind kind, std::span<const Triple> train_triples, std::size_t num_entities,
                  std::size_t num_relations, const TrainConfig& config, const Validator& validator) {
    config.check();
    if (num_entities < 2) throw ConfigError("training needs at least two entities");
    if (num_relations == 0) throw ConfigError("training needs at least one relation");
    if (train_triples.empty() && config.max_epochs > 0) throw ConfigError("training set is empty");
    for (const auto& t : train_triples)
        if (t.subject >= num_entities || t.object >= num_entities || index_of(t.predicate) >= num_relations)
            throw ConfigError("training triple outside the entity/relation range");

    TrainResult result{init_params(kind, num_entities, num_relations, config), {}};
    ModelParams& params = result.params;
    AdamState state(params);
    Gradient grad(params);
    Rng rng(derive_seed(config.seed, 1));
    EarlyStopping stopper(config.patience);
    std::optional<ModelParams> best;

    std::vector<std::size_t> order(train_triples.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    const double pairs_per_epoch = double(train_triples.size() * config.negatives_per_positive);

    for (std::size_t epoch = 1; epoch <= config.max_epochs; ++epoch) {
        shuffle(order, rng);
        double epoch_loss = 0.0;
        for (std::size_t begin = 0; begin < order.size(); begin += config.batch_size) {
            const std::size_t end = std::min(order.size(), begin + config.batch_size);
            const double scale = 1.0 / double((end - begin) * config.negatives_per_positive);
            grad.zero();
            for (std::size_t i = begin; i < end; ++i) {
                const Triple& pos = train_triples[order[i]];
                accumulate_l2(params, pos, config.regularization, scale * double(config.negatives_per_positive),
                              grad);
                for (std::size_t k = 0; k < config.negatives_per_positive; ++k) {
                    const Triple neg = negative_sample(pos, num_entities, rng);
                    epoch_loss += accumulate_gradients(params, pos, neg, config.margin, scale, grad);
                }
            }
            adam_step(params, grad, state, config);
        }
        const double mean_loss = epoch_loss / pairs_per_epoch;
        result.history.epoch_losses.push_back(mean_loss);
        if (!params.all_finite()) throw Error("training diverged: non-finite parameters at epoch " + std::to_string(epoch));

        if (epoch % config.eval_every == 0 && validator) {
            auto metrics = validator(params, epoch);
            result.history.records.push_back({epoch, metrics.hits_at_10, metrics.mrr, mean_loss});
            if (stopper.observe(epoch, metrics.hits_at_10)) best = params;
            if (stopper.should_stop()) {
                result.history.stopped_early = true;
                break;
            }
        }
    }
    result.history.best_epoch = stopper.best_epoch();
    if (best) params = std::move(*best);
    return result;
}

TrainResult train(ModelKind kind, std::span<const Triple> train_triples, std::span<const Triple> validation,
                  std::size_t num_entities, std::size_t num_relations, const TrainConfig& config,
                  std::span<const Triple> known, unsigned threads) {
    FilterIndex filter;
    if (known.empty()) {
        filter.add(train_triples);
        filter.add(validation);
    } else {
        filter.add(known);
    }
    const auto queries = queries_from(validation);
    Validator validator;
    if (!queries.empty()) {
        validator = [&](const ModelParams& params, std::size_t) {
            EvalOptions options;
            options.threads = threads;
            auto report = evaluate(params, queries, &filter, options);
            return ValidationMetrics{report.overall.hits_at(10), report.overall.mrr};
        };
    }
    return train(kind, train_triples, num_entities, num_relations, config, validator);
}

GridSearchResult grid_search(ModelKind kind, std::span<const Triple> train_triples,
                             std::span<const Triple> validation, std::size_t num_entities,
                             std::size_t num_relations, const TrainConfig& base, std::span<const std::size_t> dims,
                             std::span<const double> learning_rates, std::span<const Triple> known,
                             unsigned threads, const std::function<void(TrainConfig&)>& tweak) {
    if (dims.empty() || learning_rates.empty()) throw ConfigError("grid search needs non-empty grids");
    if (validation.empty()) throw EmptyQuerySet("grid search needs validation triples");
    FilterIndex filter;
    if (known.empty()) {
        filter.add(train_triples);
        filter.add(validation);
    } else {
        filter.add(known);
    }
    const auto queries = queries_from(validation);

    GridSearchResult result;
    bool have_best = false;
    for (auto dim : dims) {
        for (auto lr : learning_rates) {
            TrainConfig config = base;
            config.dim = dim;
            config.learning_rate = lr;
            if (tweak) tweak(config);
            auto trained = train(kind, train_triples, validation, num_entities, num_relations, config, known, threads);
            EvalOptions options;
            options.threads = threads;
            const double mrr = evaluate(trained.params, queries, &filter, options).overall.mrr;
            result.points.push_back({dim, lr, mrr});

            auto better = [&] {
                if (!have_best) return true;
                if (mrr != result.best_validation_mrr) return mrr > result.best_validation_mrr;
                if (dim != result.best_config.dim) return dim < result.best_config.dim;
                return lr < result.best_config.learning_rate;
            }();
            if (better) {
                have_best = true;
                result.best_config = config;
                result.best = std::move(trained);
                result.best_validation_mrr = mrr;
            }
        }
    }
    return result;
}

}  // namespace chainlens
