#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <ostream>
#include <span>
#include <string_view>
#include <vector>

#include "chainlens/config.hpp"
#include "chainlens/random.hpp"
#include "chainlens/types.hpp"

namespace chainlens {

enum class ModelKind : std::uint8_t { RESCAL, ComplEx, TuckER, TransE, RotatE };
inline constexpr std::array<ModelKind, 5> kAllModelKinds = {
    ModelKind::RESCAL, ModelKind::ComplEx, ModelKind::TuckER, ModelKind::TransE, ModelKind::RotatE};

std::string_view to_string(ModelKind kind);
// Case-insensitive.
std::optional<ModelKind> parse_model_kind(std::string_view name);

enum class DistanceNorm : std::uint8_t { L1, L2 };

// Search grids for embedding size and learning rate.
inline constexpr std::array<std::size_t, 6> kDimGrid = {16, 32, 64, 256, 512, 1024};
inline constexpr std::array<double, 3> kLearningRateGrid = {0.0001, 0.001, 0.01};

struct TrainConfig {
    std::size_t dim = 64;
    double learning_rate = 0.001;
    double margin = 1.0;
    std::size_t negatives_per_positive = 1;
    std::size_t max_epochs = 1000;
    std::size_t eval_every = 10;
    std::size_t patience = 3;
    std::size_t batch_size = 512;
    std::uint64_t seed = 42;
    double adam_beta1 = 0.9;
    double adam_beta2 = 0.999;
    double adam_epsilon = 1e-8;
    DistanceNorm transe_norm = DistanceNorm::L1;
    // L2 penalty weight on the embeddings of each positive triple.
    double regularization = 0.0;

    // Throws ConfigError. max_epochs = 0 is allowed and yields the initial parameters.
    void check() const;

    // Keys match the field names; transe_norm is "L1" or "L2".
    static TrainConfig from_config(const KeyValueConfig& kv, TrainConfig base);
    KeyValueConfig to_config() const;
};

// Flat parameter blocks. Complex vectors store the d real parts followed by
// the d imaginary parts.
//   RESCAL  entity d,   relation d*d (row-major M_r)
//   ComplEx entity 2d,  relation 2d
//   TuckER  entity d,   relation d,   core d^3 indexed [(a*d + b)*d + c]
//   TransE  entity d,   relation d
//   RotatE  entity 2d,  relation d phases in [0, 2*pi)
struct ModelParams {
    ModelKind kind = ModelKind::TransE;
    std::size_t dim = 0;
    std::size_t num_entities = 0;
    std::size_t num_relations = 0;
    std::uint64_t seed = 0;
    DistanceNorm transe_norm = DistanceNorm::L1;
    std::vector<double> entity;
    std::vector<double> relation;
    std::vector<double> core;

    std::size_t entity_width() const;
    std::size_t relation_width() const;

    std::span<const double> entity_row(EntityId e) const {
        return {entity.data() + e * entity_width(), entity_width()};
    }
    std::span<double> entity_row(EntityId e) { return {entity.data() + e * entity_width(), entity_width()}; }
    std::span<const double> relation_row(std::size_t r) const {
        return {relation.data() + r * relation_width(), relation_width()};
    }
    std::span<double> relation_row(std::size_t r) {
        return {relation.data() + r * relation_width(), relation_width()};
    }

    bool all_finite() const;
    friend bool operator==(const ModelParams&, const ModelParams&) = default;
};

// Same layout as ModelParams; dense.
struct Gradient {
    std::vector<double> entity;
    std::vector<double> relation;
    std::vector<double> core;

    explicit Gradient(const ModelParams& p)
        : entity(p.entity.size(), 0.0), relation(p.relation.size(), 0.0), core(p.core.size(), 0.0) {}
    void zero();
    bool is_zero() const;
};

ModelParams init_params(ModelKind kind, std::size_t num_entities, std::size_t num_relations,
                        const TrainConfig& config);

// Re-applies the constraints: unit L2 rows for TransE entities, phases
// wrapped into [0, 2*pi) for RotatE.
void project_constraints(ModelParams& params);

// Higher is more plausible for every model.
double score(const ModelParams& params, EntityId s, std::size_t r, EntityId o);
inline double score(const ModelParams& params, const Triple& t) {
    return score(params, t.subject, index_of(t.predicate), t.object);
}

// score(params, s, r, o) for every o, written to `out` (size num_entities).
void score_objects(const ModelParams& params, EntityId s, std::size_t r, std::span<double> out);

// Replaces the subject or the object (each with probability 1/2) by a
// different uniformly drawn entity. Not filtered against known triples.
Triple negative_sample(const Triple& triple, std::size_t num_entities, Rng& rng);

inline double margin_ranking_loss(double pos_score, double neg_score, double margin) {
    double v = margin + neg_score - pos_score;
    return v > 0.0 ? v : 0.0;
}

// Adds scale * d loss / d params into `grad` and returns the unscaled loss.
// An inactive hinge contributes nothing.
double accumulate_gradients(const ModelParams& params, const Triple& pos, const Triple& neg, double margin,
                            double scale, Gradient& grad);

// weight * (|e_s|^2 + |w_r|^2 + |e_o|^2), RotatE phases excluded. Adds
// scale times its gradient to `grad` and returns the unscaled penalty.
double accumulate_l2(const ModelParams& params, const Triple& t, double weight, double scale, Gradient& grad);

Gradient gradients(const ModelParams& params, const Triple& pos, const Triple& neg, double margin);

struct AdamState {
    std::vector<double> m_entity, v_entity;
    std::vector<double> m_relation, v_relation;
    std::vector<double> m_core, v_core;
    std::uint64_t step = 0;

    explicit AdamState(const ModelParams& p);
};

// Bias-corrected Adam on every parameter, then project_constraints.
void adam_step(ModelParams& params, const Gradient& grad, AdamState& state, const TrainConfig& config);

// ---- training --------------------------------------------------------------

struct ValidationMetrics {
    double hits_at_10 = 0.0;
    double mrr = 0.0;
};

struct EvalRecord {
    std::size_t epoch = 0;
    double hits_at_10 = 0.0;
    double mrr = 0.0;
    double mean_loss = 0.0;
    friend bool operator==(const EvalRecord&, const EvalRecord&) = default;
};

struct TrainHistory {
    std::vector<EvalRecord> records;
    std::vector<double> epoch_losses;  // mean loss per epoch, epoch 1 first
    bool stopped_early = false;
    std::size_t best_epoch = 0;  // 0 when no evaluation ran

    friend bool operator==(const TrainHistory&, const TrainHistory&) = default;
};

// Columns: epoch,hits_at_10,mrr,loss.
void write_history_csv(std::ostream& out, const TrainHistory& history);

// Strict-improvement early stopping on validation hits@10.
class EarlyStopping {
public:
    explicit EarlyStopping(std::size_t patience) : patience_(patience) {}

    // Returns true when `hits_at_10` is a new best.
    bool observe(std::size_t epoch, double hits_at_10);
    bool should_stop() const { return bad_evaluations_ >= patience_; }
    std::size_t best_epoch() const { return best_epoch_; }
    double best_value() const { return best_; }

private:
    std::size_t patience_;
    std::size_t bad_evaluations_ = 0;
    std::size_t best_epoch_ = 0;
    double best_ = -1.0;
};

using Validator = std::function<ValidationMetrics(const ModelParams&, std::size_t epoch)>;

struct TrainResult {
    ModelParams params;
    TrainHistory history;
};

// Mini-batch margin-ranking training with Adam. Evaluates every `eval_every`
// epochs through `validator` and returns the best checkpoint.
TrainResult train(ModelKind kind, std::span<const Triple> train_triples, std::size_t num_entities,
                  std::size_t num_relations, const TrainConfig& config, const Validator& validator);

// Same, validating with filtered, realistic-tie hits@10 on `validation`.
// `known` (defaults to train + validation) is the filter set.
TrainResult train(ModelKind kind, std::span<const Triple> train_triples, std::span<const Triple> validation,
                  std::size_t num_entities, std::size_t num_relations, const TrainConfig& config,
                  std::span<const Triple> known = {}, unsigned threads = 1);

struct GridPoint {
    std::size_t dim = 0;
    double learning_rate = 0.0;
    double validation_mrr = 0.0;
};

struct GridSearchResult {
    TrainConfig best_config;
    TrainResult best;
    double best_validation_mrr = 0.0;
    std::vector<GridPoint> points;
};

// Trains one model per (dim, learning rate); picks the highest validation MRR,
// ties going to the smaller dim, then the smaller learning rate. Per-point
// overrides of the base config (e.g. max_epochs) can be supplied via `tweak`.
GridSearchResult grid_search(ModelKind kind, std::span<const Triple> train_triples,
                             std::span<const Triple> validation, std::size_t num_entities,
                             std::size_t num_relations, const TrainConfig& base, std::span<const std::size_t> dims,
                             std::span<const double> learning_rates, std::span<const Triple> known = {},
                             unsigned threads = 1,
                             const std::function<void(TrainConfig&)>& tweak = {});

// ---- checkpoints -----------------------------------------------------------
//
// Binary, little-endian: magic "CLKGCKPT", u32 version, u8 kind, u8 norm,
// u64 dim, u64 num_entities, u64 num_relations, u64 seed, u64 vocabulary hash,
// then the entity, relation and core blocks as IEEE-754 doubles, each preceded
// by its u64 length.

void save_checkpoint(const ModelParams& params, std::uint64_t vocabulary_hash, const std::filesystem::path& path);

struct Checkpoint {
    ModelParams params;
    std::uint64_t vocabulary_hash = 0;
};

Checkpoint load_checkpoint(const std::filesystem::path& path);

}  // namespace chainlens
