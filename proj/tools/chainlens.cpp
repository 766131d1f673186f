// chainlens: generate, split, train, eval, analyze and export supply chain
// knowledge graphs from the command line.

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include "chainlens/analytics.hpp"
#include "chainlens/dataset.hpp"
#include "chainlens/embeddings.hpp"
#include "chainlens/error.hpp"
#include "chainlens/evaluation.hpp"
#include "chainlens/export.hpp"

#ifndef CHAINLENS_VERSION
#define CHAINLENS_VERSION "unknown"
#endif

namespace fs = std::filesystem;
using namespace chainlens;

namespace {

enum ExitCode : int { kOk = 0, kUsage = 1, kData = 2, kInfeasible = 3 };

class UsageError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

void setup_logging() {
    auto logger = spdlog::stderr_color_mt("chainlens");
    logger->set_pattern("[%l] %v");
    spdlog::set_default_logger(logger);
    spdlog::set_level(spdlog::level::info);
    const char* env = std::getenv("CHAINLENS_LOG");
    if (!env) return;
    const std::string level = env;
    if (level == "error")
        spdlog::set_level(spdlog::level::err);
    else if (level == "debug")
        spdlog::set_level(spdlog::level::debug);
    else if (level != "info")
        spdlog::warn("CHAINLENS_LOG='{}' is not one of error, info, debug; using info", level);
}

// One per run, written next to the outputs. Holds no timestamps so that two
// runs with the same inputs differ only in duration.
class Manifest {
public:
    explicit Manifest(std::string command) : command_(std::move(command)), start_(clock::now()) {}

    void config(const KeyValueConfig& kv, const std::string& prefix = "") {
        for (const auto& [k, v] : kv.values()) config_[prefix + k] = v;
    }
    void set(const std::string& key, const std::string& value) { config_[key] = value; }
    void seed(std::uint64_t s) { seeds_.push_back(s); }
    void input(const fs::path& p) { inputs_.push_back(p.string()); }
    void output(const fs::path& p) { outputs_.push_back(p.string()); }

    void write(const fs::path& path) const {
        nlohmann::ordered_json doc;
        doc["command"] = command_;
        doc["tool_version"] = CHAINLENS_VERSION;
        doc["config"] = config_;
        doc["seeds"] = seeds_;
        doc["inputs"] = inputs_;
        doc["outputs"] = outputs_;
        doc["duration_seconds"] = std::chrono::duration<double>(clock::now() - start_).count();
        std::ofstream out(path);
        if (!out) throw Error("cannot write " + path.string());
        out << doc.dump(2) << '\n';
        spdlog::debug("manifest written to {}", path.string());
    }

private:
    using clock = std::chrono::steady_clock;
    std::string command_;
    std::map<std::string, std::string> config_;
    std::vector<std::uint64_t> seeds_;
    std::vector<std::string> inputs_, outputs_;
    clock::time_point start_;
};

fs::path manifest_beside(const fs::path& file) { return fs::path(file.string() + ".manifest.json"); }

void ensure_dir(const fs::path& dir) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw Error("cannot create directory " + dir.string() + ": " + ec.message());
}

std::ofstream open_out(const fs::path& path) {
    if (path.has_parent_path()) ensure_dir(path.parent_path());
    std::ofstream out(path);
    if (!out) throw Error("cannot write " + path.string());
    return out;
}

Schema schema_from(const std::string& path) { return path.empty() ? default_schema() : load_schema(path); }

ModelKind model_from(const std::string& name) {
    if (auto kind = parse_model_kind(name)) return *kind;
    std::string valid;
    for (auto k : kAllModelKinds) valid += (valid.empty() ? "" : ", ") + std::string(to_string(k));
    throw UsageError("unknown model '" + name + "'; valid models: " + valid);
}

// ---- generate ----------------------------------------------------------------

struct GenerateArgs {
    std::string config;
    std::optional<std::uint64_t> seed;
    std::string out = "network.tsv";
};

int run_generate(const GenerateArgs& a) {
    Manifest m("generate");
    auto config = GeneratorConfig::defaults();
    if (!a.config.empty()) {
        const auto kv = KeyValueConfig::load(a.config);
        config = GeneratorConfig::from_config(kv);
        kv.reject_unused();
        m.input(a.config);
    }
    if (a.seed) config.seed = *a.seed;
    auto net = generate_network(config);
    export_triples(net.graph, a.out);
    spdlog::info("generated {} entities, {} triples -> {}", net.graph.num_entities(), net.graph.num_triples(), a.out);
    spdlog::debug("hub '{}' has in-degree {}", net.graph.entity(net.hub).label, net.graph.triples_to(net.hub).size());
    m.config(config.to_config());
    m.seed(config.seed);
    m.output(a.out);
    m.write(manifest_beside(a.out));
    return kOk;
}

// ---- validate / stats ---------------------------------------------------------

int run_validate(const std::string& in, const std::string& schema_path) {
    const auto schema = schema_from(schema_path);
    Graph g;
    {
        std::ifstream file(in);
        if (!file) throw Error("cannot open " + in);
        // Load without schema enforcement so every violation gets reported.
        Schema permissive = schema;
        for (auto r : kAllRelationTypes) {
            TypeSet any;
            for (auto t : kAllEntityTypes) any.insert(t);
            permissive.set(r, {any, any});
        }
        read_triples(file, g, permissive);
    }
    const auto report = g.validate(schema);
    for (const auto& issue : report.issues) std::cout << issue.message << '\n';
    std::cout << (report.ok() ? "valid" : "invalid") << ": " << g.num_entities() << " entities, " << g.num_triples()
              << " triples, " << report.issues.size() << " issues\n";
    return report.ok() ? kOk : kData;
}

int run_stats(const std::string& in, const std::string& schema_path) {
    const auto g = load_triples(in, schema_from(schema_path));
    const auto s = g.stats();
    std::cout << "entities: " << s.total_entities << '\n' << "triples: " << s.total_triples << '\n';
    for (auto t : kAllEntityTypes)
        std::cout << "entities." << to_string(t) << ": " << s.entities_by_type[index_of(t)] << '\n';
    for (auto r : kAllRelationTypes)
        std::cout << "relations." << to_string(r) << ": " << s.triples_by_relation[index_of(r)] << '\n';
    return kOk;
}

// ---- split -------------------------------------------------------------------

struct SplitArgs {
    std::string in;
    std::string out = "split";
    std::string config;
    std::string schema;
    std::optional<std::uint64_t> seed;
    std::optional<double> valid, test;
    bool check = false;
};

int run_split(const SplitArgs& a) {
    Manifest m("split");
    SplitConfig config;
    if (!a.config.empty()) {
        const auto kv = KeyValueConfig::load(a.config);
        config = SplitConfig::from_config(kv);
        kv.reject_unused();
        m.input(a.config);
    }
    if (a.seed) config.seed = *a.seed;
    if (a.valid) config.validation_fraction = *a.valid;
    if (a.test) config.test_fraction = *a.test;
    config.check();

    const auto graph = load_triples(a.in, schema_from(a.schema));
    m.input(a.in);
    const auto split = transductive_split(graph, config);
    ensure_dir(a.out);
    write_split(graph, split, a.out);
    spdlog::info("split {} triples into {}/{}/{} -> {}", graph.num_triples(), split.train.size(),
                 split.validation.size(), split.test.size(), a.out);
    if (a.check) {
        const auto coverage = check_split(graph, split);
        for (const auto& p : coverage.problems) std::cout << p << '\n';
        std::cout << "transductive check: " << (coverage.ok() ? "PASS" : "FAIL") << '\n';
        if (!coverage.ok()) return kData;
    }
    m.set("valid_fraction", std::to_string(config.validation_fraction));
    m.set("test_fraction", std::to_string(config.test_fraction));
    m.seed(config.seed);
    for (const char* f : {"train.tsv", "valid.tsv", "test.tsv"}) m.output(fs::path(a.out) / f);
    m.write(fs::path(a.out) / "manifest.json");
    return kOk;
}

// ---- train -------------------------------------------------------------------

struct TrainArgs {
    std::string model;
    std::string split;
    std::string config;
    std::string out = "model.ckpt";
    std::optional<std::uint64_t> seed;
    std::optional<std::size_t> dim, epochs;
    std::optional<double> lr;
    unsigned threads = 1;
    bool grid = false;
};

void write_history(const fs::path& path, const TrainHistory& history) {
    auto out = open_out(path);
    write_history_csv(out, history);
}

int run_train(const TrainArgs& a) {
    const auto kind = model_from(a.model);
    Manifest m("train");
    TrainConfig config;
    if (!a.config.empty()) {
        const auto kv = KeyValueConfig::load(a.config);
        config = TrainConfig::from_config(kv, config);
        kv.reject_unused();
        m.input(a.config);
    }
    if (a.seed) config.seed = *a.seed;
    if (a.dim) config.dim = *a.dim;
    if (a.lr) config.learning_rate = *a.lr;
    if (a.epochs) config.max_epochs = *a.epochs;
    config.check();

    auto data = load_split(a.split);
    m.input(a.split);
    const auto& g = data.graph;
    std::vector<Triple> known = data.split.train;
    known.insert(known.end(), data.split.validation.begin(), data.split.validation.end());
    spdlog::info("training {} on {} triples ({} entities), validating on {}", to_string(kind),
                 data.split.train.size(), g.num_entities(), data.split.validation.size());

    const fs::path out = a.out;
    if (out.has_parent_path()) ensure_dir(out.parent_path());
    ModelParams best;
    TrainHistory history;
    if (a.grid) {
        if (kind == ModelKind::TuckER)
            spdlog::warn("the TuckER core at dim {} needs {:.1f} GiB", kDimGrid.back(),
                         std::pow(double(kDimGrid.back()), 3) * 8 / (1 << 30));
        auto result = grid_search(kind, data.split.train, data.split.validation, g.num_entities(),
                                  kAllRelationTypes.size(), config, kDimGrid, kLearningRateGrid, known, a.threads,
                                  [](TrainConfig& c) { spdlog::info("grid point dim {} lr {}", c.dim, c.learning_rate); });
        const fs::path grid_csv = out.string() + ".grid.csv";
        auto csv = open_out(grid_csv);
        csv << "dim,learning_rate,validation_mrr\n";
        for (const auto& p : result.points) csv << p.dim << ',' << p.learning_rate << ',' << p.validation_mrr << '\n';
        m.output(grid_csv);
        std::cout << "grid: " << result.points.size() << " runs; best dim " << result.best_config.dim << ", lr "
                  << result.best_config.learning_rate << ", validation MRR " << result.best_validation_mrr << '\n';
        config = result.best_config;
        best = std::move(result.best.params);
        history = std::move(result.best.history);
    } else {
        auto result = train(kind, data.split.train, data.split.validation, g.num_entities(),
                            kAllRelationTypes.size(), config, known, a.threads);
        best = std::move(result.params);
        history = std::move(result.history);
    }

    save_checkpoint(best, g.vocabulary_fingerprint(), out);
    const fs::path history_csv = out.string() + ".history.csv";
    write_history(history_csv, history);
    std::cout << to_string(kind) << ": best epoch " << history.best_epoch << ", "
              << (history.stopped_early ? "stopped early" : "ran to max_epochs") << ", "
              << history.epoch_losses.size() << " epochs\n";
    m.config(config.to_config());
    m.set("model", std::string(to_string(kind)));
    m.set("grid", a.grid ? "true" : "false");
    m.seed(config.seed);
    m.output(out);
    m.output(history_csv);
    m.write(manifest_beside(out));
    return kOk;
}

// ---- eval --------------------------------------------------------------------

struct EvalArgs {
    std::vector<std::string> checkpoints;
    std::string split;
    std::string out = "eval";
    std::string setting = "filtered";
    std::string tie = "realistic";
    std::string on = "test";
    unsigned threads = 1;
    bool per_relation = false;
    bool type_constrained = false;
};

int run_eval(const EvalArgs& a) {
    const auto tie = parse_tie_policy(a.tie);
    if (!tie) throw UsageError("--tie must be optimistic, realistic or pessimistic");
    const bool both = a.setting == "both";
    const auto setting = parse_rank_setting(a.setting);
    if (!both && !setting) throw UsageError("--setting must be raw, filtered or both");
    if (a.on != "test" && a.on != "valid") throw UsageError("--on must be test or valid");

    Manifest m("eval");
    auto data = load_split(a.split);
    m.input(a.split);
    const auto& g = data.graph;
    FilterIndex filter;
    filter.add(data.split.train);
    filter.add(data.split.validation);
    filter.add(data.split.test);
    const auto queries = queries_from(a.on == "test" ? data.split.test : data.split.validation);
    std::vector<EntityType> types;
    for (const auto& e : g.entities()) types.push_back(e.type);

    EvalOptions options;
    options.setting = setting.value_or(RankSetting::filtered);
    options.tie_policy = *tie;
    options.threads = a.threads;
    options.type_constrained = a.type_constrained;
    options.schema = &default_schema();
    options.entity_types = types;

    ensure_dir(a.out);
    std::vector<std::pair<std::string, EvalReport>> rows;
    for (const auto& path : a.checkpoints) {
        auto ckpt = load_checkpoint(path);
        m.input(path);
        if (ckpt.vocabulary_hash != g.vocabulary_fingerprint())
            throw VocabularyMismatch("checkpoint " + path + " was trained on a different entity vocabulary");
        if (ckpt.params.num_entities != g.num_entities())
            throw VocabularyMismatch("checkpoint " + path + " has " + std::to_string(ckpt.params.num_entities) +
                                     " entities, split has " + std::to_string(g.num_entities()));
        const std::string name(to_string(ckpt.params.kind));
        std::vector<EvalReport> reports;
        if (both) {
            auto paired = evaluate_both(ckpt.params, queries, filter, options);
            std::cout << name << ": filtered MRR " << paired.filtered.overall.mrr << " >= raw MRR "
                      << paired.raw.overall.mrr << ": PASS\n";
            reports = {paired.raw, paired.filtered};
        } else {
            reports = {evaluate(ckpt.params, queries, &filter, options)};
        }
        for (const auto& r : reports) {
            const std::string stem = name + "_" + std::string(to_string(r.setting));
            auto txt = open_out(fs::path(a.out) / (stem + ".txt"));
            write_report_text(txt, r, name);
            auto csv = open_out(fs::path(a.out) / (stem + ".csv"));
            write_report_csv(csv, r);
            m.output(fs::path(a.out) / (stem + ".txt"));
            m.output(fs::path(a.out) / (stem + ".csv"));
            rows.emplace_back(both ? name + " (" + std::string(to_string(r.setting)) + ")" : name, r);
        }
    }

    auto table = open_out(fs::path(a.out) / "results.txt");
    write_results_table(table, rows);
    write_results_table(std::cout, rows);
    m.output(fs::path(a.out) / "results.txt");
    if (a.per_relation) {
        const auto t = per_relation_table(rows);
        auto out = open_out(fs::path(a.out) / "per_relation.txt");
        write_per_relation_table(out, t);
        std::cout << '\n';
        write_per_relation_table(std::cout, t);
        m.output(fs::path(a.out) / "per_relation.txt");
    }
    m.set("setting", a.setting);
    m.set("tie", a.tie);
    m.set("queries", a.on);
    m.set("type_constrained", a.type_constrained ? "true" : "false");
    m.write(fs::path(a.out) / "manifest.json");
    return kOk;
}

// ---- analyze -----------------------------------------------------------------

struct AnalyzeArgs {
    std::string in;
    std::string out = "analysis";
    std::string schema;
    double threshold = 10.0;
    std::size_t depth = 3;
    unsigned threads = 1;
    bool sole_scopes = false;
};

int run_analyze(const AnalyzeArgs& a) {
    Manifest m("analyze");
    const auto graph = load_triples(a.in, schema_from(a.schema));
    m.input(a.in);
    const auto suppliers = supplier_projection(graph);
    const auto report = criticality(suppliers, a.threshold, a.threads);
    ensure_dir(a.out);
    const fs::path dir = a.out;

    auto csv = open_out(dir / "criticality.csv");
    write_criticality_csv(csv, report);
    auto summary = open_out(dir / "summary.txt");
    write_criticality_summary(summary, report);
    m.output(dir / "criticality.csv");
    m.output(dir / "summary.txt");

    if (report.size() > 0) {
        const auto paths = critical_paths(suppliers, report, a.depth);
        auto out = open_out(dir / "critical_paths.txt");
        for (const auto& p : paths) {
            for (std::size_t i = 0; i < p.size(); ++i) out << (i ? " -> " : "") << report.labels[p[i]];
            out << '\n';
        }
        m.output(dir / "critical_paths.txt");
        const EntityId top = report.top_node();
        std::cout << "top node: " << report.labels[top] << " (score " << report.aggregated[top] << ")\n";
        std::cout << "critical paths: " << paths.size() << '\n';
    }
    std::cout << "suppliers: " << report.size() << ", critical (score > " << a.threshold
              << "): " << report.num_critical() << '\n';

    if (a.sole_scopes) {
        const auto scopes = sole_supplier_scopes(graph);
        auto out = open_out(dir / "sole_scopes.tsv");
        out << "# business_scope\tsupplier\n";
        for (const auto& s : scopes) {
            out << graph.entity(s.scope).label << '\t' << graph.entity(s.supplier).label << '\n';
            std::cout << graph.entity(s.scope).label << '\t' << graph.entity(s.supplier).label << '\n';
        }
        std::cout << "sole-supplier business scopes: " << scopes.size() << '\n';
        m.output(dir / "sole_scopes.tsv");
    }
    m.set("threshold", std::to_string(a.threshold));
    m.set("depth", std::to_string(a.depth));
    m.write(dir / "manifest.json");
    return kOk;
}

// ---- export ------------------------------------------------------------------

struct ExportArgs {
    std::string in;
    std::string report;
    std::string format = "dot";
    std::string out;
    std::string schema;
};

int run_export(const ExportArgs& a) {
    const auto format = parse_export_format(a.format);
    if (!format) throw UsageError("--format must be dot, graphml or json");
    Manifest m("export");
    const auto graph = load_triples(a.in, schema_from(a.schema));
    const auto rows = load_criticality_csv(a.report);
    m.input(a.in);
    m.input(a.report);
    const auto annotated = annotate(graph, rows);
    const fs::path out = a.out.empty() ? fs::path("graph." + a.format) : fs::path(a.out);
    auto file = open_out(out);
    write_export(file, annotated, *format);
    spdlog::info("exported {} nodes, {} edges -> {}", annotated.nodes.size(), annotated.edges.size(), out.string());
    m.set("format", a.format);
    m.output(out);
    m.write(manifest_beside(out));
    return kOk;
}

}  // namespace

int main(int argc, char** argv) {
    setup_logging();
    CLI::App app{"Supply chain knowledge graph toolkit"};
    app.set_version_flag("--version", CHAINLENS_VERSION);
    app.require_subcommand(1);
    unsigned threads = 1;
    app.add_option("--threads", threads, "Worker threads")->check(CLI::Range(1u, 1024u));

    GenerateArgs gen;
    auto* generate = app.add_subcommand("generate", "Generate a synthetic supply chain network");
    generate->add_option("--config", gen.config, "Generator config file")->check(CLI::ExistingFile);
    generate->add_option("--seed", gen.seed, "Random seed");
    generate->add_option("--out", gen.out, "Output triple file");

    std::string validate_in, validate_schema;
    auto* validate = app.add_subcommand("validate", "Check a triple file against the schema");
    validate->add_option("input", validate_in)->required()->check(CLI::ExistingFile);
    validate->add_option("--schema", validate_schema)->check(CLI::ExistingFile);

    std::string stats_in, stats_schema;
    auto* stats = app.add_subcommand("stats", "Entity and relation counts");
    stats->add_option("input", stats_in)->required()->check(CLI::ExistingFile);
    stats->add_option("--schema", stats_schema)->check(CLI::ExistingFile);

    SplitArgs sp;
    auto* split = app.add_subcommand("split", "Transductive train/validation/test split");
    split->add_option("input", sp.in)->required()->check(CLI::ExistingFile);
    split->add_option("--out", sp.out, "Output directory");
    split->add_option("--config", sp.config)->check(CLI::ExistingFile);
    split->add_option("--schema", sp.schema)->check(CLI::ExistingFile);
    split->add_option("--seed", sp.seed);
    split->add_option("--valid", sp.valid, "Validation fraction");
    split->add_option("--test", sp.test, "Test fraction");
    split->add_flag("--check", sp.check, "Verify the transductive property");

    TrainArgs tr;
    auto* train_cmd = app.add_subcommand("train", "Train an embedding model");
    train_cmd->add_option("--model", tr.model, "TransE, RotatE, RESCAL, ComplEx or TuckER")->required();
    train_cmd->add_option("--split", tr.split, "Split directory")->required()->check(CLI::ExistingDirectory);
    train_cmd->add_option("--config", tr.config)->check(CLI::ExistingFile);
    train_cmd->add_option("--out", tr.out, "Checkpoint path");
    train_cmd->add_option("--seed", tr.seed);
    train_cmd->add_option("--dim", tr.dim);
    train_cmd->add_option("--lr", tr.lr);
    train_cmd->add_option("--epochs", tr.epochs, "Maximum epochs");
    train_cmd->add_flag("--grid", tr.grid, "Search the full dimension x learning-rate grid");

    EvalArgs ev;
    auto* eval = app.add_subcommand("eval", "Evaluate checkpoints by object prediction");
    eval->add_option("--checkpoint", ev.checkpoints, "Checkpoint (repeatable)")->required()->check(CLI::ExistingFile);
    eval->add_option("--split", ev.split, "Split directory")->required()->check(CLI::ExistingDirectory);
    eval->add_option("--out", ev.out, "Output directory");
    eval->add_option("--setting", ev.setting, "raw, filtered or both");
    eval->add_option("--tie", ev.tie, "optimistic, realistic or pessimistic");
    eval->add_option("--on", ev.on, "test or valid");
    eval->add_flag("--per-relation", ev.per_relation, "Per-relation MRR table");
    eval->add_flag("--type-constrained", ev.type_constrained, "Rank only schema-compatible objects");

    AnalyzeArgs an;
    auto* analyze = app.add_subcommand("analyze", "Supplier criticality analysis");
    analyze->add_option("input", an.in)->required()->check(CLI::ExistingFile);
    analyze->add_option("--out", an.out, "Output directory");
    analyze->add_option("--schema", an.schema)->check(CLI::ExistingFile);
    analyze->add_option("--threshold", an.threshold, "Critical score threshold (strict)");
    analyze->add_option("--depth", an.depth, "Maximum critical path length in edges");
    analyze->add_flag("--sole-scopes", an.sole_scopes, "List business scopes with a single supplier");

    ExportArgs ex;
    auto* export_cmd = app.add_subcommand("export", "Annotated graph for visualization");
    export_cmd->add_option("input", ex.in)->required()->check(CLI::ExistingFile);
    export_cmd->add_option("--report", ex.report, "criticality.csv from analyze")->required()->check(CLI::ExistingFile);
    export_cmd->add_option("--format", ex.format, "dot, graphml or json");
    export_cmd->add_option("--out", ex.out, "Output file");
    export_cmd->add_option("--schema", ex.schema)->check(CLI::ExistingFile);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kOk : kUsage;
    }

    try {
        tr.threads = ev.threads = an.threads = threads;
        if (generate->parsed()) return run_generate(gen);
        if (validate->parsed()) return run_validate(validate_in, validate_schema);
        if (stats->parsed()) return run_stats(stats_in, stats_schema);
        if (split->parsed()) return run_split(sp);
        if (train_cmd->parsed()) return run_train(tr);
        if (eval->parsed()) return run_eval(ev);
        if (analyze->parsed()) return run_analyze(an);
        if (export_cmd->parsed()) return run_export(ex);
    } catch (const UsageError& e) {
        spdlog::error("{}", e.what());
        return kUsage;
    } catch (const SplitInfeasible& e) {
        spdlog::error("split infeasible: {}", e.what());
        return kInfeasible;
    } catch (const ParseError& e) {
        spdlog::error("parse error: {}", e.what());
        return kData;
    } catch (const Error& e) {
        spdlog::error("{}", e.what());
        return kData;
    } catch (const std::exception& e) {
        spdlog::error("internal error: {}", e.what());
        return kData;
    }
    return kUsage;
}
