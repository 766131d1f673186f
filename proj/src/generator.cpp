#include <algorithm>
#include <cmath>
#include <cstdio>
#include <unordered_set>

#include "chainlens/dataset.hpp"
#include "chainlens/error.hpp"
#include "chainlens/random.hpp"
#include "text_util.hpp"

namespace chainlens {

GeneratorConfig GeneratorConfig::defaults() {
    using E = EntityType;
    using R = RelationType;
    GeneratorConfig c;
    c.entities(E::Supplier) = 600;
    c.entities(E::ManufacturerPart) = 17;
    c.entities(E::SiemensPart) = 13;
    c.entities(E::Smelter) = 4;
    c.entities(E::Substance) = 4;
    c.entities(E::Component) = 3;
    c.entities(E::Country) = 10;
    c.entities(E::BusinessScope) = 16;

    c.relations(R::supplies_to) = 1382;
    c.relations(R::related_to) = 620;
    c.relations(R::belongs_to) = 400;
    c.relations(R::located_in) = 604;
    c.relations(R::includes) = 10;
    c.relations(R::produces) = 78;
    c.relations(R::produced_in) = 30;
    c.relations(R::same_as) = 17;
    c.relations(R::manufactured_by) = 16;
    c.relations(R::contains) = 5;
    c.relations(R::refines) = 4;

    c.tiers = {200, 180, 219};
    return c;
}

GeneratorConfig GeneratorConfig::from_config(const KeyValueConfig& kv) {
    auto c = defaults();
    if (auto v = kv.take_uint("seed")) c.seed = *v;
    if (auto v = kv.take_string("hub_label")) c.hub_label = *v;
    if (auto v = kv.take_uint("hub_customers")) c.hub_customers = *v;
    if (auto v = kv.take_double("shortcut_fraction")) c.shortcut_fraction = *v;
    if (auto v = kv.take_uint("tier1")) c.tiers.tier1 = *v;
    if (auto v = kv.take_uint("tier2")) c.tiers.tier2 = *v;
    if (auto v = kv.take_uint("tier3")) c.tiers.tier3 = *v;
    for (auto t : kAllEntityTypes)
        if (auto v = kv.take_uint("entities." + std::string(to_string(t)))) c.entities(t) = *v;
    for (auto r : kAllRelationTypes)
        if (auto v = kv.take_uint("relations." + std::string(to_string(r)))) c.relations(r) = *v;
    return c;
}

KeyValueConfig GeneratorConfig::to_config() const {
    KeyValueConfig kv;
    kv.set("seed", std::to_string(seed));
    kv.set("hub_label", hub_label);
    kv.set("hub_customers", std::to_string(hub_customers));
    kv.set("shortcut_fraction", detail::shortest(shortcut_fraction));
    kv.set("tier1", std::to_string(tiers.tier1));
    kv.set("tier2", std::to_string(tiers.tier2));
    kv.set("tier3", std::to_string(tiers.tier3));
    for (auto t : kAllEntityTypes)
        kv.set("entities." + std::string(to_string(t)), std::to_string(entities(t)));
    for (auto r : kAllRelationTypes)
        kv.set("relations." + std::string(to_string(r)), std::to_string(relations(r)));
    return kv;
}

namespace {

// Weighted sampling with integer weights and point updates (Fenwick tree).
class WeightedPool {
public:
    explicit WeightedPool(std::vector<EntityId> members)
        : members_(std::move(members)), tree_(members_.size() + 1, 0) {
        for (std::size_t i = 0; i < members_.size(); ++i) add(i, 1);
    }

    std::size_t size() const { return members_.size(); }
    bool empty() const { return members_.empty(); }
    std::uint64_t total() const { return total_; }
    EntityId member(std::size_t i) const { return members_[i]; }
    const std::vector<EntityId>& members() const { return members_; }

    void add(std::size_t i, std::uint64_t w) {
        total_ += w;
        for (auto k = i + 1; k < tree_.size(); k += k & (~k + 1)) tree_[k] += w;
    }

    // Member whose cumulative weight range contains `r`, r < total().
    std::size_t find(std::uint64_t r) const {
        std::size_t pos = 0;
        std::size_t step = 1;
        while (step * 2 < tree_.size()) step *= 2;
        for (; step > 0; step /= 2) {
            if (pos + step < tree_.size() && tree_[pos + step] <= r) {
                pos += step;
                r -= tree_[pos];
            }
        }
        return pos;
    }

    std::size_t sample(Rng& rng) const { return find(uniform_index(rng, total_)); }

private:
    std::vector<EntityId> members_;
    std::vector<std::uint64_t> tree_;
    std::uint64_t total_ = 0;
};

// Preferential attachment over several disjoint pools: weight = 1 + in-degree.
class Attachment {
public:
    explicit Attachment(std::size_t num_entities) : pool_of_(num_entities, -1), slot_(num_entities, 0) {}

    int add_pool(std::vector<EntityId> members) {
        int id = static_cast<int>(pools_.size());
        for (std::size_t i = 0; i < members.size(); ++i) {
            pool_of_[members[i]] = id;
            slot_[members[i]] = i;
        }
        pools_.emplace_back(std::move(members));
        return id;
    }

    const WeightedPool& pool(int id) const { return pools_[static_cast<std::size_t>(id)]; }

    EntityId sample(std::initializer_list<int> ids, Rng& rng) const {
        std::uint64_t total = 0;
        for (int id : ids) total += pool(id).total();
        auto r = uniform_index(rng, total);
        for (int id : ids) {
            const auto& p = pool(id);
            if (r < p.total()) return p.member(p.find(r));
            r -= p.total();
        }
        return pool(*ids.begin()).member(0);  // unreachable
    }

    void bump(EntityId target) {
        if (pool_of_[target] >= 0) pools_[static_cast<std::size_t>(pool_of_[target])].add(slot_[target], 1);
    }

private:
    std::vector<WeightedPool> pools_;
    std::vector<int> pool_of_;
    std::vector<std::size_t> slot_;
};

std::string make_label(std::string_view prefix, std::size_t index) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%s-%05zu", std::string(prefix).c_str(), index);
    return buf;
}

std::string_view prefix_of(EntityType t) {
    switch (t) {
        case EntityType::Supplier: return "SUP";
        case EntityType::ManufacturerPart: return "MPT";
        case EntityType::SiemensPart: return "OPT";
        case EntityType::Smelter: return "SML";
        case EntityType::Substance: return "SUB";
        case EntityType::Component: return "CMP";
        case EntityType::Country: return "CTY";
        case EntityType::BusinessScope: return "BSC";
    }
    return "ENT";
}

[[noreturn]] void fail(RelationType r, const std::string& why) {
    throw ConfigError("relation " + std::string(to_string(r)) + ": " + why);
}

class Builder {
public:
    Builder(const GeneratorConfig& config) : config_(config), rng_(config.seed) {}

    GeneratedNetwork run() {
        validate_config();
        create_entities();
        build_supply_tiers();
        attach_each(RelationType::related_to, suppliers_, by_type(EntityType::BusinessScope));
        auto located = suppliers_;
        for (auto id : by_type(EntityType::Smelter)) located.push_back(id);
        attach_each(RelationType::located_in, located, by_type(EntityType::Country));
        for (auto r : kAllRelationTypes) {
            if (r == RelationType::supplies_to || r == RelationType::related_to ||
                r == RelationType::located_in)
                continue;
            fill_uniform(r);
        }
        return std::move(net_);
    }

private:
    const std::vector<EntityId>& by_type(EntityType t) const { return ids_[index_of(t)]; }

    void validate_config() const {
        if (config_.shortcut_fraction < 0.0 || config_.shortcut_fraction > 1.0)
            throw ConfigError("shortcut_fraction must lie in [0, 1]");
        const auto n_sup = config_.entities(EntityType::Supplier);
        const auto& t = config_.tiers;
        if (n_sup == 0) throw ConfigError("at least one Supplier (the hub) is required");
        if (t.tier1 + t.tier2 + t.tier3 > n_sup - 1)
            throw ConfigError("tier sizes sum to " + std::to_string(t.tier1 + t.tier2 + t.tier3) +
                              " but only " + std::to_string(n_sup - 1) + " non-hub suppliers exist");
        const auto tier3 = n_sup - 1 - t.tier1 - t.tier2;
        if (t.tier1 == 0 && n_sup > 1) throw ConfigError("tier1 must be non-empty when suppliers exist");
        if (t.tier2 == 0 && tier3 > 0) throw ConfigError("tier2 must be non-empty when tier-3 suppliers exist");
        if (config_.hub_customers > t.tier1)
            fail(RelationType::supplies_to, "hub_customers exceeds tier1");
        // Every Fig.-1 relation must be legal under the built-in schema.
        default_schema().check_complete();
    }

    void create_entities() {
        auto& g = net_.graph;
        const auto n_sup = config_.entities(EntityType::Supplier);
        net_.hub = g.add_entity(config_.hub_label, EntityType::Supplier);
        ids_[index_of(EntityType::Supplier)].push_back(net_.hub);
        for (std::size_t i = 1; i < n_sup; ++i)
            ids_[index_of(EntityType::Supplier)].push_back(g.add_entity(make_label("SUP", i), EntityType::Supplier));
        for (auto t : kAllEntityTypes) {
            if (t == EntityType::Supplier) continue;
            for (std::size_t i = 0; i < config_.entities(t); ++i)
                ids_[index_of(t)].push_back(g.add_entity(make_label(prefix_of(t), i + 1), t));
        }
        suppliers_ = by_type(EntityType::Supplier);

        net_.tier.assign(g.num_entities(), -1);
        net_.tier[net_.hub] = 0;
        const auto& t = config_.tiers;
        for (std::size_t i = 1; i < n_sup; ++i) {
            int tier = i <= t.tier1 ? 1 : (i <= t.tier1 + t.tier2 ? 2 : 3);
            net_.tier[suppliers_[i]] = tier;
            tiers_[static_cast<std::size_t>(tier)].push_back(suppliers_[i]);
        }
        tiers_[0].push_back(net_.hub);
    }

    bool add(EntityId s, RelationType r, EntityId o) {
        if (s == o) return false;
        return net_.graph.add_triple(s, r, o) == InsertOutcome::added;
    }

    // Tier k supplies tier k-1 under preferential attachment on in-degree;
    // a fraction of edges skips at least one tier.
    void build_supply_tiers() {
        constexpr auto R = RelationType::supplies_to;
        const std::size_t budget = config_.relations(R);
        const auto& smelters = by_type(EntityType::Smelter);
        const std::size_t base = tiers_[1].size() + tiers_[2].size() + tiers_[3].size() +
                                 smelters.size() + config_.hub_customers;
        if (budget < base)
            fail(R, "needs at least " + std::to_string(base) + " edges for the tier structure, got " +
                        std::to_string(budget));

        Attachment pa(net_.graph.num_entities());
        std::array<int, 4> pool{};
        for (std::size_t k = 0; k < 4; ++k) pool[k] = pa.add_pool(tiers_[k]);
        auto link = [&](EntityId s, EntityId o) {
            if (!add(s, R, o)) return false;
            pa.bump(o);
            return true;
        };

        for (auto s : tiers_[1]) link(s, net_.hub);
        for (auto s : tiers_[2]) link(s, pa.sample({pool[1]}, rng_));
        for (auto s : tiers_[3]) link(s, pa.sample({pool[2]}, rng_));

        int deepest = 0;
        for (int k = 3; k >= 1; --k)
            if (!tiers_[static_cast<std::size_t>(k)].empty()) {
                deepest = k;
                break;
            }
        for (auto s : smelters) link(s, pa.sample({pool[static_cast<std::size_t>(deepest)]}, rng_));

        auto customers = tiers_[1];
        shuffle(customers, rng_);
        for (std::size_t i = 0; i < config_.hub_customers; ++i) link(net_.hub, customers[i]);

        const std::size_t extra = budget - base;
        const auto t1 = tiers_[1].size(), t2 = tiers_[2].size(), t3 = tiers_[3].size();
        const std::size_t shortcut_capacity = t2 + t3 * (1 + t1);
        std::size_t shortcuts = static_cast<std::size_t>(std::llround(config_.shortcut_fraction * double(budget)));
        shortcuts = std::min({shortcuts, extra, shortcut_capacity});
        const std::size_t regular = extra - shortcuts;

        // Pairs already used by base edges count against the same capacity.
        const std::size_t regular_capacity = t2 * t1 + t3 * t2 - t2 - t3;
        if (regular > regular_capacity)
            fail(R, "requested " + std::to_string(budget) + " edges exceed what the tier sizes can hold");

        const std::size_t max_attempts = 1000 * (budget + 1);
        std::size_t attempts = 0;
        for (std::size_t placed = 0; placed < shortcuts;) {
            if (++attempts > max_attempts) fail(R, "could not place shortcut edges");
            auto i = uniform_index(rng_, t2 + t3);
            EntityId s = i < t2 ? tiers_[2][i] : tiers_[3][i - t2];
            EntityId o = i < t2 ? pa.sample({pool[0]}, rng_) : pa.sample({pool[0], pool[1]}, rng_);
            if (link(s, o)) ++placed;
        }
        for (std::size_t placed = 0; placed < regular;) {
            if (++attempts > max_attempts) fail(R, "could not place edges; counts too close to capacity");
            bool upper = uniform_index(rng_, t2 + t3) < t2;
            EntityId s, o;
            if (upper) {
                s = tiers_[2][uniform_index(rng_, t2)];
                o = pa.sample({pool[1]}, rng_);
            } else {
                s = tiers_[3][uniform_index(rng_, t3)];
                o = pa.sample({pool[2]}, rng_);
            }
            if (link(s, o)) ++placed;
        }
    }

    // Each source gets one target by preferential attachment; remaining
    // edges go from uniform sources to preferential targets.
    void attach_each(RelationType r, const std::vector<EntityId>& sources, const std::vector<EntityId>& targets) {
        const std::size_t budget = config_.relations(r);
        if (sources.empty()) {
            if (budget > 0) fail(r, "has no source entities");
            return;
        }
        if (targets.empty()) fail(r, "every source needs a target but no target entities exist");
        if (budget < sources.size())
            fail(r, "needs at least " + std::to_string(sources.size()) + " edges (one per source), got " +
                        std::to_string(budget));
        if (budget > sources.size() * targets.size())
            fail(r, "requested " + std::to_string(budget) + " edges but only " +
                        std::to_string(sources.size() * targets.size()) + " pairs exist");

        Attachment pa(net_.graph.num_entities());
        int pool = pa.add_pool(targets);
        for (auto s : sources) {
            auto o = pa.sample({pool}, rng_);
            add(s, r, o);
            pa.bump(o);
        }
        const std::size_t max_attempts = 1000 * (budget + 1);
        std::size_t attempts = 0;
        for (std::size_t placed = sources.size(); placed < budget;) {
            if (++attempts > max_attempts) fail(r, "could not place edges; counts too close to capacity");
            auto s = sources[uniform_index(rng_, sources.size())];
            auto o = pa.sample({pool}, rng_);
            if (add(s, r, o)) {
                pa.bump(o);
                ++placed;
            }
        }
    }

    // Uniform pairs over the schema's source/target types, covering each
    // source and target once before sampling freely.
    void fill_uniform(RelationType r) {
        const std::size_t budget = config_.relations(r);
        if (budget == 0) return;
        const auto& sig = default_schema().signature(r);
        std::vector<EntityId> sources, targets;
        for (auto t : sig.source.members())
            sources.insert(sources.end(), by_type(t).begin(), by_type(t).end());
        for (auto t : sig.target.members())
            targets.insert(targets.end(), by_type(t).begin(), by_type(t).end());
        std::sort(sources.begin(), sources.end());
        std::sort(targets.begin(), targets.end());
        std::vector<EntityId> overlap;
        std::set_intersection(sources.begin(), sources.end(), targets.begin(), targets.end(),
                              std::back_inserter(overlap));
        const std::size_t capacity = sources.size() * targets.size() - overlap.size();
        if (budget > capacity)
            fail(r, "requested " + std::to_string(budget) + " edges but only " + std::to_string(capacity) +
                        " distinct pairs exist for the configured entity counts");

        if (2 * budget > capacity) {
            std::vector<std::pair<EntityId, EntityId>> pairs;
            for (auto s : sources)
                for (auto o : targets)
                    if (s != o) pairs.emplace_back(s, o);
            shuffle(pairs, rng_);
            for (std::size_t i = 0; i < budget; ++i) add(pairs[i].first, r, pairs[i].second);
            return;
        }

        shuffle(sources, rng_);
        shuffle(targets, rng_);
        const std::size_t cover = std::max(sources.size(), targets.size());
        std::size_t placed = 0;
        for (std::size_t i = 0; i < cover && placed < budget; ++i)
            if (add(sources[i % sources.size()], r, targets[i % targets.size()])) ++placed;
        while (placed < budget) {
            auto s = sources[uniform_index(rng_, sources.size())];
            auto o = targets[uniform_index(rng_, targets.size())];
            if (add(s, r, o)) ++placed;
        }
    }

    const GeneratorConfig& config_;
    Rng rng_;
    GeneratedNetwork net_;
    std::array<std::vector<EntityId>, kNumEntityTypes> ids_{};
    std::vector<EntityId> suppliers_;
    std::array<std::vector<EntityId>, 4> tiers_{};
};

}  // namespace

GeneratedNetwork generate_network(const GeneratorConfig& config) {
    return Builder(config).run();
}

}  // namespace chainlens
