#include <doctest.h>

#include <algorithm>
#include <map>
#include <sstream>

#include "chainlens/error.hpp"
#include "chainlens/graph.hpp"
#include "helpers.hpp"

using namespace chainlens;

TEST_CASE("built-in vocabularies") {
    CHECK(kAllEntityTypes.size() == 8);
    CHECK(kAllRelationTypes.size() == 11);
    for (auto t : kAllEntityTypes) CHECK(parse_entity_type(to_string(t)) == t);
    for (auto r : kAllRelationTypes) CHECK(parse_relation_type(to_string(r)) == r);
    CHECK_FALSE(parse_entity_type("Planet"));

    const auto& schema = default_schema();
    CHECK_NOTHROW(schema.check_complete());
    const auto& sig = schema.signature(RelationType::supplies_to);
    CHECK(sig.source == TypeSet{EntityType::Supplier, EntityType::Smelter});
    CHECK(sig.target == TypeSet{EntityType::Supplier});
}

TEST_CASE("schema file round trip and errors") {
    std::istringstream in(format_schema(default_schema()));
    CHECK(parse_schema(in) == default_schema());

    std::istringstream missing("supplies_to\tSupplier\tSupplier\n");
    CHECK_THROWS_AS(parse_schema(missing), ConfigError);

    std::istringstream bad("supplies_to\tSupplier,Planet\tSupplier\n");
    CHECK_THROWS_AS(parse_schema(bad), ParseError);
}

TEST_CASE("add_entity assigns dense ids") {
    Graph g;
    auto a = g.add_entity("ACME Corp", EntityType::Supplier);
    auto b = g.add_entity("ACME Corp", EntityType::Supplier);
    CHECK(a == 0);
    CHECK(b == 1);
    CHECK(g.type_of(a) == EntityType::Supplier);
    CHECK(g.num_entities() == 2);
    CHECK(g.find("ACME Corp", EntityType::Supplier) == a);
    CHECK_FALSE(g.find("ACME Corp", EntityType::Country));
}

TEST_CASE("stats at reference scale") {
    // Entity counts of the reference supply network.
    const std::map<EntityType, std::size_t> counts = {
        {EntityType::Supplier, 61234},  {EntityType::ManufacturerPart, 1650},
        {EntityType::SiemensPart, 1295}, {EntityType::Smelter, 340},
        {EntityType::Substance, 321},   {EntityType::Component, 233},
        {EntityType::Country, 172},     {EntityType::BusinessScope, 32},
    };
    Graph g;
    for (auto [t, n] : counts)
        for (std::size_t i = 0; i < n; ++i) g.add_entity("x", t);
    auto s = g.stats();
    CHECK(s.entities_by_type[index_of(EntityType::Supplier)] == 61234);
    CHECK(s.total_entities == 65277);
    CHECK(s.total_triples == 0);

    Graph empty;
    auto z = empty.stats();
    CHECK(z.total_entities == 0);
    CHECK(z.total_triples == 0);
    for (auto c : z.entities_by_type) CHECK(c == 0);
}

TEST_CASE("add_triple enforces schema and set semantics") {
    Graph g;
    auto a = g.add_entity("a", EntityType::Supplier);
    auto b = g.add_entity("b", EntityType::Supplier);
    auto x = g.add_entity("x", EntityType::Country);

    CHECK(g.add_triple(a, RelationType::supplies_to, b) == InsertOutcome::added);
    CHECK_THROWS_AS(g.add_triple(x, RelationType::supplies_to, b), SchemaViolation);
    CHECK(g.add_triple(a, RelationType::supplies_to, b) == InsertOutcome::duplicate);
    CHECK(g.num_triples() == 1);
    CHECK_THROWS_AS(g.add_triple(a, RelationType::supplies_to, 99), UnknownEntity);
}

TEST_CASE("validate reports injected violations") {
    Graph g;
    auto a = g.add_entity("a", EntityType::Supplier);
    auto b = g.add_entity("b", EntityType::Supplier);
    auto x = g.add_entity("x", EntityType::Country);
    g.add_triple(a, RelationType::supplies_to, b);
    g.add_triple(a, RelationType::located_in, x);
    CHECK(g.validate().ok());

    g.add_triple_unchecked({x, RelationType::supplies_to, b});
    auto report = g.validate();
    REQUIRE(report.issues.size() == 1);
    CHECK(report.issues[0].triple == Triple{x, RelationType::supplies_to, b});
    CHECK(report.issues[0].kind == ValidationIssue::Kind::schema_violation);
}

TEST_CASE("neighbors") {
    Graph g;
    auto center = g.add_entity("c", EntityType::Supplier);
    std::vector<EntityId> leaves;
    for (int i = 0; i < 4; ++i) {
        leaves.push_back(g.add_entity("l" + std::to_string(i), EntityType::Supplier));
        g.add_triple(leaves.back(), RelationType::supplies_to, center);
    }
    auto lonely = g.add_entity("lonely", EntityType::Supplier);

    auto in = g.neighbors(center, Direction::in);
    REQUIRE(in.size() == 4);
    for (std::size_t i = 0; i < 4; ++i) CHECK(in[i].entity == leaves[i]);
    CHECK(g.neighbors(lonely, Direction::both).empty());
    CHECK_THROWS_AS(g.neighbors(999, Direction::in), UnknownEntity);

    SUBCASE("predicate filter") {
        Graph h;
        auto s = h.add_entity("s", EntityType::Supplier);
        for (int i = 0; i < 3; ++i)
            h.add_triple(s, RelationType::supplies_to, h.add_entity("t" + std::to_string(i), EntityType::Supplier));
        for (int i = 0; i < 2; ++i)
            h.add_triple(s, RelationType::related_to, h.add_entity("b" + std::to_string(i), EntityType::BusinessScope));
        auto out = h.neighbors(s, Direction::out, RelationType::supplies_to);
        CHECK(out.size() == 3);
        for (auto n : out) CHECK(n.relation == RelationType::supplies_to);
    }
}

TEST_CASE("neighbors: out plus in equals both (property)") {
    Rng rng(11);
    for (int trial = 0; trial < 20; ++trial) {
        auto g = testing::random_graph(rng, 30, 80);
        for (EntityId e = 0; e < g.num_entities(); ++e) {
            auto out = g.neighbors(e, Direction::out);
            auto in = g.neighbors(e, Direction::in);
            out.insert(out.end(), in.begin(), in.end());
            std::sort(out.begin(), out.end());
            CHECK(out == g.neighbors(e, Direction::both));
        }
    }
}

TEST_CASE("project_subgraph") {
    Rng rng(5);
    SUBCASE("identity projection") {
        auto g = testing::random_graph(rng, 40, 120);
        TypeSet all;
        for (auto t : kAllEntityTypes) all.insert(t);
        auto p = g.project_subgraph(all, kAllRelationTypes);
        CHECK(p.num_entities() == g.num_entities());
        CHECK(p.canonical_triples() == g.canonical_triples());
    }
    SUBCASE("country-only supply projection has no triples") {
        auto g = testing::random_graph(rng, 40, 120);
        std::array rels{RelationType::supplies_to};
        auto p = g.project_subgraph({EntityType::Country}, rels);
        CHECK(p.num_triples() == 0);
        CHECK(p.num_entities() == g.stats().entities_by_type[index_of(EntityType::Country)]);
    }
    SUBCASE("projection keeps exactly the qualifying triples (property)") {
        for (int trial = 0; trial < 20; ++trial) {
            auto g = testing::random_graph(rng, 30, 100);
            TypeSet types{EntityType::Supplier, EntityType::Smelter, EntityType::Country};
            std::array rels{RelationType::supplies_to, RelationType::located_in};
            auto p = g.project_subgraph(types, rels);
            CHECK(p.validate().ok());
            std::vector<std::string> expected;
            for (const auto& t : g.triples()) {
                bool keep = (t.predicate == rels[0] || t.predicate == rels[1]) &&
                            types.contains(g.type_of(t.subject)) && types.contains(g.type_of(t.object));
                if (!keep) continue;
                expected.push_back(g.entity(t.subject).label + "\t" + std::string(to_string(g.type_of(t.subject))) +
                                   "\t" + std::string(to_string(t.predicate)) + "\t" + g.entity(t.object).label +
                                   "\t" + std::string(to_string(g.type_of(t.object))));
            }
            std::sort(expected.begin(), expected.end());
            CHECK(p.canonical_triples() == expected);
        }
    }
}

TEST_CASE("stats totals equal per-type sums (property)") {
    Rng rng(3);
    for (int trial = 0; trial < 20; ++trial) {
        auto g = testing::random_graph(rng, 1 + uniform_index(rng, 50), uniform_index(rng, 150));
        auto s = g.stats();
        std::size_t e = 0, t = 0;
        for (auto c : s.entities_by_type) e += c;
        for (auto c : s.triples_by_relation) t += c;
        CHECK(e == s.total_entities);
        CHECK(t == s.total_triples);
        CHECK(s.total_entities == g.num_entities());
        CHECK(s.total_triples == g.num_triples());
        CHECK(g.validate().ok());
    }
}
