#include <doctest.h>

#include <algorithm>
#include <map>
#include <numeric>
#include <set>
#include <sstream>

#include <json.hpp>

#include "chainlens/analytics.hpp"
#include "chainlens/dataset.hpp"
#include "chainlens/error.hpp"
#include "chainlens/export.hpp"
#include "helpers.hpp"
#include "oracles.hpp"

using namespace chainlens;

namespace {

Graph suppliers(std::size_t n) {
    Graph g;
    for (std::size_t i = 0; i < n; ++i) g.add_entity("s" + std::to_string(i), EntityType::Supplier);
    return g;
}

void edges(Graph& g, std::initializer_list<std::pair<EntityId, EntityId>> list) {
    for (auto [a, b] : list) g.add_triple(a, RelationType::supplies_to, b);
}

// Thirty mixed instances: sparse and dense digraphs, DAGs, and graphs with
// self-loops and parallel typed edges.
std::vector<Graph> oracle_graphs() {
    Rng rng(2718);
    std::vector<Graph> out;
    for (int i = 0; i < 30; ++i) {
        const std::size_t n = 2 + uniform_index(rng, 39);
        switch (i % 4) {
            case 0: out.push_back(testing::random_supply_graph(rng, n, uniform(rng, 0.02, 0.3))); break;
            case 1: out.push_back(testing::random_supply_dag(rng, n, uniform(rng, 0.05, 0.4))); break;
            case 2: {
                auto g = testing::random_supply_graph(rng, n, 0.1);
                for (EntityId v = 0; v < n; v += 3) g.add_triple(v, RelationType::supplies_to, v);
                out.push_back(std::move(g));
                break;
            }
            default: out.push_back(testing::random_graph(rng, n, 3 * n)); break;
        }
    }
    return out;
}

const Graph& default_network() {
    static const GeneratedNetwork net = generate_network(GeneratorConfig::defaults());
    return net.graph;
}

}  // namespace

TEST_CASE("degree_centrality") {
    auto g = suppliers(4);
    edges(g, {{0, 1}, {1, 2}});
    auto d = degree_centrality(g);
    CHECK(d.in == std::vector<std::uint64_t>{0, 1, 1, 0});
    CHECK(d.out == std::vector<std::uint64_t>{1, 1, 0, 0});
}

TEST_CASE("betweenness examples") {
    auto path = suppliers(3);
    edges(path, {{0, 1}, {1, 2}});
    CHECK(betweenness(path) == std::vector<double>{0, 1, 0});

    // Center 0; leaves 1..3 feed it, leaves 4..6 are fed by it.
    auto star = suppliers(7);
    edges(star, {{1, 0}, {2, 0}, {3, 0}, {0, 4}, {0, 5}, {0, 6}});
    auto bc = betweenness(star);
    CHECK(bc[0] == 9.0);
    CHECK(oracle::betweenness(star)[0] == 9.0);
    for (std::size_t v = 1; v < 7; ++v) CHECK(bc[v] == 0.0);
}

TEST_CASE("closeness examples") {
    auto path = suppliers(3);
    edges(path, {{0, 1}, {1, 2}});
    auto c = closeness(path);
    CHECK(c[0] == doctest::Approx(2.0 / 3.0).epsilon(1e-15));
    CHECK(c[1] == doctest::Approx(0.5).epsilon(1e-15));
    CHECK(c[2] == 0.0);
}

TEST_CASE("triangle examples") {
    auto cycle = suppliers(3);
    edges(cycle, {{0, 1}, {1, 2}, {2, 0}});
    CHECK(triangle_count(cycle) == std::vector<std::uint64_t>{1, 1, 1});
    auto tree = suppliers(6);
    edges(tree, {{1, 0}, {2, 0}, {3, 1}, {4, 1}, {5, 2}});
    CHECK(triangle_count(tree) == std::vector<std::uint64_t>(6, 0));
    // Reciprocal edges and a self-loop collapse in the projection.
    auto messy = suppliers(3);
    edges(messy, {{0, 1}, {1, 0}, {1, 2}, {2, 0}, {0, 0}});
    CHECK(triangle_count(messy) == std::vector<std::uint64_t>{1, 1, 1});
}

TEST_CASE("metrics match brute-force oracles on 30 random graphs") {
    for (const auto& g : oracle_graphs()) {
        CAPTURE(g.num_entities());
        const auto bc = betweenness(g), want_bc = oracle::betweenness(g);
        const auto cl = closeness(g), want_cl = oracle::closeness(g);
        const auto tri = triangle_count(g), want_tri = oracle::triangles(g);
        CHECK(tri == want_tri);
        for (std::size_t v = 0; v < g.num_entities(); ++v) {
            CHECK(oracle::close(bc[v], want_bc[v], 1e-9));
            CHECK(std::abs(cl[v] - want_cl[v]) <= 1e-9);
            CHECK(cl[v] >= 0.0);
            CHECK(cl[v] <= 1.0);
        }
        CHECK(betweenness(g, 4) == bc);
        CHECK(closeness(g, 3) == cl);
    }
}

TEST_CASE("betweenness is exact on unique-path DAGs") {
    Rng rng(6);
    for (int i = 0; i < 10; ++i) {
        // A random in-forest has exactly one path between any connected pair.
        auto g = suppliers(30);
        for (EntityId v = 1; v < 30; ++v) g.add_triple(v, RelationType::supplies_to, uniform_index(rng, v));
        CHECK(betweenness(g) == oracle::betweenness(g));
    }
}

TEST_CASE("an isolated node changes nothing else") {
    Rng rng(8);
    for (int i = 0; i < 10; ++i) {
        auto g = testing::random_supply_graph(rng, 15, 0.15);
        auto h = g;
        h.add_entity("lonely", EntityType::Supplier);
        const double n = 15;
        auto d0 = degree_centrality(g), d1 = degree_centrality(h);
        auto b0 = betweenness(g), b1 = betweenness(h);
        auto t0 = triangle_count(g), t1 = triangle_count(h);
        auto c0 = closeness(g), c1 = closeness(h);
        for (std::size_t v = 0; v < 15; ++v) {
            CHECK(d0.in[v] == d1.in[v]);
            CHECK(d0.out[v] == d1.out[v]);
            CHECK(b0[v] == b1[v]);
            CHECK(t0[v] == t1[v]);
            CHECK(c1[v] == doctest::Approx(c0[v] * (n - 1) / n).epsilon(1e-12));
        }
        CHECK(c1[15] == 0.0);
        CHECK(b1[15] == 0.0);
    }
}

TEST_CASE("metrics do not depend on insertion order") {
    Rng rng(10);
    auto g = testing::random_supply_graph(rng, 25, 0.12);
    std::vector<EntityId> perm(25);
    std::iota(perm.begin(), perm.end(), 0);
    shuffle(perm, rng);
    // h's node i is g's node perm[i].
    Graph h;
    std::vector<EntityId> to_h(25);
    for (std::size_t i = 0; i < 25; ++i) to_h[perm[i]] = h.add_entity(g.entity(perm[i]).label, EntityType::Supplier);
    auto triples = g.triples();
    shuffle(triples, rng);
    for (const auto& t : triples) h.add_triple(to_h[t.subject], t.predicate, to_h[t.object]);

    auto rg = criticality(g), rh = criticality(h);
    for (std::size_t v = 0; v < 25; ++v) {
        for (std::size_t m = 0; m < kAllMetrics.size(); ++m)
            CHECK(rg.raw[m][v] == doctest::Approx(rh.raw[m][to_h[v]]).epsilon(1e-12));
        CHECK(rg.aggregated[v] == doctest::Approx(rh.aggregated[to_h[v]]).epsilon(1e-12));
    }
    for (std::size_t a = 0; a < 5; ++a)
        for (std::size_t b = 0; b < 5; ++b)
            CHECK((*rg.correlation)[a][b] == doctest::Approx((*rh.correlation)[a][b]).epsilon(1e-12));
}

TEST_CASE("normalize") {
    CHECK(normalize({0, 5, 10}) == std::vector<double>{0, 5, 10});
    CHECK(normalize({1, 2, 3}) == std::vector<double>{0, 5, 10});
    CHECK(normalize({4, 4, 4}) == std::vector<double>{0, 0, 0});
    CHECK(normalize({}).empty());
    Rng rng(1);
    for (int i = 0; i < 100; ++i) {
        std::vector<double> v(1 + uniform_index(rng, 30));
        for (double& x : v) x = uniform(rng, -1e6, 1e6);
        for (double x : normalize(v)) CHECK((x >= 0.0 && x <= 10.0));
    }
}

TEST_CASE("criticality") {
    SUBCASE("star center dominates") {
        auto star = suppliers(7);
        edges(star, {{1, 0}, {2, 0}, {3, 0}, {0, 4}, {0, 5}, {0, 6}});
        auto r = criticality(star);
        for (std::size_t v = 1; v < 7; ++v) CHECK(r.aggregated[0] > r.aggregated[v]);
        CHECK(r.top_node() == 0);
    }
    SUBCASE("duplicated metric vectors correlate perfectly") {
        // A directed 3-cycle (in 1, triangles 1), a bidirected K4 (in 3,
        // triangles 3) and an isolated node: in_degree equals triangle_count.
        auto g = suppliers(8);
        edges(g, {{0, 1}, {1, 2}, {2, 0}});
        for (EntityId a = 3; a < 7; ++a)
            for (EntityId b = 3; b < 7; ++b)
                if (a != b) g.add_triple(a, RelationType::supplies_to, b);
        auto r = criticality(g);
        CHECK(r.raw[0] == r.raw[4]);
        REQUIRE(r.correlation);
        CHECK(std::abs((*r.correlation)[0][4] - 1.0) < 1e-9);
    }
    SUBCASE("fewer than two nodes") {
        auto r = criticality(suppliers(1));
        CHECK_FALSE(r.correlation);
        CHECK(r.aggregated == std::vector<double>{0.0});
        CHECK_THROWS_AS(correlation_matrix({}), DegenerateGraph);
    }
    SUBCASE("report invariants on random graphs") {
        for (const auto& g : oracle_graphs()) {
            for (double threshold : {0.0, 10.0, 25.0}) {
                auto r = criticality(g, threshold);
                for (std::size_t v = 0; v < r.size(); ++v) {
                    double sum = 0.0;
                    for (const auto& col : r.normalized) {
                        CHECK((col[v] >= 0.0 && col[v] <= 10.0));
                        sum += col[v];
                    }
                    CHECK(r.aggregated[v] == sum);
                    CHECK((r.aggregated[v] >= 0.0 && r.aggregated[v] <= 50.0));
                    CHECK(bool(r.critical[v]) == (r.aggregated[v] > threshold));
                }
                REQUIRE(r.correlation);
                for (std::size_t a = 0; a < 5; ++a) {
                    CHECK((*r.correlation)[a][a] == 1.0);
                    for (std::size_t b = 0; b < 5; ++b) {
                        CHECK((*r.correlation)[a][b] == (*r.correlation)[b][a]);
                        CHECK(std::abs((*r.correlation)[a][b]) <= 1.0);
                    }
                }
            }
        }
    }
}

TEST_CASE("criticality on the default synthetic network") {
    const auto projected = supplier_projection(default_network());
    auto r = criticality(projected);
    auto hub = projected.find("HUB", EntityType::Supplier);
    REQUIRE(hub);
    for (std::size_t v = 0; v < r.size(); ++v)
        if (v != *hub) CHECK(r.aggregated[*hub] > r.aggregated[v]);
    CHECK(r.critical[*hub]);
    CHECK(criticality(projected, 51.0).num_critical() == 0);

    std::ostringstream summary;
    write_criticality_summary(summary, r);
    CHECK(summary.str().find("top_node: HUB") != std::string::npos);
}

TEST_CASE("sole_supplier_scopes") {
    Graph g;
    auto a = g.add_entity("a", EntityType::Supplier), b = g.add_entity("b", EntityType::Supplier);
    auto shared = g.add_entity("shared", EntityType::BusinessScope);
    auto single = g.add_entity("single", EntityType::BusinessScope);
    g.add_entity("unused", EntityType::BusinessScope);
    g.add_triple(a, RelationType::related_to, shared);
    g.add_triple(b, RelationType::related_to, shared);
    g.add_triple(b, RelationType::related_to, single);
    CHECK(sole_supplier_scopes(g) == std::vector<SoleScope>{{single, b}});

    // Brute-force incidence scan on the default network.
    const auto& net = default_network();
    std::map<EntityId, std::set<EntityId>> related;
    for (const auto& t : net.triples())
        if (t.predicate == RelationType::related_to) related[t.object].insert(t.subject);
    std::vector<SoleScope> want;
    for (const auto& [scope, sups] : related)
        if (sups.size() == 1) want.push_back({scope, *sups.begin()});
    CHECK(sole_supplier_scopes(net) == want);
}

TEST_CASE("critical_paths") {
    // 1 -> 0 (hub), 2 -> 1, 3 -> 2, 4 -> 3: a chain of depth four.
    auto g = suppliers(5);
    edges(g, {{1, 0}, {2, 1}, {3, 2}, {4, 3}});
    auto r = criticality(g);
    std::fill(r.critical.begin(), r.critical.end(), std::uint8_t{0});
    CHECK(critical_paths(g, r, 3, EntityId{0}).empty());

    r.critical[1] = 1;
    auto paths = critical_paths(g, r, 3, EntityId{0});
    CHECK(paths == std::vector<std::vector<EntityId>>{{1, 0}, {2, 1, 0}, {3, 2, 1, 0}});

    r.critical[1] = 0;
    r.critical[0] = 1;  // a flagged hub alone does not qualify a path
    CHECK(critical_paths(g, r, 3, EntityId{0}).empty());

    const auto projected = supplier_projection(default_network());
    auto full = criticality(projected);
    const EntityId hub = full.top_node();
    for (std::size_t depth : {1u, 2u, 3u}) {
        auto found = critical_paths(projected, full, depth);
        CHECK_FALSE(found.empty());
        CHECK(std::is_sorted(found.begin(), found.end()));
        for (const auto& p : found) {
            CHECK(p.size() <= depth + 1);
            CHECK(p.back() == hub);
            CHECK(std::set<EntityId>(p.begin(), p.end()).size() == p.size());
            bool flagged = false;
            for (std::size_t i = 0; i + 1 < p.size(); ++i) {
                CHECK(projected.contains({p[i], RelationType::supplies_to, p[i + 1]}));
                flagged = flagged || full.critical[p[i]];
            }
            CHECK(flagged);
        }
    }
}

TEST_CASE("criticality csv round trip") {
    Rng rng(3);
    auto g = testing::random_supply_graph(rng, 30, 0.1);
    g.add_entity("needs, \"quoting\"", EntityType::Supplier);
    auto r = criticality(g, 5.0);
    std::stringstream csv;
    write_criticality_csv(csv, r);
    auto rows = read_criticality_csv(csv);
    REQUIRE(rows.size() == r.size());
    for (std::size_t v = 0; v < rows.size(); ++v) {
        CHECK(rows[v].label == r.labels[v]);
        CHECK(rows[v].aggregated == r.aggregated[v]);
        CHECK(rows[v].critical == bool(r.critical[v]));
    }
    std::istringstream bad("node,label,aggregated,critical\n0,x,1.5,maybe\n");
    CHECK_THROWS_AS(read_criticality_csv(bad), ParseError);
}

TEST_CASE("annotated export") {
    Graph g;
    std::vector<EntityId> sup;
    for (int i = 0; i < 6; ++i) sup.push_back(g.add_entity("S" + std::to_string(i), EntityType::Supplier));
    auto big = g.add_entity("big", EntityType::BusinessScope);
    auto small = g.add_entity("small", EntityType::BusinessScope);
    g.add_entity("DE", EntityType::Country);
    for (int i = 0; i < 5; ++i) g.add_triple(sup[i], RelationType::related_to, big);
    g.add_triple(sup[5], RelationType::related_to, small);
    g.add_triple(sup[1], RelationType::supplies_to, sup[0]);
    g.add_triple(sup[0], RelationType::located_in, 8);

    auto report = criticality(supplier_projection(g), 0.5);
    std::stringstream csv;
    write_criticality_csv(csv, report);
    auto rows = read_criticality_csv(csv);
    auto a = annotate(g, rows);

    std::map<std::string, ExportNode> by_label;
    for (const auto& n : a.nodes) by_label[n.label] = n;
    CHECK(by_label.size() == 8);  // the country is left out
    CHECK(by_label.at("big").size == 5);
    CHECK(by_label.at("small").size == 1);
    CHECK(by_label.at("big").color == "purple");
    CHECK(by_label.at("S0").color == (report.critical[0] ? "red" : "yellow"));
    CHECK(by_label.at("S0").color == "red");
    CHECK(by_label.at("S4").color == "yellow");
    for (const auto& e : a.edges)
        CHECK(e.edge_class == (e.relation == RelationType::supplies_to ? "orange" : "blue"));
    CHECK(a.edges.size() == 7);

    for (auto format : {ExportFormat::dot, ExportFormat::graphml, ExportFormat::json}) {
        std::ostringstream first, second;
        write_export(first, a, format);
        write_export(second, annotate(g, rows), format);
        CHECK(first.str() == second.str());
        CHECK(first.str().find("red") != std::string::npos);
    }
    std::ostringstream json;
    write_json(json, a);
    auto doc = nlohmann::json::parse(json.str());
    CHECK(doc["nodes"].size() == 8);
    CHECK(doc["edges"].size() == 7);

    auto missing = rows;
    missing.pop_back();
    CHECK_THROWS_AS(annotate(g, missing), ReportMismatch);
    auto renamed = rows;
    renamed[0].label = "nobody";
    CHECK_THROWS_AS(annotate(g, renamed), ReportMismatch);
}
