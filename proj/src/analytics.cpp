#include "chainlens/analytics.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <exception>
#include <fstream>
#include <numeric>
#include <thread>

#include "chainlens/error.hpp"
#include "text_util.hpp"

namespace chainlens {

namespace {

using Adjacency = std::vector<std::vector<EntityId>>;

// Sorted, de-duplicated neighbor lists without self-loops.
struct SimpleDigraph {
    Adjacency out;
    Adjacency in;
};

SimpleDigraph simple_digraph(const Graph& graph) {
    const std::size_t n = graph.num_entities();
    SimpleDigraph g{Adjacency(n), Adjacency(n)};
    for (const auto& t : graph.triples()) {
        if (t.subject == t.object) continue;
        g.out[t.subject].push_back(t.object);
        g.in[t.object].push_back(t.subject);
    }
    for (auto* adj : {&g.out, &g.in})
        for (auto& list : *adj) {
            std::sort(list.begin(), list.end());
            list.erase(std::unique(list.begin(), list.end()), list.end());
        }
    return g;
}

Adjacency undirected_simple(const Graph& graph) {
    auto g = simple_digraph(graph);
    Adjacency adj(graph.num_entities());
    for (std::size_t v = 0; v < adj.size(); ++v) {
        std::merge(g.out[v].begin(), g.out[v].end(), g.in[v].begin(), g.in[v].end(), std::back_inserter(adj[v]));
        adj[v].erase(std::unique(adj[v].begin(), adj[v].end()), adj[v].end());
    }
    return adj;
}

constexpr std::size_t kSourceBlock = 32;

// Runs `work(first, last, partial)` over fixed source blocks and adds the
// partial vectors together in block order.
template <typename Work>
std::vector<double> blockwise(std::size_t n, unsigned threads, Work work) {
    const std::size_t blocks = (n + kSourceBlock - 1) / kSourceBlock;
    std::vector<std::vector<double>> partial(blocks, std::vector<double>(n, 0.0));
    auto run_block = [&](std::size_t b) {
        work(b * kSourceBlock, std::min(n, (b + 1) * kSourceBlock), partial[b]);
    };
    const std::size_t workers = std::clamp<std::size_t>(threads, 1, std::max<std::size_t>(blocks, 1));
    if (workers <= 1) {
        for (std::size_t b = 0; b < blocks; ++b) run_block(b);
    } else {
        std::vector<std::thread> pool;
        std::vector<std::exception_ptr> errors(workers);
        for (std::size_t w = 0; w < workers; ++w)
            pool.emplace_back([&, w] {
                try {
                    for (std::size_t b = w; b < blocks; b += workers) run_block(b);
                } catch (...) {
                    errors[w] = std::current_exception();
                }
            });
        for (auto& t : pool) t.join();
        for (auto& e : errors)
            if (e) std::rethrow_exception(e);
    }
    std::vector<double> total(n, 0.0);
    for (const auto& p : partial)
        for (std::size_t v = 0; v < n; ++v) total[v] += p[v];
    return total;
}

std::vector<double> as_doubles(const std::vector<std::uint64_t>& v) { return {v.begin(), v.end()}; }

std::string csv_field(const std::string& s) {
    if (s.find_first_of(",\"") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += '"';
        out += c;
    }
    return out + "\"";
}

std::vector<std::string> parse_csv_line(std::string_view line, std::size_t line_no) {
    std::vector<std::string> fields(1);
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        const char c = line[i];
        if (quoted) {
            if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
                fields.back() += '"';
                ++i;
            } else if (c == '"') {
                quoted = false;
            } else {
                fields.back() += c;
            }
        } else if (c == '"') {
            quoted = true;
        } else if (c == ',') {
            fields.emplace_back();
        } else {
            fields.back() += c;
        }
    }
    if (quoted) throw ParseError("line " + std::to_string(line_no) + ": unterminated quote", line_no);
    return fields;
}

std::string number(double v) { return detail::shortest(v); }

std::string fixed(double v, int digits) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*f", digits, v);
    return buf;
}

}  // namespace

Graph supplier_projection(const Graph& graph) {
    const RelationType rel[] = {RelationType::supplies_to};
    return graph.project_subgraph(TypeSet{EntityType::Supplier}, rel);
}

DegreeCounts degree_centrality(const Graph& graph) {
    DegreeCounts d{std::vector<std::uint64_t>(graph.num_entities(), 0),
                   std::vector<std::uint64_t>(graph.num_entities(), 0)};
    for (const auto& t : graph.triples()) {
        ++d.out[t.subject];
        ++d.in[t.object];
    }
    return d;
}

std::vector<double> betweenness(const Graph& graph, unsigned threads) {
    const auto g = simple_digraph(graph);
    const std::size_t n = graph.num_entities();
    return blockwise(n, threads, [&](std::size_t first, std::size_t last, std::vector<double>& bc) {
        std::vector<double> sigma(n), delta(n);
        std::vector<std::int64_t> dist(n);
        std::vector<EntityId> order;
        order.reserve(n);
        for (std::size_t s = first; s < last; ++s) {
            std::fill(sigma.begin(), sigma.end(), 0.0);
            std::fill(delta.begin(), delta.end(), 0.0);
            std::fill(dist.begin(), dist.end(), -1);
            order.clear();
            sigma[s] = 1.0;
            dist[s] = 0;
            order.push_back(static_cast<EntityId>(s));
            for (std::size_t head = 0; head < order.size(); ++head) {
                const EntityId v = order[head];
                for (EntityId w : g.out[v]) {
                    if (dist[w] < 0) {
                        dist[w] = dist[v] + 1;
                        order.push_back(w);
                    }
                    if (dist[w] == dist[v] + 1) sigma[w] += sigma[v];
                }
            }
            for (std::size_t i = order.size(); i-- > 1;) {
                const EntityId w = order[i];
                for (EntityId v : g.in[w])
                    if (dist[v] >= 0 && dist[v] == dist[w] - 1) delta[v] += sigma[v] / sigma[w] * (1.0 + delta[w]);
                bc[w] += delta[w];
            }
        }
    });
}

std::vector<double> closeness(const Graph& graph, unsigned threads) {
    const auto g = simple_digraph(graph);
    const std::size_t n = graph.num_entities();
    return blockwise(n, threads, [&](std::size_t first, std::size_t last, std::vector<double>& out) {
        std::vector<std::int64_t> dist(n);
        std::vector<EntityId> queue;
        for (std::size_t s = first; s < last; ++s) {
            std::fill(dist.begin(), dist.end(), -1);
            queue.assign(1, static_cast<EntityId>(s));
            dist[s] = 0;
            std::uint64_t reached = 0, total = 0;
            for (std::size_t head = 0; head < queue.size(); ++head) {
                const EntityId v = queue[head];
                for (EntityId w : g.out[v])
                    if (dist[w] < 0) {
                        dist[w] = dist[v] + 1;
                        ++reached;
                        total += static_cast<std::uint64_t>(dist[w]);
                        queue.push_back(w);
                    }
            }
            if (reached == 0) continue;
            const double r = static_cast<double>(reached);
            out[s] = (r / static_cast<double>(total)) * (r / static_cast<double>(n - 1));
        }
    });
}

std::vector<std::uint64_t> triangle_count(const Graph& graph) {
    const auto adj = undirected_simple(graph);
    std::vector<std::uint64_t> count(adj.size(), 0);
    std::vector<EntityId> common;
    for (EntityId u = 0; u < adj.size(); ++u) {
        for (EntityId v : adj[u]) {
            if (v <= u) continue;
            common.clear();
            std::set_intersection(adj[u].begin(), adj[u].end(), adj[v].begin(), adj[v].end(),
                                  std::back_inserter(common));
            for (EntityId w : common) {
                if (w <= v) continue;
                ++count[u];
                ++count[v];
                ++count[w];
            }
        }
    }
    return count;
}

std::vector<double> normalize(const std::vector<double>& values, double lo, double hi) {
    std::vector<double> out(values.size(), lo);
    if (values.empty()) return out;
    const auto [mn, mx] = std::minmax_element(values.begin(), values.end());
    const double low = *mn, span = *mx - *mn;
    if (!(span > 0.0)) return out;
    for (std::size_t i = 0; i < values.size(); ++i)
        out[i] = std::clamp(lo + (values[i] - low) / span * (hi - lo), lo, hi);
    return out;
}

std::string_view to_string(Metric m) {
    switch (m) {
        case Metric::in_degree: return "in_degree";
        case Metric::out_degree: return "out_degree";
        case Metric::betweenness: return "betweenness";
        case Metric::closeness: return "closeness";
        case Metric::triangle_count: return "triangle_count";
    }
    return "?";
}

CorrelationMatrix correlation_matrix(const std::array<std::vector<double>, kAllMetrics.size()>& columns) {
    const std::size_t n = columns[0].size();
    if (n < 2) throw DegenerateGraph("correlation needs at least two nodes, got " + std::to_string(n));
    constexpr std::size_t k = kAllMetrics.size();
    std::array<std::vector<double>, k> centered;
    std::array<double, k> norm{};
    for (std::size_t a = 0; a < k; ++a) {
        if (columns[a].size() != n) throw std::invalid_argument("correlation columns differ in length");
        const double mean = std::accumulate(columns[a].begin(), columns[a].end(), 0.0) / static_cast<double>(n);
        centered[a].resize(n);
        for (std::size_t i = 0; i < n; ++i) centered[a][i] = columns[a][i] - mean;
        norm[a] = std::sqrt(std::inner_product(centered[a].begin(), centered[a].end(), centered[a].begin(), 0.0));
    }
    CorrelationMatrix c{};
    for (std::size_t a = 0; a < k; ++a) {
        c[a][a] = 1.0;
        for (std::size_t b = a + 1; b < k; ++b) {
            double r = 0.0;
            if (norm[a] > 0.0 && norm[b] > 0.0) {
                const double dot =
                    std::inner_product(centered[a].begin(), centered[a].end(), centered[b].begin(), 0.0);
                r = std::clamp(dot / (norm[a] * norm[b]), -1.0, 1.0);
            }
            c[a][b] = c[b][a] = r;
        }
    }
    return c;
}

std::size_t CriticalityReport::num_critical() const {
    return static_cast<std::size_t>(std::count(critical.begin(), critical.end(), std::uint8_t{1}));
}

EntityId CriticalityReport::top_node() const {
    if (aggregated.empty()) throw DegenerateGraph("empty criticality report");
    return static_cast<EntityId>(std::max_element(aggregated.begin(), aggregated.end()) - aggregated.begin());
}

CriticalityReport criticality(const Graph& graph, double threshold, unsigned threads) {
    CriticalityReport r;
    r.threshold = threshold;
    const std::size_t n = graph.num_entities();
    r.labels.reserve(n);
    for (const auto& e : graph.entities()) r.labels.push_back(e.label);

    const auto degree = degree_centrality(graph);
    r.raw[0] = as_doubles(degree.in);
    r.raw[1] = as_doubles(degree.out);
    r.raw[2] = betweenness(graph, threads);
    r.raw[3] = closeness(graph, threads);
    r.raw[4] = as_doubles(triangle_count(graph));

    r.aggregated.assign(n, 0.0);
    for (std::size_t m = 0; m < kAllMetrics.size(); ++m) {
        r.normalized[m] = normalize(r.raw[m]);
        for (std::size_t v = 0; v < n; ++v) r.aggregated[v] += r.normalized[m][v];
    }
    r.critical.resize(n);
    for (std::size_t v = 0; v < n; ++v) r.critical[v] = r.aggregated[v] > threshold;
    try {
        r.correlation = correlation_matrix(r.raw);
    } catch (const DegenerateGraph&) {
        r.correlation.reset();
    }
    return r;
}

std::vector<SoleScope> sole_supplier_scopes(const Graph& graph) {
    std::vector<SoleScope> out;
    for (const auto& e : graph.entities()) {
        if (e.type != EntityType::BusinessScope) continue;
        std::optional<EntityId> only;
        bool several = false;
        for (std::size_t idx : graph.triples_to(e.id)) {
            const auto& t = graph.triples()[idx];
            if (t.predicate != RelationType::related_to || graph.type_of(t.subject) != EntityType::Supplier) continue;
            if (only && *only != t.subject) several = true;
            only = t.subject;
        }
        if (only && !several) out.push_back({e.id, *only});
    }
    return out;
}

std::vector<std::vector<EntityId>> critical_paths(const Graph& graph, const CriticalityReport& report,
                                                  std::size_t max_edges, std::optional<EntityId> hub) {
    if (report.size() != graph.num_entities())
        throw ReportMismatch("criticality report covers " + std::to_string(report.size()) + " nodes, graph has " +
                             std::to_string(graph.num_entities()));
    std::vector<std::vector<EntityId>> out;
    if (graph.empty()) return out;
    const EntityId target = hub ? *hub : report.top_node();
    if (!graph.has_entity(target)) throw UnknownEntity("hub id " + std::to_string(target));

    // Walk supplies_to edges backwards from the hub; `path` is hub-first.
    std::vector<EntityId> path = {target};
    std::vector<std::uint8_t> on_path(graph.num_entities(), 0);
    on_path[target] = 1;
    std::size_t flagged = 0;  // critical nodes on the path other than the hub
    auto walk = [&](auto&& self) -> void {
        if (path.size() > 1 && flagged > 0) out.emplace_back(path.rbegin(), path.rend());
        if (path.size() > max_edges) return;
        std::vector<EntityId> preds;
        for (std::size_t idx : graph.triples_to(path.back())) {
            const auto& t = graph.triples()[idx];
            if (t.predicate == RelationType::supplies_to && !on_path[t.subject]) preds.push_back(t.subject);
        }
        std::sort(preds.begin(), preds.end());
        preds.erase(std::unique(preds.begin(), preds.end()), preds.end());
        for (EntityId p : preds) {
            path.push_back(p);
            on_path[p] = 1;
            flagged += report.critical[p];
            self(self);
            flagged -= report.critical[p];
            on_path[p] = 0;
            path.pop_back();
        }
    };
    walk(walk);
    std::sort(out.begin(), out.end());
    return out;
}

void write_criticality_csv(std::ostream& out, const CriticalityReport& report) {
    out << "node,label";
    for (auto m : kAllMetrics) out << ',' << to_string(m);
    for (auto m : kAllMetrics) out << ",norm_" << to_string(m);
    out << ",aggregated,critical\n";
    for (std::size_t v = 0; v < report.size(); ++v) {
        out << v << ',' << csv_field(report.labels[v]);
        for (const auto& col : report.raw) out << ',' << number(col[v]);
        for (const auto& col : report.normalized) out << ',' << number(col[v]);
        out << ',' << number(report.aggregated[v]) << ',' << int{report.critical[v]} << '\n';
    }
}

void write_criticality_summary(std::ostream& out, const CriticalityReport& report, std::size_t top_k) {
    out << "nodes: " << report.size() << '\n';
    out << "threshold: " << number(report.threshold) << " (strict >)\n";
    out << "critical: " << report.num_critical() << '\n';
    out << "betweenness: directed, unnormalized, endpoints excluded\n";
    out << "closeness: directed, Wasserman-Faust corrected\n";
    out << "triangle_count: undirected simple projection\n";
    out << "normalization: min-max onto [0, 10], constant metric maps to 0\n";
    out << "correlation: pearson over raw metrics\n";
    if (report.size() > 0) {
        const EntityId top = report.top_node();
        out << "top_node: " << report.labels[top] << " (" << fixed(report.aggregated[top], 4) << ")\n";
    }

    auto top_by = [&](const std::vector<double>& values, std::string_view name) {
        std::vector<std::size_t> idx(values.size());
        std::iota(idx.begin(), idx.end(), 0);
        std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return values[a] > values[b]; });
        out << "\n[top " << std::min(top_k, idx.size()) << " by " << name << "]\n";
        for (std::size_t i = 0; i < std::min(top_k, idx.size()); ++i)
            out << report.labels[idx[i]] << '\t' << fixed(values[idx[i]], 6) << '\n';
    };
    top_by(report.aggregated, "aggregated");
    for (std::size_t m = 0; m < kAllMetrics.size(); ++m) top_by(report.raw[m], to_string(kAllMetrics[m]));

    out << "\n[correlation]\n";
    if (!report.correlation) {
        out << "undefined (fewer than two nodes)\n";
        return;
    }
    out << std::string(16, ' ');
    for (auto m : kAllMetrics) {
        std::string name(to_string(m));
        out << name << std::string(name.size() < 16 ? 16 - name.size() : 1, ' ');
    }
    out << '\n';
    for (std::size_t a = 0; a < kAllMetrics.size(); ++a) {
        std::string name(to_string(kAllMetrics[a]));
        out << name << std::string(16 - name.size(), ' ');
        for (std::size_t b = 0; b < kAllMetrics.size(); ++b) {
            std::string cell = fixed((*report.correlation)[a][b], 4);
            out << cell << std::string(16 - cell.size(), ' ');
        }
        out << '\n';
    }
}

std::vector<CriticalityRow> read_criticality_csv(std::istream& in) {
    std::string line;
    std::size_t line_no = 0;
    std::vector<CriticalityRow> rows;
    std::size_t label_col = 0, aggregated_col = 0, critical_col = 0;
    while (std::getline(in, line)) {
        ++line_no;
        auto text = detail::chomp(line);
        if (text.empty()) continue;
        auto fields = parse_csv_line(text, line_no);
        if (line_no == 1) {
            auto col = [&](std::string_view name) {
                auto it = std::find(fields.begin(), fields.end(), name);
                if (it == fields.end())
                    throw ParseError("line 1: criticality header lacks column '" + std::string(name) + "'", 1);
                return static_cast<std::size_t>(it - fields.begin());
            };
            label_col = col("label");
            aggregated_col = col("aggregated");
            critical_col = col("critical");
            continue;
        }
        const std::size_t needed = std::max({label_col, aggregated_col, critical_col}) + 1;
        if (fields.size() < needed)
            throw ParseError("line " + std::to_string(line_no) + ": expected at least " + std::to_string(needed) +
                                 " fields",
                             line_no);
        CriticalityRow row;
        row.label = fields[label_col];
        const auto& agg = fields[aggregated_col];
        auto [ptr, ec] = std::from_chars(agg.data(), agg.data() + agg.size(), row.aggregated);
        if (ec != std::errc{} || ptr != agg.data() + agg.size())
            throw ParseError("line " + std::to_string(line_no) + ": bad aggregated score '" + agg + "'", line_no);
        const auto& flag = fields[critical_col];
        if (flag != "0" && flag != "1")
            throw ParseError("line " + std::to_string(line_no) + ": bad critical flag '" + flag + "'", line_no);
        row.critical = flag == "1";
        rows.push_back(std::move(row));
    }
    if (line_no == 0) throw ParseError("empty criticality file", 0);
    return rows;
}

std::vector<CriticalityRow> load_criticality_csv(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open " + path.string());
    return read_criticality_csv(in);
}

}  // namespace chainlens
