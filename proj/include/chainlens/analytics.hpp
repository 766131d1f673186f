#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "chainlens/graph.hpp"

namespace chainlens {

// Supplier entities and supplies_to triples only, renumbered densely.
Graph supplier_projection(const Graph& graph);

struct DegreeCounts {
    std::vector<std::uint64_t> in;
    std::vector<std::uint64_t> out;
};

// Triple counts per direction; a self-loop counts once in each.
DegreeCounts degree_centrality(const Graph& graph);

// Unnormalized directed betweenness (Brandes), endpoints excluded. Parallel
// triples between the same pair count as one edge. Sources are processed in
// fixed blocks and reduced in id order, so the result does not depend on
// `threads`.
std::vector<double> betweenness(const Graph& graph, unsigned threads = 1);

// Wasserman-Faust closeness over out-reachable sets:
// (r / s) * (r / (n - 1)), 0 when nothing is reachable.
std::vector<double> closeness(const Graph& graph, unsigned threads = 1);

// Triangles per node in the undirected simple projection.
std::vector<std::uint64_t> triangle_count(const Graph& graph);

// Min-max scaling onto [lo, hi]; constant input maps to lo.
std::vector<double> normalize(const std::vector<double>& values, double lo = 0.0, double hi = 10.0);

enum class Metric : std::uint8_t { in_degree, out_degree, betweenness, closeness, triangle_count };
inline constexpr std::array<Metric, 5> kAllMetrics = {Metric::in_degree, Metric::out_degree, Metric::betweenness,
                                                      Metric::closeness, Metric::triangle_count};
std::string_view to_string(Metric m);

using CorrelationMatrix = std::array<std::array<double, kAllMetrics.size()>, kAllMetrics.size()>;

// Pearson correlation between the columns of `columns`. A constant column
// correlates 0 with the others and 1 with itself. Throws DegenerateGraph for
// fewer than two rows.
CorrelationMatrix correlation_matrix(const std::array<std::vector<double>, kAllMetrics.size()>& columns);

struct CriticalityReport {
    std::vector<std::string> labels;  // by node id
    std::array<std::vector<double>, kAllMetrics.size()> raw;
    std::array<std::vector<double>, kAllMetrics.size()> normalized;
    std::vector<double> aggregated;
    std::vector<std::uint8_t> critical;  // aggregated > threshold
    double threshold = 10.0;
    std::optional<CorrelationMatrix> correlation;  // absent for fewer than two nodes

    std::size_t size() const { return labels.size(); }
    std::size_t num_critical() const;
    // Node with the highest aggregated score (lowest id on ties).
    EntityId top_node() const;
};

// Expects the supplier projection (not enforced).
CriticalityReport criticality(const Graph& graph, double threshold = 10.0, unsigned threads = 1);

struct SoleScope {
    EntityId scope = 0;
    EntityId supplier = 0;
    friend bool operator==(const SoleScope&, const SoleScope&) = default;
};

// Business scopes with exactly one related supplier, in scope id order.
std::vector<SoleScope> sole_supplier_scopes(const Graph& graph);

// Simple supplies_to paths ending at `hub` (default: the report's top node)
// with at most `max_edges` edges that contain a critical node other than the
// hub. Each path lists ids upstream first; the list is sorted.
std::vector<std::vector<EntityId>> critical_paths(const Graph& graph, const CriticalityReport& report,
                                                  std::size_t max_edges = 3,
                                                  std::optional<EntityId> hub = std::nullopt);

// node,label,<5 raw>,<5 normalized>,aggregated,critical
void write_criticality_csv(std::ostream& out, const CriticalityReport& report);
// Threshold, method notes, top-k per metric and the correlation matrix.
void write_criticality_summary(std::ostream& out, const CriticalityReport& report, std::size_t top_k = 10);

// What the exporter needs back from a criticality CSV.
struct CriticalityRow {
    std::string label;
    double aggregated = 0.0;
    bool critical = false;
};
std::vector<CriticalityRow> read_criticality_csv(std::istream& in);
std::vector<CriticalityRow> load_criticality_csv(const std::filesystem::path& path);

}  // namespace chainlens
