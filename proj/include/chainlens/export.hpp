#pragma once

#include <optional>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

#include "chainlens/analytics.hpp"
#include "chainlens/graph.hpp"

namespace chainlens {

enum class ExportFormat : std::uint8_t { dot, graphml, json };
std::string_view to_string(ExportFormat f);
std::optional<ExportFormat> parse_export_format(std::string_view s);

struct ExportNode {
    EntityId id = 0;  // id in the source graph
    std::string label;
    EntityType type = EntityType::Supplier;
    std::string color;  // red: critical supplier, yellow: other supplier, purple: business scope
    std::size_t size = 1;  // business scopes: number of related suppliers
    std::optional<double> score;  // suppliers only
};

struct ExportEdge {
    EntityId source = 0;
    EntityId target = 0;
    RelationType relation = RelationType::supplies_to;
    std::string edge_class;  // orange: supplies_to, blue: related_to
};

struct AnnotatedGraph {
    std::vector<ExportNode> nodes;  // id order
    std::vector<ExportEdge> edges;  // (source, target, relation) order
};

// Suppliers and business scopes of `graph` with their supplies_to and
// related_to triples, annotated from a criticality table keyed by supplier
// label. Throws ReportMismatch unless the table names exactly the graph's
// suppliers.
AnnotatedGraph annotate(const Graph& graph, const std::vector<CriticalityRow>& report);

void write_dot(std::ostream& out, const AnnotatedGraph& g);
void write_graphml(std::ostream& out, const AnnotatedGraph& g);
void write_json(std::ostream& out, const AnnotatedGraph& g);
void write_export(std::ostream& out, const AnnotatedGraph& g, ExportFormat format);

}  // namespace chainlens
