#include "chainlens/export.hpp"

#include <algorithm>
#include <cstdio>
#include <unordered_map>

#include <json.hpp>

#include "chainlens/error.hpp"

namespace chainlens {

namespace {

std::string score_text(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.6f", v);
    return buf;
}

std::string dot_quote(std::string_view s) {
    std::string out = "\"";
    for (char c : s) {
        if (c == '"' || c == '\\') out += '\\';
        out += c;
    }
    return out + "\"";
}

std::string xml_escape(std::string_view s) {
    std::string out;
    for (char c : s) {
        switch (c) {
            case '&': out += "&amp;"; break;
            case '<': out += "&lt;"; break;
            case '>': out += "&gt;"; break;
            case '"': out += "&quot;"; break;
            case '\'': out += "&apos;"; break;
            default: out += c;
        }
    }
    return out;
}

std::string node_key(EntityId id) { return "n" + std::to_string(id); }

}  // namespace

std::string_view to_string(ExportFormat f) {
    switch (f) {
        case ExportFormat::dot: return "dot";
        case ExportFormat::graphml: return "graphml";
        case ExportFormat::json: return "json";
    }
    return "?";
}

std::optional<ExportFormat> parse_export_format(std::string_view s) {
    for (auto f : {ExportFormat::dot, ExportFormat::graphml, ExportFormat::json})
        if (s == to_string(f)) return f;
    return std::nullopt;
}

AnnotatedGraph annotate(const Graph& graph, const std::vector<CriticalityRow>& report) {
    std::unordered_map<std::string, const CriticalityRow*> by_label;
    for (const auto& row : report)
        if (!by_label.emplace(row.label, &row).second)
            throw ReportMismatch("criticality report lists '" + row.label + "' twice");

    AnnotatedGraph g;
    std::vector<std::size_t> scope_size(graph.num_entities(), 0);
    for (std::size_t idx : graph.triples_with(RelationType::related_to)) {
        const auto& t = graph.triples()[idx];
        if (graph.type_of(t.subject) == EntityType::Supplier) ++scope_size[t.object];
    }

    std::vector<std::uint8_t> kept(graph.num_entities(), 0);
    std::size_t suppliers = 0;
    for (const auto& e : graph.entities()) {
        ExportNode node{e.id, e.label, e.type, "", 1, std::nullopt};
        if (e.type == EntityType::Supplier) {
            auto it = by_label.find(e.label);
            if (it == by_label.end()) throw ReportMismatch("supplier '" + e.label + "' is missing from the report");
            node.color = it->second->critical ? "red" : "yellow";
            node.score = it->second->aggregated;
            ++suppliers;
        } else if (e.type == EntityType::BusinessScope) {
            node.color = "purple";
            node.size = scope_size[e.id];
        } else {
            continue;
        }
        kept[e.id] = 1;
        g.nodes.push_back(std::move(node));
    }
    if (suppliers != report.size())
        throw ReportMismatch("report lists " + std::to_string(report.size()) + " nodes but the graph has " +
                             std::to_string(suppliers) + " suppliers");

    for (const auto& t : graph.triples()) {
        if (!kept[t.subject] || !kept[t.object]) continue;
        if (t.predicate == RelationType::supplies_to)
            g.edges.push_back({t.subject, t.object, t.predicate, "orange"});
        else if (t.predicate == RelationType::related_to)
            g.edges.push_back({t.subject, t.object, t.predicate, "blue"});
    }
    std::sort(g.edges.begin(), g.edges.end(), [](const ExportEdge& a, const ExportEdge& b) {
        return std::tie(a.source, a.target, a.relation) < std::tie(b.source, b.target, b.relation);
    });
    return g;
}

void write_dot(std::ostream& out, const AnnotatedGraph& g) {
    out << "digraph supply_chain {\n";
    out << "  node [style=filled];\n";
    for (const auto& n : g.nodes) {
        out << "  " << node_key(n.id) << " [label=" << dot_quote(n.label) << ", type=" << dot_quote(to_string(n.type))
            << ", color=" << dot_quote(n.color) << ", fillcolor=" << dot_quote(n.color) << ", size=" << n.size;
        if (n.score) out << ", score=" << dot_quote(score_text(*n.score));
        out << "];\n";
    }
    for (const auto& e : g.edges)
        out << "  " << node_key(e.source) << " -> " << node_key(e.target)
            << " [relation=" << dot_quote(to_string(e.relation)) << ", class=" << dot_quote(e.edge_class)
            << ", color=" << dot_quote(e.edge_class) << "];\n";
    out << "}\n";
}

void write_graphml(std::ostream& out, const AnnotatedGraph& g) {
    out << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
           "<graphml xmlns=\"http://graphml.graphdrawing.org/xmlns\" "
           "xmlns:xsi=\"http://www.w3.org/2001/XMLSchema-instance\" "
           "xsi:schemaLocation=\"http://graphml.graphdrawing.org/xmlns "
           "http://graphml.graphdrawing.org/xmlns/1.0/graphml.xsd\">\n"
           "  <key id=\"label\" for=\"node\" attr.name=\"label\" attr.type=\"string\"/>\n"
           "  <key id=\"type\" for=\"node\" attr.name=\"type\" attr.type=\"string\"/>\n"
           "  <key id=\"color\" for=\"node\" attr.name=\"color\" attr.type=\"string\"/>\n"
           "  <key id=\"size\" for=\"node\" attr.name=\"size\" attr.type=\"int\"/>\n"
           "  <key id=\"score\" for=\"node\" attr.name=\"score\" attr.type=\"double\"/>\n"
           "  <key id=\"relation\" for=\"edge\" attr.name=\"relation\" attr.type=\"string\"/>\n"
           "  <key id=\"class\" for=\"edge\" attr.name=\"class\" attr.type=\"string\"/>\n"
           "  <graph id=\"supply_chain\" edgedefault=\"directed\">\n";
    for (const auto& n : g.nodes) {
        out << "    <node id=\"" << node_key(n.id) << "\">\n"
            << "      <data key=\"label\">" << xml_escape(n.label) << "</data>\n"
            << "      <data key=\"type\">" << to_string(n.type) << "</data>\n"
            << "      <data key=\"color\">" << n.color << "</data>\n"
            << "      <data key=\"size\">" << n.size << "</data>\n";
        if (n.score) out << "      <data key=\"score\">" << score_text(*n.score) << "</data>\n";
        out << "    </node>\n";
    }
    std::size_t i = 0;
    for (const auto& e : g.edges) {
        out << "    <edge id=\"e" << i++ << "\" source=\"" << node_key(e.source) << "\" target=\""
            << node_key(e.target) << "\">\n"
            << "      <data key=\"relation\">" << to_string(e.relation) << "</data>\n"
            << "      <data key=\"class\">" << e.edge_class << "</data>\n"
            << "    </edge>\n";
    }
    out << "  </graph>\n</graphml>\n";
}

void write_json(std::ostream& out, const AnnotatedGraph& g) {
    nlohmann::ordered_json doc;
    doc["nodes"] = nlohmann::ordered_json::array();
    for (const auto& n : g.nodes) {
        nlohmann::ordered_json node = {{"id", node_key(n.id)},
                                       {"label", n.label},
                                       {"type", to_string(n.type)},
                                       {"color", n.color},
                                       {"size", n.size}};
        if (n.score) node["score"] = score_text(*n.score);
        doc["nodes"].push_back(std::move(node));
    }
    doc["edges"] = nlohmann::ordered_json::array();
    for (const auto& e : g.edges)
        doc["edges"].push_back({{"source", node_key(e.source)},
                                {"target", node_key(e.target)},
                                {"relation", to_string(e.relation)},
                                {"class", e.edge_class}});
    out << doc.dump(2) << '\n';
}

void write_export(std::ostream& out, const AnnotatedGraph& g, ExportFormat format) {
    switch (format) {
        case ExportFormat::dot: write_dot(out, g); break;
        case ExportFormat::graphml: write_graphml(out, g); break;
        case ExportFormat::json: write_json(out, g); break;
    }
}

}  // namespace chainlens
