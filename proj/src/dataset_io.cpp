#include <algorithm>
#include <fstream>

#include "chainlens/dataset.hpp"
#include "chainlens/error.hpp"
#include "text_util.hpp"

namespace chainlens {

namespace {

void read_rows(std::istream& in, Graph& graph, const Schema& schema, std::vector<Triple>* rows) {
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        auto view = detail::chomp(line);
        if (view.empty() || view.front() == '#') continue;
        auto fields = detail::split(view, '\t');
        if (fields.size() != 5)
            throw ParseError("line " + std::to_string(line_no) + ": expected 5 tab-separated fields, got " +
                                 std::to_string(fields.size()),
                             line_no);
        auto st = parse_entity_type(fields[1]);
        auto pred = parse_relation_type(fields[2]);
        auto ot = parse_entity_type(fields[4]);
        if (!st || !ot)
            throw ParseError("line " + std::to_string(line_no) + ": unknown entity type", line_no);
        if (!pred)
            throw ParseError("line " + std::to_string(line_no) + ": unknown relation type '" +
                                 std::string(fields[2]) + "'",
                             line_no);
        if (fields[0].empty() || fields[3].empty())
            throw ParseError("line " + std::to_string(line_no) + ": empty entity label", line_no);

        // Check before inserting entities so a rejected line leaves no orphans behind.
        if (!schema.allows(*st, *pred, *ot)) {
            throw SchemaViolation("line " + std::to_string(line_no) + ": (" + std::string(fields[1]) +
                                  ", " + std::string(fields[2]) + ", " + std::string(fields[4]) +
                                  ") violates the schema: " + std::string(view));
        }
        auto resolve = [&](std::string_view label, EntityType t) {
            if (auto id = graph.find(label, t)) return *id;
            return graph.add_entity(std::string(label), t);
        };
        auto s = resolve(fields[0], *st);
        auto o = resolve(fields[3], *ot);
        Triple t{s, *pred, o};
        graph.add_triple(t, schema);
        if (rows) rows->push_back(t);
    }
}

void check_label(const std::string& label) {
    if (label.find_first_of("\t\n\r") != std::string::npos)
        throw Error("entity label contains a tab or newline: '" + label + "'");
}

}  // namespace

void read_triples(std::istream& in, Graph& graph, const Schema& schema) {
    read_rows(in, graph, schema, nullptr);
}

Graph load_triples(const std::filesystem::path& path, const Schema& schema) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open triple file " + path.string());
    Graph g;
    read_triples(in, g, schema);
    return g;
}

namespace {

void write_rows(std::ostream& out, const Graph& graph, std::span<const Triple> triples) {
    std::vector<std::string> rows;
    rows.reserve(triples.size());
    for (const auto& t : triples) {
        const auto& s = graph.entity(t.subject);
        const auto& o = graph.entity(t.object);
        check_label(s.label);
        check_label(o.label);
        std::string row;
        row.append(s.label).append("\t").append(to_string(s.type)).append("\t");
        row.append(to_string(t.predicate)).append("\t");
        row.append(o.label).append("\t").append(to_string(o.type));
        rows.push_back(std::move(row));
    }
    std::sort(rows.begin(), rows.end());
    out << kTripleFileHeader << '\n';
    for (const auto& r : rows) out << r << '\n';
}

void write_file(const std::filesystem::path& path, const Graph& graph, std::span<const Triple> triples) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot write " + path.string());
    write_rows(out, graph, triples);
    if (!out) throw Error("write failed: " + path.string());
}

}  // namespace

void write_triples(std::ostream& out, const Graph& graph) {
    write_rows(out, graph, graph.triples());
}

void export_triples(const Graph& graph, const std::filesystem::path& path) {
    write_file(path, graph, graph.triples());
}

void write_split(const Graph& graph, const SplitResult& split, const std::filesystem::path& dir) {
    std::filesystem::create_directories(dir);
    write_file(dir / "train.tsv", graph, split.train);
    write_file(dir / "valid.tsv", graph, split.validation);
    write_file(dir / "test.tsv", graph, split.test);
}

LoadedSplit load_split(const std::filesystem::path& dir, const Schema& schema) {
    LoadedSplit out;
    auto read_part = [&](const char* name, std::vector<Triple>& rows) {
        std::ifstream in(dir / name);
        if (!in) throw Error("cannot open " + (dir / name).string());
        read_rows(in, out.graph, schema, &rows);
    };
    read_part("train.tsv", out.split.train);
    read_part("valid.tsv", out.split.validation);
    read_part("test.tsv", out.split.test);
    return out;
}

}  // namespace chainlens
