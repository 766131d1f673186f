#include "chainlens/schema.hpp"

#include <fstream>
#include <sstream>

#include "chainlens/error.hpp"
#include "text_util.hpp"

namespace chainlens {

std::vector<EntityType> TypeSet::members() const {
    std::vector<EntityType> out;
    for (auto t : kAllEntityTypes)
        if (contains(t)) out.push_back(t);
    return out;
}

void Schema::check_complete() const {
    for (auto r : kAllRelationTypes) {
        const auto& sig = signature(r);
        if (sig.source.empty() || sig.target.empty())
            throw ConfigError("schema: relation '" + std::string(to_string(r)) +
                              "' has an empty source or target type set");
    }
}

const Schema& default_schema() {
    static const Schema schema = [] {
        using E = EntityType;
        using R = RelationType;
        Schema s;
        s.set(R::supplies_to, {{E::Supplier, E::Smelter}, {E::Supplier}});
        s.set(R::related_to, {{E::Supplier}, {E::BusinessScope}});
        s.set(R::belongs_to, {{E::Supplier}, {E::Supplier}});
        s.set(R::located_in, {{E::Supplier, E::Smelter}, {E::Country}});
        s.set(R::includes, {{E::Component}, {E::Substance}});
        s.set(R::produces, {{E::Supplier}, {E::Component}});
        s.set(R::produced_in, {{E::Substance}, {E::Country}});
        s.set(R::same_as, {{E::ManufacturerPart}, {E::SiemensPart}});
        s.set(R::manufactured_by, {{E::ManufacturerPart}, {E::Supplier}});
        s.set(R::contains, {{E::Component}, {E::Component}});
        s.set(R::refines, {{E::Smelter}, {E::Substance}});
        return s;
    }();
    return schema;
}

namespace {

TypeSet parse_type_list(std::string_view field, std::size_t line_no) {
    TypeSet set;
    for (auto name : detail::split(field, ',')) {
        name = detail::trim(name);
        auto t = parse_entity_type(name);
        if (!t) throw ParseError("unknown entity type '" + std::string(name) + "'", line_no);
        set.insert(*t);
    }
    return set;
}

}  // namespace

Schema parse_schema(std::istream& in) {
    Schema schema;
    std::array<bool, kNumRelationTypes> seen{};
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        auto view = detail::trim(line);
        if (view.empty() || view.front() == '#') continue;
        auto fields = detail::split(view, '\t');
        if (fields.size() != 3)
            throw ParseError("expected 3 tab-separated fields, got " +
                                 std::to_string(fields.size()),
                             line_no);
        auto rel = parse_relation_type(detail::trim(fields[0]));
        if (!rel)
            throw ParseError("unknown relation type '" + std::string(fields[0]) + "'", line_no);
        if (seen[index_of(*rel)])
            throw ParseError("relation '" + std::string(fields[0]) + "' declared twice", line_no);
        seen[index_of(*rel)] = true;
        schema.set(*rel, {parse_type_list(fields[1], line_no), parse_type_list(fields[2], line_no)});
    }
    schema.check_complete();
    return schema;
}

Schema load_schema(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open schema file " + path.string());
    return parse_schema(in);
}

std::string format_schema(const Schema& schema) {
    std::ostringstream out;
    out << "# relation\tsource_types\ttarget_types\n";
    auto join = [](const TypeSet& set) {
        std::string s;
        for (auto t : set.members()) {
            if (!s.empty()) s += ',';
            s += to_string(t);
        }
        return s;
    };
    for (auto r : kAllRelationTypes) {
        const auto& sig = schema.signature(r);
        out << to_string(r) << '\t' << join(sig.source) << '\t' << join(sig.target) << '\n';
    }
    return out.str();
}

}  // namespace chainlens
