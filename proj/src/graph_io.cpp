// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The kgrerank Authors

#include "kgrerank/graph_io.hpp"

#include <algorithm>
#include <istream>
#include <ostream>
#include <tuple>
#include <vector>

#include <fmt/format.h>

#include "kgrerank/error.hpp"

namespace kgrerank {
namespace {

std::string sanitize(std::string_view s) {
    std::string out(s);
    std::replace_if(out.begin(), out.end(), [](char c) { return c == '\t' || c == '\n' || c == '\r'; }, ' ');
    return out;
}

void check_id(const std::string& id) {
    if (id.find_first_of("\t\n\r") != std::string::npos) {
        throw Error(fmt::format("entity id '{}' contains a tab or line break and cannot be exported", id));
    }
}

template <typename NodeRange>
void write_manifest_impl(std::ostream& out, const CatalogGraph& g, const NodeRange& nodes) {
    std::vector<const Node*> sorted;
    for (NodeIndex n : nodes) sorted.push_back(&g.node(n));
    std::sort(sorted.begin(), sorted.end(), [](const Node* a, const Node* b) { return a->id < b->id; });
    for (const Node* n : sorted) {
        check_id(n->id);
        out << n->id << '\t' << sanitize(n->kind.name()) << '\t' << sanitize(n->label) << '\n';
    }
}

template <typename EdgeRange>
void write_triples_impl(std::ostream& out, const CatalogGraph& g, const EdgeRange& edges) {
    using Row = std::tuple<const std::string*, const std::string*, const std::string*>;
    std::vector<Row> rows;
    for (EdgeIndex e : edges) {
        const Edge& edge = g.edge(e);
        rows.emplace_back(&g.node(edge.source).id, &edge.predicate, &g.node(edge.target).id);
    }
    std::sort(rows.begin(), rows.end(), [](const Row& a, const Row& b) {
        return std::tie(*std::get<0>(a), *std::get<1>(a), *std::get<2>(a)) <
               std::tie(*std::get<0>(b), *std::get<1>(b), *std::get<2>(b));
    });
    for (const auto& [s, p, t] : rows) {
        check_id(*s);
        check_id(*t);
        out << *s << '\t' << sanitize(*p) << '\t' << *t << '\n';
    }
}

std::vector<std::string> split_tabs(const std::string& line) {
    std::vector<std::string> fields;
    std::size_t start = 0;
    while (true) {
        const auto tab = line.find('\t', start);
        fields.push_back(line.substr(start, tab - start));
        if (tab == std::string::npos) break;
        start = tab + 1;
    }
    return fields;
}

}  // namespace

void write_triples(std::ostream& out, const CatalogGraph& g) {
    std::vector<EdgeIndex> all(g.edge_count());
    for (EdgeIndex e = 0; e < all.size(); ++e) all[e] = e;
    write_triples_impl(out, g, all);
}

void write_node_manifest(std::ostream& out, const CatalogGraph& g) {
    std::vector<NodeIndex> all(g.node_count());
    for (NodeIndex n = 0; n < all.size(); ++n) all[n] = n;
    write_manifest_impl(out, g, all);
}

void write_triples(std::ostream& out, const CatalogGraph& catalog, const ProfileSubgraph& sg) {
    write_triples_impl(out, catalog, sg.edges);
}

void write_node_manifest(std::ostream& out, const CatalogGraph& catalog, const ProfileSubgraph& sg) {
    write_manifest_impl(out, catalog, sg.nodes);
}

CatalogGraph read_graph_export(std::istream& manifest, std::istream& triples) {
    CatalogBuilder builder;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(manifest, line)) {
        ++lineno;
        if (line.empty()) continue;
        auto f = split_tabs(line);
        if (f.size() != 3 || f[0].empty()) throw ParseError("node manifest", lineno, "expected <id>\\t<kind>\\t<label>");
        builder.add_node(EntityRef{f[0], EntityKind::parse(f[1]), f[2]});
    }
    lineno = 0;
    while (std::getline(triples, line)) {
        ++lineno;
        if (line.empty()) continue;
        auto f = split_tabs(line);
        if (f.size() != 3 || f[0].empty() || f[1].empty() || f[2].empty()) {
            throw ParseError("triples", lineno, "expected <source>\\t<predicate>\\t<target>");
        }
        try {
            builder.add_edge(f[0], f[1], f[2]);
        } catch (const NotFoundError& e) {
            throw ParseError("triples", lineno, e.what());
        }
    }
    return std::move(builder).build();
}

}  // namespace kgrerank
