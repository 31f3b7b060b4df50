// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The kgrerank Authors

#include "kgrerank/graph.hpp"

#include <algorithm>
#include <array>
#include <utility>

#include <fmt/format.h>

#include "kgrerank/error.hpp"

namespace kgrerank {
namespace {

constexpr std::array<std::pair<EntityKind::Tag, std::string_view>, 8> kKindNames{{
    {EntityKind::Tag::Track, "Track"},
    {EntityKind::Tag::Artist, "Artist"},
    {EntityKind::Tag::Genre, "Genre"},
    {EntityKind::Tag::Movie, "Movie"},
    {EntityKind::Tag::TvShow, "TvShow"},
    {EntityKind::Tag::Person, "Person"},
    {EntityKind::Tag::Country, "Country"},
    {EntityKind::Tag::Rating, "Rating"},
}};

template <typename T>
bool sorted_contains(const std::vector<T>& v, T x) {
    return std::binary_search(v.begin(), v.end(), x);
}

template <typename T>
void sort_unique(std::vector<T>& v) {
    std::sort(v.begin(), v.end());
    v.erase(std::unique(v.begin(), v.end()), v.end());
}

}  // namespace

EntityKind EntityKind::parse(std::string_view name) {
    for (const auto& [tag, text] : kKindNames) {
        if (text == name) return EntityKind(tag);
    }
    return other(std::string(name));
}

std::string EntityKind::name() const {
    for (const auto& [tag, text] : kKindNames) {
        if (tag == tag_) return std::string(text);
    }
    return label_.empty() ? std::string("Other") : label_;
}

// ---------------------------------------------------------------------------
// CatalogGraph / CatalogBuilder

std::optional<NodeIndex> CatalogGraph::find(std::string_view id) const {
    auto it = index_.find(std::string(id));
    if (it == index_.end()) return std::nullopt;
    return it->second;
}

NodeIndex CatalogGraph::index_of(std::string_view id) const {
    if (auto n = find(id)) return *n;
    throw NotFoundError(fmt::format("entity '{}' is not in the catalog", id));
}

NodeIndex CatalogBuilder::add_node(const EntityRef& ref) {
    if (ref.id.empty()) throw Error("entity id must not be empty");
    auto& g = graph_;
    if (auto it = g.index_.find(ref.id); it != g.index_.end()) {
        Node& existing = g.nodes_[it->second];
        if (!(existing.kind == ref.kind)) {
            throw Error(fmt::format("entity '{}' declared as both {} and {}", ref.id, existing.kind.name(),
                                    ref.kind.name()));
        }
        if (existing.label.empty()) existing.label = ref.label;
        return it->second;
    }
    const auto n = static_cast<NodeIndex>(g.nodes_.size());
    g.nodes_.push_back(Node{ref.id, ref.kind, ref.label, {}});
    g.index_.emplace(ref.id, n);
    g.out_.emplace_back();
    g.in_.emplace_back();
    return n;
}

bool CatalogBuilder::add_edge(std::string_view source, std::string_view predicate, std::string_view target) {
    const NodeIndex s = graph_.index_of(source);
    const NodeIndex t = graph_.index_of(target);
    EdgeKey key{s, t, std::string(predicate)};
    if (edge_keys_.contains(key)) return false;
    const auto e = static_cast<EdgeIndex>(graph_.edges_.size());
    graph_.edges_.push_back(Edge{s, t, key.predicate});
    graph_.out_[s].push_back(e);
    graph_.in_[t].push_back(e);
    edge_keys_.emplace(std::move(key), e);
    return true;
}

void CatalogBuilder::set_attribute(std::string_view id, std::string key, std::string value) {
    graph_.nodes_[graph_.index_of(id)].attributes[std::move(key)] = std::move(value);
}

CatalogGraph CatalogBuilder::build() && {
    CatalogGraph g = std::move(graph_);
    edge_keys_.clear();
    const std::size_t n = g.nodes_.size();
    g.adjacent_.assign(n, {});
    for (const Edge& e : g.edges_) {
        if (e.source == e.target) continue;
        g.adjacent_[e.source].push_back(e.target);
        g.adjacent_[e.target].push_back(e.source);
    }
    for (auto& adj : g.adjacent_) sort_unique(adj);
    g.recommendable_.clear();
    for (NodeIndex i = 0; i < n; ++i) {
        if (g.nodes_[i].kind.recommendable()) g.recommendable_.push_back(i);
    }
    return g;
}

CatalogGraph build_catalog(std::span<const Triple> triples, std::span<const EntityRef> extra_nodes) {
    CatalogBuilder builder;
    for (const EntityRef& ref : extra_nodes) builder.add_node(ref);
    std::size_t record = 0;
    for (const Triple& t : triples) {
        ++record;
        if (t.source.id.empty() || t.target.id.empty()) {
            throw ParseError("triples", record,
                             fmt::format("missing endpoint in triple ('{}' {} '{}')", t.source.id, t.predicate,
                                         t.target.id));
        }
        if (t.predicate.empty()) {
            throw ParseError("triples", record, fmt::format("missing predicate between '{}' and '{}'",
                                                             t.source.id, t.target.id));
        }
        builder.add_node(t.source);
        builder.add_node(t.target);
        builder.add_edge(t.source.id, t.predicate, t.target.id);
    }
    return std::move(builder).build();
}

// ---------------------------------------------------------------------------
// Profile subgraphs

bool ProfileSubgraph::contains_node(NodeIndex n) const { return sorted_contains(nodes, n); }
bool ProfileSubgraph::contains_edge(EdgeIndex e) const { return sorted_contains(edges, e); }

std::uint64_t structural_hash(const ProfileSubgraph& sg) {
    // FNV-1a over the three index vectors with separators.
    std::uint64_t h = 14695981039346656037ull;
    auto mix = [&h](std::uint64_t v) {
        for (int i = 0; i < 8; ++i) {
            h ^= (v >> (8 * i)) & 0xffu;
            h *= 1099511628211ull;
        }
    };
    for (auto n : sg.nodes) mix(n);
    mix(~0ull);
    for (auto e : sg.edges) mix(e);
    mix(~0ull);
    for (auto n : sg.history) mix(n);
    return h;
}

ProfileSubgraph induce_profile_subgraph(const CatalogGraph& catalog, std::span<const EntityId> history,
                                        std::string user) {
    ProfileSubgraph sg;
    sg.user = std::move(user);
    for (const EntityId& id : history) {
        const auto n = catalog.find(id);
        if (!n) throw NotFoundError(fmt::format("history item '{}' is not in the catalog", id));
        if (!catalog.is_recommendable(*n)) {
            throw NotFoundError(fmt::format("history item '{}' is not a recommendable item", id));
        }
        sg.history.push_back(*n);
    }
    sort_unique(sg.history);

    for (NodeIndex h : sg.history) {
        sg.nodes.push_back(h);
        const auto adj = catalog.neighbors(h);
        sg.nodes.insert(sg.nodes.end(), adj.begin(), adj.end());
    }
    sort_unique(sg.nodes);

    for (NodeIndex n : sg.nodes) {
        for (EdgeIndex e : catalog.out_edges(n)) {
            if (sg.contains_node(catalog.edge(e).target)) sg.edges.push_back(e);
        }
    }
    sort_unique(sg.edges);
    return sg;
}

Neighborhood closed_neighborhood(const CatalogGraph& catalog, std::string_view item) {
    const NodeIndex c = catalog.index_of(item);
    Neighborhood nb;
    nb.nodes.push_back(c);
    const auto adj = catalog.neighbors(c);
    nb.nodes.insert(nb.nodes.end(), adj.begin(), adj.end());
    sort_unique(nb.nodes);
    const auto out = catalog.out_edges(c);
    const auto in = catalog.in_edges(c);
    nb.edges.assign(out.begin(), out.end());
    nb.edges.insert(nb.edges.end(), in.begin(), in.end());
    sort_unique(nb.edges);
    return nb;
}

ProfileSubgraph extend_subgraph(const ProfileSubgraph& sg, const CatalogGraph& catalog, std::string_view item,
                                NeighborhoodMode mode) {
    const NodeIndex c = catalog.index_of(item);
    if (!catalog.is_recommendable(c)) {
        throw NotFoundError(fmt::format("candidate '{}' is not a recommendable item", item));
    }

    ProfileSubgraph out = sg;
    // Nodes whose incident edges must be examined: the item plus every node
    // that is new to the subgraph.
    std::vector<NodeIndex> touched{c};
    if (mode == NeighborhoodMode::ClosedNeighborhood) {
        for (NodeIndex n : catalog.neighbors(c)) {
            if (!sg.contains_node(n)) touched.push_back(n);
        }
    }
    out.nodes.insert(out.nodes.end(), touched.begin(), touched.end());
    sort_unique(out.nodes);

    auto consider = [&](EdgeIndex e) {
        const Edge& edge = catalog.edge(e);
        if (out.contains_node(edge.source) && out.contains_node(edge.target)) out.edges.push_back(e);
    };
    for (NodeIndex n : touched) {
        for (EdgeIndex e : catalog.out_edges(n)) consider(e);
        for (EdgeIndex e : catalog.in_edges(n)) consider(e);
    }
    sort_unique(out.edges);
    return out;
}

// ---------------------------------------------------------------------------
// Pruning

CatalogGraph prune_graph(const CatalogGraph& g, const PruneRules& rules) {
    auto dropped = [&](NodeIndex n) {
        const EntityKind& kind = g.node(n).kind;
        if (kind.tag() == EntityKind::Tag::Other) {
            const std::string& label = kind.other_label();
            if (rules.drop_label_entities && label == "Label") return true;
            if (rules.drop_schema && (label == "Class" || label == "Property")) return true;
        }
        return rules.drop_degree_one && g.degree(n) == 1;
    };

    CatalogBuilder builder;
    std::vector<bool> keep(g.node_count());
    for (NodeIndex n = 0; n < g.node_count(); ++n) {
        keep[n] = !dropped(n);
        if (!keep[n]) continue;
        const Node& node = g.node(n);
        builder.add_node(EntityRef{node.id, node.kind, node.label});
        for (const auto& [key, value] : node.attributes) builder.set_attribute(node.id, key, value);
    }
    for (const Edge& e : g.edges()) {
        if (keep[e.source] && keep[e.target]) {
            builder.add_edge(g.node(e.source).id, e.predicate, g.node(e.target).id);
        }
    }
    return std::move(builder).build();
}

}  // namespace kgrerank
