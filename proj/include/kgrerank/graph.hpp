// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The kgrerank Authors

#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace kgrerank {

using EntityId = std::string;
using NodeIndex = std::uint32_t;
using EdgeIndex = std::uint32_t;

/// Type of a knowledge-graph entity. `Other` carries a free-form label
/// (e.g. "Class", "Property", "Label" for schema and label entities).
class EntityKind {
public:
    enum class Tag : std::uint8_t { Track, Artist, Genre, Movie, TvShow, Person, Country, Rating, Other };

    EntityKind() = default;
    EntityKind(Tag tag) : tag_(tag) {}  // NOLINT(google-explicit-constructor)

    static EntityKind other(std::string label) {
        EntityKind k(Tag::Other);
        k.label_ = std::move(label);
        return k;
    }

    /// Inverse of `name()`. Unknown names become `Other(name)`.
    static EntityKind parse(std::string_view name);

    Tag tag() const noexcept { return tag_; }
    const std::string& other_label() const noexcept { return label_; }

    /// Tracks, movies and TV shows are the only items a recommender may emit.
    bool recommendable() const noexcept {
        return tag_ == Tag::Track || tag_ == Tag::Movie || tag_ == Tag::TvShow;
    }

    std::string name() const;

    friend bool operator==(const EntityKind&, const EntityKind&) = default;

private:
    Tag tag_ = Tag::Other;
    std::string label_;
};

/// An entity mentioned in ingestion input: id, kind and a display label.
struct EntityRef {
    EntityId id;
    EntityKind kind;
    std::string label;
};

struct Triple {
    EntityRef source;
    std::string predicate;
    EntityRef target;
};

struct Node {
    EntityId id;
    EntityKind kind;
    std::string label;
    // Ingestion metadata only; graph algorithms never look at it.
    std::map<std::string, std::string> attributes;
};

struct Edge {
    NodeIndex source;
    NodeIndex target;
    std::string predicate;
};

/// Directed, typed, labeled multigraph of an item catalog. Immutable once
/// built, so a single instance can be shared by concurrent readers.
///
/// Parallel edges between the same ordered pair are kept only when their
/// predicates differ.
class CatalogGraph {
public:
    CatalogGraph() = default;

    std::size_t node_count() const noexcept { return nodes_.size(); }
    std::size_t edge_count() const noexcept { return edges_.size(); }

    std::span<const Node> nodes() const noexcept { return nodes_; }
    std::span<const Edge> edges() const noexcept { return edges_; }
    const Node& node(NodeIndex n) const { return nodes_.at(n); }
    const Edge& edge(EdgeIndex e) const { return edges_.at(e); }

    std::optional<NodeIndex> find(std::string_view id) const;
    /// Throws NotFoundError naming `id`.
    NodeIndex index_of(std::string_view id) const;

    std::span<const EdgeIndex> out_edges(NodeIndex n) const { return out_.at(n); }
    std::span<const EdgeIndex> in_edges(NodeIndex n) const { return in_.at(n); }
    /// Distinct adjacent nodes in either direction, sorted, excluding `n` itself.
    std::span<const NodeIndex> neighbors(NodeIndex n) const { return adjacent_.at(n); }
    /// Number of incident edges counted with multiplicity (a self-loop counts twice).
    std::size_t degree(NodeIndex n) const { return out_.at(n).size() + in_.at(n).size(); }

    bool is_recommendable(NodeIndex n) const { return nodes_.at(n).kind.recommendable(); }
    /// Sorted indices of all recommendable nodes.
    std::span<const NodeIndex> recommendable() const noexcept { return recommendable_; }

private:
    friend class CatalogBuilder;

    std::vector<Node> nodes_;
    std::vector<Edge> edges_;
    std::unordered_map<std::string, NodeIndex> index_;
    std::vector<std::vector<EdgeIndex>> out_;
    std::vector<std::vector<EdgeIndex>> in_;
    std::vector<std::vector<NodeIndex>> adjacent_;
    std::vector<NodeIndex> recommendable_;
};

/// Incremental construction of a CatalogGraph.
class CatalogBuilder {
public:
    /// Adds `ref` unless a node with the same id exists. A repeated id with a
    /// different kind throws. An empty existing label is filled from `ref`.
    NodeIndex add_node(const EntityRef& ref);
    /// Returns false if the (source, predicate, target) triple was already present.
    /// Both endpoints must have been added before.
    bool add_edge(std::string_view source, std::string_view predicate, std::string_view target);
    void set_attribute(std::string_view id, std::string key, std::string value);

    std::size_t node_count() const noexcept { return graph_.nodes_.size(); }
    std::size_t edge_count() const noexcept { return graph_.edges_.size(); }

    CatalogGraph build() &&;

private:
    struct EdgeKey {
        NodeIndex source;
        NodeIndex target;
        std::string predicate;
        friend auto operator<=>(const EdgeKey&, const EdgeKey&) = default;
    };

    CatalogGraph graph_;
    std::map<EdgeKey, EdgeIndex> edge_keys_;
};

/// Builds a catalog from kind-annotated triples. `extra_nodes` declares
/// entities that may have no edges at all (e.g. an unconnected title).
/// Duplicate triples are collapsed. Throws ParseError (record number as the
/// line) for a triple with an empty endpoint or predicate.
CatalogGraph build_catalog(std::span<const Triple> triples, std::span<const EntityRef> extra_nodes = {});

/// A user's history embedded in the catalog: history items, their direct
/// neighbors, and all catalog edges among those nodes. Indices refer to the
/// catalog the subgraph was induced from. All vectors are sorted and unique.
struct ProfileSubgraph {
    std::string user;
    std::vector<NodeIndex> nodes;
    std::vector<EdgeIndex> edges;
    std::vector<NodeIndex> history;

    bool contains_node(NodeIndex n) const;
    bool contains_edge(EdgeIndex e) const;

    friend bool operator==(const ProfileSubgraph&, const ProfileSubgraph&) = default;
};

/// Order-sensitive hash of the node, edge and history sets.
std::uint64_t structural_hash(const ProfileSubgraph& sg);

/// Throws NotFoundError for a history item that is unknown or not recommendable.
ProfileSubgraph induce_profile_subgraph(const CatalogGraph& catalog, std::span<const EntityId> history,
                                        std::string user = {});

struct Neighborhood {
    std::vector<NodeIndex> nodes;  // sorted, includes the center
    std::vector<EdgeIndex> edges;  // sorted, every edge incident to the center
};

Neighborhood closed_neighborhood(const CatalogGraph& catalog, std::string_view item);

enum class NeighborhoodMode {
    /// Add the item and only its edges to nodes already in the subgraph.
    EdgesToExisting,
    /// Add the item's full closed neighborhood plus every catalog edge that
    /// connects a newly added node to the extended node set.
    ClosedNeighborhood,
};

/// Returns a new subgraph with `item` added; `sg` is untouched. If the item
/// is already present the result is `sg` plus any missing incident edges.
ProfileSubgraph extend_subgraph(const ProfileSubgraph& sg, const CatalogGraph& catalog, std::string_view item,
                                NeighborhoodMode mode = NeighborhoodMode::ClosedNeighborhood);

struct PruneRules {
    bool drop_label_entities = false;  // kind Other("Label")
    bool drop_degree_one = false;
    bool drop_schema = false;  // kind Other("Class") and Other("Property")
};

/// Pruned copy of `g`. Every rule is judged against `g` itself, so degree-1
/// removal is a single pass and rule order does not matter.
CatalogGraph prune_graph(const CatalogGraph& g, const PruneRules& rules);

}  // namespace kgrerank
