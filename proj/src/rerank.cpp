// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The kgrerank Authors

#include "kgrerank/rerank.hpp"

#include <algorithm>
#include <set>
#include <unordered_map>

#include <fmt/format.h>

#include "kgrerank/error.hpp"
#include "kgrerank/parallel.hpp"

namespace kgrerank {

void RecommendationList::validate() const {
    std::set<std::string_view> seen;
    for (std::size_t i = 0; i < items.size(); ++i) {
        if (!seen.insert(items[i].item).second) {
            throw Error(fmt::format("recommendation list of '{}' repeats item '{}'", user, items[i].item));
        }
        if (i > 0 && items[i].score > items[i - 1].score) {
            throw Error(fmt::format("recommendation list of '{}' is not sorted by descending score at rank {}", user,
                                    i + 1));
        }
    }
}

std::string_view to_string(SortOrder o) noexcept { return o == SortOrder::Ascending ? "asc" : "desc"; }

std::optional<SortOrder> parse_order(std::string_view name) {
    if (name == "asc" || name == "ascending") return SortOrder::Ascending;
    if (name == "desc" || name == "descending") return SortOrder::Descending;
    return std::nullopt;
}

std::string_view to_string(NeighborhoodMode m) noexcept {
    return m == NeighborhoodMode::ClosedNeighborhood ? "closed" : "existing";
}

std::optional<NeighborhoodMode> parse_mode(std::string_view name) {
    if (name == "closed") return NeighborhoodMode::ClosedNeighborhood;
    if (name == "existing") return NeighborhoodMode::EdgesToExisting;
    return std::nullopt;
}

namespace {

// Compact form of a profile that can be extended by one candidate without
// touching the profile itself. New nodes are appended after the profile's.
class ProfileOverlay {
public:
    ProfileOverlay(const CatalogGraph& catalog, const ProfileSubgraph& sg)
        : catalog_(catalog), sg_(sg), base_(compact(catalog, sg)) {}

    CompactGraph extended(NodeIndex item, NeighborhoodMode mode) const {
        std::unordered_map<NodeIndex, std::uint32_t> added;
        auto add_node = [&](NodeIndex n) {
            if (!sg_.contains_node(n) && !added.contains(n)) {
                added.emplace(n, static_cast<std::uint32_t>(base_.node_count + added.size()));
            }
        };
        add_node(item);
        if (mode == NeighborhoodMode::ClosedNeighborhood) {
            for (NodeIndex n : catalog_.neighbors(item)) add_node(n);
        }

        auto local = [&](NodeIndex n) -> std::optional<std::uint32_t> {
            auto it = std::lower_bound(sg_.nodes.begin(), sg_.nodes.end(), n);
            if (it != sg_.nodes.end() && *it == n) return static_cast<std::uint32_t>(it - sg_.nodes.begin());
            if (auto a = added.find(n); a != added.end()) return a->second;
            return std::nullopt;
        };

        std::set<EdgeIndex> new_edges;
        auto scan = [&](NodeIndex n) {
            for (auto edges : {catalog_.out_edges(n), catalog_.in_edges(n)}) {
                for (EdgeIndex e : edges) {
                    const Edge& edge = catalog_.edge(e);
                    if (local(edge.source) && local(edge.target) && !sg_.contains_edge(e)) new_edges.insert(e);
                }
            }
        };
        scan(item);
        if (mode == NeighborhoodMode::ClosedNeighborhood) {
            for (const auto& [n, idx] : added) scan(n);
        }

        CompactGraph g = base_;
        g.node_count += added.size();
        for (EdgeIndex e : new_edges) {
            const Edge& edge = catalog_.edge(e);
            g.edges.emplace_back(*local(edge.source), *local(edge.target));
        }
        return g;
    }

private:
    const CatalogGraph& catalog_;
    const ProfileSubgraph& sg_;
    CompactGraph base_;
};

NodeIndex checked_candidate(const CatalogGraph& catalog, std::string_view item) {
    const NodeIndex n = catalog.index_of(item);
    if (!catalog.is_recommendable(n)) {
        throw NotFoundError(fmt::format("candidate '{}' is not a recommendable item", item));
    }
    return n;
}

}  // namespace

MetricValue baseline_metric(const CatalogGraph& catalog, const ProfileSubgraph& sg, MetricKind kind,
                            const PageRankOptions& opts) {
    // An empty profile has nothing to concentrate; every metric starts at 0.
    if (sg.nodes.empty()) return {kind, 0.0};
    return compute_metric(compact(catalog, sg), kind, opts);
}

MetricValue BaselineCache::get(const CatalogGraph& catalog, const ProfileSubgraph& sg, MetricKind kind,
                               const PageRankOptions& opts) {
    const auto key = std::make_pair(sg.user, kind);
    {
        std::lock_guard lock(mutex_);
        if (auto it = values_.find(key); it != values_.end()) return it->second;
    }
    const MetricValue value = baseline_metric(catalog, sg, kind, opts);
    std::lock_guard lock(mutex_);
    return values_.emplace(key, value).first->second;
}

std::size_t BaselineCache::size() const {
    std::lock_guard lock(mutex_);
    return values_.size();
}

MetricValue evaluate_candidate(const CatalogGraph& catalog, const ProfileSubgraph& sg, std::string_view item,
                               const RerankConfig& cfg) {
    const NodeIndex n = checked_candidate(catalog, item);
    if (cfg.evaluation == CandidateEvaluation::NaiveCopy) {
        const ProfileSubgraph extended = extend_subgraph(sg, catalog, item, cfg.mode);
        return compute_metric(compact(catalog, extended), cfg.metric, cfg.pagerank);
    }
    return compute_metric(ProfileOverlay(catalog, sg).extended(n, cfg.mode), cfg.metric, cfg.pagerank);
}

std::vector<RankedItem> rerank(const CatalogGraph& catalog, const ProfileSubgraph& sg, const RecommendationList& recs,
                               const RerankConfig& cfg, BaselineCache* cache) {
    if (cfg.top_n < 1) throw Error("top_n must be at least 1");
    recs.validate();
    if (recs.items.empty()) return {};

    const MetricValue baseline =
        cache ? cache->get(catalog, sg, cfg.metric, cfg.pagerank) : baseline_metric(catalog, sg, cfg.metric, cfg.pagerank);

    std::vector<NodeIndex> candidates(recs.items.size());
    for (std::size_t i = 0; i < candidates.size(); ++i) {
        try {
            candidates[i] = checked_candidate(catalog, recs.items[i].item);
        } catch (const Error& e) {
            throw Error(fmt::format("cannot re-rank '{}' for user '{}': {}", recs.items[i].item, recs.user, e.what()));
        }
    }

    std::optional<ProfileOverlay> overlay;
    if (cfg.evaluation == CandidateEvaluation::Overlay) overlay.emplace(catalog, sg);

    std::vector<RankedItem> ranked(recs.items.size());
    parallel_for(ranked.size(), cfg.threads, [&](std::size_t i) {
        const ScoredItem& rec = recs.items[i];
        MetricValue value{cfg.metric, 0.0};
        try {
            if (overlay) {
                value = compute_metric(overlay->extended(candidates[i], cfg.mode), cfg.metric, cfg.pagerank);
            } else {
                value = evaluate_candidate(catalog, sg, rec.item, cfg);
            }
        } catch (const std::exception& e) {
            throw Error(fmt::format("metric '{}' failed for candidate '{}' of user '{}': {}", to_string(cfg.metric),
                                    rec.item, recs.user, e.what()));
        }
        ranked[i] = RankedItem{rec.item, value, value.value - baseline.value, rec.score, i + 1, 0};
    });

    const bool ascending = cfg.order == SortOrder::Ascending;
    std::sort(ranked.begin(), ranked.end(), [ascending](const RankedItem& a, const RankedItem& b) {
        if (a.metric_value.value != b.metric_value.value) {
            return ascending ? a.metric_value.value < b.metric_value.value
                             : a.metric_value.value > b.metric_value.value;
        }
        if (a.base_score != b.base_score) return a.base_score > b.base_score;
        return a.item < b.item;
    });
    if (ranked.size() > cfg.top_n) ranked.resize(cfg.top_n);
    for (std::size_t i = 0; i < ranked.size(); ++i) ranked[i].new_rank = i + 1;
    return ranked;
}

}  // namespace kgrerank
