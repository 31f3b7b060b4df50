// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The kgrerank Authors

#pragma once

#include <cstddef>
#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <tuple>
#include <vector>

#include "kgrerank/graph.hpp"
#include "kgrerank/netmetrics.hpp"
#include "kgrerank/recommendation_list.hpp"

namespace kgrerank {

enum class SortOrder { Ascending, Descending };

std::string_view to_string(SortOrder o) noexcept;  // "asc" / "desc"
std::optional<SortOrder> parse_order(std::string_view name);
std::string_view to_string(NeighborhoodMode m) noexcept;  // "closed" / "existing"
std::optional<NeighborhoodMode> parse_mode(std::string_view name);

/// How the extended subgraph of a candidate is materialized.
enum class CandidateEvaluation {
    /// Append the candidate's additions to a prebuilt compact copy of the profile.
    Overlay,
    /// extend_subgraph() followed by compact(); the reference path.
    NaiveCopy,
};

struct RerankConfig {
    MetricKind metric = MetricKind::Betweenness;
    SortOrder order = SortOrder::Ascending;
    NeighborhoodMode mode = NeighborhoodMode::ClosedNeighborhood;
    std::size_t top_n = 100;
    PageRankOptions pagerank{};
    CandidateEvaluation evaluation = CandidateEvaluation::Overlay;
    /// Worker threads for per-candidate evaluation; 0 picks the hardware count.
    std::size_t threads = 1;
};

struct RankedItem {
    EntityId item;
    MetricValue metric_value;  // metric of the profile extended by this item
    double delta;              // metric_value - metric of the unextended profile
    double base_score;
    std::size_t original_rank;  // 1-based position in the base list
    std::size_t new_rank;       // 1-based position after re-ranking
};

/// Metric of the unextended profile subgraph; 0 for an empty subgraph.
MetricValue baseline_metric(const CatalogGraph& catalog, const ProfileSubgraph& sg, MetricKind kind,
                            const PageRankOptions& opts = {});

/// Thread-safe memo of baseline metrics keyed by (user, metric), for one run.
class BaselineCache {
public:
    MetricValue get(const CatalogGraph& catalog, const ProfileSubgraph& sg, MetricKind kind,
                    const PageRankOptions& opts = {});
    std::size_t size() const;

private:
    mutable std::mutex mutex_;
    std::map<std::pair<std::string, MetricKind>, MetricValue> values_;
};

/// Metric of `sg` extended by `item`, always starting from `sg` itself.
MetricValue evaluate_candidate(const CatalogGraph& catalog, const ProfileSubgraph& sg, std::string_view item,
                               const RerankConfig& cfg);

/// Re-orders `recs` by the metric each candidate induces on the profile.
///
/// Every candidate is evaluated independently against the original `sg`.
/// Output is sorted by metric value in `cfg.order`, ties broken by
/// descending base score and then by item id, and truncated to `cfg.top_n`.
/// A metric failure is rethrown as Error naming the candidate.
std::vector<RankedItem> rerank(const CatalogGraph& catalog, const ProfileSubgraph& sg, const RecommendationList& recs,
                               const RerankConfig& cfg, BaselineCache* cache = nullptr);

}  // namespace kgrerank
