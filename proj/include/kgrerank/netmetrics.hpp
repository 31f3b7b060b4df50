// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The kgrerank Authors

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <optional>
#include <string_view>
#include <utility>
#include <vector>

#include <Eigen/Core>

#include "kgrerank/error.hpp"
#include "kgrerank/graph.hpp"

namespace kgrerank {

/// Minimal directed multigraph on nodes 0..node_count-1, the form every
/// metric is computed on.
struct CompactGraph {
    std::size_t node_count = 0;
    std::vector<std::pair<std::uint32_t, std::uint32_t>> edges;
};

/// Relabels a profile subgraph to 0..n-1 in the order of `sg.nodes`.
CompactGraph compact(const CatalogGraph& catalog, const ProfileSubgraph& sg);

enum class MetricKind {
    NodeCount,
    EdgeCount,
    Density,
    AverageDegree,
    InDegree,
    OutDegree,
    PageRank,
    Betweenness,
    Closeness,
};

inline constexpr MetricKind kAllMetrics[] = {
    MetricKind::NodeCount, MetricKind::EdgeCount, MetricKind::Density,  MetricKind::AverageDegree,
    MetricKind::InDegree,  MetricKind::OutDegree, MetricKind::PageRank, MetricKind::Betweenness,
    MetricKind::Closeness,
};

/// Distributional metrics are collapsed to a single value through HHI*.
constexpr bool is_distributional(MetricKind k) noexcept {
    return k == MetricKind::InDegree || k == MetricKind::OutDegree || k == MetricKind::PageRank ||
           k == MetricKind::Betweenness || k == MetricKind::Closeness;
}

/// Snake-case name used in configs, file names and reports ("node_count", "betweenness", ...).
std::string_view to_string(MetricKind k) noexcept;
std::optional<MetricKind> parse_metric(std::string_view name);

struct MetricValue {
    MetricKind kind;
    double value;
};

namespace detail {

template <typename Derived>
void check_shares(const Eigen::MatrixBase<Derived>& shares) {
    using Scalar = typename Derived::Scalar;
    if (shares.size() < 1) throw Error("share vector must not be empty");
    if ((shares.array() < Scalar(0)).any()) throw Error("shares must be non-negative");
    const Scalar tol = std::max<Scalar>(Scalar(1e-9), Scalar(8 * shares.size()) * std::numeric_limits<Scalar>::epsilon());
    if (std::abs(shares.sum() - Scalar(1)) > tol) throw Error("shares must sum to 1");
}

}  // namespace detail

/// Herfindahl-Hirschman index: the sum of squared shares, in [1/N, 1].
template <typename Derived>
typename Derived::Scalar hhi(const Eigen::MatrixBase<Derived>& shares) {
    detail::check_shares(shares);
    return shares.squaredNorm();
}

/// Normalized HHI in [0, 1]: 0 for uniform shares, 1 for a single monopoly.
/// A single share is treated as maximally concentrated and yields 1.
///
/// Evaluated as sum((N s_i - 1)^2) / (N (N - 1)), which equals
/// (HHI - 1/N) / (1 - 1/N) whenever the shares sum to one but is exact for
/// one-hot input and does not cancel for near-uniform input.
template <typename Derived>
typename Derived::Scalar hhi_normalized(const Eigen::MatrixBase<Derived>& shares) {
    using Scalar = typename Derived::Scalar;
    detail::check_shares(shares);
    const auto n = static_cast<Scalar>(shares.size());
    if (shares.size() == 1) return Scalar(1);
    const Scalar spread = (shares.array() * n - Scalar(1)).square().sum();
    return std::clamp(spread / (n * (n - Scalar(1))), Scalar(0), Scalar(1));
}

/// Each score divided by the total. An all-zero distribution maps to the
/// uniform distribution (nothing is monopolized).
template <typename Derived>
Eigen::Matrix<typename Derived::Scalar, Eigen::Dynamic, 1> centrality_to_shares(
    const Eigen::MatrixBase<Derived>& scores) {
    using Scalar = typename Derived::Scalar;
    using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
    if ((scores.array() < Scalar(0)).any()) throw Error("centrality scores must be non-negative");
    const Scalar total = scores.sum();
    if (scores.size() == 0) return Vector();
    if (total <= Scalar(0)) return Vector::Constant(scores.size(), Scalar(1) / Scalar(scores.size()));
    return scores / total;
}

/// Shortest-path betweenness on the undirected simple view of `g` (edge
/// direction, multiplicity and self-loops ignored). Raw, unnormalized pair
/// counts: each unordered endpoint pair contributes at most 1 in total.
Eigen::VectorXd betweenness(const CompactGraph& g);

/// Harmonic closeness on the undirected view: sum over u != v of 1/dist(v, u),
/// unreachable nodes contributing 0.
Eigen::VectorXd closeness(const CompactGraph& g);

struct PageRankOptions {
    double damping = 0.85;
    double tol = 1e-9;
    int max_iter = 200;
};

/// Raised when power iteration does not reach the L1 tolerance.
class ConvergenceError : public Error {
public:
    ConvergenceError(Eigen::VectorXd last, int iterations);
    const Eigen::VectorXd& last_iterate() const noexcept { return last_; }
    int iterations() const noexcept { return iterations_; }

private:
    Eigen::VectorXd last_;
    int iterations_;
};

/// PageRank by power iteration on the directed multigraph (parallel edges
/// weight the transition). Uniform teleport, dangling mass spread uniformly.
/// Scores sum to 1.
Eigen::VectorXd pagerank(const CompactGraph& g, const PageRankOptions& opts = {});

Eigen::VectorXd in_degrees(const CompactGraph& g);
Eigen::VectorXd out_degrees(const CompactGraph& g);

/// Scalar metrics: NodeCount = |V|, EdgeCount = |E|, AverageDegree = |E|/|V|,
/// Density = distinct ordered node pairs joined by an edge / (|V| (|V|-1)).
/// Distributional metrics: HHI* of the respective centrality distribution;
/// these throw on an empty graph.
MetricValue compute_metric(const CompactGraph& g, MetricKind kind, const PageRankOptions& opts = {});

/// Raw centrality distribution for one of the distributional metrics.
Eigen::VectorXd centrality(const CompactGraph& g, MetricKind kind, const PageRankOptions& opts = {});

/// Centrality of every node of a profile subgraph keyed by entity id.
std::map<EntityId, double> centrality_by_id(const CatalogGraph& catalog, const ProfileSubgraph& sg, MetricKind kind,
                                            const PageRankOptions& opts = {});

}  // namespace kgrerank
