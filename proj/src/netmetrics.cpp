// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The kgrerank Authors

#include "kgrerank/netmetrics.hpp"

#include <array>
#include <set>

#include <Eigen/SparseCore>
#include <fmt/format.h>

namespace kgrerank {
namespace {

constexpr std::array<std::pair<MetricKind, std::string_view>, 9> kMetricNames{{
    {MetricKind::NodeCount, "node_count"},
    {MetricKind::EdgeCount, "edge_count"},
    {MetricKind::Density, "density"},
    {MetricKind::AverageDegree, "average_degree"},
    {MetricKind::InDegree, "in_degree"},
    {MetricKind::OutDegree, "out_degree"},
    {MetricKind::PageRank, "pagerank"},
    {MetricKind::Betweenness, "betweenness"},
    {MetricKind::Closeness, "closeness"},
}};

// CSR adjacency of the undirected simple view.
struct UndirectedAdjacency {
    std::vector<std::uint32_t> offsets;
    std::vector<std::uint32_t> targets;

    explicit UndirectedAdjacency(const CompactGraph& g) {
        std::vector<std::pair<std::uint32_t, std::uint32_t>> arcs;
        arcs.reserve(2 * g.edges.size());
        for (auto [s, t] : g.edges) {
            if (s == t) continue;
            arcs.emplace_back(s, t);
            arcs.emplace_back(t, s);
        }
        std::sort(arcs.begin(), arcs.end());
        arcs.erase(std::unique(arcs.begin(), arcs.end()), arcs.end());
        offsets.assign(g.node_count + 1, 0);
        for (auto [s, t] : arcs) ++offsets[s + 1];
        for (std::size_t i = 0; i < g.node_count; ++i) offsets[i + 1] += offsets[i];
        targets.reserve(arcs.size());
        for (auto [s, t] : arcs) targets.push_back(t);
    }

    std::span<const std::uint32_t> operator[](std::uint32_t v) const {
        return {targets.data() + offsets[v], targets.data() + offsets[v + 1]};
    }
};

void check_graph(const CompactGraph& g) {
    for (auto [s, t] : g.edges) {
        if (s >= g.node_count || t >= g.node_count) throw Error("edge endpoint out of range");
    }
}

}  // namespace

std::string_view to_string(MetricKind k) noexcept {
    for (const auto& [kind, name] : kMetricNames) {
        if (kind == k) return name;
    }
    return "unknown";
}

std::optional<MetricKind> parse_metric(std::string_view name) {
    for (const auto& [kind, text] : kMetricNames) {
        if (text == name) return kind;
    }
    return std::nullopt;
}

CompactGraph compact(const CatalogGraph& catalog, const ProfileSubgraph& sg) {
    CompactGraph g;
    g.node_count = sg.nodes.size();
    g.edges.reserve(sg.edges.size());
    auto local = [&](NodeIndex n) {
        auto it = std::lower_bound(sg.nodes.begin(), sg.nodes.end(), n);
        if (it == sg.nodes.end() || *it != n) throw Error("subgraph edge references a node outside the subgraph");
        return static_cast<std::uint32_t>(it - sg.nodes.begin());
    };
    for (EdgeIndex e : sg.edges) {
        const Edge& edge = catalog.edge(e);
        g.edges.emplace_back(local(edge.source), local(edge.target));
    }
    return g;
}

Eigen::VectorXd betweenness(const CompactGraph& g) {
    check_graph(g);
    const auto n = static_cast<std::uint32_t>(g.node_count);
    const UndirectedAdjacency adj(g);
    Eigen::VectorXd score = Eigen::VectorXd::Zero(n);

    // Brandes accumulation with one BFS per source.
    std::vector<std::int64_t> dist(n);
    std::vector<double> sigma(n), delta(n);
    std::vector<std::uint32_t> order, queue;
    order.reserve(n);
    queue.reserve(n);
    for (std::uint32_t s = 0; s < n; ++s) {
        std::fill(dist.begin(), dist.end(), -1);
        std::fill(sigma.begin(), sigma.end(), 0.0);
        std::fill(delta.begin(), delta.end(), 0.0);
        order.clear();
        queue.clear();
        dist[s] = 0;
        sigma[s] = 1.0;
        queue.push_back(s);
        for (std::size_t head = 0; head < queue.size(); ++head) {
            const auto v = queue[head];
            order.push_back(v);
            for (auto w : adj[v]) {
                if (dist[w] < 0) {
                    dist[w] = dist[v] + 1;
                    queue.push_back(w);
                }
                if (dist[w] == dist[v] + 1) sigma[w] += sigma[v];
            }
        }
        for (auto it = order.rbegin(); it != order.rend(); ++it) {
            const auto w = *it;
            for (auto v : adj[w]) {
                if (dist[v] == dist[w] - 1) delta[v] += sigma[v] / sigma[w] * (1.0 + delta[w]);
            }
            if (w != s) score[w] += delta[w];
        }
    }
    // Every unordered pair was accumulated from both endpoints.
    return score / 2.0;
}

Eigen::VectorXd closeness(const CompactGraph& g) {
    check_graph(g);
    const auto n = static_cast<std::uint32_t>(g.node_count);
    const UndirectedAdjacency adj(g);
    Eigen::VectorXd score = Eigen::VectorXd::Zero(n);
    std::vector<std::int64_t> dist(n);
    std::vector<std::uint32_t> queue;
    queue.reserve(n);
    for (std::uint32_t s = 0; s < n; ++s) {
        std::fill(dist.begin(), dist.end(), -1);
        queue.assign(1, s);
        dist[s] = 0;
        double total = 0.0;
        for (std::size_t head = 0; head < queue.size(); ++head) {
            const auto v = queue[head];
            if (v != s) total += 1.0 / static_cast<double>(dist[v]);
            for (auto w : adj[v]) {
                if (dist[w] < 0) {
                    dist[w] = dist[v] + 1;
                    queue.push_back(w);
                }
            }
        }
        score[s] = total;
    }
    return score;
}

ConvergenceError::ConvergenceError(Eigen::VectorXd last, int iterations)
    : Error(fmt::format("PageRank did not converge after {} iterations", iterations)),
      last_(std::move(last)),
      iterations_(iterations) {}

Eigen::VectorXd pagerank(const CompactGraph& g, const PageRankOptions& opts) {
    check_graph(g);
    if (g.node_count == 0) throw Error("PageRank needs at least one node");
    if (!(opts.damping > 0.0 && opts.damping < 1.0)) throw Error("PageRank damping must lie in (0, 1)");
    const auto n = static_cast<Eigen::Index>(g.node_count);

    Eigen::VectorXd out_weight = Eigen::VectorXd::Zero(n);
    for (auto [s, t] : g.edges) out_weight[s] += 1.0;

    // Column-stochastic transition matrix; duplicate entries (parallel edges)
    // are summed by setFromTriplets.
    std::vector<Eigen::Triplet<double>> entries;
    entries.reserve(g.edges.size());
    for (auto [s, t] : g.edges) entries.emplace_back(t, s, 1.0 / out_weight[s]);
    Eigen::SparseMatrix<double> transition(n, n);
    transition.setFromTriplets(entries.begin(), entries.end());

    const Eigen::Array<bool, Eigen::Dynamic, 1> dangling = out_weight.array() == 0.0;
    const double d = opts.damping;
    const double inv_n = 1.0 / static_cast<double>(n);
    Eigen::VectorXd x = Eigen::VectorXd::Constant(n, inv_n);
    Eigen::VectorXd next(n);
    for (int iter = 1; iter <= opts.max_iter; ++iter) {
        const double dangling_mass = dangling.select(x, 0.0).sum();
        next.noalias() = d * (transition * x);
        next.array() += (d * dangling_mass + (1.0 - d)) * inv_n;
        const double change = (next - x).lpNorm<1>();
        x.swap(next);
        if (change < opts.tol) return x / x.sum();
    }
    throw ConvergenceError(x, opts.max_iter);
}

Eigen::VectorXd in_degrees(const CompactGraph& g) {
    check_graph(g);
    Eigen::VectorXd deg = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(g.node_count));
    for (auto [s, t] : g.edges) deg[t] += 1.0;
    return deg;
}

Eigen::VectorXd out_degrees(const CompactGraph& g) {
    check_graph(g);
    Eigen::VectorXd deg = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(g.node_count));
    for (auto [s, t] : g.edges) deg[s] += 1.0;
    return deg;
}

Eigen::VectorXd centrality(const CompactGraph& g, MetricKind kind, const PageRankOptions& opts) {
    switch (kind) {
        case MetricKind::InDegree:
            return in_degrees(g);
        case MetricKind::OutDegree:
            return out_degrees(g);
        case MetricKind::PageRank:
            return pagerank(g, opts);
        case MetricKind::Betweenness:
            return betweenness(g);
        case MetricKind::Closeness:
            return closeness(g);
        default:
            throw Error(fmt::format("'{}' is not a distributional metric", to_string(kind)));
    }
}

MetricValue compute_metric(const CompactGraph& g, MetricKind kind, const PageRankOptions& opts) {
    const auto n = static_cast<double>(g.node_count);
    const auto m = static_cast<double>(g.edges.size());
    switch (kind) {
        case MetricKind::NodeCount:
            return {kind, n};
        case MetricKind::EdgeCount:
            return {kind, m};
        case MetricKind::AverageDegree:
            return {kind, g.node_count == 0 ? 0.0 : m / n};
        case MetricKind::Density: {
            if (g.node_count <= 1) return {kind, 0.0};
            std::set<std::pair<std::uint32_t, std::uint32_t>> pairs;
            for (auto e : g.edges) {
                if (e.first != e.second) pairs.insert(e);
            }
            return {kind, static_cast<double>(pairs.size()) / (n * (n - 1.0))};
        }
        default:
            break;
    }
    if (g.node_count == 0) {
        throw Error(fmt::format("metric '{}' is undefined on an empty graph", to_string(kind)));
    }
    const Eigen::VectorXd shares = centrality_to_shares(centrality(g, kind, opts));
    return {kind, hhi_normalized(shares)};
}

std::map<EntityId, double> centrality_by_id(const CatalogGraph& catalog, const ProfileSubgraph& sg, MetricKind kind,
                                            const PageRankOptions& opts) {
    const Eigen::VectorXd scores = centrality(compact(catalog, sg), kind, opts);
    std::map<EntityId, double> out;
    for (std::size_t i = 0; i < sg.nodes.size(); ++i) {
        out.emplace(catalog.node(sg.nodes[i]).id, scores[static_cast<Eigen::Index>(i)]);
    }
    return out;
}

}  // namespace kgrerank
