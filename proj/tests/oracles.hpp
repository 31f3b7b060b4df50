// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The kgrerank Authors
//
// Independent reference implementations used only by tests. They favour
// directness over speed and share no code with the library.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <random>
#include <set>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "kgrerank/netmetrics.hpp"

namespace oracle {

using Graph = kgrerank::CompactGraph;

// Undirected simple adjacency (no loops, no multiplicity).
inline std::vector<std::vector<bool>> simple_adjacency(const Graph& g) {
    const std::size_t n = g.node_count;
    std::vector<std::vector<bool>> adj(n, std::vector<bool>(n, false));
    for (auto [s, t] : g.edges) {
        if (s != t) adj[s][t] = adj[t][s] = true;
    }
    return adj;
}

// All-pairs hop distances by Floyd-Warshall; -1 when unreachable.
inline std::vector<std::vector<int>> distances(const Graph& g) {
    const std::size_t n = g.node_count;
    constexpr int inf = std::numeric_limits<int>::max() / 4;
    const auto adj = simple_adjacency(g);
    std::vector<std::vector<int>> d(n, std::vector<int>(n, inf));
    for (std::size_t i = 0; i < n; ++i) {
        d[i][i] = 0;
        for (std::size_t j = 0; j < n; ++j) {
            if (adj[i][j]) d[i][j] = 1;
        }
    }
    for (std::size_t k = 0; k < n; ++k)
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < n; ++j) d[i][j] = std::min(d[i][j], d[i][k] + d[k][j]);
    for (auto& row : d)
        for (int& x : row)
            if (x >= inf) x = -1;
    return d;
}

// Betweenness by enumerating every shortest path of every unordered pair.
inline std::vector<double> betweenness(const Graph& g) {
    const std::size_t n = g.node_count;
    const auto adj = simple_adjacency(g);
    const auto d = distances(g);
    std::vector<double> out(n, 0.0);
    for (std::size_t s = 0; s < n; ++s) {
        for (std::size_t t = s + 1; t < n; ++t) {
            if (d[s][t] <= 1) continue;
            std::vector<std::vector<std::size_t>> paths;
            std::vector<std::size_t> path{s};
            auto walk = [&](auto&& self, std::size_t v) -> void {
                if (v == t) {
                    paths.push_back(path);
                    return;
                }
                for (std::size_t w = 0; w < n; ++w) {
                    if (!adj[v][w] || d[s][w] != d[s][v] + 1 || d[w][t] < 0 || d[s][w] + d[w][t] != d[s][t]) continue;
                    path.push_back(w);
                    self(self, w);
                    path.pop_back();
                }
            };
            walk(walk, s);
            std::vector<std::size_t> through(n, 0);
            for (const auto& p : paths)
                for (std::size_t i = 1; i + 1 < p.size(); ++i) ++through[p[i]];
            for (std::size_t v = 0; v < n; ++v) out[v] += static_cast<double>(through[v]) / static_cast<double>(paths.size());
        }
    }
    return out;
}

inline std::vector<double> harmonic_closeness(const Graph& g) {
    const auto d = distances(g);
    std::vector<double> out(g.node_count, 0.0);
    for (std::size_t v = 0; v < g.node_count; ++v)
        for (std::size_t u = 0; u < g.node_count; ++u)
            if (u != v && d[v][u] > 0) out[v] += 1.0 / d[v][u];
    return out;
}

// PageRank as the solution of (I - d M) x = (1 - d)/N, M column-stochastic with
// dangling columns uniform.
inline Eigen::VectorXd pagerank(const Graph& g, double damping = 0.85) {
    const auto n = static_cast<Eigen::Index>(g.node_count);
    Eigen::MatrixXd m = Eigen::MatrixXd::Zero(n, n);
    Eigen::VectorXd out = Eigen::VectorXd::Zero(n);
    for (auto [s, t] : g.edges) {
        m(t, s) += 1.0;
        out(s) += 1.0;
    }
    for (Eigen::Index j = 0; j < n; ++j) {
        if (out(j) == 0.0) m.col(j).setConstant(1.0 / static_cast<double>(n));
        else m.col(j) /= out(j);
    }
    const Eigen::MatrixXd a = Eigen::MatrixXd::Identity(n, n) - damping * m;
    const Eigen::VectorXd b = Eigen::VectorXd::Constant(n, (1.0 - damping) / static_cast<double>(n));
    return a.fullPivLu().solve(b);
}

// (sum s^2 - 1/N) / (1 - 1/N), computed from the raw definition.
inline double hhi_star(const std::vector<double>& shares) {
    const double n = static_cast<double>(shares.size());
    if (shares.size() == 1) return 1.0;
    double h = 0.0;
    for (double s : shares) h += s * s;
    return (h - 1.0 / n) / (1.0 - 1.0 / n);
}

inline double cosine_distance(const std::vector<double>& a, const std::vector<double>& b) {
    double dot = 0, na = 0, nb = 0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        dot += a[i] * b[i];
        na += a[i] * a[i];
        nb += b[i] * b[i];
    }
    return 1.0 - dot / (std::sqrt(na) * std::sqrt(nb));
}

inline double ild(const std::vector<std::vector<double>>& items) {
    if (items.size() < 2) return 0.0;
    double sum = 0.0;
    std::size_t pairs = 0;
    for (std::size_t i = 0; i < items.size(); ++i)
        for (std::size_t j = 0; j < items.size(); ++j)
            if (i != j) {
                sum += cosine_distance(items[i], items[j]);
                ++pairs;
            }
    return sum / static_cast<double>(pairs);
}

inline double unexpectedness(const std::vector<std::vector<double>>& history,
                             const std::vector<std::vector<double>>& recs) {
    double sum = 0.0;
    for (const auto& r : recs)
        for (const auto& h : history) sum += cosine_distance(r, h);
    return sum / static_cast<double>(history.size() * recs.size());
}

// nDCG@k with graded relevance k - r + 1 for base rank r <= k.
inline double ndcg(const std::vector<std::string>& base, const std::vector<std::string>& reranked, std::size_t k) {
    std::map<std::string, double> rel;
    for (std::size_t r = 0; r < std::min(k, base.size()); ++r) rel[base[r]] = static_cast<double>(k - r);
    auto dcg = [&](const std::vector<std::string>& list) {
        double sum = 0.0;
        for (std::size_t i = 0; i < std::min(k, list.size()); ++i) {
            auto it = rel.find(list[i]);
            if (it != rel.end()) sum += it->second / std::log2(static_cast<double>(i) + 2.0);
        }
        return sum;
    };
    const double ideal = dcg(base);
    return ideal == 0.0 ? 0.0 : dcg(reranked) / ideal;
}

// Random directed multigraph with loops and parallel edges.
inline Graph random_graph(std::mt19937_64& rng, std::size_t max_nodes, double max_density = 0.4) {
    std::uniform_int_distribution<std::size_t> nd(1, max_nodes);
    Graph g;
    g.node_count = nd(rng);
    std::uniform_real_distribution<double> pd(0.0, max_density);
    const double p = pd(rng);
    std::bernoulli_distribution edge(p), dup(0.1), loop(0.05);
    for (std::uint32_t s = 0; s < g.node_count; ++s) {
        for (std::uint32_t t = 0; t < g.node_count; ++t) {
            if (s == t ? loop(rng) : edge(rng)) {
                g.edges.emplace_back(s, t);
                if (dup(rng)) g.edges.emplace_back(s, t);
            }
        }
    }
    return g;
}

}  // namespace oracle
