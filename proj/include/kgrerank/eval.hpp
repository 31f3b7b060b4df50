// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The kgrerank Authors

#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "kgrerank/error.hpp"
#include "kgrerank/graph.hpp"
#include "kgrerank/recommendation_list.hpp"
#include "kgrerank/rerank.hpp"

namespace kgrerank {

inline constexpr int kFeatureDims = 8;

/// Acoustic features in [0, 1]: danceability, energy, speechiness,
/// acousticness, instrumentalness, liveness, valence, tempo (min-max scaled).
template <typename Scalar>
using FeatureVectorT = Eigen::Matrix<Scalar, kFeatureDims, 1>;
using FeatureVector = FeatureVectorT<double>;

inline constexpr const char* kFeatureNames[kFeatureDims] = {
    "danceability", "energy", "speechiness", "acousticness", "instrumentalness", "liveness", "valence", "tempo",
};

class FeatureStore {
public:
    /// Rejects components outside [0, 1] and all-zero vectors.
    void insert(EntityId item, const FeatureVector& v);
    bool contains(std::string_view item) const { return features_.find(item) != features_.end(); }
    /// Throws NotFoundError naming the item.
    const FeatureVector& at(std::string_view item) const;
    std::size_t size() const noexcept { return features_.size(); }
    const std::map<EntityId, FeatureVector, std::less<>>& entries() const noexcept { return features_; }

    /// Stacks the vectors of `items` as columns.
    Eigen::Matrix<double, kFeatureDims, Eigen::Dynamic> gather(std::span<const EntityId> items) const;

private:
    std::map<EntityId, FeatureVector, std::less<>> features_;
};

/// 1 - cos(a, b); in [0, 1] for non-negative vectors. Throws on a zero-norm input.
template <typename A, typename B>
typename A::Scalar cosine_distance(const Eigen::MatrixBase<A>& a, const Eigen::MatrixBase<B>& b) {
    using Scalar = typename A::Scalar;
    const Scalar na = a.norm();
    const Scalar nb = b.norm();
    if (na == Scalar(0) || nb == Scalar(0)) throw Error("cosine distance of a zero-norm vector");
    return std::clamp(Scalar(1) - a.dot(b) / (na * nb), Scalar(0), Scalar(2));
}

namespace detail {

// Pairwise cosine distances between the columns of `x` and `y`.
template <typename X, typename Y>
Eigen::Matrix<typename X::Scalar, Eigen::Dynamic, Eigen::Dynamic> cosine_distances(const Eigen::MatrixBase<X>& x,
                                                                                   const Eigen::MatrixBase<Y>& y) {
    using Scalar = typename X::Scalar;
    const auto xn = x.colwise().norm().eval();
    const auto yn = y.colwise().norm().eval();
    if ((xn.array() == Scalar(0)).any() || (yn.array() == Scalar(0)).any()) {
        throw Error("cosine distance of a zero-norm vector");
    }
    const auto sim = ((x.transpose() * y).array().colwise() / xn.transpose().array()).rowwise() / yn.array();
    return (Scalar(1) - sim).cwiseMax(Scalar(0)).cwiseMin(Scalar(2)).matrix();
}

}  // namespace detail

/// Intra-list diversity: mean cosine distance over ordered pairs of distinct
/// columns. Lists of size 0 or 1 yield 0.
template <typename Derived>
typename Derived::Scalar ild(const Eigen::MatrixBase<Derived>& items) {
    using Scalar = typename Derived::Scalar;
    const auto n = items.cols();
    if (n <= 1) return Scalar(0);
    auto d = detail::cosine_distances(items, items);
    d.diagonal().setZero();
    return d.sum() / Scalar(n * (n - 1));
}

/// Mean cosine distance between every recommended and every history column.
template <typename H, typename R>
typename H::Scalar unexpectedness(const Eigen::MatrixBase<H>& history, const Eigen::MatrixBase<R>& recs) {
    using Scalar = typename H::Scalar;
    if (history.cols() == 0 || recs.cols() == 0) throw Error("unexpectedness needs a non-empty history and list");
    return detail::cosine_distances(recs, history).sum() / Scalar(history.cols() * recs.cols());
}

double ild(std::span<const EntityId> items, const FeatureStore& features);
double unexpectedness(std::span<const EntityId> history, std::span<const EntityId> recs, const FeatureStore& features);

/// nDCG@k of `reranked` against `base`. The item at base rank r <= k has
/// relevance k - r + 1, everything else 0; gains are discounted by
/// log2(position + 1) and normalized by the DCG of the base order. Lists
/// shorter than k are evaluated over their available prefix.
double ndcg_at_k(std::span<const EntityId> base, std::span<const EntityId> reranked, std::size_t k);
double ndcg_at_k(const RecommendationList& base, std::span<const RankedItem> reranked, std::size_t k);

std::vector<EntityId> item_ids(const RecommendationList& list, std::size_t limit = SIZE_MAX);
std::vector<EntityId> item_ids(std::span<const RankedItem> list, std::size_t limit = SIZE_MAX);

/// One evaluation row; absent values are written as empty fields.
struct ReportRow {
    std::string user;
    std::string metric;
    std::string order;
    std::optional<double> ild;
    std::optional<double> unexpectedness;
    std::optional<double> ndcg10;
};

/// CSV with header `user,metric,order,ild,unexpectedness,ndcg10`, rows in input order.
void write_report(std::ostream& out, std::span<const ReportRow> rows);
/// Per (metric, order) means over users, in first-appearance order:
/// `metric,order,users,ild,unexpectedness,ndcg10`.
void write_report_summary(std::ostream& out, std::span<const ReportRow> rows);
/// Writes `report.csv` and `report_summary.csv` into `dir`.
void emit_report(std::span<const ReportRow> rows, const std::filesystem::path& dir);

// trec_eval-compatible files.
/// `<user_id> 0 <item_id> <relevance>` for the base top-k with graded relevance k - r + 1.
void write_qrels(std::ostream& out, const std::map<std::string, RecommendationList>& base, std::size_t k);
/// `<user_id> Q0 <item_id> <rank> <score> <tag>`; score is list length - rank + 1 so that
/// sorting by score reproduces the list order.
void write_trec_run(std::ostream& out, const std::string& user, std::span<const EntityId> items, const std::string& tag);

}  // namespace kgrerank
