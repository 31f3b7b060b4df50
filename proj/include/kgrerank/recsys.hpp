// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The kgrerank Authors

#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include <Eigen/Core>
#include <Eigen/SparseCore>

#include "kgrerank/graph.hpp"
#include "kgrerank/recommendation_list.hpp"

namespace kgrerank {

/// Aggregated implicit feedback: how often `user` consumed `item`.
struct Interaction {
    std::string user;
    EntityId item;
    std::uint64_t count = 1;

    friend bool operator==(const Interaction&, const Interaction&) = default;
};

inline constexpr double kMinRating = 1.0;
inline constexpr double kMaxRating = 1000.0;

/// Sparse user x item ratings. Users and items are kept in sorted id order,
/// so row/column indices are deterministic.
class RatingMatrix {
public:
    using Storage = Eigen::SparseMatrix<double, Eigen::RowMajor>;

    struct Entry {
        std::string user;
        EntityId item;
        double rating;
    };

    RatingMatrix() = default;
    /// Duplicate (user, item) entries are rejected.
    static RatingMatrix from_entries(std::span<const Entry> entries);

    std::size_t user_count() const noexcept { return users_.size(); }
    std::size_t item_count() const noexcept { return items_.size(); }
    const std::vector<std::string>& users() const noexcept { return users_; }
    const std::vector<EntityId>& items() const noexcept { return items_; }
    std::optional<Eigen::Index> user_index(std::string_view user) const;
    std::optional<Eigen::Index> item_index(std::string_view item) const;

    /// Rows are users, columns are items.
    const Storage& ratings() const noexcept { return ratings_; }
    std::optional<double> rating(std::string_view user, std::string_view item) const;
    std::size_t rating_count() const noexcept { return static_cast<std::size_t>(ratings_.nonZeros()); }

private:
    std::vector<std::string> users_;
    std::vector<EntityId> items_;
    std::unordered_map<std::string, Eigen::Index> user_lookup_;
    std::unordered_map<std::string, Eigen::Index> item_lookup_;
    Storage ratings_;
};

/// Per-user min-max scaling of play counts into [1, 1000]; each user's
/// most-consumed item gets 1000. A user whose counts are all equal gets 1000
/// everywhere. Counts of repeated (user, item) pairs are summed first.
RatingMatrix scale_ratings(std::span<const Interaction> interactions);

/// Items rated by anyone that `user` has not rated, sorted by id. An unknown
/// user gets every rated item.
std::vector<EntityId> anti_testset(const RatingMatrix& matrix, std::string_view user);

/// Rating predictor fitted on a RatingMatrix. Prediction and recommendation
/// are read-only after fit() and may be called concurrently.
class Recommender {
public:
    virtual ~Recommender() = default;

    virtual std::string_view name() const noexcept = 0;
    virtual void fit(const RatingMatrix& matrix) = 0;
    /// Throws Error when called before fit().
    virtual double predict(std::string_view user, std::string_view item) const = 0;

    bool fitted() const noexcept { return matrix_ != nullptr; }
    const RatingMatrix& matrix() const;

protected:
    void set_matrix(const RatingMatrix& m) { matrix_ = &m; }
    void require_fitted() const;

private:
    const RatingMatrix* matrix_ = nullptr;
};

struct BaselineOptions {
    int passes = 10;
    double user_reg = 10.0;
    double item_reg = 10.0;
};

/// mu + b_user + b_item with biases fitted by alternating regularized
/// averages (ALS on the bias model). Predictions are clamped to [1, 1000].
/// Unknown users or items contribute a zero bias.
class BaselineRecommender final : public Recommender {
public:
    explicit BaselineRecommender(BaselineOptions opts = {}) : opts_(opts) {}

    std::string_view name() const noexcept override { return "baseline"; }
    void fit(const RatingMatrix& matrix) override;
    double predict(std::string_view user, std::string_view item) const override;

    double global_mean() const noexcept { return mean_; }
    const Eigen::VectorXd& user_biases() const noexcept { return user_bias_; }
    const Eigen::VectorXd& item_biases() const noexcept { return item_bias_; }

private:
    BaselineOptions opts_;
    double mean_ = 0.0;
    Eigen::VectorXd user_bias_;
    Eigen::VectorXd item_bias_;
};

/// Item-based kNN with cosine similarity over co-rating users. Prediction is
/// the similarity-weighted mean of the user's ratings on the k most similar
/// rated items (positive similarity only); without such neighbors it falls
/// back to the baseline predictor.
class ItemKnnRecommender final : public Recommender {
public:
    explicit ItemKnnRecommender(std::size_t k = 40, BaselineOptions baseline = {}) : k_(k), fallback_(baseline) {}

    std::string_view name() const noexcept override { return "itemknn"; }
    void fit(const RatingMatrix& matrix) override;
    double predict(std::string_view user, std::string_view item) const override;

    /// Item x item cosine similarity; entries exist only for pairs with at
    /// least one common rater.
    const Eigen::SparseMatrix<double>& similarities() const noexcept { return similarity_; }
    double similarity(std::string_view a, std::string_view b) const;

private:
    std::size_t k_;
    BaselineRecommender fallback_;
    Eigen::SparseMatrix<double> similarity_;
};

/// Scores an item by its number of raters.
class PopularityRecommender final : public Recommender {
public:
    std::string_view name() const noexcept override { return "popularity"; }
    void fit(const RatingMatrix& matrix) override;
    double predict(std::string_view user, std::string_view item) const override;

private:
    Eigen::VectorXd popularity_;
};

/// Predictions over the user's anti-testset, descending by score then by
/// item id, truncated to `n`. Throws NotFoundError for an unknown user.
RecommendationList recommend(const Recommender& model, std::string_view user, std::size_t n = 100);

std::unique_ptr<Recommender> make_recommender(std::string_view name, std::size_t knn_k = 40);

// Run format, one line per item: <user_id> <rank> <item_id> <score>.

/// Users in lexicographic order; scores written in shortest round-trip form.
void write_recommendations(std::ostream& out, const std::map<std::string, RecommendationList>& lists);
/// Throws ParseError with the line number on a malformed line, a rank that is
/// not the next 1-based position, or an increasing score.
std::map<std::string, RecommendationList> load_external_recommendations(std::istream& in,
                                                                       const std::string& source = "recommendations");

}  // namespace kgrerank
