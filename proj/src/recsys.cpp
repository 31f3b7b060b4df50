// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The kgrerank Authors

#include "kgrerank/recsys.hpp"

#include <algorithm>
#include <charconv>
#include <istream>
#include <ostream>
#include <sstream>
#include <tuple>

#include <fmt/format.h>

#include "kgrerank/error.hpp"

namespace kgrerank {
namespace {

template <typename Map>
std::optional<Eigen::Index> lookup(const Map& m, std::string_view key) {
    auto it = m.find(std::string(key));
    if (it == m.end()) return std::nullopt;
    return it->second;
}

bool has_whitespace(std::string_view s) { return s.find_first_of(" \t\r\n") != std::string_view::npos; }

template <typename T>
bool parse_number(std::string_view s, T& out) {
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
    return ec == std::errc() && ptr == s.data() + s.size();
}

}  // namespace

// ---------------------------------------------------------------------------
// RatingMatrix

RatingMatrix RatingMatrix::from_entries(std::span<const Entry> entries) {
    RatingMatrix m;
    for (const Entry& e : entries) {
        m.users_.push_back(e.user);
        m.items_.push_back(e.item);
    }
    for (auto* ids : {&m.users_, &m.items_}) {
        std::sort(ids->begin(), ids->end());
        ids->erase(std::unique(ids->begin(), ids->end()), ids->end());
    }
    for (std::size_t i = 0; i < m.users_.size(); ++i) m.user_lookup_.emplace(m.users_[i], static_cast<Eigen::Index>(i));
    for (std::size_t i = 0; i < m.items_.size(); ++i) m.item_lookup_.emplace(m.items_[i], static_cast<Eigen::Index>(i));

    std::vector<Eigen::Triplet<double>> triplets;
    triplets.reserve(entries.size());
    for (const Entry& e : entries) {
        if (!(e.rating >= kMinRating && e.rating <= kMaxRating)) {
            throw Error(fmt::format("rating {} of ({}, {}) outside [1, 1000]", e.rating, e.user, e.item));
        }
        triplets.emplace_back(m.user_lookup_.at(e.user), m.item_lookup_.at(e.item), e.rating);
    }
    m.ratings_.resize(static_cast<Eigen::Index>(m.users_.size()), static_cast<Eigen::Index>(m.items_.size()));
    m.ratings_.setFromTriplets(triplets.begin(), triplets.end(), [&](double, double) -> double {
        throw Error("duplicate (user, item) rating");
    });
    m.ratings_.makeCompressed();
    return m;
}

std::optional<Eigen::Index> RatingMatrix::user_index(std::string_view user) const { return lookup(user_lookup_, user); }
std::optional<Eigen::Index> RatingMatrix::item_index(std::string_view item) const { return lookup(item_lookup_, item); }

std::optional<double> RatingMatrix::rating(std::string_view user, std::string_view item) const {
    const auto u = user_index(user);
    const auto i = item_index(item);
    if (!u || !i) return std::nullopt;
    for (Storage::InnerIterator it(ratings_, *u); it; ++it) {
        if (it.col() == *i) return it.value();
    }
    return std::nullopt;
}

RatingMatrix scale_ratings(std::span<const Interaction> interactions) {
    std::map<std::pair<std::string, EntityId>, std::uint64_t> counts;
    for (const Interaction& x : interactions) {
        if (x.count < 1) throw Error(fmt::format("interaction ({}, {}) has a zero count", x.user, x.item));
        counts[{x.user, x.item}] += x.count;
    }
    std::map<std::string, std::pair<std::uint64_t, std::uint64_t>> range;  // user -> (min, max)
    for (const auto& [key, c] : counts) {
        auto [it, inserted] = range.try_emplace(key.first, c, c);
        it->second.first = std::min(it->second.first, c);
        it->second.second = std::max(it->second.second, c);
    }
    std::vector<RatingMatrix::Entry> entries;
    entries.reserve(counts.size());
    for (const auto& [key, c] : counts) {
        const auto [lo, hi] = range.at(key.first);
        const double rating = hi == lo ? kMaxRating
                                       : kMinRating + (kMaxRating - kMinRating) * static_cast<double>(c - lo) /
                                                          static_cast<double>(hi - lo);
        entries.push_back({key.first, key.second, rating});
    }
    return RatingMatrix::from_entries(entries);
}

std::vector<EntityId> anti_testset(const RatingMatrix& matrix, std::string_view user) {
    std::vector<bool> rated(matrix.item_count(), false);
    if (const auto u = matrix.user_index(user)) {
        for (RatingMatrix::Storage::InnerIterator it(matrix.ratings(), *u); it; ++it) rated[it.col()] = true;
    }
    std::vector<EntityId> out;
    for (std::size_t i = 0; i < matrix.item_count(); ++i) {
        if (!rated[i]) out.push_back(matrix.items()[i]);
    }
    return out;
}

// ---------------------------------------------------------------------------
// Recommenders

const RatingMatrix& Recommender::matrix() const {
    require_fitted();
    return *matrix_;
}

void Recommender::require_fitted() const {
    if (!matrix_) throw Error(fmt::format("recommender '{}' used before fit()", name()));
}

void BaselineRecommender::fit(const RatingMatrix& matrix) {
    const auto& r = matrix.ratings();
    const auto n_users = r.rows();
    const auto n_items = r.cols();
    mean_ = matrix.rating_count() == 0 ? 0.0 : r.sum() / static_cast<double>(matrix.rating_count());
    user_bias_ = Eigen::VectorXd::Zero(n_users);
    item_bias_ = Eigen::VectorXd::Zero(n_items);

    Eigen::VectorXd user_support = Eigen::VectorXd::Zero(n_users);
    Eigen::VectorXd item_support = Eigen::VectorXd::Zero(n_items);
    for (Eigen::Index u = 0; u < n_users; ++u) {
        for (RatingMatrix::Storage::InnerIterator it(r, u); it; ++it) {
            user_support[u] += 1.0;
            item_support[it.col()] += 1.0;
        }
    }

    Eigen::VectorXd acc_user(n_users), acc_item(n_items);
    for (int pass = 0; pass < opts_.passes; ++pass) {
        acc_user.setZero();
        for (Eigen::Index u = 0; u < n_users; ++u) {
            for (RatingMatrix::Storage::InnerIterator it(r, u); it; ++it) {
                acc_user[u] += it.value() - mean_ - item_bias_[it.col()];
            }
        }
        user_bias_ = acc_user.array() / (opts_.user_reg + user_support.array());

        acc_item.setZero();
        for (Eigen::Index u = 0; u < n_users; ++u) {
            for (RatingMatrix::Storage::InnerIterator it(r, u); it; ++it) {
                acc_item[it.col()] += it.value() - mean_ - user_bias_[u];
            }
        }
        item_bias_ = acc_item.array() / (opts_.item_reg + item_support.array());
    }
    set_matrix(matrix);
}

double BaselineRecommender::predict(std::string_view user, std::string_view item) const {
    require_fitted();
    double estimate = mean_;
    if (const auto u = matrix().user_index(user)) estimate += user_bias_[*u];
    if (const auto i = matrix().item_index(item)) estimate += item_bias_[*i];
    return std::clamp(estimate, kMinRating, kMaxRating);
}

void ItemKnnRecommender::fit(const RatingMatrix& matrix) {
    fallback_.fit(matrix);
    const Eigen::SparseMatrix<double> r = matrix.ratings();
    const Eigen::SparseMatrix<double> squared = r.cwiseProduct(r);
    Eigen::SparseMatrix<double> pattern = r;
    for (Eigen::Index k = 0; k < pattern.outerSize(); ++k) {
        for (Eigen::SparseMatrix<double>::InnerIterator it(pattern, k); it; ++it) it.valueRef() = 1.0;
    }
    // dot(i, j) over common raters, and sum of r_ui^2 over users who also rated j.
    const Eigen::SparseMatrix<double> dot = (r.transpose() * r).pruned();
    const Eigen::SparseMatrix<double> norms = (squared.transpose() * pattern).pruned();

    std::vector<Eigen::Triplet<double>> entries;
    entries.reserve(static_cast<std::size_t>(dot.nonZeros()));
    for (Eigen::Index j = 0; j < dot.outerSize(); ++j) {
        for (Eigen::SparseMatrix<double>::InnerIterator it(dot, j); it; ++it) {
            const Eigen::Index i = it.row();
            if (i == j) {
                entries.emplace_back(i, j, 1.0);
                continue;
            }
            const double denom = std::sqrt(norms.coeff(i, j) * norms.coeff(j, i));
            if (denom > 0.0) entries.emplace_back(i, j, it.value() / denom);
        }
    }
    similarity_.resize(dot.rows(), dot.cols());
    similarity_.setFromTriplets(entries.begin(), entries.end());
    similarity_.makeCompressed();
    set_matrix(matrix);
}

double ItemKnnRecommender::similarity(std::string_view a, std::string_view b) const {
    require_fitted();
    const auto i = matrix().item_index(a);
    const auto j = matrix().item_index(b);
    if (!i || !j) return 0.0;
    return similarity_.coeff(*i, *j);
}

double ItemKnnRecommender::predict(std::string_view user, std::string_view item) const {
    require_fitted();
    const auto u = matrix().user_index(user);
    const auto i = matrix().item_index(item);
    if (!u || !i) return fallback_.predict(user, item);

    // (similarity, item index, rating) for every rated item similar to `item`.
    std::vector<std::tuple<double, Eigen::Index, double>> neighbors;
    for (RatingMatrix::Storage::InnerIterator it(matrix().ratings(), *u); it; ++it) {
        const double sim = similarity_.coeff(it.col(), *i);
        if (sim > 0.0) neighbors.emplace_back(sim, it.col(), it.value());
    }
    if (neighbors.empty()) return fallback_.predict(user, item);
    std::sort(neighbors.begin(), neighbors.end(), [](const auto& a, const auto& b) {
        if (std::get<0>(a) != std::get<0>(b)) return std::get<0>(a) > std::get<0>(b);
        return std::get<1>(a) < std::get<1>(b);
    });
    if (neighbors.size() > k_) neighbors.resize(k_);
    double weighted = 0.0, total = 0.0;
    for (const auto& [sim, j, rating] : neighbors) {
        weighted += sim * rating;
        total += sim;
    }
    return std::clamp(weighted / total, kMinRating, kMaxRating);
}

void PopularityRecommender::fit(const RatingMatrix& matrix) {
    popularity_ = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(matrix.item_count()));
    const auto& r = matrix.ratings();
    for (Eigen::Index u = 0; u < r.outerSize(); ++u) {
        for (RatingMatrix::Storage::InnerIterator it(r, u); it; ++it) popularity_[it.col()] += 1.0;
    }
    set_matrix(matrix);
}

double PopularityRecommender::predict(std::string_view, std::string_view item) const {
    require_fitted();
    const auto i = matrix().item_index(item);
    return i ? popularity_[*i] : 0.0;
}

RecommendationList recommend(const Recommender& model, std::string_view user, std::size_t n) {
    const RatingMatrix& m = model.matrix();
    if (!m.user_index(user)) throw NotFoundError(fmt::format("user '{}' has no ratings", user));
    RecommendationList list;
    list.user = std::string(user);
    for (EntityId& item : anti_testset(m, user)) {
        const double score = model.predict(user, item);
        list.items.push_back({std::move(item), score});
    }
    const auto cmp = [](const ScoredItem& a, const ScoredItem& b) {
        if (a.score != b.score) return a.score > b.score;
        return a.item < b.item;
    };
    if (list.items.size() > n) {
        std::partial_sort(list.items.begin(), list.items.begin() + static_cast<std::ptrdiff_t>(n), list.items.end(), cmp);
        list.items.resize(n);
    } else {
        std::sort(list.items.begin(), list.items.end(), cmp);
    }
    return list;
}

std::unique_ptr<Recommender> make_recommender(std::string_view name, std::size_t knn_k) {
    if (name == "baseline") return std::make_unique<BaselineRecommender>();
    if (name == "itemknn") return std::make_unique<ItemKnnRecommender>(knn_k);
    if (name == "popularity") return std::make_unique<PopularityRecommender>();
    throw Error(fmt::format("unknown recommender '{}'", name));
}

// ---------------------------------------------------------------------------
// Run files

void write_recommendations(std::ostream& out, const std::map<std::string, RecommendationList>& lists) {
    for (const auto& [user, list] : lists) {
        if (has_whitespace(user)) throw Error(fmt::format("user id '{}' contains whitespace", user));
        list.validate();
        for (std::size_t i = 0; i < list.items.size(); ++i) {
            const ScoredItem& s = list.items[i];
            if (has_whitespace(s.item)) throw Error(fmt::format("item id '{}' contains whitespace", s.item));
            out << fmt::format("{} {} {} {}\n", user, i + 1, s.item, s.score);
        }
    }
}

std::map<std::string, RecommendationList> load_external_recommendations(std::istream& in, const std::string& source) {
    std::map<std::string, RecommendationList> lists;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.find_first_not_of(" \t") == std::string::npos) continue;
        std::istringstream fields(line);
        std::string user, rank_text, item, score_text, extra;
        if (!(fields >> user >> rank_text >> item >> score_text) || (fields >> extra)) {
            throw ParseError(source, lineno, "expected '<user_id> <rank> <item_id> <score>'");
        }
        std::size_t rank = 0;
        double score = 0.0;
        if (!parse_number(rank_text, rank) || rank < 1) throw ParseError(source, lineno, "rank must be a positive integer");
        if (!parse_number(score_text, score)) throw ParseError(source, lineno, "score is not a number");

        RecommendationList& list = lists[user];
        list.user = user;
        if (rank != list.items.size() + 1) {
            throw ParseError(source, lineno, fmt::format("expected rank {} for user '{}'", list.items.size() + 1, user));
        }
        if (!list.items.empty() && score > list.items.back().score) {
            throw ParseError(source, lineno, fmt::format("score increases at rank {} for user '{}'", rank, user));
        }
        for (const ScoredItem& s : list.items) {
            if (s.item == item) throw ParseError(source, lineno, fmt::format("item '{}' repeated for user '{}'", item, user));
        }
        list.items.push_back({item, score});
    }
    return lists;
}

}  // namespace kgrerank
