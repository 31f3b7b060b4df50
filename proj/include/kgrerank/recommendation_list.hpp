// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The kgrerank Authors

#pragma once

#include <string>
#include <vector>

#include "kgrerank/graph.hpp"

namespace kgrerank {

struct ScoredItem {
    EntityId item;
    double score;

    friend bool operator==(const ScoredItem&, const ScoredItem&) = default;
};

/// Output of a base recommender for one user: unique items, scores non-increasing.
struct RecommendationList {
    std::string user;
    std::vector<ScoredItem> items;

    /// Throws Error on duplicate items or increasing scores.
    void validate() const;

    friend bool operator==(const RecommendationList&, const RecommendationList&) = default;
};

}  // namespace kgrerank
