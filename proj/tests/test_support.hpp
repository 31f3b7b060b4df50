// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The kgrerank Authors

#pragma once

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <map>
#include <random>
#include <string>
#include <vector>

#include "kgrerank/graph.hpp"
#include "kgrerank/graph_io.hpp"
#include "kgrerank/recsys.hpp"
#include "kgrerank/rerank.hpp"

namespace testing_support {

inline std::filesystem::path fixture(const std::string& relative) {
    return std::filesystem::path(KGRERANK_FIXTURE_DIR) / relative;
}

inline kgrerank::CatalogGraph load_export(const std::filesystem::path& dir) {
    std::ifstream nodes(dir / "catalog.nodes.tsv");
    std::ifstream triples(dir / "catalog.triples.tsv");
    return kgrerank::read_graph_export(nodes, triples);
}

inline std::map<std::string, kgrerank::RecommendationList> load_run(const std::filesystem::path& file) {
    std::ifstream in(file);
    return kgrerank::load_external_recommendations(in, file.string());
}

inline kgrerank::Triple triple(const std::string& s, kgrerank::EntityKind sk, const std::string& p, const std::string& t,
                               kgrerank::EntityKind tk) {
    return {{s, sk, s}, p, {t, tk, t}};
}

// Random catalog: `tracks` recommendable items linked to `enrichers` shared
// concepts, plus occasional concept-to-concept edges.
inline kgrerank::CatalogGraph random_catalog(std::mt19937_64& rng, std::size_t tracks, std::size_t enrichers,
                                             double p_link = 0.25) {
    using Tag = kgrerank::EntityKind::Tag;
    std::bernoulli_distribution link(p_link), concept_link(0.05);
    std::vector<kgrerank::Triple> triples;
    std::vector<kgrerank::EntityRef> nodes;
    for (std::size_t t = 0; t < tracks; ++t) {
        const std::string id = "t" + std::to_string(t);
        nodes.push_back({id, Tag::Track, id});
        for (std::size_t e = 0; e < enrichers; ++e) {
            if (link(rng)) {
                triples.push_back({{id, Tag::Track, id}, e % 2 ? "genre" : "maker", {"e" + std::to_string(e), Tag::Genre, ""}});
            }
        }
    }
    for (std::size_t a = 0; a < enrichers; ++a) {
        for (std::size_t b = 0; b < enrichers; ++b) {
            if (a != b && concept_link(rng)) {
                triples.push_back({{"e" + std::to_string(a), Tag::Genre, ""}, "related", {"e" + std::to_string(b), Tag::Genre, ""}});
            }
        }
    }
    return kgrerank::build_catalog(triples, nodes);
}

using kgrerank::CatalogGraph;
using kgrerank::EntityId;
using kgrerank::NodeIndex;
using kgrerank::ProfileSubgraph;
using kgrerank::RecommendationList;

// Fixtures shared by the rerank tests: a catalog, one profile subgraph and its base list.
struct Fixture {
    CatalogGraph catalog;
    ProfileSubgraph sg;
    RecommendationList recs;
};

inline Fixture profile_extension() {
    Fixture f;
    f.catalog = load_export(fixture("profile_extension"));
    f.sg = kgrerank::induce_profile_subgraph(f.catalog, std::vector<EntityId>{"t1", "t2", "t3"}, "fig");
    f.recs = load_run(fixture("profile_extension/base.run")).at("fig");
    return f;
}

// Random profile plus a candidate list of every recommendable item outside the history.
inline Fixture random_fixture(std::mt19937_64& rng, std::size_t tracks = 20, std::size_t enrichers = 14,
                              bool equal_scores = false) {
    Fixture f;
    f.catalog = random_catalog(rng, tracks, enrichers);
    std::bernoulli_distribution pick(0.3);
    std::vector<EntityId> history;
    std::vector<EntityId> candidates;
    for (NodeIndex n : f.catalog.recommendable()) {
        (pick(rng) ? history : candidates).push_back(f.catalog.node(n).id);
    }
    f.sg = kgrerank::induce_profile_subgraph(f.catalog, history, "u");
    f.recs.user = "u";
    std::uniform_int_distribution<int> score(1, 5);
    std::vector<double> scores;
    for (std::size_t i = 0; i < candidates.size(); ++i) scores.push_back(equal_scores ? 1.0 : score(rng));
    std::sort(scores.rbegin(), scores.rend());
    std::shuffle(candidates.begin(), candidates.end(), rng);
    for (std::size_t i = 0; i < candidates.size(); ++i) f.recs.items.push_back({candidates[i], scores[i]});
    return f;
}

}  // namespace testing_support
