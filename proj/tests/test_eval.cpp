// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The kgrerank Authors

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include "kgrerank/eval.hpp"
#include "oracles.hpp"

using namespace kgrerank;

namespace {

FeatureVector fv(std::initializer_list<double> v) {
    FeatureVector out = FeatureVector::Zero();
    int i = 0;
    for (double x : v) out(i++) = x;
    return out;
}

std::vector<double> as_vec(const FeatureVector& v) { return {v.data(), v.data() + v.size()}; }

FeatureVector random_feature(std::mt19937_64& rng) {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    FeatureVector v;
    do {
        for (int i = 0; i < kFeatureDims; ++i) v(i) = u(rng) < 0.2 ? 0.0 : u(rng);
    } while (v.isZero());
    return v;
}

}  // namespace

TEST(Cosine, Examples) {
    EXPECT_NEAR(cosine_distance(fv({1, 0}), fv({1, 1})), 1.0 - 1.0 / std::sqrt(2.0), 1e-12);
    EXPECT_NEAR(cosine_distance(fv({1, 0}), fv({1, 1})), 0.2929, 1e-4);
    EXPECT_EQ(cosine_distance(fv({0.3, 0.3}), fv({0.6, 0.6})), 0.0);
    EXPECT_NEAR(cosine_distance(fv({1, 0}), fv({0, 1})), 1.0, 1e-15);
    EXPECT_THROW(cosine_distance(fv({1}), FeatureVector::Zero().eval()), Error);
}

TEST(FeatureStoreTest, RejectsOutOfRangeAndZero) {
    FeatureStore store;
    store.insert("a", fv({0.5, 1.0}));
    EXPECT_THROW(store.insert("b", fv({1.2})), Error);
    EXPECT_THROW(store.insert("c", fv({-0.1, 0.5})), Error);
    EXPECT_THROW(store.insert("d", FeatureVector::Zero()), Error);
    EXPECT_EQ(store.size(), 1u);
    EXPECT_TRUE(store.contains("a"));
    EXPECT_THROW(store.at("zzz"), NotFoundError);
}

TEST(Ild, Examples) {
    FeatureStore s;
    s.insert("x", fv({1, 0}));
    s.insert("y", fv({0, 1}));
    s.insert("z", fv({1, 1}));
    const std::vector<EntityId> one = {"x"};
    const std::vector<EntityId> pair = {"x", "y"};
    const std::vector<EntityId> same = {"x", "x"};
    const std::vector<EntityId> three = {"x", "y", "z"};
    EXPECT_EQ(ild(std::span<const EntityId>(), s), 0.0);
    EXPECT_EQ(ild(one, s), 0.0);
    EXPECT_NEAR(ild(pair, s), 1.0, 1e-15);
    EXPECT_EQ(ild(same, s), 0.0);
    // Pairs: (x,y) 1, (x,z) and (y,z) 1 - 1/sqrt2 each.
    EXPECT_NEAR(ild(three, s), (1.0 + 2.0 * (1.0 - 1.0 / std::sqrt(2.0))) / 3.0, 1e-12);
    const std::vector<EntityId> missing = {"x", "nope"};
    EXPECT_THROW(ild(missing, s), NotFoundError);
}

TEST(Unexpectedness, Examples) {
    FeatureStore s;
    s.insert("h", fv({1, 0}));
    s.insert("r1", fv({0, 1}));
    s.insert("r2", fv({0.5, 0}));
    const std::vector<EntityId> h = {"h"};
    const std::vector<EntityId> r = {"r1", "r2"};
    EXPECT_NEAR(unexpectedness(h, r, s), 0.5, 1e-15);
    EXPECT_EQ(unexpectedness(h, h, s), 0.0);
    EXPECT_THROW(unexpectedness(std::span<const EntityId>(), r, s), Error);
}

TEST(Diversity, MatchesPairwiseOracleAndIsPermutationInvariant) {
    std::mt19937_64 rng(77);
    std::uniform_int_distribution<int> size(1, 12);
    for (int trial = 0; trial < 200; ++trial) {
        FeatureStore store;
        std::vector<EntityId> recs, hist;
        std::vector<std::vector<double>> rv, hv;
        const int nr = size(rng), nh = size(rng);
        for (int i = 0; i < nr + nh; ++i) {
            const FeatureVector v = random_feature(rng);
            const EntityId id = "i" + std::to_string(i);
            store.insert(id, v);
            (i < nr ? recs : hist).push_back(id);
            (i < nr ? rv : hv).push_back(as_vec(v));
        }
        const double got_ild = ild(recs, store);
        const double got_unexp = unexpectedness(hist, recs, store);
        EXPECT_NEAR(got_ild, oracle::ild(rv), 1e-12);
        EXPECT_NEAR(got_unexp, oracle::unexpectedness(hv, rv), 1e-12);
        EXPECT_GE(got_ild, 0.0);
        EXPECT_LE(got_ild, 1.0);
        EXPECT_GE(got_unexp, 0.0);
        EXPECT_LE(got_unexp, 1.0);
        std::shuffle(recs.begin(), recs.end(), rng);
        std::shuffle(hist.begin(), hist.end(), rng);
        EXPECT_NEAR(ild(recs, store), got_ild, 1e-12);
        EXPECT_NEAR(unexpectedness(hist, recs, store), got_unexp, 1e-12);
    }
}

TEST(Diversity, FloatScalarMatchesDouble) {
    Eigen::Matrix<float, kFeatureDims, 3> m;
    m.setZero();
    m(0, 0) = 1.0f;
    m(1, 1) = 1.0f;
    m(0, 2) = 1.0f;
    m(1, 2) = 1.0f;
    const float got = ild(m);
    EXPECT_NEAR(got, (1.0 + 2.0 * (1.0 - 1.0 / std::sqrt(2.0))) / 3.0, 1e-6);
}

TEST(Ndcg, Examples) {
    const std::vector<EntityId> base = {"a", "b", "c"};
    EXPECT_EQ(ndcg_at_k(base, base, 3), 1.0);
    const std::vector<EntityId> rev = {"c", "b", "a"};
    // Relevances 3,2,1; reversed DCG = 1 + 2/log2(3) + 3/2.
    const double ideal = 3.0 + 2.0 / std::log2(3.0) + 0.5;
    const double got = 1.0 + 2.0 / std::log2(3.0) + 1.5;
    EXPECT_NEAR(ndcg_at_k(base, rev, 3), got / ideal, 1e-12);
    const std::vector<EntityId> other = {"x", "y", "z"};
    EXPECT_EQ(ndcg_at_k(base, other, 3), 0.0);
    EXPECT_EQ(ndcg_at_k(std::span<const EntityId>(), other, 3), 0.0);
    // Only the first k positions count.
    const std::vector<EntityId> late = {"x", "y", "a"};
    EXPECT_EQ(ndcg_at_k(base, late, 2), 0.0);
}

TEST(Ndcg, MatchesOracleWithinUnitInterval) {
    std::mt19937_64 rng(8);
    std::vector<EntityId> pool;
    for (int i = 0; i < 30; ++i) pool.push_back("p" + std::to_string(i));
    std::uniform_int_distribution<std::size_t> len(0, 20), kd(1, 15);
    for (int trial = 0; trial < 500; ++trial) {
        std::shuffle(pool.begin(), pool.end(), rng);
        std::vector<EntityId> base(pool.begin(), pool.begin() + static_cast<long>(len(rng)));
        std::shuffle(pool.begin(), pool.end(), rng);
        std::vector<EntityId> rr(pool.begin(), pool.begin() + static_cast<long>(len(rng)));
        const std::size_t k = kd(rng);
        const double got = ndcg_at_k(base, rr, k);
        EXPECT_NEAR(got, oracle::ndcg(base, rr, k), 1e-12);
        EXPECT_GE(got, 0.0);
        EXPECT_LE(got, 1.0);
        EXPECT_EQ(ndcg_at_k(base, base, k), base.empty() ? 0.0 : 1.0);
    }
}

TEST(Report, HeaderOnlyForNoRows) {
    std::ostringstream report, summary;
    write_report(report, {});
    write_report_summary(summary, {});
    EXPECT_EQ(report.str(), "user,metric,order,ild,unexpectedness,ndcg10\n");
    EXPECT_EQ(summary.str(), "metric,order,users,ild,unexpectedness,ndcg10\n");
}

TEST(Report, RowsAndSummaryMeans) {
    const std::vector<ReportRow> rows = {
        {"u1", "base", "none", 0.5, 0.25, std::nullopt},
        {"u1", "betweenness", "asc", 0.1, 0.2, 0.3},
        {"u2", "base", "none", 0.25, std::nullopt, std::nullopt},
        {"u,2", "betweenness", "asc", 0.3, 0.4, 0.5},
    };
    std::ostringstream report, summary;
    write_report(report, rows);
    write_report_summary(summary, rows);
    EXPECT_EQ(report.str(),
              "user,metric,order,ild,unexpectedness,ndcg10\n"
              "u1,base,none,0.5000000000,0.2500000000,\n"
              "u1,betweenness,asc,0.1000000000,0.2000000000,0.3000000000\n"
              "u2,base,none,0.2500000000,,\n"
              "\"u,2\",betweenness,asc,0.3000000000,0.4000000000,0.5000000000\n");
    EXPECT_EQ(summary.str(),
              "metric,order,users,ild,unexpectedness,ndcg10\n"
              "base,none,2,0.3750000000,0.2500000000,\n"
              "betweenness,asc,2,0.2000000000,0.3000000000,0.4000000000\n");
}

TEST(Report, EmitWritesBothFiles) {
    const auto dir = std::filesystem::temp_directory_path() / "kgrerank_emit_report";
    std::filesystem::remove_all(dir);
    const std::vector<ReportRow> rows = {{"u", "m", "asc", 0.1, 0.2, 0.3}};
    emit_report(rows, dir);
    EXPECT_TRUE(std::filesystem::exists(dir / "report.csv"));
    EXPECT_TRUE(std::filesystem::exists(dir / "report_summary.csv"));
    std::filesystem::remove_all(dir);
}

TEST(TrecFormats, QrelsAndRun) {
    std::map<std::string, RecommendationList> base;
    base["u"] = {"u", {{"a", 3}, {"b", 2}, {"c", 1}}};
    std::ostringstream qrels;
    write_qrels(qrels, base, 2);
    EXPECT_EQ(qrels.str(), "u 0 a 2\nu 0 b 1\n");
    std::ostringstream run;
    const std::vector<EntityId> items = {"c", "a", "b"};
    write_trec_run(run, "u", items, "tag");
    EXPECT_EQ(run.str(), "u Q0 c 1 3 tag\nu Q0 a 2 2 tag\nu Q0 b 3 1 tag\n");
}
