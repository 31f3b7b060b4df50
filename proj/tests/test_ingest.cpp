// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The kgrerank Authors

#include <gtest/gtest.h>

#include <algorithm>
#include <map>
#include <set>
#include <sstream>

#include "json.hpp"
#include "kgrerank/ingest.hpp"
#include "test_support.hpp"

using namespace kgrerank;
using testing_support::fixture;

namespace {

LastfmData load_tiny() {
    return merge_lastfm(read_tsv_file(fixture("lastfm_tiny/events.tsv")),
                        read_csv_file(fixture("lastfm_tiny/features.csv")),
                        read_tsv_file(fixture("lastfm_tiny/genres.tsv")));
}

std::size_t summary_count(const LastfmData& d, const std::string& reason) {
    for (const auto& r : d.summary)
        if (r.reason == reason) return r.count;
    ADD_FAILURE() << "no summary record " << reason;
    return 0;
}

Table csv_text(const std::string& text) {
    std::istringstream in(text);
    return read_csv(in, "inline.csv");
}

}  // namespace

TEST(Lastfm, TinyFixtureCounts) {
    const LastfmData d = load_tiny();
    EXPECT_EQ(d.input_events, 29u);
    EXPECT_EQ(d.dropped_events, 4u);
    EXPECT_EQ(summary_count(d, "dropped_missing_features"), 3u);
    EXPECT_EQ(summary_count(d, "dropped_missing_key"), 1u);
    EXPECT_EQ(summary_count(d, "surviving_events"), 25u);
    EXPECT_EQ(summary_count(d, "feature_rows_out_of_range"), 1u);
    EXPECT_EQ(summary_count(d, "feature_rows_zero_norm"), 1u);
    EXPECT_EQ(d.stats.events, 25u);
    EXPECT_EQ(d.stats.users, 3u);
    EXPECT_EQ(d.stats.tracks, 18u);
    EXPECT_EQ(d.stats.artists, 3u);
    EXPECT_EQ(d.stats.genres, 4u);
    EXPECT_EQ(d.triples.size(), 35u);
    EXPECT_EQ(d.features.size(), 18u);

    std::map<std::string, std::size_t> per_user;
    std::uint64_t plays = 0;
    for (const auto& x : d.interactions) {
        ++per_user[x.user];
        plays += x.count;
    }
    EXPECT_EQ(per_user, (std::map<std::string, std::size_t>{{"u1", 5}, {"u2", 7}, {"u3", 8}}));
    EXPECT_EQ(plays, d.stats.events);
}

TEST(Lastfm, EventConservation) {
    const LastfmData d = load_tiny();
    EXPECT_EQ(d.input_events, d.stats.events + d.dropped_events);
    EXPECT_EQ(summary_count(d, "input_events"),
              summary_count(d, "surviving_events") + summary_count(d, "dropped_missing_features") +
                  summary_count(d, "dropped_missing_key"));
}

TEST(Lastfm, AggregatesRepeatedPlaysAndNamesEntities) {
    const LastfmData d = load_tiny();
    auto find = [&](const std::string& u, const std::string& item) {
        return std::find_if(d.interactions.begin(), d.interactions.end(),
                            [&](const Interaction& x) { return x.user == u && x.item == item; });
    };
    ASSERT_NE(find("u1", "t_1"), d.interactions.end());
    EXPECT_EQ(find("u1", "t_1")->count, 3u);
    EXPECT_EQ(find("u1", "t_3")->count, 2u);
    EXPECT_EQ(find("u2", "t_6")->count, 3u);
    EXPECT_EQ(find("u1", "t_19"), d.interactions.end());
    EXPECT_TRUE(std::is_sorted(d.interactions.begin(), d.interactions.end(), [](const auto& a, const auto& b) {
        return std::tie(a.user, a.item) < std::tie(b.user, b.item);
    }));

    std::set<std::string> genres;
    for (const auto& t : d.triples)
        if (t.predicate == "genre") genres.insert(t.target.id);
    EXPECT_EQ(genres, (std::set<std::string>{"g_hip_hop", "g_indie", "g_jazz", "g_rock"}));
    EXPECT_EQ(genre_entity("hip hop"), "g_hip_hop");
    EXPECT_EQ(track_entity("7"), "t_7");
    EXPECT_EQ(artist_entity("10"), "a_10");
}

TEST(Lastfm, TempoIsMinMaxScaled) {
    const LastfmData d = load_tiny();
    EXPECT_EQ(d.features.at("t_1")(kFeatureDims - 1), 0.0);
    EXPECT_EQ(d.features.at("t_2")(kFeatureDims - 1), 1.0);
    for (const auto& [id, v] : d.features.entries()) {
        EXPECT_GE(v.minCoeff(), 0.0) << id;
        EXPECT_LE(v.maxCoeff(), 1.0) << id;
    }
}

TEST(Lastfm, MissingColumnIsParseError) {
    std::istringstream ev("user_id\ttrack_id\nu\t1\n");
    const Table events = read_tsv(ev, "events");
    EXPECT_THROW(merge_lastfm(events, read_csv_file(fixture("lastfm_tiny/features.csv")),
                              read_tsv_file(fixture("lastfm_tiny/genres.tsv"))),
                 ParseError);
}

TEST(Sampling, SeededEligibleUsers) {
    const LastfmData d = load_tiny();
    const auto all = sample_users(d.interactions, 3, 1, 5);
    EXPECT_EQ(all, (std::vector<std::string>{"u1", "u2", "u3"}));
    const auto big = sample_users(d.interactions, 2, 6, 5);
    EXPECT_EQ(big, (std::vector<std::string>{"u2", "u3"}));
    EXPECT_THROW(sample_users(d.interactions, 2, 8, 5), Error);
    EXPECT_EQ(sample_users(d.interactions, 1, 1, 99), sample_users(d.interactions, 1, 1, 99));
}

TEST(Netflix, TinyFixtureTriplesAndNodes) {
    const NetflixData d = load_netflix(read_csv_file(fixture("netflix_tiny/titles.csv")));
    EXPECT_EQ(d.titles.size(), 5u);
    EXPECT_EQ(d.triples.size(), 24u);
    const CatalogGraph g = build_netflix_catalog(d);
    EXPECT_EQ(g.node_count(), 24u);
    EXPECT_EQ(g.edge_count(), 24u);
    EXPECT_EQ(g.recommendable().size(), 5u);
    std::map<std::string, std::size_t> kinds;
    for (const Node& n : g.nodes()) ++kinds[n.kind.name()];
    EXPECT_EQ(kinds.size(), 6u);

    const Node& s2 = g.node(g.index_of("s2"));
    EXPECT_EQ(s2.attributes.at("description"), "Two detectives.\nOne city.");
    const Node& s1 = g.node(g.index_of("s1"));
    EXPECT_EQ(s1.attributes.at("description"), "A fisherman, a storm and a \"lost\" letter.");
    EXPECT_EQ(s1.attributes.at("release_year"), "2020");

    // A title with no director, cast or country keeps only genre and rating.
    const NodeIndex s5 = g.index_of("s5");
    EXPECT_EQ(g.degree(s5), 2u);
    // Blank rating and country leave the documentary with a director and a genre.
    EXPECT_EQ(g.degree(g.index_of("s3")), 2u);
    // Shared people become hubs.
    EXPECT_EQ(g.degree(g.index_of("person:Ana Ruiz")), 3u);
}

TEST(Netflix, PersonEdgesPerCredit) {
    const Table t = csv_text(
        "show_id,type,title,director,cast,country,rating,listed_in\n"
        "x1,Movie,X,\"D1, D2\",\"C1, C2 , C3\",,,Dramas\n");
    const NetflixData d = load_netflix(t);
    std::size_t directs = 0, acts = 0;
    for (const auto& tr : d.triples) {
        if (tr.predicate == "directs") ++directs;
        if (tr.predicate == "acts_on") ++acts;
        if (tr.predicate == "directs" || tr.predicate == "acts_on") {
            EXPECT_EQ(tr.target.id, "x1");
            EXPECT_EQ(tr.source.kind, EntityKind::Tag::Person);
        }
    }
    EXPECT_EQ(directs, 2u);
    EXPECT_EQ(acts, 3u);
    EXPECT_EQ(d.triples.size(), 6u);
}

TEST(Netflix, BadRows) {
    EXPECT_THROW(load_netflix(csv_text("show_id,type,title,director,cast,country,rating,listed_in\n"
                                       "x1,Film,X,,,,,\n")),
                 ParseError);
    EXPECT_THROW(load_netflix(csv_text("show_id,type,title,director,cast,country,rating,listed_in\n"
                                       "x1,Movie,X,,,,,\nx1,Movie,Y,,,,,\n")),
                 ParseError);
    EXPECT_THROW(load_netflix(csv_text("show_id,type,title\nx1,Movie,X\n")), ParseError);
}

TEST(Profiles, SizesWithinRangeAndDeterministic) {
    std::mt19937_64 rng(1);
    const CatalogGraph g = testing_support::random_catalog(rng, 120, 10);
    const SyntheticProfileConfig cfg{};
    const auto a = generate_profiles(g, cfg);
    const auto b = generate_profiles(g, cfg);
    EXPECT_EQ(a, b);
    ASSERT_EQ(a.size(), 88u);
    for (const auto& p : a) {
        EXPECT_GE(p.size(), 5u);
        EXPECT_LE(p.size(), 55u);
        EXPECT_TRUE(std::is_sorted(p.begin(), p.end()));
        EXPECT_EQ(std::set<EntityId>(p.begin(), p.end()).size(), p.size());
        for (const auto& id : p) EXPECT_TRUE(g.is_recommendable(g.index_of(id)));
    }
    SyntheticProfileConfig other = cfg;
    other.seed = 43;
    EXPECT_NE(generate_profiles(g, other), a);
    other.max_items = 500;
    EXPECT_THROW(generate_profiles(g, other), Error);
    other.max_items = 3;
    EXPECT_THROW(generate_profiles(g, other), Error);
}

TEST(Split, RoundHalfUpAndNonEmptyParts) {
    std::vector<EntityId> ten, five, one = {"only"};
    for (int i = 0; i < 10; ++i) ten.push_back("i" + std::to_string(i));
    for (int i = 0; i < 5; ++i) five.push_back("i" + std::to_string(i));
    auto s = split_interactions(ten, 0.9, 1);
    EXPECT_EQ(s.train.size(), 9u);
    EXPECT_EQ(s.test.size(), 1u);
    s = split_interactions(five, 0.9, 1);  // 4.5 rounds up to 5, capped at n - 1
    EXPECT_EQ(s.train.size(), 4u);
    EXPECT_EQ(s.test.size(), 1u);
    s = split_interactions(five, 0.7, 1);  // 3.5 -> 4
    EXPECT_EQ(s.train.size(), 4u);
    s = split_interactions(one, 0.5, 1);
    EXPECT_EQ(s.train, one);
    EXPECT_TRUE(s.test.empty());
    EXPECT_THROW(split_interactions(ten, 1.0, 1), Error);
}

TEST(Split, PartitionProperty) {
    std::mt19937_64 rng(12);
    std::uniform_int_distribution<int> n(0, 40);
    std::uniform_real_distribution<double> ratio(0.05, 0.95);
    for (int trial = 0; trial < 200; ++trial) {
        std::vector<EntityId> h;
        const int size = n(rng);
        for (int i = 0; i < size; ++i) h.push_back("x" + std::to_string(i));
        const double r = ratio(rng);
        const auto seed = rng();
        const Split s = split_interactions(h, r, seed);
        std::vector<EntityId> all = s.train;
        all.insert(all.end(), s.test.begin(), s.test.end());
        std::sort(all.begin(), all.end());
        auto sorted = h;
        std::sort(sorted.begin(), sorted.end());
        EXPECT_EQ(all, sorted);
        if (size >= 2) {
            EXPECT_FALSE(s.train.empty());
            EXPECT_FALSE(s.test.empty());
        }
        EXPECT_EQ(split_interactions(h, r, seed).test, s.test);
    }
}

TEST(Synthetic, ClustersAreSeparatedAndMergeable) {
    SyntheticMusicConfig cfg;
    cfg.tracks = 40;
    cfg.users = 6;
    cfg.min_history = 5;
    cfg.max_history = 10;
    const SyntheticMusicTables t = make_synthetic_music(cfg);
    const LastfmData d = merge_lastfm(t.events, t.features, t.genres);
    EXPECT_EQ(d.dropped_events, 0u);
    EXPECT_EQ(d.stats.users, 6u);

    // Artists and genres never cross clusters.
    std::map<std::string, std::set<int>> concept_clusters;
    for (const auto& tr : d.triples) concept_clusters[tr.target.id].insert(synthetic_cluster(tr.source.id, cfg));
    for (const auto& [id, cs] : concept_clusters) EXPECT_EQ(cs.size(), 1u) << id;

    // Same-cluster tracks are closer than cross-cluster tracks on average.
    double within = 0, across = 0;
    std::size_t nw = 0, na = 0;
    for (const auto& [a, va] : d.features.entries())
        for (const auto& [b, vb] : d.features.entries()) {
            if (a >= b) continue;
            const double dist = cosine_distance(va, vb);
            if (synthetic_cluster(a, cfg) == synthetic_cluster(b, cfg)) {
                within += dist;
                ++nw;
            } else {
                across += dist;
                ++na;
            }
        }
    ASSERT_GT(nw, 0u);
    ASSERT_GT(na, 0u);
    EXPECT_LT(within / static_cast<double>(nw), across / static_cast<double>(na));

    const SyntheticMusicTables again = make_synthetic_music(cfg);
    EXPECT_EQ(again.events.rows, t.events.rows);
    EXPECT_EQ(again.features.rows, t.features.rows);
    EXPECT_THROW(synthetic_cluster("a_1", cfg), Error);
    cfg.max_history = 30;
    EXPECT_THROW(make_synthetic_music(cfg), Error);
}

TEST(Summary, JsonLinesAndSeeds) {
    const std::vector<SummaryRecord> records = {{"merge", 3, "dropped"}, {"prune", 0, "degree_one"}};
    std::ostringstream out;
    write_summary_jsonl(out, records);
    std::istringstream in(out.str());
    std::string line;
    std::size_t n = 0;
    while (std::getline(in, line)) {
        const auto j = nlohmann::json::parse(line);
        EXPECT_EQ(j.at("stage"), records[n].stage);
        EXPECT_EQ(j.at("count"), records[n].count);
        EXPECT_EQ(j.at("reason"), records[n].reason);
        ++n;
    }
    EXPECT_EQ(n, 2u);
    EXPECT_EQ(derive_seed(42, "a"), derive_seed(42, "a"));
    EXPECT_NE(derive_seed(42, "a"), derive_seed(42, "b"));
    EXPECT_NE(derive_seed(42, "a"), derive_seed(43, "a"));
}
