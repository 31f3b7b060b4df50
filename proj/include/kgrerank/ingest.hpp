// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The kgrerank Authors

#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "kgrerank/eval.hpp"
#include "kgrerank/graph.hpp"
#include "kgrerank/recsys.hpp"
#include "kgrerank/table.hpp"

namespace kgrerank {

/// One line of the ingest summary: `{"stage": ..., "count": ..., "reason": ...}`.
struct SummaryRecord {
    std::string stage;
    std::size_t count;
    std::string reason;
};

void write_summary_jsonl(std::ostream& out, std::span<const SummaryRecord> records);

/// Deterministic per-key seed derived from a run seed (FNV-1a of the key mixed into `seed`).
std::uint64_t derive_seed(std::uint64_t seed, std::string_view key);

// ---------------------------------------------------------------------------
// LastFM-style music data

/// Entity ids used for the music catalog.
EntityId track_entity(std::string_view track_id);    // "t_<id>"
EntityId artist_entity(std::string_view artist_id);  // "a_<id>"
EntityId genre_entity(std::string_view genre);       // "g_<genre>", whitespace replaced by '_'

struct LastfmStats {
    std::size_t events = 0;
    std::size_t users = 0;
    std::size_t artists = 0;
    std::size_t tracks = 0;
    std::size_t genres = 0;
};

struct LastfmData {
    std::vector<Interaction> interactions;  // aggregated, sorted by (user, item)
    std::vector<Triple> triples;            // track -maker-> artist, track -genre-> genre
    FeatureStore features;                  // one vector per surviving track
    LastfmStats stats;
    std::size_t input_events = 0;
    std::size_t dropped_events = 0;
    std::vector<SummaryRecord> summary;
};

/// Joins listening events (TSV: user_id, artist_id, track_id[, timestamp]),
/// acoustic features (CSV: track_id plus the eight feature columns, tempo in
/// BPM) and genres (TSV: track_id, genre).
///
/// Features are an inner join: events of tracks without a usable feature row
/// are dropped and counted. Genres are a left join. Tempo is min-max scaled
/// over the feature table; rows whose other features fall outside [0, 1] or
/// whose vector is all zero are rejected.
LastfmData merge_lastfm(const Table& events, const Table& features, const Table& genres);

/// Seeded uniform sample of `n` users with at least `min_unique_items`
/// distinct items, returned sorted. Throws if fewer users are eligible.
std::vector<std::string> sample_users(std::span<const Interaction> interactions, std::size_t n,
                                      std::size_t min_unique_items, std::uint64_t seed);

// ---------------------------------------------------------------------------
// Netflix titles

struct TitleRecord {
    std::string show_id;
    EntityKind kind;  // Movie or TvShow
    std::string title;
    std::vector<std::string> directors;
    std::vector<std::string> cast;
    std::vector<std::string> countries;
    std::string release_year;
    std::string rating;
    std::string duration;
    std::vector<std::string> genres;
    std::string description;
};

struct NetflixData {
    std::vector<Triple> triples;
    std::vector<EntityRef> titles;  // every title, including ones without edges
    std::vector<TitleRecord> records;
};

/// Emits person -directs-> title, person -acts_on-> title, title -country->
/// country, title -genre-> genre and title -rating-> rating. Multi-valued
/// cells are split on commas and trimmed; empty cells are skipped.
NetflixData load_netflix(const Table& titles);

/// Catalog with title attributes (title, release_year, duration, description).
CatalogGraph build_netflix_catalog(const NetflixData& data);

// ---------------------------------------------------------------------------
// Synthetic profiles and splits

struct SyntheticProfileConfig {
    std::size_t n_profiles = 88;
    std::size_t min_items = 5;
    std::size_t max_items = 55;
    std::uint64_t seed = 42;
};

/// Histories of uniformly distributed size in [min_items, max_items], drawn
/// without replacement from the recommendable nodes; each sorted by id.
std::vector<std::vector<EntityId>> generate_profiles(const CatalogGraph& catalog, const SyntheticProfileConfig& cfg);

struct Split {
    std::vector<EntityId> train;
    std::vector<EntityId> test;
};

/// Seeded shuffle, then round-half-up(ratio * n) items to train. With n >= 2
/// both parts are non-empty; with n < 2 everything goes to train and a
/// warning is logged. Both parts are returned sorted.
Split split_interactions(std::span<const EntityId> history, double ratio, std::uint64_t seed);

// ---------------------------------------------------------------------------
// Synthetic two-cluster music data

struct SyntheticMusicConfig {
    std::size_t tracks = 200;
    std::size_t users = 30;
    std::size_t artists_per_cluster = 12;
    std::size_t genres_per_cluster = 4;
    std::size_t min_history = 15;
    std::size_t max_history = 30;
    /// Probability that a history item is drawn from the user's home cluster.
    double home_share = 0.9;
    std::uint64_t seed = 7;
};

struct SyntheticMusicTables {
    Table events;
    Table features;
    Table genres;
};

/// Two acoustically well-separated clusters of tracks with disjoint artists
/// and genres. Every user's home cluster is cluster 0; track popularity is
/// Zipf-like within a cluster. Output uses the same layout merge_lastfm reads.
SyntheticMusicTables make_synthetic_music(const SyntheticMusicConfig& cfg);

/// Cluster (0 or 1) of a synthetic track entity, by construction of make_synthetic_music.
int synthetic_cluster(std::string_view track_entity_id, const SyntheticMusicConfig& cfg);

}  // namespace kgrerank
