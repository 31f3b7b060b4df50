// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The kgrerank Authors

#include "kgrerank/ingest.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <map>
#include <ostream>
#include <random>
#include <set>

#include <fmt/format.h>
#include <spdlog/spdlog.h>

#include "json.hpp"
#include "kgrerank/error.hpp"

namespace kgrerank {
namespace {

std::string trim(std::string_view s) {
    const auto first = s.find_first_not_of(" \t\r\n");
    if (first == std::string_view::npos) return {};
    const auto last = s.find_last_not_of(" \t\r\n");
    return std::string(s.substr(first, last - first + 1));
}

std::vector<std::string> split_list(std::string_view cell) {
    std::vector<std::string> out;
    std::size_t start = 0;
    while (start <= cell.size()) {
        const auto comma = cell.find(',', start);
        std::string part = trim(cell.substr(start, comma == std::string_view::npos ? cell.npos : comma - start));
        if (!part.empty() && std::find(out.begin(), out.end(), part) == out.end()) out.push_back(std::move(part));
        if (comma == std::string_view::npos) break;
        start = comma + 1;
    }
    return out;
}

double parse_double(const Table& t, std::size_t row, std::size_t col) {
    const std::string text = trim(t.rows[row][col]);
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
    if (ec != std::errc() || ptr != text.data() + text.size() || text.empty()) {
        throw ParseError(t.source, t.lines[row], fmt::format("column '{}' is not a number: '{}'", t.header[col], text));
    }
    return v;
}

std::string replace_whitespace(std::string_view s) {
    std::string out(s);
    std::replace_if(out.begin(), out.end(), [](unsigned char c) { return std::isspace(c) != 0; }, '_');
    return out;
}

}  // namespace

void write_summary_jsonl(std::ostream& out, std::span<const SummaryRecord> records) {
    for (const SummaryRecord& r : records) {
        nlohmann::ordered_json line;
        line["stage"] = r.stage;
        line["count"] = r.count;
        line["reason"] = r.reason;
        out << line.dump() << '\n';
    }
}

std::uint64_t derive_seed(std::uint64_t seed, std::string_view key) {
    std::uint64_t h = 14695981039346656037ull;
    for (unsigned char c : key) {
        h ^= c;
        h *= 1099511628211ull;
    }
    // splitmix64 finalizer over the combination.
    std::uint64_t z = seed + 0x9e3779b97f4a7c15ull + h;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
}

EntityId track_entity(std::string_view track_id) { return "t_" + std::string(track_id); }
EntityId artist_entity(std::string_view artist_id) { return "a_" + std::string(artist_id); }
EntityId genre_entity(std::string_view genre) { return "g_" + replace_whitespace(genre); }

// ---------------------------------------------------------------------------

LastfmData merge_lastfm(const Table& events, const Table& features, const Table& genres) {
    constexpr std::string_view kStage = "merge_lastfm";
    const std::size_t ev_user = events.column("user_id");
    const std::size_t ev_artist = events.column("artist_id");
    const std::size_t ev_track = events.column("track_id");
    const std::size_t ft_track = features.column("track_id");
    std::size_t ft_cols[kFeatureDims];
    for (int d = 0; d < kFeatureDims; ++d) ft_cols[d] = features.column(kFeatureNames[d]);
    const std::size_t gn_track = genres.column("track_id");
    const std::size_t gn_genre = genres.column("genre");

    LastfmData out;
    std::size_t duplicate_features = 0, out_of_range = 0, zero_norm = 0;

    // Raw feature rows; tempo is scaled over every parsed row.
    std::map<std::string, FeatureVector> raw;
    double tempo_min = INFINITY, tempo_max = -INFINITY;
    for (std::size_t r = 0; r < features.rows.size(); ++r) {
        const std::string track = trim(features.rows[r][ft_track]);
        if (track.empty()) throw ParseError(features.source, features.lines[r], "empty track_id");
        FeatureVector v;
        for (int d = 0; d < kFeatureDims; ++d) v[d] = parse_double(features, r, ft_cols[d]);
        if (!raw.emplace(track, v).second) {
            ++duplicate_features;
            continue;
        }
        tempo_min = std::min(tempo_min, v[kFeatureDims - 1]);
        tempo_max = std::max(tempo_max, v[kFeatureDims - 1]);
    }
    std::map<std::string, FeatureVector> usable;
    for (auto& [track, v] : raw) {
        v[kFeatureDims - 1] = tempo_max > tempo_min ? (v[kFeatureDims - 1] - tempo_min) / (tempo_max - tempo_min) : 0.0;
        if ((v.array() < 0.0).any() || (v.array() > 1.0).any()) {
            ++out_of_range;
        } else if (v.isZero(0.0)) {
            ++zero_norm;
        } else {
            usable.emplace(track, v);
        }
    }

    std::map<std::string, std::set<std::string>> track_genres;
    for (const auto& row : genres.rows) {
        const std::string track = trim(row[gn_track]);
        const std::string genre = trim(row[gn_genre]);
        if (!track.empty() && !genre.empty()) track_genres[track].insert(genre);
    }

    std::map<std::pair<std::string, std::string>, std::uint64_t> counts;
    std::map<std::string, std::string> track_artist;
    std::size_t missing_key = 0, missing_features = 0, artist_conflicts = 0;
    out.input_events = events.rows.size();
    for (const auto& row : events.rows) {
        const std::string user = trim(row[ev_user]);
        const std::string artist = trim(row[ev_artist]);
        const std::string track = trim(row[ev_track]);
        if (user.empty() || artist.empty() || track.empty()) {
            ++missing_key;
            continue;
        }
        if (!usable.contains(track)) {
            ++missing_features;
            continue;
        }
        auto [it, inserted] = track_artist.emplace(track, artist);
        if (!inserted && it->second != artist) ++artist_conflicts;
        ++counts[{user, track}];
    }
    out.dropped_events = missing_key + missing_features;

    std::set<std::string> users, artists, genre_set;
    for (const auto& [key, c] : counts) {
        out.interactions.push_back({key.first, track_entity(key.second), c});
        users.insert(key.first);
    }
    std::sort(out.interactions.begin(), out.interactions.end(),
              [](const Interaction& a, const Interaction& b) { return std::tie(a.user, a.item) < std::tie(b.user, b.item); });

    for (const auto& [track, artist] : track_artist) {
        const EntityRef t{track_entity(track), EntityKind::Tag::Track, track};
        out.triples.push_back({t, "maker", {artist_entity(artist), EntityKind::Tag::Artist, artist}});
        artists.insert(artist);
        if (auto g = track_genres.find(track); g != track_genres.end()) {
            for (const std::string& genre : g->second) {
                out.triples.push_back({t, "genre", {genre_entity(genre), EntityKind::Tag::Genre, genre}});
                genre_set.insert(genre);
            }
        }
        out.features.insert(track_entity(track), usable.at(track));
    }

    out.stats = {out.input_events - out.dropped_events, users.size(), artists.size(), track_artist.size(),
                 genre_set.size()};
    out.summary = {
        {std::string(kStage), out.input_events, "input_events"},
        {std::string(kStage), out.stats.events, "surviving_events"},
        {std::string(kStage), missing_features, "dropped_missing_features"},
        {std::string(kStage), missing_key, "dropped_missing_key"},
        {std::string(kStage), duplicate_features, "duplicate_feature_rows"},
        {std::string(kStage), out_of_range, "feature_rows_out_of_range"},
        {std::string(kStage), zero_norm, "feature_rows_zero_norm"},
        {std::string(kStage), artist_conflicts, "artist_conflicts"},
    };
    if (out.dropped_events > 0) {
        spdlog::info("merge_lastfm: dropped {} of {} events", out.dropped_events, out.input_events);
    }
    return out;
}

std::vector<std::string> sample_users(std::span<const Interaction> interactions, std::size_t n,
                                      std::size_t min_unique_items, std::uint64_t seed) {
    std::map<std::string, std::set<std::string_view>> items;
    for (const Interaction& x : interactions) items[x.user].insert(x.item);
    std::vector<std::string> eligible;
    for (const auto& [user, set] : items) {
        if (set.size() >= min_unique_items) eligible.push_back(user);
    }
    if (eligible.size() < n) {
        throw Error(fmt::format("cannot sample {} users: only {} of {} users have at least {} distinct items", n,
                                eligible.size(), items.size(), min_unique_items));
    }
    std::mt19937_64 rng(seed);
    std::shuffle(eligible.begin(), eligible.end(), rng);
    eligible.resize(n);
    std::sort(eligible.begin(), eligible.end());
    return eligible;
}

// ---------------------------------------------------------------------------

NetflixData load_netflix(const Table& titles) {
    const std::size_t c_id = titles.column("show_id");
    const std::size_t c_type = titles.column("type");
    const std::size_t c_title = titles.column("title");
    const std::size_t c_director = titles.column("director");
    const std::size_t c_cast = titles.column("cast");
    const std::size_t c_country = titles.column("country");
    const std::size_t c_rating = titles.column("rating");
    const std::size_t c_genre = titles.column("listed_in");
    auto optional_cell = [&](std::size_t row, std::string_view name) {
        return titles.has_column(name) ? trim(titles.rows[row][titles.column(name)]) : std::string();
    };

    NetflixData out;
    std::set<std::string> seen;
    for (std::size_t r = 0; r < titles.rows.size(); ++r) {
        const auto& row = titles.rows[r];
        TitleRecord rec;
        rec.show_id = trim(row[c_id]);
        if (rec.show_id.empty()) throw ParseError(titles.source, titles.lines[r], "empty show_id");
        if (!seen.insert(rec.show_id).second) {
            throw ParseError(titles.source, titles.lines[r], fmt::format("duplicate show_id '{}'", rec.show_id));
        }
        const std::string type = trim(row[c_type]);
        if (type == "Movie") {
            rec.kind = EntityKind::Tag::Movie;
        } else if (type == "TV Show") {
            rec.kind = EntityKind::Tag::TvShow;
        } else {
            throw ParseError(titles.source, titles.lines[r], fmt::format("unknown type '{}'", type));
        }
        rec.title = trim(row[c_title]);
        rec.directors = split_list(row[c_director]);
        rec.cast = split_list(row[c_cast]);
        rec.countries = split_list(row[c_country]);
        rec.rating = trim(row[c_rating]);
        rec.genres = split_list(row[c_genre]);
        rec.release_year = optional_cell(r, "release_year");
        rec.duration = optional_cell(r, "duration");
        rec.description = optional_cell(r, "description");

        const EntityRef title{rec.show_id, rec.kind, rec.title};
        out.titles.push_back(title);
        for (const auto& p : rec.directors) {
            out.triples.push_back({{"person:" + p, EntityKind::Tag::Person, p}, "directs", title});
        }
        for (const auto& p : rec.cast) {
            out.triples.push_back({{"person:" + p, EntityKind::Tag::Person, p}, "acts_on", title});
        }
        for (const auto& c : rec.countries) {
            out.triples.push_back({title, "country", {"country:" + c, EntityKind::Tag::Country, c}});
        }
        for (const auto& g : rec.genres) {
            out.triples.push_back({title, "genre", {"genre:" + g, EntityKind::Tag::Genre, g}});
        }
        if (!rec.rating.empty()) {
            out.triples.push_back({title, "rating", {"rating:" + rec.rating, EntityKind::Tag::Rating, rec.rating}});
        }
        out.records.push_back(std::move(rec));
    }
    return out;
}

CatalogGraph build_netflix_catalog(const NetflixData& data) {
    CatalogBuilder builder;
    for (const EntityRef& t : data.titles) builder.add_node(t);
    for (const TitleRecord& rec : data.records) {
        builder.set_attribute(rec.show_id, "title", rec.title);
        if (!rec.release_year.empty()) builder.set_attribute(rec.show_id, "release_year", rec.release_year);
        if (!rec.duration.empty()) builder.set_attribute(rec.show_id, "duration", rec.duration);
        if (!rec.description.empty()) builder.set_attribute(rec.show_id, "description", rec.description);
    }
    for (const Triple& t : data.triples) {
        builder.add_node(t.source);
        builder.add_node(t.target);
        builder.add_edge(t.source.id, t.predicate, t.target.id);
    }
    return std::move(builder).build();
}

// ---------------------------------------------------------------------------

std::vector<std::vector<EntityId>> generate_profiles(const CatalogGraph& catalog, const SyntheticProfileConfig& cfg) {
    const auto pool = catalog.recommendable();
    if (cfg.min_items < 1 || cfg.min_items > cfg.max_items) {
        throw Error(fmt::format("invalid profile size range [{}, {}]", cfg.min_items, cfg.max_items));
    }
    if (cfg.max_items > pool.size()) {
        throw Error(fmt::format("max_items {} exceeds the {} recommendable items", cfg.max_items, pool.size()));
    }
    std::mt19937_64 rng(cfg.seed);
    std::uniform_int_distribution<std::size_t> size_dist(cfg.min_items, cfg.max_items);
    std::vector<std::vector<EntityId>> profiles;
    profiles.reserve(cfg.n_profiles);
    for (std::size_t p = 0; p < cfg.n_profiles; ++p) {
        std::vector<NodeIndex> picked;
        std::sample(pool.begin(), pool.end(), std::back_inserter(picked), size_dist(rng), rng);
        std::vector<EntityId> history;
        for (NodeIndex n : picked) history.push_back(catalog.node(n).id);
        std::sort(history.begin(), history.end());
        profiles.push_back(std::move(history));
    }
    return profiles;
}

Split split_interactions(std::span<const EntityId> history, double ratio, std::uint64_t seed) {
    if (!(ratio > 0.0 && ratio < 1.0)) throw Error(fmt::format("split ratio {} outside (0, 1)", ratio));
    Split split;
    std::vector<EntityId> items(history.begin(), history.end());
    const std::size_t n = items.size();
    if (n < 2) {
        spdlog::warn("split_interactions: {} item(s) cannot be split; all go to train", n);
        split.train = std::move(items);
        return split;
    }
    std::mt19937_64 rng(seed);
    std::shuffle(items.begin(), items.end(), rng);
    auto train_size = static_cast<std::size_t>(std::floor(ratio * static_cast<double>(n) + 0.5));
    train_size = std::clamp<std::size_t>(train_size, 1, n - 1);
    split.train.assign(items.begin(), items.begin() + static_cast<std::ptrdiff_t>(train_size));
    split.test.assign(items.begin() + static_cast<std::ptrdiff_t>(train_size), items.end());
    std::sort(split.train.begin(), split.train.end());
    std::sort(split.test.begin(), split.test.end());
    return split;
}

// ---------------------------------------------------------------------------

namespace {

// Track i of the synthetic data belongs to cluster 0 when i < tracks / 2.
int cluster_of(std::size_t track, std::size_t tracks) { return track < tracks / 2 ? 0 : 1; }

}  // namespace

int synthetic_cluster(std::string_view track_entity_id, const SyntheticMusicConfig& cfg) {
    if (track_entity_id.rfind("t_", 0) != 0) throw Error(fmt::format("'{}' is not a track entity", track_entity_id));
    std::size_t raw = 0;
    const auto digits = track_entity_id.substr(2);
    const auto [ptr, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), raw);
    if (ec != std::errc() || raw < 1 || raw > cfg.tracks) {
        throw Error(fmt::format("'{}' is not a synthetic track", track_entity_id));
    }
    return cluster_of(raw - 1, cfg.tracks);
}

SyntheticMusicTables make_synthetic_music(const SyntheticMusicConfig& cfg) {
    if (cfg.tracks < 4 || cfg.artists_per_cluster < 1 || cfg.genres_per_cluster < 1) {
        throw Error("synthetic music needs at least 4 tracks, 1 artist and 1 genre per cluster");
    }
    if (cfg.min_history < 1 || cfg.min_history > cfg.max_history || cfg.max_history > cfg.tracks / 2) {
        throw Error("invalid synthetic history size range");
    }
    std::mt19937_64 rng(cfg.seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);

    // Prototype acoustic profiles of the two clusters (tempo in BPM).
    const double prototypes[2][kFeatureDims] = {
        {0.85, 0.85, 0.10, 0.10, 0.05, 0.15, 0.80, 150.0},
        {0.15, 0.15, 0.60, 0.90, 0.85, 0.70, 0.15, 70.0},
    };

    SyntheticMusicTables out;
    out.features.source = "synthetic_features";
    out.features.header = {"track_id"};
    for (const char* name : kFeatureNames) out.features.header.emplace_back(name);
    out.genres.source = "synthetic_genres";
    out.genres.header = {"track_id", "genre"};
    out.events.source = "synthetic_events";
    out.events.header = {"user_id", "artist_id", "track_id", "timestamp"};

    const std::size_t half = cfg.tracks / 2;
    std::vector<std::string> track_artist(cfg.tracks);
    std::vector<std::size_t> cluster_tracks[2];
    for (std::size_t i = 0; i < cfg.tracks; ++i) {
        const int c = cluster_of(i, cfg.tracks);
        cluster_tracks[c].push_back(i);
        const std::string id = std::to_string(i + 1);
        track_artist[i] = fmt::format("{}", c * 1000 + 1 + rng() % cfg.artists_per_cluster);

        std::vector<std::string> row{id};
        for (int d = 0; d < kFeatureDims; ++d) {
            const double jitter = d == kFeatureDims - 1 ? 20.0 : 0.1;
            double v = prototypes[c][d] + (2.0 * unit(rng) - 1.0) * jitter;
            if (d != kFeatureDims - 1) v = std::clamp(v, 0.0, 1.0);
            row.push_back(fmt::format("{:.6f}", v));
        }
        out.features.rows.push_back(std::move(row));
        out.features.lines.push_back(i + 2);

        const std::size_t n_genres = 1 + rng() % 2;
        std::set<std::size_t> picked;
        while (picked.size() < std::min(n_genres, cfg.genres_per_cluster)) picked.insert(rng() % cfg.genres_per_cluster);
        for (std::size_t g : picked) {
            out.genres.rows.push_back({id, fmt::format("{}-genre-{}", c == 0 ? "alpha" : "beta", g + 1)});
            out.genres.lines.push_back(out.genres.rows.size() + 1);
        }
    }

    // Zipf-like popularity inside each cluster, by position in the cluster.
    std::vector<double> weights(half);
    for (std::size_t r = 0; r < half; ++r) weights[r] = 1.0 / std::pow(static_cast<double>(r + 1), 0.8);

    std::discrete_distribution<std::size_t> pick(weights.begin(), weights.end());
    std::uniform_int_distribution<std::size_t> size_dist(cfg.min_history, cfg.max_history);
    std::uint64_t timestamp = 1'500'000'000;
    for (std::size_t u = 0; u < cfg.users; ++u) {
        const std::string user = fmt::format("u{:03d}", u + 1);
        const std::size_t size = size_dist(rng);
        std::set<std::size_t> history;
        while (history.size() < size) {
            const int c = unit(rng) < cfg.home_share ? 0 : 1;
            history.insert(cluster_tracks[c][pick(rng) % cluster_tracks[c].size()]);
        }
        for (std::size_t t : history) {
            const std::size_t plays = 1 + rng() % 12;
            for (std::size_t p = 0; p < plays; ++p) {
                out.events.rows.push_back({user, track_artist[t], std::to_string(t + 1), std::to_string(timestamp++)});
                out.events.lines.push_back(out.events.rows.size() + 1);
            }
        }
    }
    return out;
}

}  // namespace kgrerank
