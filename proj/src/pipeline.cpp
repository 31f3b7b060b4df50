// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The kgrerank Authors

#include "kgrerank/pipeline.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include <fmt/format.h>
#include <openssl/evp.h>
#include <spdlog/spdlog.h>

#include "kgrerank/error.hpp"
#include "kgrerank/eval.hpp"
#include "kgrerank/graph_io.hpp"
#include "kgrerank/parallel.hpp"
#include "kgrerank/recsys.hpp"
#include "kgrerank/table.hpp"

namespace fs = std::filesystem;

namespace kgrerank {

// ---------------------------------------------------------------------------
// Config

namespace {

template <typename T>
void read_key(const nlohmann::json& doc, const char* key, T& out, std::vector<std::string>* findings) {
    if (!doc.contains(key)) return;
    try {
        out = doc.at(key).get<T>();
    } catch (const nlohmann::json::exception& e) {
        if (findings) findings->push_back(fmt::format("config key '{}' has the wrong type", key));
    }
}

void read_path(const nlohmann::json& doc, const char* key, fs::path& out, std::vector<std::string>* findings) {
    std::string s;
    read_key(doc, key, s, findings);
    if (doc.contains(key) && doc.at(key).is_string()) out = s;
}

}  // namespace

namespace {

// Reports keys of `obj` outside `known`; false if `obj` is not an object.
bool check_keys(const nlohmann::json& obj, const std::set<std::string>& known, const std::string& prefix,
                std::vector<std::string>* findings) {
    if (!obj.is_object()) {
        if (findings) findings->push_back(fmt::format("config '{}' must be an object", prefix.empty() ? "document" : prefix));
        return false;
    }
    for (const auto& [key, value] : obj.items()) {
        if (!known.contains(key) && findings) findings->push_back(fmt::format("unknown config key '{}{}'", prefix.empty() ? "" : prefix + ".", key));
    }
    return true;
}

}  // namespace

RunConfig config_from_json(const nlohmann::json& doc, std::vector<std::string>* findings) {
    RunConfig cfg;
    static const std::set<std::string> known = {
        "dataset",     "events",      "features", "genres",       "netflix",          "recommendations",
        "output",      "recommender", "metrics",  "orders",       "mode",             "top_n",
        "eval_k",      "seed",        "parallelism", "knn_k",     "sample_users",     "min_unique_tracks",
        "profiles",    "prune_degree_one", "split_ratio", "synthetic",
    };
    if (!check_keys(doc, known, "", findings)) return cfg;
    read_key(doc, "dataset", cfg.dataset, findings);
    read_path(doc, "events", cfg.events, findings);
    read_path(doc, "features", cfg.features, findings);
    read_path(doc, "genres", cfg.genres, findings);
    read_path(doc, "netflix", cfg.netflix, findings);
    read_path(doc, "recommendations", cfg.recommendations, findings);
    read_path(doc, "output", cfg.output, findings);
    read_key(doc, "recommender", cfg.recommender, findings);
    read_key(doc, "metrics", cfg.metrics, findings);
    read_key(doc, "orders", cfg.orders, findings);
    read_key(doc, "mode", cfg.mode, findings);
    read_key(doc, "top_n", cfg.top_n, findings);
    read_key(doc, "eval_k", cfg.eval_k, findings);
    read_key(doc, "seed", cfg.seed, findings);
    read_key(doc, "parallelism", cfg.parallelism, findings);
    read_key(doc, "knn_k", cfg.knn_k, findings);
    read_key(doc, "sample_users", cfg.sample_users, findings);
    read_key(doc, "min_unique_tracks", cfg.min_unique_tracks, findings);
    read_key(doc, "prune_degree_one", cfg.prune_degree_one, findings);
    read_key(doc, "split_ratio", cfg.split_ratio, findings);
    if (doc.contains("profiles") &&
        check_keys(doc.at("profiles"), {"n_profiles", "min_items", "max_items"}, "profiles", findings)) {
        const auto& p = doc.at("profiles");
        read_key(p, "n_profiles", cfg.profiles.n_profiles, findings);
        read_key(p, "min_items", cfg.profiles.min_items, findings);
        read_key(p, "max_items", cfg.profiles.max_items, findings);
    }
    if (doc.contains("synthetic") &&
        check_keys(doc.at("synthetic"),
                   {"tracks", "users", "artists_per_cluster", "genres_per_cluster", "min_history", "max_history",
                    "home_share"},
                   "synthetic", findings)) {
        const auto& s = doc.at("synthetic");
        read_key(s, "tracks", cfg.synthetic.tracks, findings);
        read_key(s, "users", cfg.synthetic.users, findings);
        read_key(s, "artists_per_cluster", cfg.synthetic.artists_per_cluster, findings);
        read_key(s, "genres_per_cluster", cfg.synthetic.genres_per_cluster, findings);
        read_key(s, "min_history", cfg.synthetic.min_history, findings);
        read_key(s, "max_history", cfg.synthetic.max_history, findings);
        read_key(s, "home_share", cfg.synthetic.home_share, findings);
    }
    return cfg;
}

nlohmann::ordered_json config_to_json(const RunConfig& cfg) {
    nlohmann::ordered_json j;
    j["dataset"] = cfg.dataset;
    j["events"] = cfg.events.string();
    j["features"] = cfg.features.string();
    j["genres"] = cfg.genres.string();
    j["netflix"] = cfg.netflix.string();
    j["recommendations"] = cfg.recommendations.string();
    j["output"] = cfg.output.string();
    j["recommender"] = cfg.recommender;
    j["metrics"] = cfg.metrics;
    j["orders"] = cfg.orders;
    j["mode"] = cfg.mode;
    j["top_n"] = cfg.top_n;
    j["eval_k"] = cfg.eval_k;
    j["seed"] = cfg.seed;
    j["parallelism"] = cfg.parallelism;
    j["knn_k"] = cfg.knn_k;
    j["sample_users"] = cfg.sample_users;
    j["min_unique_tracks"] = cfg.min_unique_tracks;
    j["profiles"] = {{"n_profiles", cfg.profiles.n_profiles},
                     {"min_items", cfg.profiles.min_items},
                     {"max_items", cfg.profiles.max_items}};
    j["prune_degree_one"] = cfg.prune_degree_one;
    j["split_ratio"] = cfg.split_ratio;
    j["synthetic"] = {{"tracks", cfg.synthetic.tracks},
                      {"users", cfg.synthetic.users},
                      {"artists_per_cluster", cfg.synthetic.artists_per_cluster},
                      {"genres_per_cluster", cfg.synthetic.genres_per_cluster},
                      {"min_history", cfg.synthetic.min_history},
                      {"max_history", cfg.synthetic.max_history},
                      {"home_share", cfg.synthetic.home_share}};
    return j;
}

std::vector<std::string> validate_config(const RunConfig& cfg, bool check_inputs) {
    std::vector<std::string> f;
    auto require_file = [&f, check_inputs](const fs::path& p, const char* what) {
        if (!check_inputs) return;
        if (p.empty()) {
            f.push_back(fmt::format("{} path is required", what));
        } else if (!fs::is_regular_file(p)) {
            f.push_back(fmt::format("{} file '{}' does not exist", what, p.string()));
        }
    };

    if (cfg.dataset == "lastfm") {
        require_file(cfg.events, "events");
        require_file(cfg.features, "features");
        require_file(cfg.genres, "genres");
    } else if (cfg.dataset == "netflix") {
        require_file(cfg.netflix, "netflix");
    } else if (cfg.dataset != "synthetic") {
        f.push_back(fmt::format("unknown dataset '{}' (expected lastfm, netflix or synthetic)", cfg.dataset));
    }

    if (cfg.recommender == "external") {
        if (cfg.recommendations.empty()) {
            f.push_back("recommendations path is required for the external recommender");
        } else if (!fs::is_regular_file(cfg.recommendations)) {
            f.push_back(fmt::format("recommendations file '{}' does not exist", cfg.recommendations.string()));
        }
    } else if (cfg.recommender != "baseline" && cfg.recommender != "itemknn" && cfg.recommender != "popularity") {
        f.push_back(fmt::format("unknown recommender '{}'", cfg.recommender));
    }

    if (cfg.metrics.empty()) f.push_back("at least one metric is required");
    for (const auto& m : cfg.metrics) {
        if (!parse_metric(m)) f.push_back(fmt::format("unknown metric '{}'", m));
    }
    if (cfg.orders.empty()) f.push_back("at least one sort order is required");
    for (const auto& o : cfg.orders) {
        if (!parse_order(o)) f.push_back(fmt::format("unknown order '{}' (expected asc or desc)", o));
    }
    if (!parse_mode(cfg.mode)) f.push_back(fmt::format("unknown neighborhood mode '{}' (expected closed or existing)", cfg.mode));

    if (cfg.top_n < 1) f.push_back("top_n must be at least 1");
    if (cfg.eval_k < 1) f.push_back("eval_k must be at least 1");
    if (cfg.knn_k < 1) f.push_back("knn_k must be at least 1");
    if (cfg.output.empty()) f.push_back("output directory is required");
    if (cfg.split_ratio != 0.0 && !(cfg.split_ratio > 0.0 && cfg.split_ratio < 1.0)) {
        f.push_back(fmt::format("split_ratio {} must be 0 (disabled) or lie in (0, 1)", cfg.split_ratio));
    }

    if (cfg.profiles.min_items < 1) f.push_back("profiles.min_items must be at least 1");
    if (cfg.profiles.min_items > cfg.profiles.max_items) {
        f.push_back(fmt::format("profiles.min_items {} exceeds profiles.max_items {}", cfg.profiles.min_items,
                                cfg.profiles.max_items));
    }

    const auto& s = cfg.synthetic;
    if (s.tracks < 4) f.push_back("synthetic.tracks must be at least 4");
    if (s.users < 1) f.push_back("synthetic.users must be at least 1");
    if (s.min_history < 1 || s.min_history > s.max_history) {
        f.push_back(fmt::format("synthetic history range [{}, {}] is invalid", s.min_history, s.max_history));
    }
    if (s.max_history > s.tracks / 2) f.push_back("synthetic.max_history exceeds the size of a cluster");
    if (!(s.home_share >= 0.0 && s.home_share <= 1.0)) f.push_back("synthetic.home_share must lie in [0, 1]");
    return f;
}

std::vector<MetricKind> resolved_metrics(const RunConfig& cfg) {
    std::vector<MetricKind> out;
    for (const auto& m : cfg.metrics) out.push_back(parse_metric(m).value());
    return out;
}

std::vector<SortOrder> resolved_orders(const RunConfig& cfg) {
    std::vector<SortOrder> out;
    for (const auto& o : cfg.orders) out.push_back(parse_order(o).value());
    return out;
}

// ---------------------------------------------------------------------------
// Hashing

std::string sha256_hex(std::string_view data) {
    unsigned char digest[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    if (EVP_Digest(data.data(), data.size(), digest, &len, EVP_sha256(), nullptr) != 1) {
        throw Error("SHA-256 computation failed");
    }
    std::string hex;
    for (unsigned int i = 0; i < len; ++i) hex += fmt::format("{:02x}", digest[i]);
    return hex;
}

std::string sha256_file(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(fmt::format("cannot open '{}'", path.string()));
    std::ostringstream buf;
    buf << in.rdbuf();
    return sha256_hex(buf.str());
}

// ---------------------------------------------------------------------------
// Stage helpers

namespace {

// Artifact layout inside the output directory.
struct Layout {
    fs::path root;
    fs::path input() const { return root / "input"; }
    fs::path nodes() const { return root / "catalog.nodes.tsv"; }
    fs::path triples() const { return root / "catalog.triples.tsv"; }
    fs::path interactions() const { return root / "interactions.tsv"; }
    fs::path profiles() const { return root / "profiles.tsv"; }
    fs::path heldout() const { return root / "heldout.tsv"; }
    fs::path features() const { return root / "features.csv"; }
    fs::path summary() const { return root / "ingest_summary.jsonl"; }
    fs::path base_run() const { return root / "base.run"; }
    fs::path rerank_dir() const { return root / "rerank"; }
    fs::path eval_dir() const { return root / "eval"; }
    fs::path rerank_file(MetricKind m, SortOrder o, const char* ext) const {
        return rerank_dir() / fmt::format("{}_{}.{}", to_string(m), to_string(o), ext);
    }
};

std::ofstream open_out(const fs::path& p) {
    if (p.has_parent_path()) fs::create_directories(p.parent_path());
    std::ofstream out(p, std::ios::binary);
    if (!out) throw Error(fmt::format("cannot write '{}'", p.string()));
    return out;
}

std::ifstream open_in(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    if (!in) throw Error(fmt::format("cannot read '{}' (did the previous stage run?)", p.string()));
    return in;
}

void write_table_file(const fs::path& p, const Table& t, bool csv) {
    auto out = open_out(p);
    csv ? write_csv(out, t) : write_tsv(out, t);
}

using Profiles = std::map<std::string, std::vector<EntityId>>;

void write_profiles(const fs::path& p, const Profiles& profiles) {
    Table t;
    t.header = {"user", "item"};
    for (const auto& [user, items] : profiles) {
        for (const auto& item : items) t.rows.push_back({user, item});
    }
    write_table_file(p, t, false);
}

Profiles read_profiles(const fs::path& p) {
    const Table t = read_tsv_file(p);
    const auto cu = t.column("user");
    const auto ci = t.column("item");
    Profiles out;
    for (const auto& row : t.rows) out[row[cu]].push_back(row[ci]);
    return out;
}

void write_interactions(const fs::path& p, std::span<const Interaction> xs) {
    Table t;
    t.header = {"user", "item", "count"};
    for (const auto& x : xs) t.rows.push_back({x.user, x.item, std::to_string(x.count)});
    write_table_file(p, t, false);
}

std::vector<Interaction> read_interactions(const fs::path& p) {
    const Table t = read_tsv_file(p);
    const auto cu = t.column("user");
    const auto ci = t.column("item");
    const auto cc = t.column("count");
    std::vector<Interaction> out;
    for (std::size_t r = 0; r < t.rows.size(); ++r) {
        std::uint64_t count = 0;
        const auto& text = t.rows[r][cc];
        const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), count);
        if (ec != std::errc() || ptr != text.data() + text.size()) throw ParseError(t.source, t.lines[r], "bad count");
        out.push_back({t.rows[r][cu], t.rows[r][ci], count});
    }
    return out;
}

void write_features(const fs::path& p, const FeatureStore& store) {
    Table t;
    t.header = {"item"};
    for (const char* name : kFeatureNames) t.header.emplace_back(name);
    for (const auto& [item, v] : store.entries()) {
        std::vector<std::string> row{item};
        for (int d = 0; d < kFeatureDims; ++d) row.push_back(fmt::format("{}", v[d]));
        t.rows.push_back(std::move(row));
    }
    write_table_file(p, t, true);
}

FeatureStore read_features(const fs::path& p) {
    const Table t = read_csv_file(p);
    const auto ci = t.column("item");
    std::size_t cols[kFeatureDims];
    for (int d = 0; d < kFeatureDims; ++d) cols[d] = t.column(kFeatureNames[d]);
    FeatureStore store;
    for (std::size_t r = 0; r < t.rows.size(); ++r) {
        FeatureVector v;
        for (int d = 0; d < kFeatureDims; ++d) {
            const auto& text = t.rows[r][cols[d]];
            const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v[d]);
            if (ec != std::errc()) throw ParseError(t.source, t.lines[r], "bad feature value");
        }
        store.insert(t.rows[r][ci], v);
    }
    return store;
}

CatalogGraph read_catalog(const Layout& l) {
    auto nodes = open_in(l.nodes());
    auto triples = open_in(l.triples());
    return read_graph_export(nodes, triples);
}

std::map<std::string, RecommendationList> read_run(const fs::path& p) {
    auto in = open_in(p);
    return load_external_recommendations(in, p.string());
}

template <typename Fn>
void stage(const char* name, Fn&& fn) {
    spdlog::info("stage {}: start", name);
    try {
        fn();
    } catch (const StageError&) {
        throw;
    } catch (const std::exception& e) {
        throw StageError(name, e.what());
    }
    spdlog::info("stage {}: done", name);
}

// Splits every profile when configured; held-out items are returned per user.
Profiles apply_split(const RunConfig& cfg, Profiles& profiles) {
    Profiles heldout;
    if (cfg.split_ratio == 0.0) return heldout;
    for (auto& [user, items] : profiles) {
        Split s = split_interactions(items, cfg.split_ratio, derive_seed(cfg.seed, "split:" + user));
        items = std::move(s.train);
        if (!s.test.empty()) heldout[user] = std::move(s.test);
    }
    return heldout;
}

void ingest_music(const RunConfig& cfg, const Layout& l, const Table& events, const Table& features,
                  const Table& genres) {
    LastfmData data = merge_lastfm(events, features, genres);
    const CatalogGraph catalog = build_catalog(data.triples);

    std::vector<std::string> users;
    if (cfg.sample_users == 0) {
        // Every eligible user.
        std::map<std::string, std::size_t> unique;
        for (const auto& x : data.interactions) ++unique[x.user];
        for (const auto& [u, n] : unique) {
            if (n >= cfg.min_unique_tracks) users.push_back(u);
        }
    } else {
        users = sample_users(data.interactions, cfg.sample_users, cfg.min_unique_tracks, derive_seed(cfg.seed, "users"));
    }
    const std::set<std::string> chosen(users.begin(), users.end());

    Profiles profiles;
    for (const auto& x : data.interactions) {
        if (chosen.contains(x.user)) profiles[x.user].push_back(x.item);
    }
    const Profiles heldout = apply_split(cfg, profiles);

    std::vector<Interaction> train;
    for (const auto& x : data.interactions) {
        auto h = heldout.find(x.user);
        if (h != heldout.end() && std::binary_search(h->second.begin(), h->second.end(), x.item)) continue;
        train.push_back(x);
    }

    {
        auto out = open_out(l.nodes());
        write_node_manifest(out, catalog);
    }
    {
        auto out = open_out(l.triples());
        write_triples(out, catalog);
    }
    write_interactions(l.interactions(), train);
    write_profiles(l.profiles(), profiles);
    write_profiles(l.heldout(), heldout);
    write_features(l.features(), data.features);

    auto summary = data.summary;
    summary.push_back({"sample_users", users.size(), "sampled_users"});
    std::size_t held = 0;
    for (const auto& [u, items] : heldout) held += items.size();
    summary.push_back({"split", held, "heldout_items"});
    auto out = open_out(l.summary());
    write_summary_jsonl(out, summary);
    spdlog::info("ingest: {} events, {} users, {} artists, {} tracks, {} genres", data.stats.events, data.stats.users,
                 data.stats.artists, data.stats.tracks, data.stats.genres);
}

void ingest_netflix(const RunConfig& cfg, const Layout& l) {
    const NetflixData data = load_netflix(read_csv_file(cfg.netflix));
    CatalogGraph catalog = build_netflix_catalog(data);
    const std::size_t before = catalog.node_count();
    if (cfg.prune_degree_one) catalog = prune_graph(catalog, PruneRules{true, true, true});

    SyntheticProfileConfig pc = cfg.profiles;
    pc.seed = derive_seed(cfg.seed, "profiles");
    const auto histories = generate_profiles(catalog, pc);
    Profiles profiles;
    for (std::size_t i = 0; i < histories.size(); ++i) profiles[fmt::format("n{:03d}", i + 1)] = histories[i];
    const Profiles heldout = apply_split(cfg, profiles);

    std::vector<Interaction> train;
    for (const auto& [user, items] : profiles) {
        for (const auto& item : items) train.push_back({user, item, 1});
    }
    {
        auto out = open_out(l.nodes());
        write_node_manifest(out, catalog);
    }
    {
        auto out = open_out(l.triples());
        write_triples(out, catalog);
    }
    write_interactions(l.interactions(), train);
    write_profiles(l.profiles(), profiles);
    write_profiles(l.heldout(), heldout);
    fs::remove(l.features());

    std::size_t held = 0;
    for (const auto& [u, items] : heldout) held += items.size();
    const std::vector<SummaryRecord> summary = {
        {"load_netflix", data.records.size(), "titles"},
        {"load_netflix", data.triples.size(), "triples"},
        {"prune", before - catalog.node_count(), "pruned_nodes"},
        {"generate_profiles", profiles.size(), "profiles"},
        {"split", held, "heldout_items"},
    };
    auto out = open_out(l.summary());
    write_summary_jsonl(out, summary);
}

std::string fmt_double(double v) { return fmt::format("{}", v); }

}  // namespace

// ---------------------------------------------------------------------------
// Stages

void run_ingest(const RunConfig& cfg) {
    const Layout l{cfg.output};
    stage("ingest", [&] {
        fs::create_directories(l.root);
        if (cfg.dataset == "netflix") {
            ingest_netflix(cfg, l);
            return;
        }
        if (cfg.dataset == "synthetic") {
            SyntheticMusicConfig sc = cfg.synthetic;
            sc.seed = derive_seed(cfg.seed, "synthetic");
            const SyntheticMusicTables tables = make_synthetic_music(sc);
            write_table_file(l.input() / "events.tsv", tables.events, false);
            write_table_file(l.input() / "features.csv", tables.features, true);
            write_table_file(l.input() / "genres.tsv", tables.genres, false);
            ingest_music(cfg, l, tables.events, tables.features, tables.genres);
            return;
        }
        ingest_music(cfg, l, read_tsv_file(cfg.events), read_csv_file(cfg.features), read_tsv_file(cfg.genres));
    });
}

void run_recommend(const RunConfig& cfg) {
    const Layout l{cfg.output};
    stage("recommend", [&] {
        const Profiles profiles = read_profiles(l.profiles());
        std::map<std::string, RecommendationList> lists;
        if (cfg.recommender == "external") {
            auto external = read_run(cfg.recommendations);
            for (const auto& [user, items] : profiles) {
                auto it = external.find(user);
                if (it == external.end()) continue;
                RecommendationList list = std::move(it->second);
                if (list.items.size() > cfg.top_n) list.items.resize(cfg.top_n);
                lists.emplace(user, std::move(list));
            }
        } else {
            const std::vector<Interaction> train = read_interactions(l.interactions());
            const RatingMatrix matrix = scale_ratings(train);
            auto model = make_recommender(cfg.recommender, cfg.knn_k);
            model->fit(matrix);
            std::vector<std::string> users;
            for (const auto& [user, items] : profiles) users.push_back(user);
            std::vector<RecommendationList> results(users.size());
            parallel_for(users.size(), cfg.parallelism,
                         [&](std::size_t i) { results[i] = recommend(*model, users[i], cfg.top_n); });
            for (std::size_t i = 0; i < users.size(); ++i) lists.emplace(users[i], std::move(results[i]));
        }
        auto out = open_out(l.base_run());
        write_recommendations(out, lists);
    });
}

void run_rerank(const RunConfig& cfg) {
    const Layout l{cfg.output};
    stage("rerank", [&] {
        const CatalogGraph catalog = read_catalog(l);
        const Profiles profiles = read_profiles(l.profiles());
        const auto base = read_run(l.base_run());

        std::vector<ProfileSubgraph> subgraphs;
        std::vector<const RecommendationList*> lists;
        for (const auto& [user, list] : base) {
            auto p = profiles.find(user);
            const std::vector<EntityId> empty;
            subgraphs.push_back(induce_profile_subgraph(catalog, p == profiles.end() ? empty : p->second, user));
            lists.push_back(&list);
        }

        BaselineCache cache;
        for (MetricKind metric : resolved_metrics(cfg)) {
            for (SortOrder order : resolved_orders(cfg)) {
                RerankConfig rc;
                rc.metric = metric;
                rc.order = order;
                rc.mode = parse_mode(cfg.mode).value();
                rc.top_n = cfg.top_n;
                rc.threads = 1;
                std::vector<std::vector<RankedItem>> ranked(lists.size());
                parallel_for(lists.size(), cfg.parallelism,
                             [&](std::size_t i) { ranked[i] = rerank(catalog, subgraphs[i], *lists[i], rc, &cache); });

                auto run = open_out(l.rerank_file(metric, order, "run"));
                auto detail = open_out(l.rerank_file(metric, order, "tsv"));
                detail << "user\tnew_rank\titem\tmetric_value\tdelta\toriginal_rank\tbase_score\n";
                for (std::size_t i = 0; i < lists.size(); ++i) {
                    const std::string& user = lists[i]->user;
                    for (const RankedItem& r : ranked[i]) {
                        run << fmt::format("{} {} {} {}\n", user, r.new_rank, r.item, ranked[i].size() - r.new_rank + 1);
                        detail << fmt::format("{}\t{}\t{}\t{}\t{}\t{}\t{}\n", user, r.new_rank, r.item,
                                              fmt_double(r.metric_value.value), fmt_double(r.delta), r.original_rank,
                                              fmt_double(r.base_score));
                    }
                }
                spdlog::info("rerank: {} {} done for {} users", to_string(metric), to_string(order), lists.size());
            }
        }
    });
}

void run_evaluate(const RunConfig& cfg) {
    const Layout l{cfg.output};
    stage("evaluate", [&] {
        const Profiles profiles = read_profiles(l.profiles());
        const auto base = read_run(l.base_run());
        std::optional<FeatureStore> features;
        if (fs::exists(l.features())) features = read_features(l.features());
        const std::size_t k = cfg.eval_k;

        auto has_features = [&](std::span<const EntityId> items) {
            return features && std::all_of(items.begin(), items.end(),
                                           [&](const EntityId& id) { return features->contains(id); });
        };

        // Reranked top-k per (metric, order, user).
        struct Variant {
            std::string metric, order;
            std::map<std::string, std::vector<EntityId>> lists;
        };
        std::vector<Variant> variants;
        for (MetricKind metric : resolved_metrics(cfg)) {
            for (SortOrder order : resolved_orders(cfg)) {
                Variant v{std::string(to_string(metric)), std::string(to_string(order)), {}};
                const auto runs = read_run(l.rerank_file(metric, order, "run"));
                for (const auto& [user, list] : runs) v.lists.emplace(user, item_ids(list));
                variants.push_back(std::move(v));
            }
        }

        std::vector<ReportRow> rows;
        const std::vector<EntityId> no_history;
        for (const auto& [user, list] : base) {
            auto p = profiles.find(user);
            const std::vector<EntityId>& history = p == profiles.end() ? no_history : p->second;
            const bool history_ok = !history.empty() && has_features(history);
            const std::vector<EntityId> base_ids = item_ids(list);
            const std::vector<EntityId> base_top = item_ids(list, k);

            auto measure = [&](const std::string& metric, const std::string& order, std::span<const EntityId> ids) {
                ReportRow row{user, metric, order, std::nullopt, std::nullopt, std::nullopt};
                std::vector<EntityId> top(ids.begin(), ids.begin() + static_cast<std::ptrdiff_t>(std::min(k, ids.size())));
                if (has_features(top)) {
                    row.ild = ild(top, *features);
                    if (history_ok && !top.empty()) row.unexpectedness = unexpectedness(history, top, *features);
                }
                row.ndcg10 = ndcg_at_k(base_ids, ids, k);
                return row;
            };

            rows.push_back(measure("base", "none", base_ids));
            rows.push_back(ReportRow{user, "profile", "none",
                                     history_ok ? std::optional<double>(ild(history, *features)) : std::nullopt,
                                     std::nullopt, std::nullopt});
            for (const Variant& v : variants) {
                auto it = v.lists.find(user);
                const std::vector<EntityId> empty;
                rows.push_back(measure(v.metric, v.order, it == v.lists.end() ? empty : it->second));
            }
        }
        emit_report(rows, l.eval_dir());

        {
            auto out = open_out(l.eval_dir() / "qrels.txt");
            write_qrels(out, base, k);
        }
        {
            auto out = open_out(l.eval_dir() / "base.trec");
            for (const auto& [user, list] : base) write_trec_run(out, user, item_ids(list), "base");
        }
        for (const Variant& v : variants) {
            auto out = open_out(l.eval_dir() / fmt::format("{}_{}.trec", v.metric, v.order));
            for (const auto& [user, ids] : v.lists) write_trec_run(out, user, ids, v.metric + "_" + v.order);
        }
    });
}

void run_pipeline(const RunConfig& cfg) {
    const Layout l{cfg.output};
    fs::create_directories(l.root);
    const fs::path stale = l.root / "STALE";
    {
        auto marker = open_out(stale);
        marker << "run in progress or failed; outputs in this directory may be incomplete\n";
    }
    run_ingest(cfg);
    run_recommend(cfg);
    run_rerank(cfg);
    run_evaluate(cfg);

    stage("manifest", [&] {
        nlohmann::ordered_json manifest;
        manifest["tool"] = "kgrerank";
        manifest["version"] = kToolVersion;
        auto hashed = config_to_json(cfg);
        hashed.erase("output");
        hashed.erase("parallelism");
        manifest["config_sha256"] = sha256_hex(hashed.dump());
        manifest["config"] = config_to_json(cfg);
        nlohmann::ordered_json inputs = nlohmann::ordered_json::object();
        for (const fs::path* p : {&cfg.events, &cfg.features, &cfg.genres, &cfg.netflix, &cfg.recommendations}) {
            if (!p->empty() && fs::is_regular_file(*p)) inputs[p->string()] = sha256_file(*p);
        }
        manifest["inputs"] = inputs;
        std::vector<fs::path> files;
        for (const auto& entry : fs::recursive_directory_iterator(l.root)) {
            if (entry.is_regular_file() && entry.path() != stale && entry.path().filename() != "manifest.json") {
                files.push_back(fs::relative(entry.path(), l.root));
            }
        }
        std::sort(files.begin(), files.end());
        nlohmann::ordered_json outputs = nlohmann::ordered_json::object();
        for (const auto& f : files) outputs[f.generic_string()] = sha256_file(l.root / f);
        manifest["outputs"] = outputs;
        auto out = open_out(l.root / "manifest.json");
        out << manifest.dump(2) << '\n';
    });
    fs::remove(stale);
}

}  // namespace kgrerank
