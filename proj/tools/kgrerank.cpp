// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The kgrerank Authors
//
// Command-line driver: ingest, recommend, rerank, evaluate, run.

#include <cstdlib>
#include <fstream>
#include <functional>
#include <iostream>
#include <string>
#include <vector>

#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include "CLI11.hpp"
#include "json.hpp"
#include "kgrerank/pipeline.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitValidation = 1;
constexpr int kExitRuntime = 2;

// Flag values; only flags the user actually passed override the config file.
struct Flags {
    std::string config;
    std::string dataset, events, features, genres, netflix, recommendations, out;
    std::string recommender, mode;
    std::vector<std::string> metrics, orders;
    std::size_t top_n = 0, k = 0, threads = 0, knn_k = 0, sample_users = 0, min_unique = 0;
    std::size_t n_profiles = 0, min_items = 0, max_items = 0;
    std::uint64_t seed = 0;
    double split_ratio = 0.0;
    bool verbose = false, quiet = false;
};

void add_flags(CLI::App& app, Flags& f) {
    app.add_option("-c,--config", f.config, "JSON config file; flags override its values")->check(CLI::ExistingFile);
    app.add_option("--dataset", f.dataset, "lastfm | netflix | synthetic");
    app.add_option("--events", f.events, "listening events TSV");
    app.add_option("--features", f.features, "acoustic features CSV");
    app.add_option("--genres", f.genres, "track genres TSV");
    app.add_option("--netflix", f.netflix, "Netflix titles CSV");
    app.add_option("--recommendations", f.recommendations, "external run file (user rank item score)");
    app.add_option("-o,--out", f.out, "output directory");
    app.add_option("--recommender", f.recommender, "external | baseline | itemknn | popularity");
    app.add_option("--metric", f.metrics, "metric name; repeatable");
    app.add_option("--order", f.orders, "asc | desc; repeatable");
    app.add_option("--mode", f.mode, "closed | existing");
    app.add_option("--top-n", f.top_n, "candidate list length");
    app.add_option("--k", f.k, "evaluation cutoff");
    app.add_option("--seed", f.seed, "run seed");
    app.add_option("--threads", f.threads, "worker threads (0: all cores)");
    app.add_option("--knn-k", f.knn_k, "neighbors for itemknn");
    app.add_option("--sample-users", f.sample_users, "users to sample (0: all eligible)");
    app.add_option("--min-unique-tracks", f.min_unique, "minimum distinct tracks per sampled user");
    app.add_option("--profiles", f.n_profiles, "synthetic Netflix profiles");
    app.add_option("--min-items", f.min_items, "minimum synthetic profile size");
    app.add_option("--max-items", f.max_items, "maximum synthetic profile size");
    app.add_option("--split-ratio", f.split_ratio, "train share of each profile (0: no split)");
    app.add_flag("-v,--verbose", f.verbose, "debug logging");
    app.add_flag("-q,--quiet", f.quiet, "warnings and errors only");
}

bool passed(const CLI::App& app, const char* name) { return app.count(name) > 0; }

// Builds the effective config. Returns false when the config file is unreadable.
bool build_config(const CLI::App& app, const Flags& f, kgrerank::RunConfig& cfg, std::vector<std::string>& findings) {
    if (!f.config.empty()) {
        std::ifstream in(f.config);
        try {
            cfg = kgrerank::config_from_json(nlohmann::json::parse(in), &findings);
        } catch (const nlohmann::json::parse_error& e) {
            findings.push_back(fmt::format("config '{}' is not valid JSON: {}", f.config, e.what()));
            return false;
        }
    }
    if (passed(app, "--dataset")) cfg.dataset = f.dataset;
    if (passed(app, "--events")) cfg.events = f.events;
    if (passed(app, "--features")) cfg.features = f.features;
    if (passed(app, "--genres")) cfg.genres = f.genres;
    if (passed(app, "--netflix")) cfg.netflix = f.netflix;
    if (passed(app, "--recommendations")) cfg.recommendations = f.recommendations;
    if (passed(app, "--out")) cfg.output = f.out;
    if (passed(app, "--recommender")) cfg.recommender = f.recommender;
    if (passed(app, "--metric")) cfg.metrics = f.metrics;
    if (passed(app, "--order")) cfg.orders = f.orders;
    if (passed(app, "--mode")) cfg.mode = f.mode;
    if (passed(app, "--top-n")) cfg.top_n = f.top_n;
    if (passed(app, "--k")) cfg.eval_k = f.k;
    if (passed(app, "--seed")) cfg.seed = f.seed;
    if (passed(app, "--threads")) cfg.parallelism = f.threads;
    if (passed(app, "--knn-k")) cfg.knn_k = f.knn_k;
    if (passed(app, "--sample-users")) cfg.sample_users = f.sample_users;
    if (passed(app, "--min-unique-tracks")) cfg.min_unique_tracks = f.min_unique;
    if (passed(app, "--profiles")) cfg.profiles.n_profiles = f.n_profiles;
    if (passed(app, "--min-items")) cfg.profiles.min_items = f.min_items;
    if (passed(app, "--max-items")) cfg.profiles.max_items = f.max_items;
    if (passed(app, "--split-ratio")) cfg.split_ratio = f.split_ratio;
    return true;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Knowledge-graph based re-ranking of recommendation lists"};
    app.set_version_flag("--version", std::string(kgrerank::kToolVersion));
    app.require_subcommand(1);

    using Stage = std::function<void(const kgrerank::RunConfig&)>;
    struct Command {
        const char* name;
        const char* help;
        Stage run;
        bool needs_inputs;  // whether input paths must exist
    };
    const std::vector<Command> commands = {
        {"ingest", "parse inputs and write the catalog graph, interactions and profiles", kgrerank::run_ingest, true},
        {"recommend", "produce base recommendation lists", kgrerank::run_recommend, false},
        {"rerank", "re-rank base lists per metric and order", kgrerank::run_rerank, false},
        {"evaluate", "compute ILD, unexpectedness and nDCG reports", kgrerank::run_evaluate, false},
        {"run", "all stages plus a manifest", kgrerank::run_pipeline, true},
    };

    std::vector<Flags> flags(commands.size());
    std::vector<CLI::App*> subs;
    for (std::size_t i = 0; i < commands.size(); ++i) {
        auto* sub = app.add_subcommand(commands[i].name, commands[i].help);
        add_flags(*sub, flags[i]);
        subs.push_back(sub);
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kExitOk : kExitValidation;
    }

    spdlog::set_default_logger(spdlog::stderr_color_mt("kgrerank"));
    for (std::size_t i = 0; i < commands.size(); ++i) {
        if (!subs[i]->parsed()) continue;
        const Flags& f = flags[i];
        spdlog::set_level(f.verbose ? spdlog::level::debug : f.quiet ? spdlog::level::warn : spdlog::level::info);

        kgrerank::RunConfig cfg;
        std::vector<std::string> findings;
        if (build_config(*subs[i], f, cfg, findings)) {
            const auto more = kgrerank::validate_config(cfg, commands[i].needs_inputs);
            findings.insert(findings.end(), more.begin(), more.end());
        }
        if (!findings.empty()) {
            for (const auto& m : findings) spdlog::error("config: {}", m);
            return kExitValidation;
        }
        try {
            commands[i].run(cfg);
        } catch (const std::exception& e) {
            spdlog::error("{}", e.what());
            return kExitRuntime;
        }
    }
    return kExitOk;
}
