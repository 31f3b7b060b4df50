// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The kgrerank Authors

#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "kgrerank/ingest.hpp"
#include "kgrerank/netmetrics.hpp"
#include "kgrerank/rerank.hpp"

namespace kgrerank {

inline constexpr const char* kToolVersion = "0.1.0";

/// Everything a pipeline run needs. Enumerations are kept as the names used
/// on the command line so that validate_config() can report bad values.
struct RunConfig {
    std::string dataset = "synthetic";  // lastfm | netflix | synthetic
    std::filesystem::path events;       // lastfm: listening events TSV
    std::filesystem::path features;     // lastfm: acoustic features CSV
    std::filesystem::path genres;       // lastfm: track genres TSV
    std::filesystem::path netflix;      // netflix: titles CSV
    std::filesystem::path recommendations;  // external recommender run file
    std::filesystem::path output = "kgrerank-out";

    std::string recommender = "popularity";  // external | baseline | itemknn | popularity
    std::vector<std::string> metrics = {"betweenness"};
    std::vector<std::string> orders = {"asc", "desc"};
    std::string mode = "closed";  // closed | existing

    std::size_t top_n = 100;
    std::size_t eval_k = 10;
    std::uint64_t seed = 42;
    std::size_t parallelism = 0;  // 0: all hardware threads
    std::size_t knn_k = 40;

    // lastfm / synthetic
    std::size_t sample_users = 0;  // 0: every eligible user
    std::size_t min_unique_tracks = 1;
    // netflix
    SyntheticProfileConfig profiles{};
    bool prune_degree_one = true;
    // Hold out (1 - split_ratio) of each profile; 0 disables the split.
    double split_ratio = 0.0;

    SyntheticMusicConfig synthetic{};
};

/// Reads the declarative config document. Unknown keys and mistyped values are
/// appended to `findings` instead of throwing.
RunConfig config_from_json(const nlohmann::json& doc, std::vector<std::string>* findings = nullptr);
nlohmann::ordered_json config_to_json(const RunConfig& cfg);

/// Every violation at once; an empty result means the config is valid.
/// With `check_inputs` false the dataset input files are not required
/// (stages after ingest read only the output directory).
std::vector<std::string> validate_config(const RunConfig& cfg, bool check_inputs = true);

/// Resolved enumerations; only valid after validate_config() returned no findings.
std::vector<MetricKind> resolved_metrics(const RunConfig& cfg);
std::vector<SortOrder> resolved_orders(const RunConfig& cfg);

/// Error raised by a pipeline stage; carries the stage name.
class StageError : public Error {
public:
    StageError(std::string stage, const std::string& cause)
        : Error(stage + ": " + cause), stage_(std::move(stage)) {}
    const std::string& stage() const noexcept { return stage_; }

private:
    std::string stage_;
};

// Individual stages. Each reads what earlier stages wrote into cfg.output.
void run_ingest(const RunConfig& cfg);
void run_recommend(const RunConfig& cfg);
void run_rerank(const RunConfig& cfg);
void run_evaluate(const RunConfig& cfg);

/// All stages followed by `manifest.json`. While running, a `STALE` marker
/// sits in the output directory; it is removed only on success.
void run_pipeline(const RunConfig& cfg);

/// Hex SHA-256 of a file's bytes.
std::string sha256_file(const std::filesystem::path& path);
std::string sha256_hex(std::string_view data);

}  // namespace kgrerank
