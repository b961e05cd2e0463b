#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "ibias/analysis.hpp"
#include "ibias/metrics.hpp"
#include "ibias/model.hpp"
#include "ibias/prediction.hpp"
#include "ibias/train.hpp"

namespace ibias {

/// Environment variable naming the directory that relative run paths resolve against.
inline constexpr const char* kRunRootEnv = "IBIAS_RUN_ROOT";

struct RunConfig {
    std::filesystem::path corpus;
    /// Story fold plan or sentence split plan (JSON). Empty: build story folds from k and split_seed.
    std::filesystem::path split;
    std::size_t k = 10;
    std::uint64_t split_seed = 0;
    /// Directory holding emb.fold<k>.emb1 files.
    std::filesystem::path embeddings;
    std::filesystem::path run_dir;
    ModelConfig model;
    /// When true, input_dim is taken from the embedding files.
    bool input_dim_from_embeddings = true;
    TrainConfig train;
    std::vector<std::uint64_t> seeds = {1, 2, 3, 4, 5};
    /// Empty: every fold.
    std::vector<std::size_t> folds;
    std::size_t window = 5;
    std::filesystem::path baseline_run;
    double alpha = 0.05;
    std::filesystem::path lexicon;
    std::size_t workers = 1;
    bool save_checkpoints = true;
};

/// Relative paths in the document are resolved against `base_dir`.
RunConfig run_config_from_json(const nlohmann::json& j, const std::filesystem::path& base_dir = {});
nlohmann::json to_json(const RunConfig& c);

/// Absolute run directory: relative paths resolve against $IBIAS_RUN_ROOT when set.
std::filesystem::path resolve_run_dir(const std::filesystem::path& p);

struct RunManifest {
    std::string corpus_digest;
    std::string split_digest;
    std::string variant;
    std::vector<std::uint64_t> seeds;
    std::vector<std::size_t> folds;
    nlohmann::json config;
    std::string created;
    nlohmann::json outputs;
};

nlohmann::json to_json(const RunManifest& m);
RunManifest manifest_from_json(const nlohmann::json& j);
RunManifest load_manifest(const std::filesystem::path& run_dir);

struct MetricComparison {
    std::string metric;
    MeanStd baseline;
    MeanStd system;
    TTestResult test;
    /// "+" significantly better than the baseline, "-" significantly worse.
    std::string marker;
};

struct RunComparison {
    std::vector<MetricComparison> metrics;
    std::string table;
};

/// Per-metric t-tests of `system` against `baseline` over seeds.
RunComparison compare_aggregates(const SeedAggregate& baseline, const SeedAggregate& system, double alpha,
                                 std::string_view baseline_name = "baseline", std::string_view system_name = "system");

/// Both runs must share corpus digest and split; throws ValidationError otherwise.
RunComparison compare_runs(const std::filesystem::path& baseline_run, const std::filesystem::path& system_run,
                           double alpha);

nlohmann::json to_json(const RunComparison& c);

struct RunOutcome {
    RunManifest manifest;
    SeedAggregate aggregate;
    std::vector<PredictionSet> seed_predictions;
    std::optional<RunComparison> comparison;
    std::size_t trained_jobs = 0;
    std::size_t reused_jobs = 0;
};

/// Trains the configured variant for every (fold, seed), pools each seed's
/// test predictions, and writes aggregates, stratified reports and (optionally)
/// a comparison against a baseline run. Completed jobs are reused; existing
/// report files are never overwritten with different content.
RunOutcome run_experiment(const RunConfig& cfg);

/// Loads `seed<s>.predictions.jsonl` for every seed of a finished run.
std::vector<PredictionSet> load_seed_predictions(const std::filesystem::path& run_dir);

/// Writes `content` unless the file exists; an existing file with different
/// content is a ValidationError.
void write_once(const std::filesystem::path& path, const std::string& content);

}  // namespace ibias
