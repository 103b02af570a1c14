#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "json_io.hpp"

namespace slfd {

// Experiment orchestration: one function per CLI stage plus the full-grid
// runner. Every stage reads declared inputs, validates them, and writes
// seeded artifact files that embed {stage, seed, config hash, version}.
// Reruns with identical config produce byte-identical files.

struct DemoStageConfig {
    int count = 5;
    double stop_fraction = 0.4;
    // per-iteration checkpoints give the stop rule fine granularity
    RlConfig train = [] {
        RlConfig c;
        c.checkpoint_interval = 1;
        return c;
    }();

    // First checkpoint whose held-out return crosses this threshold supplies
    // the demonstrations: fraction * best for positive-return scales,
    // fraction of the way from the random baseline to best otherwise.
    static double stop_threshold(double best_return, double random_baseline, double fraction);
};

struct NoiseStageConfig {
    int levels = 20;
    int episodes_per_level = 5;
    std::string generator = "airl"; // provenance label: bc | airl | noisy-airl
    std::string policy_path;        // defaults derived from the output directory
    std::string reward_path;
};

struct FitStageConfig {
    std::string dataset_path;
};

struct LearnerStageConfig { // shared path plumbing for ssrr/drex stages
    std::string dataset_path;
    std::string fit_path; // ssrr only
};

struct RlStageConfig {
    std::string reward_path;
    RlConfig train;
};

struct EvalStageConfig {
    std::string reward_path;
    std::string dataset_path;
    std::string demos_path;
    std::string policy_path;         // optional; enables the policy columns
    std::string generator_policy_path; // for the held-out ranking dataset
    std::string generator_reward_path;
    std::string fit_path;            // optional; noise-curve export
    std::string spectrum_path;       // optional; prebuilt test spectrum
    int spectrum_size = 50;
    int spectrum_interval = 10;
    int policy_episodes = 100;
    int holdout_episodes_per_level = 2;
};

struct PipelineConfig {
    std::string env_id = "gridnav";
    std::uint64_t seed = 1; // single-stage root seed
    std::vector<std::uint64_t> seeds = {1, 2, 3, 4, 5};
    std::vector<std::string> generators = {"bc", "airl", "noisy-airl"};
    std::vector<std::string> learners = {"ssrr", "drex"};
    std::string out_dir = "out";
    int jobs = 1;
    std::string demos_path; // input for the bc and airl stages

    DemoStageConfig demo;
    BcConfig bc;
    AirlConfig airl;
    NoiseStageConfig noise;
    FitStageConfig fit;
    SsrrConfig ssrr;
    LearnerStageConfig ssrr_io;
    DrexConfig drex;
    LearnerStageConfig drex_io;
    RlStageConfig rl;
    EvalStageConfig eval;

    void validate() const;
};

// Parses and validates the config JSON; unknown keys are rejected so typos
// fail loudly. CLI overrides are applied before hashing.
PipelineConfig parse_pipeline_config(const Json& j);
Json pipeline_config_to_json(const PipelineConfig& config);

struct StageContext {
    PipelineConfig config;
    std::filesystem::path out_dir;
    std::string config_hash;

    ArtifactMeta meta(const std::string& stage, std::uint64_t seed) const;
    std::filesystem::path resolve(const std::string& configured,
                                  const std::string& default_name) const;
};

// Individual stages; each returns the list of files written.
std::vector<std::filesystem::path> run_demo_gen(const StageContext& ctx);
std::vector<std::filesystem::path> run_bc(const StageContext& ctx);
std::vector<std::filesystem::path> run_airl_stage(const StageContext& ctx);
std::vector<std::filesystem::path> run_noise_gen(const StageContext& ctx);
std::vector<std::filesystem::path> run_fit(const StageContext& ctx);
std::vector<std::filesystem::path> run_ssrr_stage(const StageContext& ctx);
std::vector<std::filesystem::path> run_drex_stage(const StageContext& ctx);
std::vector<std::filesystem::path> run_rl(const StageContext& ctx);
std::vector<std::filesystem::path> run_eval(const StageContext& ctx);

std::vector<std::filesystem::path> run_stage(const std::string& stage, const StageContext& ctx);

struct CellResult {
    std::string generator;
    std::string learner;
    std::uint64_t seed = 0;
    bool ok = false;
    std::string error;
    double pearson_train = 0.0;
    double pearson_test = 0.0;
    double ranking_accuracy = 0.0;
};

struct PipelineSummary {
    std::vector<CellResult> cells;
    std::vector<std::filesystem::path> files;
};

// Runs the (seed x generator x learner) grid: demos per seed, generator
// artifacts per (seed, generator), learner + eval per cell, then one policy
// training per (generator, learner) on the best-correlated seed's reward.
// A failed cell is recorded and the rest of the grid proceeds.
PipelineSummary run_pipeline(const StageContext& ctx);

} // namespace slfd
