#pragma once

#include <optional>
#include <string>
#include <vector>

#include "planshape/guidance/loop.hpp"
#include "planshape/harness/config.hpp"
#include "planshape/harness/metrics.hpp"
#include "planshape/rl/qlearn.hpp"

namespace planshape::harness {

// Bundled world with the config's slip and horizon applied.
worlds::GridWorld world_from_config(const ExperimentConfig& config);

guidance::Abstraction abstraction_from_config(const ExperimentConfig& config);

struct PlanArtifacts {
    guidance::GuidePlan plan;
    guidance::Transcript transcript;
    int backend_calls = 0;
    std::string metrics_line;
};

// Runs the plan phase and writes plan.json, transcript.jsonl, and the
// resolved config into the run directory.
PlanArtifacts run_plan(const ExperimentConfig& config);

struct SeedResult {
    std::uint64_t seed = 0;
    double auc = 0.0;                 // sum of extrinsic episodic returns
    int first_success = -1;           // episode index, or episode count when never
    int episodes = 0;
    double final_epsilon = 1.0;
    std::string error;                // nonempty when this seed failed
    rl::LearningCurve curve;
};

struct TrainArtifacts {
    std::vector<SeedResult> per_seed;
    std::string summary_json;
    int failed_seeds = 0;
};

// Trains one seed per entry of config.seeds (in parallel up to config.workers)
// and writes curve_seed<k>.csv files plus summary.json. `plan` may be null
// only for shaping = none; mode mismatches are rejected before any training.
TrainArtifacts run_train(const ExperimentConfig& config,
                         const guidance::GuidePlan* plan);

shaping::ShapingConfig shaping_from_config(const ExperimentConfig& config,
                                           const guidance::GuidePlan* plan,
                                           const worlds::GridWorld& env);

// Full pipeline for a named suite: oracle plan (complete and partial), then
// vanilla / partial-plan / complete-plan training across the seed list.
// Returns the number of failed seed-runs; every seed failing is fatal for the
// caller. Writes a text report table under <out>/report.txt.
int run_reproduce(const std::string& suite, const ExperimentConfig& base);

// Plan-file validation for the CLI: returns the ValidationResult of the plan
// text (one action term per line or whitespace-separated) against the files.
strips::ValidationResult validate_plan_files(const std::string& domain_path,
                                             const std::string& problem_path,
                                             const std::string& plan_path,
                                             std::size_t* prefix_out = nullptr);

void write_file(const std::string& path, const std::string& content);
std::string read_file(const std::string& path);

}  // namespace planshape::harness
