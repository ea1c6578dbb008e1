#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "planshape/guidance/backend.hpp"
#include "planshape/rl/qlearn.hpp"

namespace planshape::harness {

// One file fully determines a run; the resolved form (defaults included) is
// written into the run directory. Flat `key = value` lines under [sections].
struct ExperimentConfig {
    // [experiment]
    std::string environment = "minecraft";
    std::string abstraction = "hierarchical";  // hierarchical | deterministic
    std::string guidance = "verified";         // verified | direct
    std::string out_dir = "runs/out";

    // [env]
    double slip = 0.1;
    int horizon = 0;             // 0 = family default
    std::uint64_t env_seed = 0;  // reset seed for the plan abstraction

    // [backend]
    std::string backend = "oracle";  // oracle | mock | http
    double corruption = 0.0;
    int partial_subgoals = 0;        // oracle: truncate after k sub-goals
    std::string fixture;             // mock: transcript JSONL to replay
    guidance::HttpConfig http;

    // [loop]
    int budget_steps = 0;        // 0 = per-world default
    int budget_backprompts = 0;

    // [shaping]
    std::string shaping = "none";  // none | state | lookback
    double potential_scale = 1.0;
    bool gamma_weighted = false;
    bool pure_state_potential = false;

    // [train]
    rl::TrainConfig train;

    // [run]
    std::vector<std::uint64_t> seeds = {1, 2, 3, 4, 5};
    int workers = 1;
};

ExperimentConfig parse_config_text(const std::string& text);
ExperimentConfig load_config(const std::string& path);
std::string config_to_text(const ExperimentConfig& config);

}  // namespace planshape::harness
