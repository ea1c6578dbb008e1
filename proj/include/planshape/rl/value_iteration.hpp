#pragma once

#include <cstdint>
#include <unordered_map>
#include <vector>

#include "planshape/worlds/world.hpp"

namespace planshape::rl {

// Exact finite MDP extracted from a GridWorld by forward enumeration. The
// slip model is analytic (intended action with 1−p, each other with p/(n−1))
// and the goal reward is the stationary unit reward, since states drop the
// elapsed-step count.
struct EnumerableMdp {
    struct Outcome {
        double prob = 0.0;
        int next = -1;  // -1 = absorbing terminal
        double reward = 0.0;
    };
    int n_states = 0;
    int n_actions = 0;
    std::vector<worlds::AgentState> states;
    std::unordered_map<std::uint64_t, int> index;  // state_key -> state id
    std::vector<std::vector<std::vector<Outcome>>> transitions;  // [s][a] -> outcomes
};

// Throws std::invalid_argument if more than max_states are reachable.
EnumerableMdp enumerate_mdp(const worlds::GridWorld& env, std::size_t max_states = 100000);

// Synchronous sweeps to a sup-norm residual <= tolerance. Deterministic.
std::vector<std::vector<double>> value_iteration(const EnumerableMdp& mdp, double gamma,
                                                 double tolerance, int max_sweeps = 100000);

// Argmax set of a Q row under a tie tolerance.
std::vector<int> greedy_set(const std::vector<double>& q_row, double tie_tol = 1e-7);

}  // namespace planshape::rl
