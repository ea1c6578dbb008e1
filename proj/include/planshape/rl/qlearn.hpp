#pragma once

#include <cstdint>
#include <map>
#include <unordered_map>
#include <vector>

#include "planshape/rl/replay.hpp"
#include "planshape/rng.hpp"
#include "planshape/shaping/potential.hpp"
#include "planshape/worlds/world.hpp"

namespace planshape::rl {

// Tabular action values; unseen keys read as 0.
class QTable {
public:
    explicit QTable(int n_actions) : n_actions_(n_actions) {}

    int n_actions() const { return n_actions_; }

    double get(std::uint64_t state, int action) const {
        auto it = table_.find(state);
        return it == table_.end() ? 0.0 : it->second[action];
    }

    std::vector<double>& row(std::uint64_t state) {
        auto [it, fresh] = table_.try_emplace(state);
        if (fresh) it->second.assign(n_actions_, 0.0);
        return it->second;
    }

    const std::vector<double>* find(std::uint64_t state) const {
        auto it = table_.find(state);
        return it == table_.end() ? nullptr : &it->second;
    }

    std::size_t size() const { return table_.size(); }

    // Sorted copy for deterministic serialization.
    std::map<std::uint64_t, std::vector<double>> sorted() const {
        return {table_.begin(), table_.end()};
    }

private:
    int n_actions_;
    std::unordered_map<std::uint64_t, std::vector<double>> table_;
};

// ε-greedy annealing: ×0.995 per achieved sub-goal, ×0.95 per reached goal,
// floored at 0.05.
struct EpsSchedule {
    double value = 1.0;
    double floor = 0.05;
    double subgoal_decay = 0.995;
    double goal_decay = 0.95;

    void on_subgoal() { value = std::max(floor, value * subgoal_decay); }
    void on_goal() { value = std::max(floor, value * goal_decay); }
};

struct TrainConfig {
    double gamma = 0.99;
    double alpha = 0.1;
    int batch_size = 64;
    std::size_t max_steps = 5000000;      // config ceiling; runs may use less
    std::size_t buffer_capacity = 500000;
    std::uint64_t seed = 0;
    bool decay_on_subgoal = true;  // ε sub-goal events from the fluent map prefix
    int max_episodes = 0;          // optional cap, 0 = none
};

// ε-greedy with uniform tie-breaking over the argmax set.
int select_action(const QTable& q, std::uint64_t state, double eps, RngStream& rng);

// Q(s,a) += α·(r' + γ·max_a' Q(s',a')·(1−done) − Q(s,a)), applied in batch order.
void q_update(QTable& q, const std::vector<Transition>& batch, double alpha, double gamma);

struct EpisodeRecord {
    int episode = 0;
    double episodic_return = 0.0;  // extrinsic
    int steps = 0;
    double epsilon = 0.0;
    double wall_clock_s = 0.0;
};
using LearningCurve = std::vector<EpisodeRecord>;

struct TrainResult {
    QTable q{1};
    LearningCurve curve;
    int episodes = 0;
    double final_epsilon = 1.0;
    ReplayBuffer buffer{1};
    int first_success_episode = -1;  // -1 when the goal was never reached
};

// Interleaved loop: collect a transition, relabel it with F at insertion,
// sample a batch of config.batch_size and update Q. Fully reproducible from
// config.seed.
TrainResult train(const worlds::GridWorld& env, const shaping::ShapingConfig& shaping,
                  const TrainConfig& config);

}  // namespace planshape::rl
