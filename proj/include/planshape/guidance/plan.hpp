#pragma once

#include <string>
#include <utility>
#include <vector>

#include "planshape/strips/model.hpp"
#include "planshape/worlds/world.hpp"

namespace planshape::guidance {

// The plan obtained from the proposer over an abstraction; seed for the
// potential function.
struct GuidePlan {
    enum class Mode { deterministic, hierarchical };
    Mode mode = Mode::deterministic;
    std::string world_id;

    // deterministic mode: the achieved (state, low-level action) trajectory
    std::vector<std::pair<worlds::AgentState, int>> steps;
    // hierarchical mode: high-level action sequence (its valid prefix)
    std::vector<strips::GroundAction> actions;

    bool complete = false;
    double subgoal_fraction = 0.0;
    double achieved_reward = 0.0;  // deterministic-mode rollout reward

    std::size_t length() const {
        return mode == Mode::deterministic ? steps.size() : actions.size();
    }
};

std::string plan_to_json(const GuidePlan& plan);
GuidePlan plan_from_json(const std::string& text);

}  // namespace planshape::guidance
