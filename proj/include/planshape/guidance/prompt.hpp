#pragma once

#include <optional>
#include <string>
#include <vector>

#include "planshape/strips/model.hpp"
#include "planshape/strips/planner.hpp"
#include "planshape/worlds/world.hpp"

namespace planshape::guidance {

// The MDP abstraction handed to the proposer: either the determinized
// environment (low-level actions) or the bundled STRIPS model (sub-goals).
struct Abstraction {
    enum class Mode { deterministic, hierarchical };
    Mode mode = Mode::deterministic;
    std::string world_id;

    // deterministic mode
    worlds::GridWorld env;  // slip-free copy
    worlds::AgentState start;

    // hierarchical mode
    strips::Domain domain;
    strips::StripsProblem problem;
    std::vector<strips::GroundAction> ground_actions;
    std::string domain_text;   // verbatim bundled PDDL, embedded in prompts
    std::string problem_text;
    std::vector<std::string> subgoal_predicates;  // empty when no listing exists
};

Abstraction make_deterministic_abstraction(const worlds::GridWorld& env,
                                           std::uint64_t reset_seed = 0);
Abstraction make_hierarchical_abstraction(const std::string& world_id);

// Prompt pieces in the paper's layout: task, observation, query, plus the
// feedback blocks accumulated by back-prompting. Hierarchical bundles have no
// task description; their instruction sentence leads the rendered prompt.
struct PromptBundle {
    std::string task_description;
    std::string observation_description;
    std::string query_description;
    std::vector<std::string> feedback;  // most recent verifier feedback blocks
    std::string tried_line;             // "You have already tried ..." or empty
    bool hierarchical = false;

    std::string render() const;
};

PromptBundle build_direct_prompt(const Abstraction& abs);
PromptBundle build_step_prompt(const Abstraction& abs, const worlds::AgentState& state,
                               const std::vector<int>& plan_so_far);
PromptBundle build_step_prompt(const Abstraction& abs, const strips::FluentSet& state,
                               const std::vector<strips::GroundAction>& plan_so_far);

// Deterministic-mode feasibility partition with per-action reasons and the
// terminal-unsafe annotation (lava entries are feasible but fatal).
struct Feasibility {
    std::vector<int> feasible;
    std::vector<int> infeasible;
    std::vector<int> unsafe;
    std::vector<std::string> reasons;  // indexed by action; empty when feasible
};
Feasibility feasible_lowlevel_actions(const worlds::GridWorld& env,
                                      const worlds::AgentState& state);

// Feedback sentence for an inapplicable ground action, e.g. "you are still at
// upstairs" for mario's pickup_key at the start.
std::string hierarchical_reason(const strips::FluentSet& state,
                                const strips::GroundAction& action);

// invalid_guesses: raw response strings rejected at this step, oldest first.
PromptBundle build_back_prompt(const PromptBundle& step_prompt, const Abstraction& abs,
                               const std::vector<std::string>& invalid_guesses,
                               const std::string& last_reason,
                               const std::vector<std::string>& allowed_actions);

struct ParsedResponse {
    bool ok = false;
    std::string error;                    // offending substring when !ok
    std::vector<int> det_actions;         // deterministic mode
    std::vector<std::size_t> hier_actions;  // indices into ground_actions
};

// Deterministic mode: case-insensitive vocabulary match after trimming;
// comma-separated lists for whole plans. Hierarchical: "(name obj*)" terms or
// bare action names resolved against the ground action table. Anything
// unrecognized is a ParseError, never a silent default.
ParsedResponse parse_response(const std::string& text, const Abstraction& abs, bool whole_plan);

// Shortest low-level action sequence from `from` to the goal on a slip-free
// environment; BFS over states with the action-index tie-break. Used by the
// oracle backend and tests.
std::optional<std::vector<int>> lowlevel_plan(const worlds::GridWorld& env,
                                              const worlds::AgentState& from,
                                              std::size_t max_states = 1000000);

}  // namespace planshape::guidance
