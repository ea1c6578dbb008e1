#pragma once

#include "planshape/guidance/backend.hpp"
#include "planshape/guidance/plan.hpp"
#include "planshape/guidance/prompt.hpp"

namespace planshape::guidance {

struct LoopBudget {
    int max_steps = 20;
    int max_backprompts_per_step = 5;
};

// 20 steps / 5 back-prompts for household and minecraft; 30 / 10 for the
// BabyAI suite and mario.
LoopBudget default_budget(const std::string& world_id);

// Fraction of the domain's designated sub-goals achieved by executing the
// plan's valid prefix (1.0 for goal-reaching plans by construction). Worlds
// without a sub-goal listing score complete ? 1 : 0.
double subgoal_fraction(const Abstraction& abs,
                        const std::vector<strips::GroundAction>& valid_prefix,
                        bool goal_reached);

// One whole-plan query. Parse failures and transport-level garbage yield an
// empty plan, never an exception; the transcript records the exchange.
GuidePlan direct_plan(ProposerBackend& backend, const Abstraction& abs,
                      Transcript* transcript = nullptr);

struct VerifiedOutcome {
    GuidePlan plan;
    Transcript transcript;
    int backend_calls = 0;
    int back_prompts = 0;
};

// Step-prompt / back-prompt loop. Invalid actions are never executed; budget
// exhaustion returns the partial plan with complete = false.
VerifiedOutcome verified_plan(ProposerBackend& backend, const Abstraction& abs,
                              const LoopBudget& budget);

}  // namespace planshape::guidance
