#include "planshape/guidance/loop.hpp"

#include <chrono>
#include <sstream>

#include "json.hpp"
#include "planshape/strips/planner.hpp"

namespace planshape::guidance {

namespace {

std::string now_iso8601() {
    const auto now = std::chrono::system_clock::now();
    const std::time_t t = std::chrono::system_clock::to_time_t(now);
    char buf[32];
    std::strftime(buf, sizeof buf, "%FT%TZ", std::gmtime(&t));
    return buf;
}

TranscriptRecord make_record(int step, int attempt, const std::string& prompt,
                             const std::string& response, const std::string& verdict) {
    TranscriptRecord r;
    r.step = step;
    r.attempt = attempt;
    r.prompt = prompt;
    r.response = response;
    r.verdict = verdict;
    r.timestamp = now_iso8601();
    return r;
}

// Simulates a parsed low-level action sequence on the determinized env,
// recording the achieved trajectory. Blocked moves are legal no-ops.
void simulate_det_plan(const Abstraction& abs, const std::vector<int>& actions,
                       GuidePlan& plan) {
    RngStream dummy(0);
    worlds::AgentState s = abs.start;
    for (int a : actions) {
        if (worlds::is_terminal_state(abs.env, s)) break;
        const auto out = worlds::step(abs.env, s, a, dummy);
        plan.steps.emplace_back(s, a);
        s = out.next;
        if (out.done) {
            plan.complete = out.reason == worlds::Termination::goal;
            plan.achieved_reward = out.reward;
            break;
        }
    }
    plan.subgoal_fraction = plan.complete ? 1.0 : 0.0;
}

}  // namespace

LoopBudget default_budget(const std::string& world_id) {
    if (world_id == "household" || world_id == "minecraft") return {20, 5};
    return {30, 10};
}

double subgoal_fraction(const Abstraction& abs,
                        const std::vector<strips::GroundAction>& valid_prefix,
                        bool goal_reached) {
    if (abs.subgoal_predicates.empty()) return goal_reached ? 1.0 : 0.0;
    strips::FluentSet state = abs.problem.init;
    std::vector<bool> achieved(abs.subgoal_predicates.size(), false);
    const auto sweep = [&]() {
        for (std::size_t g = 0; g < abs.subgoal_predicates.size(); ++g) {
            if (achieved[g]) continue;
            for (const auto& f : state) {
                if (f.predicate == abs.subgoal_predicates[g]) {
                    achieved[g] = true;
                    break;
                }
            }
        }
    };
    sweep();
    for (const auto& action : valid_prefix) {
        state = strips::apply(state, action);
        sweep();
    }
    int count = 0;
    for (bool b : achieved) count += b ? 1 : 0;
    return static_cast<double>(count) / static_cast<double>(abs.subgoal_predicates.size());
}

GuidePlan direct_plan(ProposerBackend& backend, const Abstraction& abs, Transcript* transcript) {
    GuidePlan plan;
    plan.world_id = abs.world_id;
    plan.mode = abs.mode == Abstraction::Mode::deterministic ? GuidePlan::Mode::deterministic
                                                             : GuidePlan::Mode::hierarchical;
    const PromptBundle bundle = build_direct_prompt(abs);
    const std::string prompt = bundle.render();
    backend.on_context(StepContext{});
    const std::string response = backend.complete(prompt);
    const ParsedResponse parsed = parse_response(response, abs, true);
    if (transcript) {
        transcript->add(make_record(0, 0, prompt, response,
                                    parsed.ok ? "valid" : "parse-error"));
    }
    if (!parsed.ok) return plan;  // empty plan, fraction 0

    if (abs.mode == Abstraction::Mode::deterministic) {
        simulate_det_plan(abs, parsed.det_actions, plan);
        return plan;
    }
    std::vector<strips::GroundAction> proposed;
    for (auto idx : parsed.hier_actions) proposed.push_back(abs.ground_actions[idx]);
    const auto validation = strips::validate_plan(abs.problem, proposed);
    plan.actions.assign(proposed.begin(),
                        proposed.begin() + static_cast<long>(validation.valid_prefix_len));
    plan.complete = validation.goal_reached;
    plan.subgoal_fraction = subgoal_fraction(abs, plan.actions, plan.complete);
    return plan;
}

VerifiedOutcome verified_plan(ProposerBackend& backend, const Abstraction& abs,
                              const LoopBudget& budget) {
    VerifiedOutcome out;
    out.plan.world_id = abs.world_id;
    out.plan.mode = abs.mode == Abstraction::Mode::deterministic
                        ? GuidePlan::Mode::deterministic
                        : GuidePlan::Mode::hierarchical;

    const bool hier = abs.mode == Abstraction::Mode::hierarchical;
    strips::FluentSet sym_state = abs.problem.init;
    worlds::AgentState env_state = abs.start;
    RngStream dummy(0);
    bool exhausted = false;

    for (int step_i = 0; step_i < budget.max_steps && !exhausted; ++step_i) {
        if (hier && sym_state.contains_all(abs.problem.goal)) break;
        if (!hier && worlds::is_terminal_state(abs.env, env_state)) break;

        strips::ActionPartition part;
        Feasibility feas;
        StepContext ctx;
        if (hier) {
            part = strips::valid_actions(sym_state, abs.ground_actions);
            ctx.symbolic_state = &sym_state;
            ctx.valid = &part.valid;
            ctx.invalid = &part.invalid;
        } else {
            feas = feasible_lowlevel_actions(abs.env, env_state);
            ctx.env_state = &env_state;
            ctx.feasibility = &feas;
        }

        std::vector<std::string> allowed;
        if (hier) {
            for (auto i : part.valid) allowed.push_back(abs.ground_actions[i].str());
        } else {
            for (int a : feas.feasible) allowed.push_back(worlds::action_names(abs.env)[a]);
        }

        const PromptBundle step_bundle =
            hier ? build_step_prompt(abs, sym_state, out.plan.actions)
                 : build_step_prompt(abs, env_state, {});
        std::string prompt = step_bundle.render();

        std::vector<std::string> rejected;
        int chosen = -1;
        for (int attempt = 0; attempt <= budget.max_backprompts_per_step; ++attempt) {
            ctx.back_prompt = attempt > 0;
            backend.on_context(ctx);
            ++out.backend_calls;
            if (attempt > 0) ++out.back_prompts;
            const std::string response = backend.complete(prompt);
            const ParsedResponse parsed = parse_response(response, abs, false);
            std::string verdict;
            std::string reason;
            if (!parsed.ok) {
                verdict = "parse-error";
                reason = "the response could not be parsed as an action";
            } else if (hier) {
                const std::size_t idx = parsed.hier_actions[0];
                const bool valid = strips::applicable(sym_state, abs.ground_actions[idx]);
                verdict = valid ? "valid" : "invalid";
                if (valid) {
                    chosen = static_cast<int>(idx);
                } else {
                    reason = hierarchical_reason(sym_state, abs.ground_actions[idx]);
                }
            } else {
                const int a = parsed.det_actions[0];
                const bool valid =
                    std::find(feas.feasible.begin(), feas.feasible.end(), a) !=
                    feas.feasible.end();
                verdict = valid ? "valid" : "invalid";
                if (valid) {
                    chosen = a;
                } else {
                    reason = feas.reasons[a];
                }
            }
            out.transcript.add(make_record(step_i, attempt, prompt, response, verdict));
            if (chosen >= 0) break;
            rejected.push_back(response);
            if (attempt == budget.max_backprompts_per_step) {
                exhausted = true;  // plan stays partial; invalid guess never executed
                break;
            }
            prompt = build_back_prompt(step_bundle, abs, rejected, reason, allowed).render();
        }
        if (exhausted) break;

        // execute the accepted action (invalid guesses were never executed)
        if (hier) {
            const auto& action = abs.ground_actions[static_cast<std::size_t>(chosen)];
            sym_state = strips::apply(sym_state, action);
            out.plan.actions.push_back(action);
        } else {
            const auto step_out = worlds::step(abs.env, env_state, chosen, dummy);
            out.plan.steps.emplace_back(env_state, chosen);
            env_state = step_out.next;
            if (step_out.done) {
                out.plan.complete = step_out.reason == worlds::Termination::goal;
                out.plan.achieved_reward = step_out.reward;
                break;
            }
        }
    }

    if (hier) {
        out.plan.complete = sym_state.contains_all(abs.problem.goal);
        out.plan.subgoal_fraction = subgoal_fraction(abs, out.plan.actions, out.plan.complete);
    } else {
        out.plan.subgoal_fraction = out.plan.complete ? 1.0 : 0.0;
    }
    return out;
}

}  // namespace planshape::guidance
