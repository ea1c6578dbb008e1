#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "planshape/guidance/plan.hpp"
#include "planshape/strips/model.hpp"
#include "planshape/worlds/world.hpp"

namespace planshape::shaping {

// Potential over (state, action) pairs or over sub-goal fluent prefixes.
// Immutable after construction; queries for unknown keys return 0.
struct PotentialTable {
    enum class Mode { state_action, state };
    Mode mode = Mode::state;
    double scale = 1.0;  // c

    // state_action mode: (state_key << 3 | action) -> potential
    std::unordered_map<std::uint64_t, double> pairs;

    // state mode: ordered sub-goal fluents taken from the guide plan;
    // Φ(s) = scale * (longest prefix whose fluents all hold in s)
    std::vector<strips::Fluent> subgoals;
};

inline std::uint64_t sa_key(std::uint64_t state_key, int action) {
    return (state_key << 3) | static_cast<std::uint64_t>(action);
}

double potential_sa(const PotentialTable& table, std::uint64_t state_key, int action);

// Longest prefix of the table's sub-goal list fully contained in `fs`.
int subgoal_prefix(const PotentialTable& table, const strips::FluentSet& fs);
double potential_state(const PotentialTable& table, const strips::FluentSet& fs);

// Headline add-effect per schema, e.g. get_key -> key-picked. Keyed by the
// bundled domain name; overridable through the harness config.
using Designation = std::map<std::string, std::string>;
const Designation& default_designation(const std::string& domain_name);

// Sub-goal fluent of plan step i = the designated add-effect of that action.
std::vector<strips::Fluent> designate_subgoals(const std::vector<strips::GroundAction>& plan,
                                               const Designation& designation);

// Progressive potentials: pair i of an n-step plan gets scale*(i+1)/n.
PotentialTable potential_from_plan_sa(const worlds::GridWorld& env,
                                      const guidance::GuidePlan& plan, double scale);

PotentialTable potential_from_subgoals(const guidance::GuidePlan& plan,
                                       const Designation& designation, double scale);

// F = Φ(s') − Φ(s), the literal form.
double shape_state(const PotentialTable& table, const strips::FluentSet& from,
                   const strips::FluentSet& to);

// γ-weighted variant γ·Φ(s') − Φ(s); terminal next-states take Φ = 0 so the
// policy-invariance guarantee is exact on episodic tasks.
double shape_state_weighted(const PotentialTable& table, const strips::FluentSet& from,
                            const strips::FluentSet& to, double gamma, bool to_terminal);

// Look-back advice: Φ(s_t,a_t) − γ⁻¹·Φ(s_{t−1},a_{t−1}); the previous pair is
// absent on the first step of an episode. γ outside (0,1] is invalid.
double shape_lookback(const PotentialTable& table, std::uint64_t state_key, int action,
                      std::optional<std::pair<std::uint64_t, int>> previous, double gamma);

struct ShapingConfig {
    enum class Mode { none, state, lookback };
    Mode mode = Mode::none;
    double scale = 1.0;
    double gamma = 0.99;
    bool gamma_weighted = false;  // use γ·Φ(s')−Φ(s) instead of the literal form
    // State-mode potential backing. The default counts the longest prefix
    // ACHIEVED so far in the episode (landmark progress), which is monotone
    // even when a later action deletes an earlier sub-goal fluent (mario's
    // climb deletes at-bottom, household's open_door deletes key-picked).
    // The literal current-state prefix is available for experiments.
    bool pure_state_potential = false;
    PotentialTable table;
};

// Sequential shaping evaluator. begin_episode(s0) resets the look-back pair
// and the landmark marks; shape() must then see the episode's transitions in
// order. A sub-goal fluent is banked the moment it holds; the potential is
// the longest banked prefix, so credit flows in plan order even when a later
// action deletes an earlier sub-goal fluent. Also reports prefix advances so
// the trainer can decay ε on sub-goals.
class EpisodeShaper {
public:
    EpisodeShaper(const worlds::GridWorld& env, const ShapingConfig& config);

    void begin_episode(const worlds::AgentState& s0);
    // Returns F for this transition and updates episode context.
    double shape(const worlds::AgentState& s, int action, const worlds::AgentState& s2,
                 bool done);
    int last_prefix_advance() const { return last_advance_; }

private:
    void mark(const strips::FluentSet& fs);
    int banked_prefix() const;

    const worlds::GridWorld& env_;
    const ShapingConfig& config_;
    std::optional<std::pair<std::uint64_t, int>> prev_pair_;
    std::vector<bool> achieved_;
    int banked_ = 0;
    int last_advance_ = 0;
};

std::string potential_to_json(const PotentialTable& table);
PotentialTable potential_from_json(const std::string& text);

}  // namespace planshape::shaping

namespace planshape::rl {
class ReplayBuffer;
}

namespace planshape::shaping {

// Full-pass relabeling: every stored transition's shaped reward becomes
// extrinsic reward + F, recomputed from the pristine rewards (so relabeling
// is pure and idempotent). Episode boundaries reset the look-back and
// progress context; a leading partial episode (its head evicted by FIFO)
// is treated as starting at its earliest stored transition.
void relabel_buffer(const worlds::GridWorld& env, rl::ReplayBuffer& buffer,
                    const ShapingConfig& config);

}  // namespace planshape::shaping
