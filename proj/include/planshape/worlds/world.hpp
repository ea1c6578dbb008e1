#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "planshape/rng.hpp"
#include "planshape/strips/model.hpp"

namespace planshape::worlds {

enum class CellType : std::uint8_t {
    empty,
    wall,
    key,            // the key that matters (red)
    distractor_key, // inert decoration
    door,           // starts locked
    lava,
    goal,
    tube,           // one-way down (mario)
    ladder,         // one-use up (mario)
    rock,           // hides the second key (mario)
    dock,           // charging dock (household)
    wood,           // raw wood (minecraft); id = wood index
    workshop,       // id: 0 processing, 1 plank, 2 stick, 3 ladder
};

struct Cell {
    CellType type = CellType::empty;
    std::uint8_t id = 0;
};

enum class ActionFamily { turn_based, cardinal };

// Turn-based action indices (BabyAI suite).
enum TurnAction : int { kTurnLeft = 0, kTurnRight = 1, kForward = 2, kPickup = 3, kToggle = 4 };
// Cardinal action indices.
enum CardinalAction : int { kUp = 0, kDown = 1, kLeft = 2, kRight = 3 };

// Immutable environment description. AgentState is passed in and out of step,
// so concurrent runs against one GridWorld need no synchronization.
struct GridWorld {
    std::string id;
    int width = 0;
    int height = 0;
    std::vector<Cell> cells;  // row-major
    ActionFamily family = ActionFamily::cardinal;
    int max_steps = 500;       // horizon H
    double slip_prob = 0.0;
    bool random_start = false;
    int start_x = 1, start_y = 1, start_dir = 0;
    int action_count = 4;
    int divider_row = -1;  // mario: full wall row between platforms

    const Cell& at(int x, int y) const { return cells[y * width + x]; }
    bool in_bounds(int x, int y) const { return x >= 0 && x < width && y >= 0 && y < height; }
    std::vector<int> find(CellType t) const;
};

// Flags are domain-specific bits; see world.cpp for the per-world layout.
struct AgentState {
    int x = 0;
    int y = 0;
    int dir = 0;  // 0 right, 1 down, 2 left, 3 up (turn-based family)
    std::uint32_t flags = 0;
    int steps = 0;

    bool operator==(const AgentState& o) const = default;
};

enum class Termination { none, goal, lava, horizon };

struct StepOutcome {
    AgentState next;
    double reward = 0.0;
    bool done = false;
    Termination reason = Termination::none;
    int executed_action = -1;  // differs from the command when the step slipped
};

// Parses the line-oriented layout format: `name = value` metadata lines
// followed by grid rows, one character per cell (legend in the README).
GridWorld load_layout(std::string_view text, std::string id);

// Bundled environments: doorkey5, doorkey6, empty_random5, lavagap5,
// household, mario, minecraft, empty4. Horizon and slip get the defaults
// (turn-based H=100, cardinal H=500, slip 0.1).
GridWorld bundled_world(const std::string& id);
std::vector<std::string> bundled_world_ids();

AgentState reset(const GridWorld& env, std::uint64_t seed);

// One stochastic transition. With probability slip_prob the commanded action
// is replaced by a uniform draw over the other actions in the family.
// Throws std::logic_error when called on a terminal state.
StepOutcome step(const GridWorld& env, const AgentState& state, int action, RngStream& rng);

inline bool is_terminal(const StepOutcome& o) { return o.done; }

// True when no further step is legal: horizon exhausted, standing on a
// terminal cell, or a domain terminal flag is set.
bool is_terminal_state(const GridWorld& env, const AgentState& state);

// Copy with slip_prob = 0 (the deterministic abstraction).
GridWorld determinize(const GridWorld& env);

// The fluent mapping H into the bundled hierarchical model. Supported for
// household, mario, and minecraft; throws std::invalid_argument otherwise.
strips::FluentSet fluents(const GridWorld& env, const AgentState& state);
bool has_fluent_map(const GridWorld& env);

// Ordered domain sub-goal predicates; size matches subgoal_count.
const std::vector<std::string>& subgoal_predicates(const GridWorld& env);
int subgoal_count(const GridWorld& env);

// Grid serialized row-major over the interior with tokens
// {unseen, wall, key, door, lava, goal, agent, empty} plus a trailing
// facing sentence. Turn-based family only; byte-stable for equal states.
std::string render_text(const GridWorld& env, const AgentState& state);

// Action vocabulary as used in prompts ("turn left", ..., "up", ...).
const std::vector<std::string>& action_names(const GridWorld& env);

// Turn-based inventory accessors.
bool carrying_key(const GridWorld& env, const AgentState& state);
bool door_open(const GridWorld& env, const AgentState& state);

// Canonical key excluding the elapsed-step count, so tabular entries and
// potentials aggregate across time.
std::uint64_t state_key(const GridWorld& env, const AgentState& state);

// Name of the bundled PDDL pair for this environment ("" when none).
std::string pddl_world_name(const GridWorld& env);

}  // namespace planshape::worlds
