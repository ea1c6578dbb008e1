#include "planshape/worlds/world.hpp"

#include <cstdlib>
#include <sstream>
#include <stdexcept>

#include "planshape/assets.hpp"

namespace planshape::worlds {

namespace {

// Flag bits. DoorKey-family:
constexpr std::uint32_t kCarryingKey = 1u << 0;
constexpr std::uint32_t kDoorOpen = 1u << 1;
// Household:
constexpr std::uint32_t kKeyTaken = 1u << 0;   // key cell consumed
constexpr std::uint32_t kKeyPicked = 1u << 1;  // PDDL key-picked
constexpr std::uint32_t kHoldingKey = 1u << 2;
constexpr std::uint32_t kDoorOpened = 1u << 3;
constexpr std::uint32_t kCharged = 1u << 4;
constexpr std::uint32_t kAtDestination = 1u << 5;
// Mario:
constexpr std::uint32_t kAtBottom = 1u << 0;
constexpr std::uint32_t kHasKey = 1u << 1;
constexpr std::uint32_t kHasHiddenKey = 1u << 2;
constexpr std::uint32_t kReturnedUp = 1u << 3;  // ladder used (and broken)
constexpr std::uint32_t kMarioDoorOpen = 1u << 4;
// Minecraft (two woods):
constexpr std::uint32_t kPicked0 = 1u << 0;
constexpr std::uint32_t kPicked1 = 1u << 1;
constexpr std::uint32_t kProcessed0 = 1u << 2;
constexpr std::uint32_t kProcessed1 = 1u << 3;
constexpr std::uint32_t kToPlank0 = 1u << 4;
constexpr std::uint32_t kToPlank1 = 1u << 5;
constexpr std::uint32_t kToStick0 = 1u << 6;
constexpr std::uint32_t kToStick1 = 1u << 7;
constexpr std::uint32_t kPlankMade = 1u << 8;
constexpr std::uint32_t kStickMade = 1u << 9;
constexpr std::uint32_t kLadderMade = 1u << 10;

enum class WorldKind { doorkey, empty, lavagap, household, mario, minecraft, plain_cardinal };

WorldKind kind_of(const GridWorld& env) {
    if (env.family == ActionFamily::turn_based) {
        if (!env.find(CellType::door).empty()) return WorldKind::doorkey;
        if (!env.find(CellType::lava).empty()) return WorldKind::lavagap;
        return WorldKind::empty;
    }
    if (!env.find(CellType::tube).empty()) return WorldKind::mario;
    if (!env.find(CellType::wood).empty()) return WorldKind::minecraft;
    if (!env.find(CellType::dock).empty()) return WorldKind::household;
    return WorldKind::plain_cardinal;
}

constexpr int kDx[4] = {1, 0, -1, 0};
constexpr int kDy[4] = {0, 1, 0, -1};

bool key_present(const GridWorld& env, const AgentState& s, int x, int y) {
    if (env.at(x, y).type != CellType::key) return false;
    const WorldKind k = kind_of(env);
    if (k == WorldKind::doorkey) return !(s.flags & kCarryingKey);
    if (k == WorldKind::household) return !(s.flags & kKeyTaken);
    if (k == WorldKind::mario) return !(s.flags & kHasKey);
    return true;
}

bool wood_present(const GridWorld& env, const AgentState& s, int x, int y) {
    if (env.at(x, y).type != CellType::wood) return false;
    const std::uint32_t bit = env.at(x, y).id == 0 ? kPicked0 : kPicked1;
    return !(s.flags & bit);
}

StepOutcome finish(const GridWorld& env, AgentState next, double reward, Termination why) {
    StepOutcome out;
    out.reward = reward;
    out.done = why != Termination::none;
    out.reason = why;
    if (!out.done && next.steps >= env.max_steps) {
        out.done = true;
        out.reason = Termination::horizon;
    }
    out.next = next;
    return out;
}

double babyai_goal_reward(const GridWorld& env, int steps) {
    return 1.0 - 0.9 * (static_cast<double>(steps) / static_cast<double>(env.max_steps));
}

StepOutcome step_turn_based(const GridWorld& env, const AgentState& state, int action) {
    AgentState s = state;
    s.steps += 1;
    if (action == kTurnLeft) {
        s.dir = (s.dir + 3) % 4;
        return finish(env, s, 0.0, Termination::none);
    }
    if (action == kTurnRight) {
        s.dir = (s.dir + 1) % 4;
        return finish(env, s, 0.0, Termination::none);
    }
    const int fx = s.x + kDx[s.dir];
    const int fy = s.y + kDy[s.dir];
    if (action == kForward) {
        if (!env.in_bounds(fx, fy)) return finish(env, s, 0.0, Termination::none);
        const Cell& cell = env.at(fx, fy);
        switch (cell.type) {
            case CellType::empty:
            case CellType::distractor_key:
                s.x = fx;
                s.y = fy;
                return finish(env, s, 0.0, Termination::none);
            case CellType::key:
                if (key_present(env, s, fx, fy)) return finish(env, s, 0.0, Termination::none);
                s.x = fx;
                s.y = fy;
                return finish(env, s, 0.0, Termination::none);
            case CellType::door:
                if (!(s.flags & kDoorOpen)) return finish(env, s, 0.0, Termination::none);
                s.x = fx;
                s.y = fy;
                return finish(env, s, 0.0, Termination::none);
            case CellType::goal:
                s.x = fx;
                s.y = fy;
                return finish(env, s, babyai_goal_reward(env, s.steps), Termination::goal);
            case CellType::lava:
                s.x = fx;
                s.y = fy;
                return finish(env, s, 0.0, Termination::lava);
            default:
                return finish(env, s, 0.0, Termination::none);
        }
    }
    if (action == kPickup) {
        if (env.in_bounds(fx, fy) && key_present(env, s, fx, fy) && !(s.flags & kCarryingKey)) {
            s.flags |= kCarryingKey;
        }
        return finish(env, s, 0.0, Termination::none);
    }
    if (action == kToggle) {
        if (env.in_bounds(fx, fy) && env.at(fx, fy).type == CellType::door &&
            !(s.flags & kDoorOpen) && (s.flags & kCarryingKey)) {
            s.flags |= kDoorOpen;
        }
        return finish(env, s, 0.0, Termination::none);
    }
    throw std::logic_error("unknown turn-based action " + std::to_string(action));
}

StepOutcome step_cardinal(const GridWorld& env, const AgentState& state, int action) {
    const WorldKind kind = kind_of(env);
    AgentState s = state;
    s.steps += 1;
    static const int dx[4] = {0, 0, -1, 1};  // up, down, left, right
    static const int dy[4] = {-1, 1, 0, 0};
    const int nx = s.x + dx[action];
    const int ny = s.y + dy[action];
    if (!env.in_bounds(nx, ny)) return finish(env, s, 0.0, Termination::none);
    const Cell& cell = env.at(nx, ny);
    if (cell.type == CellType::wall) return finish(env, s, 0.0, Termination::none);

    switch (cell.type) {
        case CellType::empty:
        case CellType::distractor_key:
        case CellType::rock:
            s.x = nx;
            s.y = ny;
            if (cell.type == CellType::rock && kind == WorldKind::mario) {
                s.flags |= kHasHiddenKey;
            }
            return finish(env, s, 0.0, Termination::none);
        case CellType::key:
            s.x = nx;
            s.y = ny;
            if (kind == WorldKind::household && !(s.flags & kKeyTaken)) {
                s.flags |= kKeyTaken | kKeyPicked | kHoldingKey;
            } else if (kind == WorldKind::mario) {
                s.flags |= kHasKey;
            }
            return finish(env, s, 0.0, Termination::none);
        case CellType::door:
            if (kind == WorldKind::household) {
                if (s.flags & kDoorOpened) {
                    s.x = nx;
                    s.y = ny;
                } else if ((s.flags & kHoldingKey) && (s.flags & kKeyPicked)) {
                    s.x = nx;
                    s.y = ny;
                    s.flags |= kDoorOpened;
                    s.flags &= ~(kHoldingKey | kKeyPicked);
                }
                return finish(env, s, 0.0, Termination::none);
            }
            if (kind == WorldKind::mario) {
                const bool upstairs = !(s.flags & kAtBottom);
                if (upstairs && (s.flags & kHasKey) && (s.flags & kHasHiddenKey)) {
                    s.x = nx;
                    s.y = ny;
                    s.flags |= kMarioDoorOpen;
                    return finish(env, s, 1.0, Termination::goal);
                }
                return finish(env, s, 0.0, Termination::none);
            }
            return finish(env, s, 0.0, Termination::none);
        case CellType::goal:
            if (kind == WorldKind::household) {
                if (!(s.flags & kCharged)) return finish(env, s, 0.0, Termination::none);
                s.x = nx;
                s.y = ny;
                s.flags |= kAtDestination;
                return finish(env, s, 1.0, Termination::goal);
            }
            s.x = nx;
            s.y = ny;
            return finish(env, s, 1.0, Termination::goal);
        case CellType::lava:
            s.x = nx;
            s.y = ny;
            return finish(env, s, 0.0, Termination::lava);
        case CellType::tube:
            s.x = nx;
            s.y = env.divider_row + 1;
            s.flags |= kAtBottom;
            return finish(env, s, 0.0, Termination::none);
        case CellType::ladder:
            if ((s.flags & kHasKey) && (s.flags & kHasHiddenKey) && !(s.flags & kReturnedUp)) {
                s.x = nx;
                s.y = env.divider_row - 1;
                s.flags |= kReturnedUp;
                s.flags &= ~kAtBottom;
            }
            return finish(env, s, 0.0, Termination::none);
        case CellType::dock:
            s.x = nx;
            s.y = ny;
            if ((s.flags & kDoorOpened) && !(s.flags & kCharged)) s.flags |= kCharged;
            return finish(env, s, 0.0, Termination::none);
        case CellType::wood:
            s.x = nx;
            s.y = ny;
            s.flags |= cell.id == 0 ? kPicked0 : kPicked1;
            return finish(env, s, 0.0, Termination::none);
        case CellType::workshop: {
            s.x = nx;
            s.y = ny;
            if (cell.id == 0) {
                if ((s.flags & kPicked0) && !(s.flags & kProcessed0)) s.flags |= kProcessed0;
                if ((s.flags & kPicked1) && !(s.flags & kProcessed1)) s.flags |= kProcessed1;
            } else if (cell.id == 1 && !(s.flags & kPlankMade)) {
                if ((s.flags & kProcessed0) && !(s.flags & (kToPlank0 | kToStick0))) {
                    s.flags |= kToPlank0 | kPlankMade;
                } else if ((s.flags & kProcessed1) && !(s.flags & (kToPlank1 | kToStick1))) {
                    s.flags |= kToPlank1 | kPlankMade;
                }
            } else if (cell.id == 2 && !(s.flags & kStickMade)) {
                if ((s.flags & kProcessed0) && !(s.flags & (kToPlank0 | kToStick0))) {
                    s.flags |= kToStick0 | kStickMade;
                } else if ((s.flags & kProcessed1) && !(s.flags & (kToPlank1 | kToStick1))) {
                    s.flags |= kToStick1 | kStickMade;
                }
            } else if (cell.id == 3) {
                if ((s.flags & kPlankMade) && (s.flags & kStickMade) && !(s.flags & kLadderMade)) {
                    s.flags |= kLadderMade;
                    return finish(env, s, 1.0, Termination::goal);
                }
            }
            return finish(env, s, 0.0, Termination::none);
        }
        default:
            return finish(env, s, 0.0, Termination::none);
    }
}

}  // namespace

AgentState reset(const GridWorld& env, std::uint64_t seed) {
    AgentState s;
    s.x = env.start_x;
    s.y = env.start_y;
    s.dir = env.start_dir;
    if (env.random_start) {
        RngStream rng(seed);
        std::vector<int> open;
        for (int i = 0; i < static_cast<int>(env.cells.size()); ++i) {
            if (env.cells[i].type == CellType::empty) open.push_back(i);
        }
        const int pick = open[rng.index(static_cast<int>(open.size()))];
        s.x = pick % env.width;
        s.y = pick / env.width;
        s.dir = rng.index(4);
    }
    return s;
}

bool is_terminal_state(const GridWorld& env, const AgentState& s) {
    if (s.steps >= env.max_steps) return true;
    const CellType under = env.at(s.x, s.y).type;
    if (under == CellType::goal || under == CellType::lava) return true;
    switch (kind_of(env)) {
        case WorldKind::household: return s.flags & kAtDestination;
        case WorldKind::mario: return s.flags & kMarioDoorOpen;
        case WorldKind::minecraft: return s.flags & kLadderMade;
        default: return false;
    }
}

StepOutcome step(const GridWorld& env, const AgentState& state, int action, RngStream& rng) {
    if (is_terminal_state(env, state)) {
        throw std::logic_error("step called on a terminal state");
    }
    if (action < 0 || action >= env.action_count) {
        throw std::logic_error("action " + std::to_string(action) + " outside family of " +
                               std::to_string(env.action_count));
    }
    int executed = action;
    if (env.slip_prob > 0.0 && rng.uniform() < env.slip_prob) {
        int other = rng.index(env.action_count - 1);
        executed = other >= action ? other + 1 : other;
    }
    StepOutcome out = env.family == ActionFamily::turn_based
                          ? step_turn_based(env, state, executed)
                          : step_cardinal(env, state, executed);
    out.executed_action = executed;
    return out;
}

GridWorld determinize(const GridWorld& env) {
    GridWorld copy = env;
    copy.slip_prob = 0.0;
    return copy;
}

namespace {

strips::Fluent atom(std::string pred, std::vector<std::string> args = {}) {
    return {std::move(pred), std::move(args)};
}

}  // namespace

bool has_fluent_map(const GridWorld& env) {
    const WorldKind k = kind_of(env);
    return k == WorldKind::household || k == WorldKind::mario || k == WorldKind::minecraft;
}

strips::FluentSet fluents(const GridWorld& env, const AgentState& s) {
    std::vector<strips::Fluent> out;
    switch (kind_of(env)) {
        case WorldKind::household:
            if (s.x == env.start_x && s.y == env.start_y) out.push_back(atom("at-starting-location"));
            if (s.flags & kKeyPicked) out.push_back(atom("key-picked"));
            if (s.flags & kHoldingKey) out.push_back(atom("holding-key"));
            if (s.flags & kDoorOpened) out.push_back(atom("door-opened"));
            if (s.flags & kCharged) out.push_back(atom("charged"));
            if (s.flags & kAtDestination) out.push_back(atom("at-destination"));
            break;
        case WorldKind::mario: {
            const bool bottom = s.flags & kAtBottom;
            if (bottom) {
                out.push_back(atom("at-bottom"));
            } else {
                out.push_back(atom("at-upper-platform"));
                if (s.flags & kHasKey) out.push_back(atom("at-upper-platform-with-key"));
                if (s.flags & kHasHiddenKey) {
                    out.push_back(atom("at-upper-platform-with-hidden-key"));
                }
            }
            if (s.flags & kHasKey) out.push_back(atom("has-key"));
            if (s.flags & kHasHiddenKey) out.push_back(atom("has-hidden-key"));
            if (s.flags & kMarioDoorOpen) out.push_back(atom("door-open"));
            break;
        }
        case WorldKind::minecraft:
            if (s.x == env.start_x && s.y == env.start_y) out.push_back(atom("at-starting-location"));
            if (s.flags & kPicked0) out.push_back(atom("wood-picked", {"wood0"}));
            if (s.flags & kPicked1) out.push_back(atom("wood-picked", {"wood1"}));
            if (s.flags & kProcessed0) out.push_back(atom("wood-processed", {"wood0"}));
            if (s.flags & kProcessed1) out.push_back(atom("wood-processed", {"wood1"}));
            if (s.flags & kToPlank0) out.push_back(atom("processed-to-plank", {"wood0"}));
            if (s.flags & kToPlank1) out.push_back(atom("processed-to-plank", {"wood1"}));
            if (s.flags & kToStick0) out.push_back(atom("processed-to-stick", {"wood0"}));
            if (s.flags & kToStick1) out.push_back(atom("processed-to-stick", {"wood1"}));
            if (s.flags & kPlankMade) out.push_back(atom("plank_made"));
            if (s.flags & kStickMade) out.push_back(atom("stick_made"));
            if (s.flags & kLadderMade) out.push_back(atom("ladder_made"));
            break;
        default:
            throw std::invalid_argument("no bundled hierarchical model for '" + env.id + "'");
    }
    return strips::FluentSet(std::move(out));
}

const std::vector<std::string>& subgoal_predicates(const GridWorld& env) {
    static const std::vector<std::string> household = {
        "key-picked", "holding-key", "door-opened", "charged", "at-destination"};
    static const std::vector<std::string> mario = {
        "at-bottom", "has-key", "has-hidden-key", "at-upper-platform-with-key"};
    static const std::vector<std::string> minecraft = {
        "wood-processed", "plank_made", "stick_made", "ladder_made"};
    switch (kind_of(env)) {
        case WorldKind::household: return household;
        case WorldKind::mario: return mario;
        case WorldKind::minecraft: return minecraft;
        default:
            throw std::invalid_argument("no sub-goal listing for '" + env.id + "'");
    }
}

int subgoal_count(const GridWorld& env) {
    return static_cast<int>(subgoal_predicates(env).size());
}

std::string render_text(const GridWorld& env, const AgentState& s) {
    if (env.family != ActionFamily::turn_based) {
        throw std::invalid_argument("render_text expects a turn-based environment");
    }
    std::ostringstream out;
    for (int y = 1; y + 1 < env.height; ++y) {
        for (int x = 1; x + 1 < env.width; ++x) {
            if (x > 1) out << ' ';
            if (x == s.x && y == s.y) {
                out << "agent";
                continue;
            }
            const Cell& cell = env.at(x, y);
            switch (cell.type) {
                case CellType::wall: out << "wall"; break;
                case CellType::door: out << "door"; break;
                case CellType::lava: out << "lava"; break;
                case CellType::goal: out << "goal"; break;
                case CellType::distractor_key:
                    out << "key";
                    break;
                case CellType::key:
                    if (key_present(env, s, x, y)) {
                        out << "key";
                        break;
                    }
                    [[fallthrough]];
                case CellType::empty:
                default:
                    // Bare floor reads "empty" next to the agent, "unseen" farther out.
                    if (std::abs(x - s.x) <= 1 && std::abs(y - s.y) <= 1) {
                        out << "empty";
                    } else {
                        out << "unseen";
                    }
                    break;
            }
        }
        out << '\n';
    }
    static const char* kFacing[4] = {"right", "down", "left", "up"};
    out << "\nYou (agent) are currently facing " << kFacing[s.dir] << '.';
    return out.str();
}

bool carrying_key(const GridWorld& env, const AgentState& state) {
    (void)env;
    return (state.flags & kCarryingKey) != 0;
}

bool door_open(const GridWorld& env, const AgentState& state) {
    (void)env;
    return (state.flags & kDoorOpen) != 0;
}

const std::vector<std::string>& action_names(const GridWorld& env) {
    static const std::vector<std::string> turn3 = {"turn left", "turn right", "move forward"};
    static const std::vector<std::string> turn5 = {"turn left", "turn right", "move forward",
                                                   "pickup key", "open door"};
    static const std::vector<std::string> cardinal = {"up", "down", "left", "right"};
    if (env.family == ActionFamily::cardinal) return cardinal;
    return env.action_count == 5 ? turn5 : turn3;
}

std::uint64_t state_key(const GridWorld& env, const AgentState& s) {
    (void)env;
    return static_cast<std::uint64_t>(s.x) | (static_cast<std::uint64_t>(s.y) << 6) |
           (static_cast<std::uint64_t>(s.dir) << 12) |
           (static_cast<std::uint64_t>(s.flags) << 14);
}

std::string pddl_world_name(const GridWorld& env) {
    switch (kind_of(env)) {
        case WorldKind::household: return "household";
        case WorldKind::mario: return "mario";
        case WorldKind::minecraft: return "minecraft";
        case WorldKind::doorkey: return "doorkey";
        default: return "";
    }
}

GridWorld bundled_world(const std::string& id) {
    GridWorld w = load_layout(assets::layout(id), id);
    w.max_steps = w.family == ActionFamily::turn_based ? 100 : 500;
    w.slip_prob = 0.1;
    return w;
}

std::vector<std::string> bundled_world_ids() {
    return {"doorkey5",  "doorkey6", "empty_random5", "lavagap5",
            "household", "mario",    "minecraft",     "empty4"};
}

}  // namespace planshape::worlds
