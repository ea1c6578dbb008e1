#include "planshape/guidance/prompt.hpp"

#include <algorithm>
#include <cctype>
#include <deque>
#include <sstream>
#include <stdexcept>
#include <unordered_map>

#include "planshape/assets.hpp"
#include "planshape/strips/parser.hpp"

namespace planshape::guidance {

namespace {

std::string quoted_list(const std::vector<std::string>& items) {
    std::ostringstream out;
    for (std::size_t i = 0; i < items.size(); ++i) {
        if (i) out << ", ";
        out << '\'' << items[i] << '\'';
    }
    return out.str();
}

std::string action_list_line(const std::vector<std::string>& names) {
    return quoted_list(names);
}

std::string task_text(const worlds::GridWorld& env, bool step_mode) {
    const int iw = env.width - 2;
    const int ih = env.height - 2;
    std::ostringstream out;
    out << "You are tasked with solving a " << iw << "x" << ih << " maze";
    const bool has_key = !env.find(worlds::CellType::key).empty();
    const bool has_lava = !env.find(worlds::CellType::lava).empty();
    if (has_key) {
        out << " where you will encounter objects like a key and a door along with walls."
               " Your task is 'use the key to open the door and then get to the goal'.";
    } else if (has_lava) {
        out << " where you will encounter lava tiles that end the episode along with walls."
               " Your task is 'avoid the lava and get to the green goal square'.";
    } else {
        out << " with no obstacles. Your task is 'get to the green goal square'.";
    }
    out << " You can be facing in any of the four directions.";
    if (has_key) {
        out << " To move in any direction, to pick up the key, and to open the door,"
               " you need to face in the correct direction.";
    } else {
        out << " To move in any direction, you need to face in the correct direction.";
    }
    if (step_mode) {
        out << " You will be given a description of the maze at every step and you need to"
               " choose the next action to take. The available actions are "
            << action_list_line(worlds::action_names(env)) << ".";
    } else {
        out << " The available actions at each step are "
            << action_list_line(worlds::action_names(env)) << ".";
    }
    return out.str();
}

std::string observation_text(const worlds::GridWorld& env, const worlds::AgentState& state) {
    return "The current maze looks like this:\n\n" + worlds::render_text(env, state);
}

const char* kDetDirectQuery =
    "What is the sequence of actions you will take to reach the goal? Output as a comma"
    " separated list. Do not include anything else in your response.";

const char* kDetStepQuery =
    "What is the next action that the agent should take? Only choose from the list of"
    " available actions. Do not include anything else in your response. For example, if you"
    " choose 'move forward', then only write 'move forward' in your response.";

std::string hier_header(bool whole_plan) {
    std::string out = "Here is a pddl domain, a planning problem. ";
    out += whole_plan ? "Provide the sequence of actions you will take to reach the goal. "
                      : "Provide only the next action for the query problem. ";
    out += "Provide only the pddl syntax for the plan where the action is represented as"
           " (ACTION-NAME OBJECTS). Do not provide anything else in your response.";
    return out;
}

std::string plan_so_far_text(const std::vector<strips::GroundAction>& plan) {
    std::ostringstream out;
    for (std::size_t i = 0; i < plan.size(); ++i) {
        if (i) out << ',';
        out << plan[i].str();
    }
    return out.str();
}

std::string normalize_token(const std::string& raw) {
    std::string out;
    for (char c : raw) {
        if (c == '-' || c == '_') {
            out.push_back(' ');
        } else if (c == '\'' || c == '"' || c == '`' || c == '.' || c == '!') {
            continue;
        } else {
            out.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
        }
    }
    // collapse runs of whitespace and trim
    std::string collapsed;
    bool in_space = true;
    for (char c : out) {
        if (std::isspace(static_cast<unsigned char>(c))) {
            if (!in_space) collapsed.push_back(' ');
            in_space = true;
        } else {
            collapsed.push_back(c);
            in_space = false;
        }
    }
    while (!collapsed.empty() && collapsed.back() == ' ') collapsed.pop_back();
    return collapsed;
}

std::string lower(std::string s) {
    for (char& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    return s;
}

}  // namespace

Abstraction make_deterministic_abstraction(const worlds::GridWorld& env,
                                           std::uint64_t reset_seed) {
    Abstraction abs;
    abs.mode = Abstraction::Mode::deterministic;
    abs.world_id = env.id;
    abs.env = worlds::determinize(env);
    abs.start = worlds::reset(abs.env, reset_seed);
    return abs;
}

Abstraction make_hierarchical_abstraction(const std::string& world_id) {
    Abstraction abs;
    abs.mode = Abstraction::Mode::hierarchical;
    abs.world_id = world_id;
    std::string pddl_name = world_id;
    if (world_id.rfind("doorkey", 0) == 0) pddl_name = "doorkey";
    abs.domain_text = std::string(assets::pddl_domain(pddl_name));
    abs.problem_text = std::string(assets::pddl_problem(pddl_name));
    abs.domain = strips::parse_domain(abs.domain_text);
    abs.problem = strips::parse_problem(abs.problem_text, abs.domain);
    abs.ground_actions = strips::ground(abs.domain, abs.problem.objects);
    if (pddl_name == "household") {
        abs.subgoal_predicates = {"key-picked", "holding-key", "door-opened", "charged",
                                  "at-destination"};
    } else if (pddl_name == "mario") {
        abs.subgoal_predicates = {"at-bottom", "has-key", "has-hidden-key",
                                  "at-upper-platform-with-key"};
    } else if (pddl_name == "minecraft") {
        abs.subgoal_predicates = {"wood-processed", "plank_made", "stick_made", "ladder_made"};
    }
    return abs;
}

std::string PromptBundle::render() const {
    std::ostringstream out;
    if (hierarchical) {
        out << query_description << "\n\n" << observation_description;
        for (const auto& block : feedback) out << "\n\n" << block;
        if (!tried_line.empty()) out << '\n' << tried_line;
        return out.str();
    }
    if (!feedback.empty()) {
        out << feedback.back() << "\n\n";
    } else if (!task_description.empty()) {
        out << task_description << "\n\n";
    }
    out << observation_description << "\n\n" << query_description;
    if (!tried_line.empty()) out << '\n' << tried_line;
    return out.str();
}

PromptBundle build_direct_prompt(const Abstraction& abs) {
    PromptBundle bundle;
    if (abs.mode == Abstraction::Mode::deterministic) {
        bundle.task_description = task_text(abs.env, false);
        bundle.observation_description = observation_text(abs.env, abs.start);
        bundle.query_description = kDetDirectQuery;
    } else {
        bundle.hierarchical = true;
        bundle.query_description = hier_header(true);
        bundle.observation_description =
            "domain pddl\n" + abs.domain_text + "\nproblem pddl\n" + abs.problem_text;
    }
    return bundle;
}

PromptBundle build_step_prompt(const Abstraction& abs, const worlds::AgentState& state,
                               const std::vector<int>& plan_so_far) {
    (void)plan_so_far;  // the observation already reflects the executed prefix
    PromptBundle bundle;
    bundle.task_description = task_text(abs.env, true);
    bundle.observation_description = observation_text(abs.env, state);
    bundle.query_description = kDetStepQuery;
    return bundle;
}

PromptBundle build_step_prompt(const Abstraction& abs, const strips::FluentSet& state,
                               const std::vector<strips::GroundAction>& plan_so_far) {
    (void)state;  // the paper keeps the original problem text and appends the plan
    PromptBundle bundle;
    bundle.hierarchical = true;
    bundle.query_description = hier_header(false);
    bundle.observation_description = "domain pddl\n" + abs.domain_text + "\nproblem pddl\n" +
                                     abs.problem_text + "\nYour plan so far - [" +
                                     plan_so_far_text(plan_so_far) + "].";
    return bundle;
}

Feasibility feasible_lowlevel_actions(const worlds::GridWorld& env,
                                      const worlds::AgentState& s) {
    Feasibility out;
    out.reasons.assign(env.action_count, "");
    const auto mark = [&](int action, bool ok, const std::string& why = "",
                          bool lethal = false) {
        if (ok) {
            out.feasible.push_back(action);
            if (lethal) out.unsafe.push_back(action);
        } else {
            out.infeasible.push_back(action);
            out.reasons[action] = why;
        }
    };

    if (env.family == worlds::ActionFamily::turn_based) {
        mark(worlds::kTurnLeft, true);
        mark(worlds::kTurnRight, true);
        static const int dx[4] = {1, 0, -1, 0};
        static const int dy[4] = {0, 1, 0, -1};
        const int fx = s.x + dx[s.dir];
        const int fy = s.y + dy[s.dir];
        const bool facing_in = env.in_bounds(fx, fy);
        const worlds::CellType ahead =
            facing_in ? env.at(fx, fy).type : worlds::CellType::wall;
        const bool carrying = worlds::carrying_key(env, s);
        const bool door_open = worlds::door_open(env, s);
        const bool key_ahead = ahead == worlds::CellType::key && !carrying;

        // forward
        if (!facing_in || ahead == worlds::CellType::wall) {
            mark(worlds::kForward, false, "you are facing a wall");
        } else if (ahead == worlds::CellType::door && !door_open) {
            mark(worlds::kForward, false, "the door is closed");
        } else if (key_ahead) {
            mark(worlds::kForward, false, "the key is blocking the way");
        } else {
            mark(worlds::kForward, true, "", ahead == worlds::CellType::lava);
        }
        if (env.action_count > worlds::kPickup) {
            if (key_ahead) {
                mark(worlds::kPickup, true);
            } else if (carrying) {
                mark(worlds::kPickup, false, "you are already carrying the key");
            } else {
                mark(worlds::kPickup, false, "you are not facing the key");
            }
            if (ahead != worlds::CellType::door) {
                mark(worlds::kToggle, false, "you are not facing the door");
            } else if (door_open) {
                mark(worlds::kToggle, false, "the door is already open");
            } else if (!carrying) {
                mark(worlds::kToggle, false, "you do not have the key");
            } else {
                mark(worlds::kToggle, true);
            }
        }
        return out;
    }

    // Cardinal family: probe the slip-free step; a move that changes nothing
    // is infeasible.
    const worlds::GridWorld det = worlds::determinize(env);
    RngStream dummy(0);
    static const int dx[4] = {0, 0, -1, 1};
    static const int dy[4] = {-1, 1, 0, 0};
    for (int a = 0; a < env.action_count; ++a) {
        const auto probe = worlds::step(det, s, a, dummy);
        const bool moved = probe.next.x != s.x || probe.next.y != s.y;
        const bool progressed = probe.next.flags != s.flags;
        if (moved || progressed || probe.done) {
            mark(a, true, "", probe.reason == worlds::Termination::lava);
            continue;
        }
        const int nx = s.x + dx[a];
        const int ny = s.y + dy[a];
        std::string why = "a wall blocks the way";
        if (env.in_bounds(nx, ny)) {
            switch (env.at(nx, ny).type) {
                case worlds::CellType::door: why = "you do not have key with you"; break;
                case worlds::CellType::ladder: why = "you cannot climb the ladder yet"; break;
                case worlds::CellType::goal: why = "you are not ready for the destination"; break;
                case worlds::CellType::wall: break;
                default: why = "that move changes nothing"; break;
            }
        }
        mark(a, false, why);
    }
    return out;
}

std::string hierarchical_reason(const strips::FluentSet& state,
                                const strips::GroundAction& action) {
    static const std::unordered_map<std::string, std::string> phrases = {
        {"at-bottom", "you are still at upstairs"},
        {"holding-key", "you do not have key with you"},
        {"key-picked", "you do not have key with you"},
        {"plank_made", "you do not have plank"},
        {"stick_made", "you do not have stick"},
        {"charged", "you are not charged yet"},
        {"door-opened", "the door is not open yet"},
        {"at-upper-platform", "you are not at the upper platform"},
        {"at-upper-platform-with-key", "you have not returned upstairs with the keys"},
        {"at-upper-platform-with-hidden-key", "you have not returned upstairs with the keys"},
    };
    auto lit = strips::first_unsatisfied(state, action);
    if (!lit) return "the action is applicable";
    const strips::Fluent fluent{lit->predicate, lit->args};
    if (lit->positive) {
        auto it = phrases.find(lit->predicate);
        if (it != phrases.end()) return it->second;
        return "the precondition " + fluent.str() + " is not satisfied";
    }
    return fluent.str() + " already holds";
}

PromptBundle build_back_prompt(const PromptBundle& step_prompt, const Abstraction& abs,
                               const std::vector<std::string>& invalid_guesses,
                               const std::string& last_reason,
                               const std::vector<std::string>& allowed_actions) {
    if (invalid_guesses.empty()) {
        throw std::invalid_argument("back-prompt needs at least one rejected guess");
    }
    PromptBundle bundle = step_prompt;
    std::ostringstream info;
    std::ostringstream tried;
    for (std::size_t i = 0; i < invalid_guesses.size(); ++i) {
        if (i) tried << ", ";
        tried << invalid_guesses[i];
    }
    if (abs.mode == Abstraction::Mode::deterministic) {
        info << "Information: You cannot '" << invalid_guesses.back() << "' in this state as "
             << last_reason << ". Please choose another action. The following actions are"
             << " feasible in this state: [" << quoted_list(allowed_actions) << "].";
        bundle.feedback = {info.str()};
    } else {
        std::ostringstream list;
        for (std::size_t i = 0; i < allowed_actions.size(); ++i) {
            if (i) list << ',';
            list << allowed_actions[i];
        }
        // the observation's trailing plan line doubles as π_g^{i−1} here
        const auto plan_pos = bundle.observation_description.rfind("Your plan so far - ");
        std::string plan_line = plan_pos == std::string::npos
                                    ? "[]"
                                    : bundle.observation_description.substr(plan_pos + 19);
        if (!plan_line.empty() && plan_line.back() == '.') plan_line.pop_back();
        info << "Information: Your plan so far - " << plan_line << ". Your response - "
             << invalid_guesses.back() << ". The action provided is not feasible because "
             << last_reason << ". Choose a valid action from the list [" << list.str() << "].";
        bundle.feedback.push_back(info.str());
    }
    bundle.tried_line = "You have already tried the following actions: " + tried.str() +
                        ". Please choose another action.";
    return bundle;
}

ParsedResponse parse_response(const std::string& text, const Abstraction& abs, bool whole_plan) {
    ParsedResponse out;
    if (abs.mode == Abstraction::Mode::deterministic) {
        const auto& names = worlds::action_names(abs.env);
        std::vector<std::string> tokens;
        std::string current;
        for (char c : text) {
            if (c == ',' || c == '\n' || c == ';') {
                tokens.push_back(current);
                current.clear();
            } else {
                current.push_back(c);
            }
        }
        tokens.push_back(current);
        for (const auto& raw : tokens) {
            const std::string token = normalize_token(raw);
            if (token.empty()) continue;
            int matched = -1;
            for (std::size_t i = 0; i < names.size(); ++i) {
                if (token == names[i]) {
                    matched = static_cast<int>(i);
                    break;
                }
            }
            if (matched < 0) {
                out.error = raw;
                return out;
            }
            out.det_actions.push_back(matched);
        }
        if (out.det_actions.empty()) {
            out.error = text;
            return out;
        }
        if (!whole_plan && out.det_actions.size() > 1) {
            out.error = "expected a single action: " + text;
            return out;
        }
        out.ok = true;
        return out;
    }

    // hierarchical: parenthesized ground terms or bare action names
    std::vector<std::vector<std::string>> terms;
    std::size_t i = 0;
    const auto is_word = [](char c) {
        return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-';
    };
    while (i < text.size()) {
        const char c = text[i];
        if (c == '(') {
            std::size_t close = text.find(')', i);
            if (close == std::string::npos) {
                out.error = text.substr(i);
                return out;
            }
            std::istringstream body(text.substr(i + 1, close - i - 1));
            std::vector<std::string> words;
            std::string w;
            while (body >> w) words.push_back(lower(w));
            if (words.empty()) {
                out.error = text.substr(i, close - i + 1);
                return out;
            }
            terms.push_back(words);
            i = close + 1;
        } else if (is_word(c)) {
            std::size_t j = i;
            while (j < text.size() && is_word(text[j])) ++j;
            terms.push_back({lower(text.substr(i, j - i))});
            i = j;
        } else if (std::isspace(static_cast<unsigned char>(c)) || c == ',' || c == '[' ||
                   c == ']' || c == '\'' || c == '"' || c == '.' || c == '`') {
            ++i;
        } else {
            out.error = std::string(1, c);
            return out;
        }
    }
    for (const auto& words : terms) {
        int matched = -1;
        for (std::size_t ai = 0; ai < abs.ground_actions.size(); ++ai) {
            const auto& ga = abs.ground_actions[ai];
            if (lower(ga.name) != words[0]) continue;
            if (words.size() == 1 && !ga.objects.empty()) {
                // bare name is enough only when the binding is unambiguous
                bool unique = true;
                for (std::size_t other = 0; other < abs.ground_actions.size(); ++other) {
                    unique = unique && (other == ai ||
                                        lower(abs.ground_actions[other].name) != words[0]);
                }
                if (!unique) continue;
                matched = static_cast<int>(ai);
                break;
            }
            if (words.size() != ga.objects.size() + 1) continue;
            bool all = true;
            for (std::size_t k = 0; k < ga.objects.size(); ++k) {
                all = all && lower(ga.objects[k]) == words[k + 1];
            }
            if (all) {
                matched = static_cast<int>(ai);
                break;
            }
        }
        if (matched < 0) {
            std::string term = "(";
            for (std::size_t k = 0; k < words.size(); ++k) {
                if (k) term += ' ';
                term += words[k];
            }
            out.error = term + ")";
            return out;
        }
        out.hier_actions.push_back(static_cast<std::size_t>(matched));
    }
    if (out.hier_actions.empty()) {
        out.error = text;
        return out;
    }
    if (!whole_plan && out.hier_actions.size() > 1) {
        out.error = "expected a single action: " + text;
        return out;
    }
    out.ok = true;
    return out;
}

std::optional<std::vector<int>> lowlevel_plan(const worlds::GridWorld& env,
                                              const worlds::AgentState& from,
                                              std::size_t max_states) {
    const worlds::GridWorld det = worlds::determinize(env);
    RngStream dummy(0);
    struct Node {
        worlds::AgentState state;
        int parent;
        int action;
    };
    std::vector<Node> nodes;
    std::unordered_map<std::uint64_t, int> seen;
    worlds::AgentState start = from;
    start.steps = 0;  // plan over the stationary state space
    nodes.push_back({start, -1, -1});
    seen[worlds::state_key(det, start)] = 0;
    std::deque<int> frontier = {0};
    while (!frontier.empty()) {
        const int ni = frontier.front();
        frontier.pop_front();
        for (int a = 0; a < det.action_count; ++a) {
            worlds::AgentState s = nodes[ni].state;
            s.steps = 0;
            const auto out = worlds::step(det, s, a, dummy);
            if (out.done && out.reason == worlds::Termination::goal) {
                std::vector<int> plan = {a};
                int cur = ni;
                while (nodes[cur].parent >= 0) {
                    plan.push_back(nodes[cur].action);
                    cur = nodes[cur].parent;
                }
                std::reverse(plan.begin(), plan.end());
                return plan;
            }
            if (out.done) continue;  // lava or other dead end
            worlds::AgentState next = out.next;
            next.steps = 0;
            const std::uint64_t key = worlds::state_key(det, next);
            if (seen.count(key)) continue;
            if (nodes.size() >= max_states) return std::nullopt;
            seen[key] = static_cast<int>(nodes.size());
            nodes.push_back({next, ni, a});
            frontier.push_back(static_cast<int>(nodes.size()) - 1);
        }
    }
    return std::nullopt;
}

}  // namespace planshape::guidance
