#include "planshape/shaping/potential.hpp"

#include <algorithm>
#include <stdexcept>

#include "json.hpp"
#include "planshape/rl/replay.hpp"

namespace planshape::shaping {

double potential_sa(const PotentialTable& table, std::uint64_t state_key, int action) {
    auto it = table.pairs.find(sa_key(state_key, action));
    return it == table.pairs.end() ? 0.0 : it->second;
}

int subgoal_prefix(const PotentialTable& table, const strips::FluentSet& fs) {
    int k = 0;
    for (const auto& f : table.subgoals) {
        if (!fs.contains(f)) break;
        ++k;
    }
    return k;
}

double potential_state(const PotentialTable& table, const strips::FluentSet& fs) {
    return table.scale * subgoal_prefix(table, fs);
}

const Designation& default_designation(const std::string& domain_name) {
    static const Designation mario = {{"go_down_the_tube", "at-bottom"},
                                      {"pickup_key", "has-key"},
                                      {"pickup_hidden_key", "has-hidden-key"},
                                      {"go_up_the_ladder", "at-upper-platform-with-key"},
                                      {"unlock_door", "door-open"}};
    static const Designation household = {{"get_key", "key-picked"},
                                          {"open_door", "door-opened"},
                                          {"is_charged", "charged"},
                                          {"goal", "at-destination"}};
    static const Designation minecraft = {{"get_wood", "wood-picked"},
                                          {"get_processed_wood", "wood-processed"},
                                          {"make_plank", "plank_made"},
                                          {"make_stick", "stick_made"},
                                          {"make_ladder", "ladder_made"}};
    static const Designation doorkey = {{"pickup_key", "key-picked"},
                                        {"open_door", "door-opened"},
                                        {"reach_goal", "at-goal"}};
    static const Designation empty;
    if (domain_name == "Mario" || domain_name == "mario") return mario;
    if (domain_name == "household") return household;
    if (domain_name == "minecraft") return minecraft;
    if (domain_name == "doorkey") return doorkey;
    return empty;
}

std::vector<strips::Fluent> designate_subgoals(const std::vector<strips::GroundAction>& plan,
                                               const Designation& designation) {
    std::vector<strips::Fluent> out;
    for (const auto& action : plan) {
        const strips::Fluent* chosen = nullptr;
        auto it = designation.find(action.name);
        if (it != designation.end()) {
            for (const auto& f : action.add) {
                if (f.predicate == it->second) {
                    chosen = &f;
                    break;
                }
            }
        }
        if (!chosen && !action.add.empty()) chosen = &*action.add.begin();
        if (chosen) out.push_back(*chosen);
    }
    return out;
}

PotentialTable potential_from_plan_sa(const worlds::GridWorld& env,
                                      const guidance::GuidePlan& plan, double scale) {
    PotentialTable table;
    table.mode = PotentialTable::Mode::state_action;
    table.scale = scale;
    const double n = static_cast<double>(plan.steps.size());
    for (std::size_t i = 0; i < plan.steps.size(); ++i) {
        const auto& [state, action] = plan.steps[i];
        const double value = scale * (static_cast<double>(i) + 1.0) / n;
        auto& slot = table.pairs[sa_key(worlds::state_key(env, state), action)];
        slot = std::max(slot, value);
    }
    return table;
}

PotentialTable potential_from_subgoals(const guidance::GuidePlan& plan,
                                       const Designation& designation, double scale) {
    PotentialTable table;
    table.mode = PotentialTable::Mode::state;
    table.scale = scale;
    table.subgoals = designate_subgoals(plan.actions, designation);
    return table;
}

double shape_state(const PotentialTable& table, const strips::FluentSet& from,
                   const strips::FluentSet& to) {
    return potential_state(table, to) - potential_state(table, from);
}

double shape_state_weighted(const PotentialTable& table, const strips::FluentSet& from,
                            const strips::FluentSet& to, double gamma, bool to_terminal) {
    const double next = to_terminal ? 0.0 : potential_state(table, to);
    return gamma * next - potential_state(table, from);
}

double shape_lookback(const PotentialTable& table, std::uint64_t state_key, int action,
                      std::optional<std::pair<std::uint64_t, int>> previous, double gamma) {
    if (!(gamma > 0.0) || gamma > 1.0) {
        throw std::invalid_argument("look-back shaping needs gamma in (0, 1]");
    }
    const double current = potential_sa(table, state_key, action);
    const double prev = previous ? potential_sa(table, previous->first, previous->second) : 0.0;
    return current - prev / gamma;
}

EpisodeShaper::EpisodeShaper(const worlds::GridWorld& env, const ShapingConfig& config)
    : env_(env), config_(config) {}

void EpisodeShaper::mark(const strips::FluentSet& fs) {
    for (std::size_t i = 0; i < config_.table.subgoals.size(); ++i) {
        if (!achieved_[i] && fs.contains(config_.table.subgoals[i])) achieved_[i] = true;
    }
}

int EpisodeShaper::banked_prefix() const {
    int k = 0;
    while (k < static_cast<int>(achieved_.size()) && achieved_[k]) ++k;
    return k;
}

void EpisodeShaper::begin_episode(const worlds::AgentState& s0) {
    prev_pair_.reset();
    banked_ = 0;
    last_advance_ = 0;
    if (config_.mode == ShapingConfig::Mode::state) {
        achieved_.assign(config_.table.subgoals.size(), false);
        mark(worlds::fluents(env_, s0));
        banked_ = banked_prefix();
    }
}

double EpisodeShaper::shape(const worlds::AgentState& s, int action,
                            const worlds::AgentState& s2, bool done) {
    last_advance_ = 0;
    switch (config_.mode) {
        case ShapingConfig::Mode::none:
            return 0.0;
        case ShapingConfig::Mode::lookback: {
            const std::uint64_t key = worlds::state_key(env_, s);
            const double f =
                shape_lookback(config_.table, key, action, prev_pair_, config_.gamma);
            prev_pair_ = std::make_pair(key, action);
            return f;
        }
        case ShapingConfig::Mode::state: {
            const auto to = worlds::fluents(env_, s2);
            mark(to);
            const int now = banked_prefix();
            last_advance_ = now - banked_;
            const double before = config_.table.scale * banked_;
            const double after = config_.table.scale * now;
            banked_ = now;
            if (config_.pure_state_potential) {
                const auto from = worlds::fluents(env_, s);
                return config_.gamma_weighted
                           ? shape_state_weighted(config_.table, from, to, config_.gamma, done)
                           : shape_state(config_.table, from, to);
            }
            if (config_.gamma_weighted) {
                return config_.gamma * (done ? 0.0 : after) - before;
            }
            return after - before;
        }
    }
    return 0.0;
}

void relabel_buffer(const worlds::GridWorld& env, rl::ReplayBuffer& buffer,
                    const ShapingConfig& config) {
    EpisodeShaper shaper(env, config);
    bool have_episode = false;
    std::uint32_t episode = 0;
    for (std::size_t i = 0; i < buffer.size(); ++i) {
        rl::Transition& t = buffer.at(i);
        if (!have_episode || t.episode != episode) {
            shaper.begin_episode(t.s);
            episode = t.episode;
            have_episode = true;
        }
        t.shaped_reward = t.reward + shaper.shape(t.s, t.action, t.s2, t.done);
    }
}

std::string potential_to_json(const PotentialTable& table) {
    nlohmann::json j;
    j["mode"] = table.mode == PotentialTable::Mode::state ? "state" : "state_action";
    j["c"] = table.scale;
    if (table.mode == PotentialTable::Mode::state) {
        nlohmann::json goals = nlohmann::json::array();
        for (const auto& f : table.subgoals) {
            goals.push_back({{"predicate", f.predicate}, {"args", f.args}});
        }
        j["subgoals"] = goals;
    } else {
        nlohmann::json entries = nlohmann::json::array();
        for (const auto& [key, value] : table.pairs) {
            entries.push_back({{"key", key}, {"value", value}});
        }
        j["entries"] = entries;
    }
    return j.dump(2);
}

PotentialTable potential_from_json(const std::string& text) {
    const auto j = nlohmann::json::parse(text);
    PotentialTable table;
    table.scale = j.at("c").get<double>();
    if (j.at("mode").get<std::string>() == "state") {
        table.mode = PotentialTable::Mode::state;
        for (const auto& g : j.at("subgoals")) {
            table.subgoals.push_back(
                {g.at("predicate").get<std::string>(),
                 g.at("args").get<std::vector<std::string>>()});
        }
    } else {
        table.mode = PotentialTable::Mode::state_action;
        for (const auto& e : j.at("entries")) {
            table.pairs[e.at("key").get<std::uint64_t>()] = e.at("value").get<double>();
        }
    }
    return table;
}

}  // namespace planshape::shaping
