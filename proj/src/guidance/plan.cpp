#include "planshape/guidance/plan.hpp"

#include <stdexcept>

#include "json.hpp"
#include "planshape/guidance/prompt.hpp"

namespace planshape::guidance {

std::string plan_to_json(const GuidePlan& plan) {
    nlohmann::json j;
    j["mode"] = plan.mode == GuidePlan::Mode::deterministic ? "deterministic" : "hierarchical";
    j["world"] = plan.world_id;
    j["complete"] = plan.complete;
    j["subgoal_fraction"] = plan.subgoal_fraction;
    j["achieved_reward"] = plan.achieved_reward;
    if (plan.mode == GuidePlan::Mode::deterministic) {
        nlohmann::json steps = nlohmann::json::array();
        for (const auto& [s, a] : plan.steps) {
            steps.push_back({{"x", s.x},
                             {"y", s.y},
                             {"dir", s.dir},
                             {"flags", s.flags},
                             {"steps", s.steps},
                             {"action", a}});
        }
        j["steps"] = steps;
    } else {
        nlohmann::json actions = nlohmann::json::array();
        for (const auto& a : plan.actions) {
            actions.push_back({{"name", a.name}, {"objects", a.objects}});
        }
        j["actions"] = actions;
    }
    return j.dump(2);
}

GuidePlan plan_from_json(const std::string& text) {
    const auto j = nlohmann::json::parse(text);
    GuidePlan plan;
    plan.world_id = j.at("world").get<std::string>();
    plan.complete = j.at("complete").get<bool>();
    plan.subgoal_fraction = j.at("subgoal_fraction").get<double>();
    plan.achieved_reward = j.value("achieved_reward", 0.0);
    if (j.at("mode").get<std::string>() == "deterministic") {
        plan.mode = GuidePlan::Mode::deterministic;
        for (const auto& e : j.at("steps")) {
            worlds::AgentState s;
            s.x = e.at("x").get<int>();
            s.y = e.at("y").get<int>();
            s.dir = e.at("dir").get<int>();
            s.flags = e.at("flags").get<std::uint32_t>();
            s.steps = e.at("steps").get<int>();
            plan.steps.emplace_back(s, e.at("action").get<int>());
        }
        return plan;
    }
    plan.mode = GuidePlan::Mode::hierarchical;
    // rebind against the bundled model so effects are available again
    const Abstraction abs = make_hierarchical_abstraction(plan.world_id);
    for (const auto& e : j.at("actions")) {
        const std::string name = e.at("name").get<std::string>();
        const auto objects = e.at("objects").get<std::vector<std::string>>();
        const strips::GroundAction* found = nullptr;
        for (const auto& ga : abs.ground_actions) {
            if (ga.name == name && ga.objects == objects) {
                found = &ga;
                break;
            }
        }
        if (!found) {
            throw std::invalid_argument("plan action '" + name +
                                        "' does not ground in world '" + plan.world_id + "'");
        }
        plan.actions.push_back(*found);
    }
    return plan;
}

}  // namespace planshape::guidance
