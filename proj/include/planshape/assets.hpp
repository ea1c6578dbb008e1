#pragma once

#include <string>
#include <string_view>

namespace planshape::assets {

// Returns the embedded asset with the given repo-relative name, e.g.
// "pddl/mario_domain.pddl" or "layouts/household.layout". Throws
// std::out_of_range for unknown names.
std::string_view text(std::string_view name);

inline std::string_view pddl_domain(std::string_view world) {
    return text("pddl/" + std::string(world) + "_domain.pddl");
}

inline std::string_view pddl_problem(std::string_view world) {
    return text("pddl/" + std::string(world) + "_problem.pddl");
}

inline std::string_view layout(std::string_view world) {
    return text("layouts/" + std::string(world) + ".layout");
}

}  // namespace planshape::assets
