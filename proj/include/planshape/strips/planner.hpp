#pragma once

#include <cstddef>
#include <optional>
#include <vector>

#include "planshape/strips/model.hpp"

namespace planshape::strips {

// One GroundAction per schema x type-compatible binding. Ordering is
// deterministic: schema declaration order, then lexicographic bindings.
std::vector<GroundAction> ground(const Domain& domain, const std::vector<TypedObject>& objects);

// True iff every positive precondition is in the state and no negative
// precondition's fluent is.
bool applicable(const FluentSet& state, const GroundAction& action);

// (state \ del) ∪ add. Throws std::logic_error if the action is inapplicable.
FluentSet apply(const FluentSet& state, const GroundAction& action);

// First unsatisfied precondition in declaration order, if any.
std::optional<Literal> first_unsatisfied(const FluentSet& state, const GroundAction& action);

struct ActionPartition {
    std::vector<std::size_t> valid;    // indices into the ground action list
    std::vector<std::size_t> invalid;
};

// Partitions the ground action set into applicable / inapplicable at `state`.
ActionPartition valid_actions(const FluentSet& state, const std::vector<GroundAction>& actions);

ValidationResult validate_plan(const StripsProblem& problem,
                               const std::vector<GroundAction>& plan);

struct BfsResult {
    bool found = false;
    bool cap_exceeded = false;
    std::vector<GroundAction> plan;  // empty when goal ⊆ init
    std::size_t explored = 0;
};

// Breadth-first search over fluent sets; shortest plan with deterministic
// tie-break by ground-action order. Used as the symbolic test oracle.
BfsResult bfs_plan(const StripsProblem& problem, const std::vector<GroundAction>& actions,
                   std::size_t max_explored = 1000000);

// Convenience overload that grounds the domain itself.
BfsResult bfs_plan(const Domain& domain, const StripsProblem& problem,
                   std::size_t max_explored = 1000000);

}  // namespace planshape::strips
