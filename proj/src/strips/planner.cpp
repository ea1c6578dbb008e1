#include "planshape/strips/planner.hpp"

#include <map>
#include <queue>
#include <stdexcept>

namespace planshape::strips {

namespace {

// Objects compatible with a parameter type, sorted for reproducible bindings.
std::vector<std::string> candidates(const Domain& domain,
                                    const std::vector<TypedObject>& objects,
                                    const std::string& type) {
    std::vector<std::string> out;
    for (const auto& o : objects) {
        if (o.type == type || type == "object") {
            out.push_back(o.name);
            continue;
        }
        // one level of supertyping: object of subtype matches parent type
        for (const auto& t : domain.types) {
            if (t.name == o.type && t.supertype == type) {
                out.push_back(o.name);
                break;
            }
        }
    }
    std::sort(out.begin(), out.end());
    return out;
}

Fluent substitute(const Fluent& lifted, const ActionSchema& schema,
                  const std::vector<std::string>& binding) {
    Fluent out;
    out.predicate = lifted.predicate;
    out.args.reserve(lifted.args.size());
    for (const auto& arg : lifted.args) {
        if (!arg.empty() && arg[0] == '?') {
            for (std::size_t i = 0; i < schema.params.size(); ++i) {
                if (schema.params[i].name == arg) {
                    out.args.push_back(binding[i]);
                    break;
                }
            }
        } else {
            out.args.push_back(arg);
        }
    }
    return out;
}

GroundAction instantiate(const ActionSchema& schema, const std::vector<std::string>& binding) {
    GroundAction ga;
    ga.name = schema.name;
    ga.objects = binding;
    for (const auto& lit : schema.preconditions) {
        Fluent f = substitute({lit.predicate, lit.args}, schema, binding);
        ga.preconditions.push_back({lit.positive, f.predicate, f.args});
    }
    std::vector<Fluent> add, del;
    for (const auto& f : schema.add) add.push_back(substitute(f, schema, binding));
    for (const auto& f : schema.del) del.push_back(substitute(f, schema, binding));
    ga.add = FluentSet(std::move(add));
    ga.del = FluentSet(std::move(del));
    return ga;
}

}  // namespace

std::vector<GroundAction> ground(const Domain& domain, const std::vector<TypedObject>& objects) {
    std::vector<GroundAction> out;
    for (const auto& schema : domain.actions) {
        std::vector<std::vector<std::string>> pools;
        for (const auto& p : schema.params) pools.push_back(candidates(domain, objects, p.type));
        std::vector<std::string> binding(schema.params.size());
        // Nested cartesian product, first parameter outermost.
        std::vector<std::size_t> cursor(schema.params.size(), 0);
        if (schema.params.empty()) {
            out.push_back(instantiate(schema, {}));
            continue;
        }
        bool exhausted = false;
        for (const auto& pool : pools) exhausted = exhausted || pool.empty();
        while (!exhausted) {
            for (std::size_t i = 0; i < pools.size(); ++i) binding[i] = pools[i][cursor[i]];
            out.push_back(instantiate(schema, binding));
            std::size_t i = pools.size();
            while (i > 0) {
                --i;
                if (++cursor[i] < pools[i].size()) break;
                cursor[i] = 0;
                if (i == 0) exhausted = true;
            }
        }
    }
    return out;
}

bool applicable(const FluentSet& state, const GroundAction& action) {
    for (const auto& lit : action.preconditions) {
        const bool present = state.contains({lit.predicate, lit.args});
        if (lit.positive != present) return false;
    }
    return true;
}

std::optional<Literal> first_unsatisfied(const FluentSet& state, const GroundAction& action) {
    for (const auto& lit : action.preconditions) {
        const bool present = state.contains({lit.predicate, lit.args});
        if (lit.positive != present) return lit;
    }
    return std::nullopt;
}

FluentSet apply(const FluentSet& state, const GroundAction& action) {
    if (!applicable(state, action)) {
        throw std::logic_error("apply: action " + action.str() + " not applicable in " +
                               state.str());
    }
    FluentSet next = state;
    for (const auto& f : action.del) next.erase(f);
    for (const auto& f : action.add) next.insert(f);
    return next;
}

ActionPartition valid_actions(const FluentSet& state, const std::vector<GroundAction>& actions) {
    ActionPartition part;
    for (std::size_t i = 0; i < actions.size(); ++i) {
        (applicable(state, actions[i]) ? part.valid : part.invalid).push_back(i);
    }
    return part;
}

ValidationResult validate_plan(const StripsProblem& problem,
                               const std::vector<GroundAction>& plan) {
    ValidationResult result;
    FluentSet state = problem.init;
    for (std::size_t i = 0; i < plan.size(); ++i) {
        if (auto bad = first_unsatisfied(state, plan[i])) {
            Literal lit = *bad;
            std::string text = Fluent{lit.predicate, lit.args}.str();
            if (!lit.positive) text = "(not " + text + ")";
            result.failure = ValidationResult::Failure{i, text};
            break;
        }
        state = apply(state, plan[i]);
        result.valid_prefix_len = i + 1;
    }
    result.goal_reached =
        result.valid_prefix_len == plan.size() && state.contains_all(problem.goal);
    return result;
}

BfsResult bfs_plan(const StripsProblem& problem, const std::vector<GroundAction>& actions,
                   std::size_t max_explored) {
    BfsResult result;
    if (problem.init.contains_all(problem.goal)) {
        result.found = true;
        return result;
    }
    // parent map: state -> (predecessor state iterator, action index)
    std::map<FluentSet, std::pair<const FluentSet*, std::size_t>> seen;
    std::queue<const FluentSet*> frontier;
    auto [root, inserted] = seen.emplace(problem.init, std::make_pair(nullptr, 0));
    frontier.push(&root->first);
    while (!frontier.empty()) {
        const FluentSet* state = frontier.front();
        frontier.pop();
        ++result.explored;
        if (result.explored > max_explored) {
            result.cap_exceeded = true;
            return result;
        }
        for (std::size_t ai = 0; ai < actions.size(); ++ai) {
            if (!applicable(*state, actions[ai])) continue;
            FluentSet next = apply(*state, actions[ai]);
            auto [it, fresh] = seen.emplace(std::move(next), std::make_pair(state, ai));
            if (!fresh) continue;
            if (it->first.contains_all(problem.goal)) {
                // reconstruct
                std::vector<std::size_t> indices;
                const FluentSet* cur = &it->first;
                while (cur) {
                    const auto& entry = seen.at(*cur);
                    if (!entry.first) break;
                    indices.push_back(entry.second);
                    cur = entry.first;
                }
                for (auto rit = indices.rbegin(); rit != indices.rend(); ++rit) {
                    result.plan.push_back(actions[*rit]);
                }
                result.found = true;
                return result;
            }
            frontier.push(&it->first);
        }
    }
    return result;
}

BfsResult bfs_plan(const Domain& domain, const StripsProblem& problem,
                   std::size_t max_explored) {
    return bfs_plan(problem, ground(domain, problem.objects), max_explored);
}

}  // namespace planshape::strips
