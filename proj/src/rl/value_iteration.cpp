#include "planshape/rl/value_iteration.hpp"

#include <cmath>
#include <deque>
#include <stdexcept>

namespace planshape::rl {

EnumerableMdp enumerate_mdp(const worlds::GridWorld& env, std::size_t max_states) {
    EnumerableMdp mdp;
    mdp.n_actions = env.action_count;
    const worlds::GridWorld det = determinize(env);
    RngStream dummy(0);  // deterministic copy never draws

    // Executed-action distribution under the slip model.
    const double p = env.slip_prob;
    const int n = env.action_count;

    worlds::AgentState start = worlds::reset(env, 0);
    start.steps = 0;
    mdp.states.push_back(start);
    mdp.index[worlds::state_key(env, start)] = 0;
    std::deque<int> frontier = {0};
    while (!frontier.empty()) {
        const int si = frontier.front();
        frontier.pop_front();
        if (static_cast<std::size_t>(si) >= max_states) {
            throw std::invalid_argument("enumerate_mdp: state cap exceeded");
        }
        if (static_cast<int>(mdp.transitions.size()) <= si) mdp.transitions.resize(si + 1);
        mdp.transitions[si].assign(n, {});
        for (int a = 0; a < n; ++a) {
            for (int executed = 0; executed < n; ++executed) {
                double prob = executed == a ? 1.0 - p : p / (n - 1);
                if (prob <= 0.0) continue;
                worlds::AgentState from = mdp.states[si];
                from.steps = 0;
                auto out = worlds::step(det, from, executed, dummy);
                EnumerableMdp::Outcome o;
                o.prob = prob;
                // stationary view: unit goal reward, no horizon bookkeeping
                o.reward = out.reason == worlds::Termination::goal ? 1.0 : 0.0;
                if (out.done) {
                    o.next = -1;
                } else {
                    worlds::AgentState next = out.next;
                    next.steps = 0;
                    const std::uint64_t key = worlds::state_key(env, next);
                    auto [it, fresh] = mdp.index.try_emplace(key, mdp.states.size());
                    if (fresh) {
                        if (mdp.states.size() >= max_states) {
                            throw std::invalid_argument("enumerate_mdp: state cap exceeded");
                        }
                        mdp.states.push_back(next);
                        frontier.push_back(it->second);
                    }
                    o.next = it->second;
                }
                mdp.transitions[si][a].push_back(o);
            }
        }
    }
    mdp.n_states = static_cast<int>(mdp.states.size());
    mdp.transitions.resize(mdp.n_states);
    return mdp;
}

std::vector<std::vector<double>> value_iteration(const EnumerableMdp& mdp, double gamma,
                                                 double tolerance, int max_sweeps) {
    std::vector<std::vector<double>> q(mdp.n_states, std::vector<double>(mdp.n_actions, 0.0));
    std::vector<double> v(mdp.n_states, 0.0);
    for (int sweep = 0; sweep < max_sweeps; ++sweep) {
        double residual = 0.0;
        for (int s = 0; s < mdp.n_states; ++s) {
            for (int a = 0; a < mdp.n_actions; ++a) {
                double value = 0.0;
                for (const auto& o : mdp.transitions[s][a]) {
                    value += o.prob * (o.reward + (o.next < 0 ? 0.0 : gamma * v[o.next]));
                }
                residual = std::max(residual, std::abs(value - q[s][a]));
                q[s][a] = value;
            }
        }
        for (int s = 0; s < mdp.n_states; ++s) {
            double best = q[s][0];
            for (int a = 1; a < mdp.n_actions; ++a) best = std::max(best, q[s][a]);
            v[s] = best;
        }
        if (residual <= tolerance) break;
    }
    return q;
}

std::vector<int> greedy_set(const std::vector<double>& q_row, double tie_tol) {
    double best = q_row[0];
    for (double value : q_row) best = std::max(best, value);
    std::vector<int> out;
    for (int a = 0; a < static_cast<int>(q_row.size()); ++a) {
        if (q_row[a] >= best - tie_tol) out.push_back(a);
    }
    return out;
}

}  // namespace planshape::rl
