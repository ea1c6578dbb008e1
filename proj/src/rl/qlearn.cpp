#include "planshape/rl/qlearn.hpp"

#include <chrono>
#include <stdexcept>

namespace planshape::rl {

int select_action(const QTable& q, std::uint64_t state, double eps, RngStream& rng) {
    const int n = q.n_actions();
    if (rng.uniform() < eps) return rng.index(n);
    const std::vector<double>* row = q.find(state);
    if (!row) return rng.index(n);  // all-zero row: every action ties
    double best = (*row)[0];
    for (int a = 1; a < n; ++a) best = std::max(best, (*row)[a]);
    int ties = 0;
    int argmax[16];
    for (int a = 0; a < n; ++a) {
        if ((*row)[a] == best) argmax[ties++] = a;
    }
    return ties == 1 ? argmax[0] : argmax[rng.index(ties)];
}

void q_update(QTable& q, const std::vector<Transition>& batch, double alpha, double gamma) {
    for (const auto& t : batch) {
        double max_next = 0.0;
        if (!t.done) {
            if (const auto* row = q.find(t.s2_key)) {
                max_next = (*row)[0];
                for (int a = 1; a < q.n_actions(); ++a) max_next = std::max(max_next, (*row)[a]);
            }
        }
        double& cell = q.row(t.s_key)[t.action];
        cell += alpha * (t.shaped_reward + gamma * max_next - cell);
    }
}

TrainResult train(const worlds::GridWorld& env, const shaping::ShapingConfig& shaping,
                  const TrainConfig& config) {
    if (config.batch_size < 1) throw std::invalid_argument("batch_size must be >= 1");
    if (!(config.gamma > 0.0 && config.gamma < 1.0)) {
        throw std::invalid_argument("gamma must lie in (0, 1)");
    }
    if (!(config.alpha > 0.0 && config.alpha <= 1.0)) {
        throw std::invalid_argument("alpha must lie in (0, 1]");
    }
    if (shaping.mode == shaping::ShapingConfig::Mode::state && !worlds::has_fluent_map(env)) {
        throw std::invalid_argument("state-mode shaping needs a fluent map for '" + env.id + "'");
    }

    RngStream rng(config.seed);
    TrainResult result;
    result.q = QTable(env.action_count);
    result.buffer = ReplayBuffer(config.buffer_capacity);
    EpsSchedule eps;
    shaping::EpisodeShaper shaper(env, shaping);
    std::vector<Transition> batch;
    batch.reserve(config.batch_size);

    const auto t0 = std::chrono::steady_clock::now();
    std::size_t total_steps = 0;
    int episode = 0;
    while (total_steps < config.max_steps &&
           (config.max_episodes == 0 || episode < config.max_episodes)) {
        worlds::AgentState s = worlds::reset(env, rng.fork_seed());
        shaper.begin_episode(s);
        double ep_return = 0.0;
        int ep_steps = 0;
        bool truncated = false;
        while (true) {
            const std::uint64_t s_key = worlds::state_key(env, s);
            const int a = select_action(result.q, s_key, eps.value, rng);
            const auto out = worlds::step(env, s, a, rng);
            const double f = shaper.shape(s, a, out.next, out.done);
            if (config.decay_on_subgoal) {
                for (int i = 0; i < shaper.last_prefix_advance(); ++i) eps.on_subgoal();
            }
            Transition t;
            t.s = s;
            t.s2 = out.next;
            t.s_key = s_key;
            t.s2_key = worlds::state_key(env, out.next);
            t.action = a;
            t.reward = out.reward;
            t.shaped_reward = out.reward + f;
            t.done = out.done;
            t.reason = out.reason;
            t.episode = static_cast<std::uint32_t>(episode);
            t.step_index = static_cast<std::uint32_t>(ep_steps);
            result.buffer.push(t);

            if (result.buffer.size() >= static_cast<std::size_t>(config.batch_size)) {
                batch.clear();
                for (int i = 0; i < config.batch_size; ++i) {
                    batch.push_back(result.buffer.at(static_cast<std::size_t>(
                        rng.below(result.buffer.size()))));
                }
                q_update(result.q, batch, config.alpha, config.gamma);
            }

            ep_return += out.reward;
            ++ep_steps;
            ++total_steps;
            s = out.next;
            if (out.done) {
                if (out.reason == worlds::Termination::goal) {
                    eps.on_goal();
                    if (result.first_success_episode < 0) result.first_success_episode = episode;
                }
                break;
            }
            if (total_steps >= config.max_steps) {
                truncated = true;  // budget ran out mid-episode; drop the partial record
                break;
            }
        }
        if (!truncated) {
            const double elapsed =
                std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
            result.curve.push_back({episode, ep_return, ep_steps, eps.value, elapsed});
            ++episode;
        }
    }
    result.episodes = episode;
    result.final_epsilon = eps.value;
    return result;
}

}  // namespace planshape::rl
