#include <cmath>

#include "doctest.h"
#include "planshape/guidance/backend.hpp"
#include "planshape/guidance/loop.hpp"
#include "planshape/rl/qlearn.hpp"
#include "planshape/rl/value_iteration.hpp"
#include "planshape/shaping/potential.hpp"

using namespace planshape;
using namespace planshape::shaping;

namespace {

guidance::GuidePlan oracle_hier_plan(const std::string& world, int partial_subgoals = 0) {
    const auto abs = guidance::make_hierarchical_abstraction(world);
    guidance::OracleBackend backend(abs, 0.0, 1, partial_subgoals);
    return guidance::direct_plan(backend, abs);
}

PotentialTable household_table(double c = 1.0) {
    const auto plan = oracle_hier_plan("household");
    return potential_from_subgoals(plan, default_designation("household"), c);
}

}  // namespace

TEST_CASE("state-action potentials are progressive along the plan") {
    worlds::GridWorld env = worlds::bundled_world("empty_random5");
    env.random_start = false;
    guidance::GuidePlan plan;
    plan.mode = guidance::GuidePlan::Mode::deterministic;
    worlds::AgentState s = worlds::reset(env, 0);
    RngStream rng(0);
    const worlds::GridWorld det = worlds::determinize(env);
    for (int a : {worlds::kForward, worlds::kForward, worlds::kTurnRight, worlds::kForward}) {
        plan.steps.emplace_back(s, a);
        s = worlds::step(det, s, a, rng).next;
    }
    PotentialTable table = potential_from_plan_sa(env, plan, 1.0);
    for (std::size_t i = 0; i < plan.steps.size(); ++i) {
        const auto& [state, action] = plan.steps[i];
        CHECK(potential_sa(table, worlds::state_key(env, state), action) ==
              doctest::Approx(0.25 * (i + 1)).epsilon(1e-12));
    }
    // absent pair reads zero
    CHECK(potential_sa(table, worlds::state_key(env, s), worlds::kForward) == 0.0);

    guidance::GuidePlan single;
    single.mode = guidance::GuidePlan::Mode::deterministic;
    single.steps.emplace_back(worlds::reset(env, 0), worlds::kForward);
    PotentialTable one = potential_from_plan_sa(env, single, 1.0);
    CHECK(potential_sa(one, worlds::state_key(env, worlds::reset(env, 0)), worlds::kForward) ==
          1.0);

    guidance::GuidePlan empty;
    empty.mode = guidance::GuidePlan::Mode::deterministic;
    CHECK(potential_from_plan_sa(env, empty, 1.0).pairs.empty());
}

TEST_CASE("subgoal designation picks the headline add-effect per plan step") {
    const auto plan = oracle_hier_plan("household");
    REQUIRE(plan.complete);
    const auto subgoals = designate_subgoals(plan.actions, default_designation("household"));
    REQUIRE(subgoals.size() == 4);
    CHECK(subgoals[0].predicate == "key-picked");
    CHECK(subgoals[1].predicate == "door-opened");
    CHECK(subgoals[2].predicate == "charged");
    CHECK(subgoals[3].predicate == "at-destination");

    const auto mc = oracle_hier_plan("minecraft");
    const auto mc_goals = designate_subgoals(mc.actions, default_designation("minecraft"));
    REQUIRE(mc_goals.size() == 7);
    CHECK(mc_goals[0] == strips::Fluent{"wood-picked", {"wood0"}});
    CHECK(mc_goals.back().predicate == "ladder_made");
}

TEST_CASE("ordered-prefix potential: simultaneous-presence rule with examples") {
    PotentialTable table = household_table();
    // {key-picked, holding-key}: only the first sub-goal holds
    CHECK(potential_state(table, strips::FluentSet(
                                     {{"key-picked", {}}, {"holding-key", {}}})) == 1.0);
    // sub-goals 1 and 3 without 2 still score the prefix, 1
    CHECK(potential_state(table, strips::FluentSet({{"key-picked", {}}, {"charged", {}}})) ==
          1.0);
    CHECK(potential_state(table, strips::FluentSet{}) == 0.0);
    CHECK(potential_state(
              table, strips::FluentSet({{"key-picked", {}},
                                        {"door-opened", {}},
                                        {"charged", {}},
                                        {"at-destination", {}}})) == 4.0);
}

TEST_CASE("prefix counting agrees with an enumerated brute-force oracle") {
    PotentialTable table = household_table();
    const std::vector<strips::Fluent> universe = {
        {"key-picked", {}}, {"door-opened", {}},        {"charged", {}},
        {"at-destination", {}}, {"holding-key", {}},    {"at-starting-location", {}}};
    for (unsigned mask = 0; mask < (1u << universe.size()); ++mask) {
        std::vector<strips::Fluent> picked;
        for (std::size_t i = 0; i < universe.size(); ++i) {
            if (mask & (1u << i)) picked.push_back(universe[i]);
        }
        strips::FluentSet fs(picked);
        int expected = 0;
        for (const auto& goal : table.subgoals) {  // independent linear scan
            if (!fs.contains(goal)) break;
            ++expected;
        }
        CHECK(subgoal_prefix(table, fs) == expected);
    }
}

TEST_CASE("partial plans cap the potential at their achieved prefix") {
    const auto partial = oracle_hier_plan("mario", 1);
    REQUIRE(partial.actions.size() == 1);
    CHECK(partial.actions[0].name == "go_down_the_tube");
    PotentialTable table =
        potential_from_subgoals(partial, default_designation("mario"), 1.0);
    REQUIRE(table.subgoals.size() == 1);
    strips::FluentSet everything({{"at-bottom", {}},
                                  {"has-key", {}},
                                  {"has-hidden-key", {}},
                                  {"door-open", {}}});
    CHECK(potential_state(table, everything) == 1.0);
}

TEST_CASE("a longer plan dominates its own prefix pointwise") {
    const auto complete = oracle_hier_plan("minecraft");
    const auto partial = oracle_hier_plan("minecraft", 1);
    PotentialTable full = potential_from_subgoals(complete, default_designation("minecraft"), 1.0);
    PotentialTable cut = potential_from_subgoals(partial, default_designation("minecraft"), 1.0);
    REQUIRE(cut.subgoals.size() < full.subgoals.size());
    // the partial list is a prefix of the complete list
    for (std::size_t i = 0; i < cut.subgoals.size(); ++i) {
        CHECK(cut.subgoals[i] == full.subgoals[i]);
    }
    RngStream rng(5);
    std::vector<strips::Fluent> universe;
    for (const auto& f : full.subgoals) universe.push_back(f);
    for (int trial = 0; trial < 200; ++trial) {
        std::vector<strips::Fluent> picked;
        for (const auto& f : universe) {
            if (rng.uniform() < 0.5) picked.push_back(f);
        }
        strips::FluentSet fs(picked);
        CHECK(potential_state(full, fs) >= potential_state(cut, fs));
    }
}

TEST_CASE("shape_state arithmetic") {
    PotentialTable table = household_table();
    strips::FluentSet zero;
    strips::FluentSet one({{"key-picked", {}}});
    strips::FluentSet two({{"key-picked", {}}, {"door-opened", {}}});
    CHECK(shape_state(table, one, two) == 1.0);
    CHECK(shape_state(table, two, two) == 0.0);
    CHECK(shape_state(table, two, zero) == -2.0);
}

TEST_CASE("look-back advice formula") {
    PotentialTable table;
    table.mode = PotentialTable::Mode::state_action;
    table.pairs[sa_key(100, 1)] = 1.0;
    CHECK(shape_lookback(table, 100, 1, std::nullopt, 0.99) == 1.0);
    CHECK(shape_lookback(table, 200, 0, std::make_pair(std::uint64_t{100}, 1), 0.99) ==
          doctest::Approx(-1.0 / 0.99).epsilon(1e-12));
    CHECK(shape_lookback(table, 200, 0, std::make_pair(std::uint64_t{200}, 0), 0.99) == 0.0);
    CHECK_THROWS_AS(shape_lookback(table, 100, 1, std::nullopt, 0.0), std::invalid_argument);
}

TEST_CASE("episode shaper banks sub-goals even when fluents get deleted later") {
    worlds::GridWorld env = worlds::determinize(worlds::bundled_world("household"));
    ShapingConfig cfg;
    cfg.mode = ShapingConfig::Mode::state;
    cfg.table = household_table();

    EpisodeShaper shaper(env, cfg);
    worlds::AgentState s = worlds::reset(env, 0);
    shaper.begin_episode(s);
    RngStream rng(0);
    double total = 0.0;
    int advances = 0;
    // scripted solve: key, door, dock, goal
    std::vector<int> script;
    for (int i = 0; i < 8; ++i) script.push_back(worlds::kDown);
    script.push_back(worlds::kRight);
    for (int i = 0; i < 3; ++i) script.push_back(worlds::kUp);
    for (int i = 0; i < 4; ++i) script.push_back(worlds::kRight);
    script.push_back(worlds::kRight);
    for (int i = 0; i < 3; ++i) script.push_back(worlds::kUp);
    for (int i = 0; i < 2; ++i) script.push_back(worlds::kRight);
    for (int i = 0; i < 8; ++i) script.push_back(worlds::kDown);
    for (int i = 0; i < 2; ++i) script.push_back(worlds::kRight);
    for (int a : script) {
        auto out = worlds::step(env, s, a, rng);
        total += shaper.shape(s, a, out.next, out.done);
        advances += shaper.last_prefix_advance();
        s = out.next;
        if (out.done) break;
    }
    // opening the door deletes key-picked, but the banked prefix keeps going
    CHECK(total == doctest::Approx(4.0).epsilon(1e-12));
    CHECK(advances == 4);
}

TEST_CASE("relabeling: identity, purity, and telescoping") {
    worlds::GridWorld env = worlds::determinize(worlds::bundled_world("minecraft"));
    env.slip_prob = 0.05;

    rl::TrainConfig tc;
    tc.max_steps = 4000;
    tc.seed = 3;
    const auto result = rl::train(env, ShapingConfig{}, tc);
    REQUIRE(result.buffer.size() > 100);

    // identity: Φ ≡ 0 leaves every reward untouched
    rl::ReplayBuffer ident = result.buffer;
    ShapingConfig zero;
    zero.mode = ShapingConfig::Mode::state;  // empty sub-goal list
    relabel_buffer(env, ident, zero);
    for (std::size_t i = 0; i < ident.size(); ++i) {
        CHECK(ident.at(i).shaped_reward == ident.at(i).reward);
    }

    ShapingConfig shaped;
    shaped.mode = ShapingConfig::Mode::state;
    shaped.pure_state_potential = true;  // literal Φ(s')−Φ(s)
    shaped.table = potential_from_subgoals(oracle_hier_plan("minecraft"),
                                           default_designation("minecraft"), 1.0);

    rl::ReplayBuffer once = result.buffer;
    relabel_buffer(env, once, shaped);
    rl::ReplayBuffer twice = result.buffer;
    relabel_buffer(env, twice, zero);
    relabel_buffer(env, twice, shaped);
    for (std::size_t i = 0; i < once.size(); ++i) {
        CHECK(once.at(i).shaped_reward == twice.at(i).shaped_reward);
    }

    // telescoping per episode: Σ F = Φ(s_T) − Φ(s_0), minecraft fluents are monotone
    double sum_f = 0.0;
    for (std::size_t i = 0; i < once.size(); ++i) {
        const auto& t = once.at(i);
        if (t.step_index == 0) sum_f = 0.0;
        sum_f += t.shaped_reward - t.reward;
        if (t.done) {
            const double phi_t = potential_state(shaped.table, worlds::fluents(env, t.s2));
            CHECK(sum_f == doctest::Approx(phi_t).epsilon(1e-9));
        }
    }
}

TEST_CASE("potential tables survive the JSON round trip") {
    PotentialTable table = household_table(0.5);
    PotentialTable back = potential_from_json(potential_to_json(table));
    CHECK(back.mode == table.mode);
    CHECK(back.scale == table.scale);
    CHECK(back.subgoals == table.subgoals);

    PotentialTable sa;
    sa.mode = PotentialTable::Mode::state_action;
    sa.pairs[sa_key(7, 2)] = 0.75;
    PotentialTable sa_back = potential_from_json(potential_to_json(sa));
    CHECK(sa_back.pairs == sa.pairs);
}

TEST_CASE("epsilon-greedy selection: exploit, explore, and tie-break") {
    rl::QTable q(5);
    q.row(1) = {0.0, 0.3, 0.1, -0.2, 0.0};
    RngStream rng(1);
    for (int i = 0; i < 50; ++i) CHECK(rl::select_action(q, 1, 0.0, rng) == 1);

    // ε = 1: empirical distribution uniform within χ² tolerance
    int counts[5] = {0, 0, 0, 0, 0};
    for (int i = 0; i < 10000; ++i) counts[rl::select_action(q, 1, 1.0, rng)]++;
    double chi2 = 0.0;
    for (int c : counts) chi2 += (c - 2000.0) * (c - 2000.0) / 2000.0;
    CHECK(chi2 < 25.0);  // df=4, far beyond the 99.9% quantile

    // all-zero row: every action ties, selection must cover the whole set
    int seen[5] = {0, 0, 0, 0, 0};
    for (int i = 0; i < 2000; ++i) seen[rl::select_action(q, 42, 0.0, rng)]++;
    for (int c : seen) CHECK(c > 0);
}

TEST_CASE("q_update applies single Bellman backups in batch order") {
    rl::QTable q(2);
    rl::Transition t;
    t.s_key = 1;
    t.s2_key = 2;
    t.action = 0;
    t.shaped_reward = 1.0;
    t.done = true;
    rl::q_update(q, {t}, 0.1, 0.99);
    CHECK(q.get(1, 0) == doctest::Approx(0.1).epsilon(1e-12));

    rl::QTable q2(2);
    rl::Transition zero;
    zero.s_key = 1;
    zero.s2_key = 2;
    zero.action = 1;
    zero.shaped_reward = 0.0;
    rl::q_update(q2, {zero}, 0.1, 0.99);
    CHECK(q2.get(1, 1) == 0.0);
    CHECK(q2.size() == 1);
}

TEST_CASE("q_update converges to the value-iteration fixed point on a two-state chain") {
    // chain: s0 --a0--> s1 --a0--> terminal(r=1); a1 self-loops with r=0
    rl::EnumerableMdp chain;
    chain.n_states = 2;
    chain.n_actions = 2;
    chain.transitions = {
        {{{1.0, 1, 0.0}}, {{1.0, 0, 0.0}}},
        {{{1.0, -1, 1.0}}, {{1.0, 1, 0.0}}},
    };
    const auto q_star = rl::value_iteration(chain, 0.9, 1e-13);
    CHECK(q_star[1][0] == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(q_star[0][0] == doctest::Approx(0.9).epsilon(1e-9));
    CHECK(q_star[0][1] == doctest::Approx(0.81).epsilon(1e-9));

    rl::QTable q(2);
    RngStream rng(7);
    std::vector<rl::Transition> batch;
    for (int iter = 0; iter < 60000; ++iter) {
        rl::Transition t;
        const int s = rng.index(2);
        const int a = rng.index(2);
        t.s_key = static_cast<std::uint64_t>(s);
        t.action = a;
        if (s == 1 && a == 0) {
            t.done = true;
            t.shaped_reward = 1.0;
        } else {
            t.done = false;
            t.shaped_reward = 0.0;
            t.s2_key = static_cast<std::uint64_t>(s == 0 && a == 0 ? 1 : (a == 1 ? s : 1));
        }
        batch.assign(1, t);
        rl::q_update(q, batch, 0.1, 0.9);
    }
    for (int s = 0; s < 2; ++s) {
        for (int a = 0; a < 2; ++a) {
            CHECK(std::abs(q.get(s, a) - q_star[s][a]) < 1e-3);
        }
    }
}

TEST_CASE("value iteration: geometric series and greedy rollout") {
    rl::EnumerableMdp loop;
    loop.n_states = 1;
    loop.n_actions = 1;
    loop.transitions = {{{{1.0, 0, 1.0}}}};
    const auto q = rl::value_iteration(loop, 0.99, 1e-10, 10000);
    CHECK(q[0][0] == doctest::Approx(100.0).epsilon(1e-6));

    worlds::GridWorld dk = worlds::determinize(worlds::bundled_world("doorkey5"));
    const auto mdp = rl::enumerate_mdp(dk);
    CHECK(mdp.n_states > 10);
    const auto q_dk = rl::value_iteration(mdp, 0.99, 1e-12);
    // greedy rollout reaches the goal
    int state = 0;
    RngStream rng(0);
    worlds::AgentState s = mdp.states[0];
    for (int t = 0; t < 50; ++t) {
        const auto greedy = rl::greedy_set(q_dk[state]);
        const auto out = worlds::step(dk, s, greedy[0], rng);
        if (out.done) {
            CHECK(out.reason == worlds::Termination::goal);
            return;
        }
        s = out.next;
        s.steps = 0;
        state = mdp.index.at(worlds::state_key(dk, s));
    }
    FAIL("greedy policy never reached the goal");
}

TEST_CASE("train: baseline learns a tiny empty grid on five seeds") {
    worlds::GridWorld env = worlds::bundled_world("empty_random5");
    env.random_start = false;  // fixed 3x3 room
    for (std::uint64_t seed : {1, 2, 3, 4, 5}) {
        rl::TrainConfig tc;
        tc.seed = seed;
        tc.max_steps = 60000;
        tc.max_episodes = 2000;
        const auto result = rl::train(env, ShapingConfig{}, tc);
        REQUIRE(result.curve.size() > 100);
        double best_window = 0.0;
        double window = 0.0;
        const int w = 50;
        for (std::size_t i = 0; i < result.curve.size(); ++i) {
            window += result.curve[i].episodic_return;
            if (i >= static_cast<std::size_t>(w)) {
                window -= result.curve[i - w].episodic_return;
            }
            if (i + 1 >= static_cast<std::size_t>(w)) {
                best_window = std::max(best_window, window / w);
            }
        }
        CHECK(best_window >= 0.9);
    }
}

TEST_CASE("train is deterministic from the seed") {
    worlds::GridWorld env = worlds::bundled_world("minecraft");
    rl::TrainConfig tc;
    tc.seed = 11;
    tc.max_steps = 5000;
    const auto a = rl::train(env, ShapingConfig{}, tc);
    const auto b = rl::train(env, ShapingConfig{}, tc);
    REQUIRE(a.curve.size() == b.curve.size());
    for (std::size_t i = 0; i < a.curve.size(); ++i) {
        CHECK(a.curve[i].episodic_return == b.curve[i].episodic_return);
        CHECK(a.curve[i].steps == b.curve[i].steps);
        CHECK(a.curve[i].epsilon == b.curve[i].epsilon);
    }
}

TEST_CASE("identity shaping is bit-identical to no shaping") {
    worlds::GridWorld env = worlds::bundled_world("household");
    rl::TrainConfig tc;
    tc.seed = 21;
    tc.max_steps = 6000;
    const auto vanilla = rl::train(env, ShapingConfig{}, tc);

    ShapingConfig zero;
    zero.mode = ShapingConfig::Mode::state;  // empty table: Φ ≡ 0
    const auto shaped = rl::train(env, zero, tc);

    REQUIRE(vanilla.curve.size() == shaped.curve.size());
    for (std::size_t i = 0; i < vanilla.curve.size(); ++i) {
        CHECK(vanilla.curve[i].episodic_return == shaped.curve[i].episodic_return);
        CHECK(vanilla.curve[i].steps == shaped.curve[i].steps);
        CHECK(vanilla.curve[i].epsilon == shaped.curve[i].epsilon);
    }
}

TEST_CASE("epsilon schedule decays and respects the floor") {
    rl::EpsSchedule eps;
    double last = eps.value;
    for (int i = 0; i < 2000; ++i) {
        (i % 3 == 0) ? eps.on_goal() : eps.on_subgoal();
        CHECK(eps.value <= last);
        last = eps.value;
    }
    CHECK(eps.value == doctest::Approx(0.05));
}

TEST_CASE("replay buffer evicts strictly FIFO at capacity") {
    rl::ReplayBuffer buf(5);
    for (int i = 0; i < 8; ++i) {
        rl::Transition t;
        t.step_index = static_cast<std::uint32_t>(i);
        buf.push(t);
        CHECK(buf.size() <= 5);
    }
    CHECK(buf.size() == 5);
    for (int i = 0; i < 5; ++i) CHECK(buf.at(i).step_index == static_cast<std::uint32_t>(i + 3));
}

TEST_CASE("insertion-time relabeling equals a full relabeling pass") {
    worlds::GridWorld env = worlds::bundled_world("minecraft");
    ShapingConfig shaped;
    shaped.mode = ShapingConfig::Mode::state;
    shaped.table = potential_from_subgoals(oracle_hier_plan("minecraft"),
                                           default_designation("minecraft"), 1.0);
    rl::TrainConfig tc;
    tc.seed = 31;
    tc.max_steps = 6000;
    auto result = rl::train(env, shaped, tc);

    std::vector<double> at_insertion;
    for (std::size_t i = 0; i < result.buffer.size(); ++i) {
        at_insertion.push_back(result.buffer.at(i).shaped_reward);
    }
    relabel_buffer(env, result.buffer, shaped);
    for (std::size_t i = 0; i < result.buffer.size(); ++i) {
        CHECK(result.buffer.at(i).shaped_reward == at_insertion[i]);
    }
}

TEST_CASE("train rejects invalid configurations up front") {
    worlds::GridWorld env = worlds::bundled_world("doorkey5");
    rl::TrainConfig tc;
    tc.max_steps = 10;
    ShapingConfig state_mode;
    state_mode.mode = ShapingConfig::Mode::state;
    CHECK_THROWS_AS(rl::train(env, state_mode, tc), std::invalid_argument);  // no fluent map
    rl::TrainConfig bad = tc;
    bad.alpha = 0.0;
    CHECK_THROWS_AS(rl::train(env, ShapingConfig{}, bad), std::invalid_argument);
    bad = tc;
    bad.batch_size = 0;
    CHECK_THROWS_AS(rl::train(env, ShapingConfig{}, bad), std::invalid_argument);
}
