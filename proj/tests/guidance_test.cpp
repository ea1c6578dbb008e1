#include <atomic>
#include <cstdlib>
#include <set>
#include <thread>

#include "doctest.h"
#include "httplib.h"
#include "json.hpp"
#include "planshape/guidance/backend.hpp"
#include "planshape/guidance/loop.hpp"
#include "planshape/guidance/plan.hpp"
#include "planshape/guidance/prompt.hpp"

using namespace planshape;
using namespace planshape::guidance;

namespace {

// Repeats a fixed (typically invalid) response forever.
class StubbornBackend : public ProposerBackend {
public:
    explicit StubbornBackend(std::string response) : response_(std::move(response)) {}
    std::string complete(const std::string&) override {
        ++calls;
        return response_;
    }
    std::string id() const override { return "mock:stubborn"; }
    int calls = 0;

private:
    std::string response_;
};

Abstraction doorkey_abstraction() {
    return make_deterministic_abstraction(worlds::bundled_world("doorkey5"));
}

}  // namespace

TEST_CASE("direct prompt for doorkey matches the bundled template") {
    const Abstraction abs = doorkey_abstraction();
    const std::string prompt = build_direct_prompt(abs).render();
    CHECK(prompt.find("use the key to open the door and then get to the goal") !=
          std::string::npos);
    CHECK(prompt.find("unseen door unseen\nkey wall unseen\nagent wall goal") !=
          std::string::npos);
    CHECK(prompt.find("You (agent) are currently facing left.") != std::string::npos);
    CHECK(prompt.find("What is the sequence of actions you will take to reach the goal?"
                      " Output as a comma separated list.") != std::string::npos);
    CHECK(prompt == build_direct_prompt(abs).render());  // byte-stable
}

TEST_CASE("hierarchical direct prompt embeds the verbatim PDDL pair") {
    const Abstraction abs = make_hierarchical_abstraction("mario");
    const std::string prompt = build_direct_prompt(abs).render();
    CHECK(prompt.rfind("Here is a pddl domain, a planning problem.", 0) == 0);
    CHECK(prompt.find("(define (domain Mario)") != std::string::npos);
    CHECK(prompt.find("(:action go_up_the_ladder") != std::string::npos);
    CHECK(prompt.find("(define (problem prob)") != std::string::npos);
    CHECK(prompt.find("(ACTION-NAME OBJECTS)") != std::string::npos);
    CHECK(prompt.find("domain pddl\n(define") != std::string::npos);
}

TEST_CASE("step prompts query exactly one next action") {
    const Abstraction abs = doorkey_abstraction();
    const std::string prompt = build_step_prompt(abs, abs.start, {}).render();
    CHECK(prompt.find("What is the next action that the agent should take?") !=
          std::string::npos);
    CHECK(prompt.find("only write 'move forward' in your response") != std::string::npos);

    const Abstraction mc = make_hierarchical_abstraction("minecraft");
    std::vector<strips::GroundAction> so_far = {mc.ground_actions[0], mc.ground_actions[2],
                                                mc.ground_actions[8]};
    strips::FluentSet state = mc.problem.init;
    const std::string hier = build_step_prompt(mc, state, so_far).render();
    CHECK(hier.find("Provide only the next action") != std::string::npos);
    CHECK(hier.find("Your plan so far - [(get_wood wood0),(get_processed_wood wood0),"
                    "(make_ladder)].") != std::string::npos);

    const std::string empty_plan = build_step_prompt(mc, state, {}).render();
    CHECK(empty_plan.find("Your plan so far - [].") != std::string::npos);
}

TEST_CASE("back prompts carry the reason, the allowed list, and every rejected guess") {
    const Abstraction abs = doorkey_abstraction();
    const PromptBundle step = build_step_prompt(abs, abs.start, {});
    const auto feas = feasible_lowlevel_actions(abs.env, abs.start);
    std::vector<std::string> allowed;
    for (int a : feas.feasible) allowed.push_back(worlds::action_names(abs.env)[a]);

    PromptBundle back = build_back_prompt(step, abs, {"pickup key"},
                                          feas.reasons[worlds::kPickup], allowed);
    const std::string text = back.render();
    CHECK(text.find("You cannot 'pickup key' in this state as you are not facing the key") !=
          std::string::npos);
    CHECK(text.find("'turn left', 'turn right'") != std::string::npos);
    CHECK(text.find("You have already tried the following actions: pickup key.") !=
          std::string::npos);

    // a second rejected guess accumulates
    PromptBundle back2 = build_back_prompt(step, abs, {"pickup key", "open door"},
                                           "you are not facing the door", allowed);
    CHECK(back2.render().find("You have already tried the following actions: pickup key,"
                              " open door.") != std::string::npos);

    CHECK_THROWS_AS(build_back_prompt(step, abs, {}, "", allowed), std::invalid_argument);
}

TEST_CASE("hierarchical back prompt quotes the paper's feedback phrases") {
    const Abstraction hh = make_hierarchical_abstraction("household");
    const auto part = strips::valid_actions(hh.problem.init, hh.ground_actions);
    std::vector<std::string> allowed;
    for (auto i : part.valid) allowed.push_back(hh.ground_actions[i].str());

    const strips::GroundAction* open_door = nullptr;
    for (const auto& ga : hh.ground_actions) {
        if (ga.name == "open_door") open_door = &ga;
    }
    REQUIRE(open_door != nullptr);
    const std::string reason = hierarchical_reason(hh.problem.init, *open_door);
    CHECK(reason == "you do not have key with you");

    const PromptBundle step = build_step_prompt(hh, hh.problem.init, {});
    const std::string back =
        build_back_prompt(step, hh, {"(open_door)"}, reason, allowed).render();
    CHECK(back.find("Your response - (open_door). The action provided is not feasible because"
                    " you do not have key with you.") != std::string::npos);
    CHECK(back.find("Choose a valid action from the list [(get_key)].") != std::string::npos);

    const Abstraction mario = make_hierarchical_abstraction("mario");
    const strips::GroundAction* pickup = nullptr;
    for (const auto& ga : mario.ground_actions) {
        if (ga.name == "pickup_key") pickup = &ga;
    }
    CHECK(hierarchical_reason(mario.problem.init, *pickup) == "you are still at upstairs");
}

TEST_CASE("parse_response: vocabulary match, pddl terms, and hard rejections") {
    const Abstraction det = doorkey_abstraction();
    auto plan = parse_response("turn left, move forward", det, true);
    REQUIRE(plan.ok);
    CHECK(plan.det_actions == std::vector<int>{worlds::kTurnLeft, worlds::kForward});

    CHECK(parse_response("Turn Left", det, false).ok);
    CHECK(parse_response("'move forward'", det, false).ok);
    CHECK(parse_response("move_forward", det, false).ok);
    CHECK_FALSE(parse_response("I think you should fly", det, true).ok);
    CHECK_FALSE(parse_response("", det, true).ok);
    CHECK_FALSE(parse_response("turn left, turn right", det, false).ok);  // one action only

    const Abstraction mc = make_hierarchical_abstraction("minecraft");
    auto hier = parse_response("(get_wood wood0)", mc, false);
    REQUIRE(hier.ok);
    CHECK(mc.ground_actions[hier.hier_actions[0]].str() == "(get_wood wood0)");

    auto seq = parse_response("(get_wood wood0), (get_processed_wood wood0)", mc, true);
    REQUIRE(seq.ok);
    CHECK(seq.hier_actions.size() == 2);

    auto ladder = parse_response("make_ladder", mc, false);  // bare 0-ary name
    REQUIRE(ladder.ok);
    CHECK(mc.ground_actions[ladder.hier_actions[0]].name == "make_ladder");

    CHECK_FALSE(parse_response("get_wood", mc, false).ok);  // ambiguous binding
    CHECK_FALSE(parse_response("(fly_away)", mc, false).ok);
    CHECK_FALSE(parse_response("(get_wood wood9)", mc, false).ok);

    const Abstraction mario = make_hierarchical_abstraction("mario");
    auto bare = parse_response("pickup_key", mario, false);
    REQUIRE(bare.ok);
    CHECK(mario.ground_actions[bare.hier_actions[0]].name == "pickup_key");
}

TEST_CASE("feasibility matches the paper's doorkey situation") {
    const Abstraction abs = doorkey_abstraction();
    // initial state: facing left at the bottom-left corner
    auto feas = feasible_lowlevel_actions(abs.env, abs.start);
    CHECK(feas.feasible == std::vector<int>{worlds::kTurnLeft, worlds::kTurnRight});
    CHECK(feas.reasons[worlds::kForward] == "you are facing a wall");
    CHECK(feas.reasons[worlds::kPickup] == "you are not facing the key");

    // holding the key in front of the closed door: forward and pickup are out,
    // turning and toggling are in
    RngStream rng(0);
    worlds::AgentState s = abs.start;
    for (int a : {worlds::kTurnRight, worlds::kPickup, worlds::kForward, worlds::kForward,
                  worlds::kTurnRight}) {
        s = worlds::step(abs.env, s, a, rng).next;
    }
    CHECK(worlds::carrying_key(abs.env, s));
    feas = feasible_lowlevel_actions(abs.env, s);
    CHECK(feas.feasible ==
          std::vector<int>{worlds::kTurnLeft, worlds::kTurnRight, worlds::kToggle});
    CHECK(feas.reasons[worlds::kForward] == "the door is closed");
    CHECK(feas.reasons[worlds::kPickup] == "you are already carrying the key");
}

TEST_CASE("lava-entering moves are feasible but flagged unsafe") {
    const Abstraction abs =
        make_deterministic_abstraction(worlds::bundled_world("lavagap5"));
    const auto feas = feasible_lowlevel_actions(abs.env, abs.start);
    CHECK(std::find(feas.feasible.begin(), feas.feasible.end(), worlds::kForward) !=
          feas.feasible.end());
    CHECK(feas.unsafe == std::vector<int>{worlds::kForward});
}

TEST_CASE("turn-based feasibility agrees with simulate-and-check on random states") {
    for (const char* id : {"doorkey5", "doorkey6", "empty_random5", "lavagap5"}) {
        worlds::GridWorld env = worlds::determinize(worlds::bundled_world(id));
        RngStream rng(23);
        worlds::AgentState s = worlds::reset(env, 0);
        int checked = 0;
        for (int i = 0; i < 1500; ++i) {
            const auto feas = feasible_lowlevel_actions(env, s);
            for (int a = 0; a < env.action_count; ++a) {
                worlds::AgentState probe = s;
                probe.steps = 0;
                const auto out = worlds::step(env, probe, a, rng);
                const bool changed = out.next.x != probe.x || out.next.y != probe.y ||
                                     out.next.dir != probe.dir ||
                                     out.next.flags != probe.flags || out.done;
                const bool feasible = std::find(feas.feasible.begin(), feas.feasible.end(),
                                                a) != feas.feasible.end();
                CHECK(feasible == changed);
                ++checked;
            }
            auto out = worlds::step(env, s, rng.index(env.action_count), rng);
            s = out.done ? worlds::reset(env, rng.next_u64()) : out.next;
            s.steps = 0;
        }
        CHECK(checked >= 1000 * env.action_count);
    }
}

TEST_CASE("low-level oracle plans: empty-random takes five actions, lavagap avoids lava") {
    worlds::GridWorld er = worlds::bundled_world("empty_random5");
    er.random_start = false;
    const auto plan = lowlevel_plan(er, worlds::reset(er, 0));
    REQUIRE(plan.has_value());
    CHECK(plan->size() == 5);

    worlds::GridWorld lg = worlds::bundled_world("lavagap5");
    const auto lplan = lowlevel_plan(lg, worlds::reset(lg, 0));
    REQUIRE(lplan.has_value());
    RngStream rng(0);
    worlds::AgentState s = worlds::reset(lg, 0);
    worlds::StepOutcome out;
    for (int a : *lplan) {
        out = worlds::step(worlds::determinize(lg), s, a, rng);
        s = out.next;
    }
    CHECK(out.done);
    CHECK(out.reason == worlds::Termination::goal);
}

TEST_CASE("direct oracle plan on empty-random reproduces the successful-run row") {
    worlds::GridWorld er = worlds::bundled_world("empty_random5");
    er.random_start = false;
    const Abstraction abs = make_deterministic_abstraction(er);
    OracleBackend oracle(abs);
    Transcript transcript;
    const GuidePlan plan = direct_plan(oracle, abs, &transcript);
    CHECK(plan.complete);
    CHECK(plan.steps.size() == 5);
    CHECK(plan.achieved_reward == doctest::Approx(0.955).epsilon(1e-12));
    REQUIRE(transcript.records.size() == 1);
    CHECK(transcript.records[0].verdict == "valid");
}

TEST_CASE("direct hierarchical plans: oracle completes, one action scores 0.25, garbage zero") {
    const Abstraction mario = make_hierarchical_abstraction("mario");
    OracleBackend oracle(mario);
    const GuidePlan full = direct_plan(oracle, mario);
    CHECK(full.complete);
    CHECK(full.actions.size() == 5);
    CHECK(full.subgoal_fraction == 1.0);

    ScriptedBackend one({"(go_down_the_tube)"});
    const GuidePlan partial = direct_plan(one, mario);
    CHECK_FALSE(partial.complete);
    CHECK(partial.actions.size() == 1);
    CHECK(partial.subgoal_fraction == doctest::Approx(0.25));

    ScriptedBackend garbage({"the mushroom kingdom beckons"});
    Transcript transcript;
    const GuidePlan empty = direct_plan(garbage, mario, &transcript);
    CHECK(empty.actions.empty());
    CHECK(empty.subgoal_fraction == 0.0);
    CHECK(transcript.records[0].verdict == "parse-error");

    // valid prefix with an invalid tail scores the prefix only
    ScriptedBackend prefix({"(go_down_the_tube), (unlock_door)"});
    const GuidePlan cut = direct_plan(prefix, mario);
    CHECK(cut.actions.size() == 1);
    CHECK(cut.subgoal_fraction == doctest::Approx(0.25));
}

TEST_CASE("verified oracle run solves household with the canonical plan") {
    const Abstraction hh = make_hierarchical_abstraction("household");
    OracleBackend oracle(hh);
    const auto out = verified_plan(oracle, hh, default_budget("household"));
    REQUIRE(out.plan.complete);
    REQUIRE(out.plan.actions.size() == 4);
    CHECK(out.plan.actions[0].name == "get_key");
    CHECK(out.plan.actions[1].name == "open_door");
    CHECK(out.plan.actions[2].name == "is_charged");
    CHECK(out.plan.actions[3].name == "goal");
    CHECK(out.plan.subgoal_fraction == 1.0);
    CHECK(out.back_prompts == 0);
}

TEST_CASE("verified deterministic run solves doorkey") {
    const Abstraction abs = doorkey_abstraction();
    OracleBackend oracle(abs);
    const auto out = verified_plan(oracle, abs, default_budget("doorkey5"));
    CHECK(out.plan.complete);
    CHECK(out.plan.subgoal_fraction == 1.0);
    const auto optimal = lowlevel_plan(abs.env, abs.start);
    CHECK(out.plan.steps.size() == optimal->size());
}

TEST_CASE("corrupted oracle completes all three worlds on twenty seeds with back-prompts") {
    int total_back_prompts = 0;
    for (const char* world : {"household", "mario", "minecraft"}) {
        const Abstraction abs = make_hierarchical_abstraction(world);
        const LoopBudget budget = default_budget(world);
        for (std::uint64_t seed = 1; seed <= 20; ++seed) {
            OracleBackend backend(abs, 0.5, seed);
            const auto out = verified_plan(backend, abs, budget);
            CHECK(out.plan.complete);
            CHECK(out.backend_calls <=
                  budget.max_steps * (1 + budget.max_backprompts_per_step));
            total_back_prompts += out.back_prompts;

            // soundness replay: every executed action was applicable when chosen
            strips::FluentSet state = abs.problem.init;
            for (const auto& action : out.plan.actions) {
                CHECK(strips::applicable(state, action));
                state = strips::apply(state, action);
            }
        }
    }
    CHECK(total_back_prompts > 0);
}

TEST_CASE("a backend that repeats one invalid action exhausts the budget and stops") {
    const Abstraction hh = make_hierarchical_abstraction("household");
    LoopBudget budget{20, 5};
    StubbornBackend stubborn("(goal)");  // invalid at the initial state
    const auto out = verified_plan(stubborn, hh, budget);
    CHECK_FALSE(out.plan.complete);
    CHECK(out.plan.actions.empty());
    CHECK(stubborn.calls == budget.max_backprompts_per_step + 1);
    CHECK(stubborn.calls <= budget.max_steps * (1 + budget.max_backprompts_per_step));
    // the rejected guess shows up in the final back-prompt's tried list
    const auto& last = out.transcript.records.back();
    CHECK(last.verdict == "invalid");
    CHECK(last.prompt.find("You have already tried the following actions:") !=
          std::string::npos);
}

TEST_CASE("unparseable output counts against the back-prompt budget") {
    const Abstraction hh = make_hierarchical_abstraction("household");
    StubbornBackend stubborn("gibberish that resolves to nothing");
    const auto out = verified_plan(stubborn, hh, {20, 5});
    CHECK_FALSE(out.plan.complete);
    CHECK(stubborn.calls == 6);
    for (const auto& r : out.transcript.records) CHECK(r.verdict == "parse-error");
}

TEST_CASE("back-prompt invalid list equals the rejected set at each step (replay)") {
    const Abstraction mc = make_hierarchical_abstraction("minecraft");
    OracleBackend backend(mc, 0.7, 99);
    const auto out = verified_plan(backend, mc, default_budget("minecraft"));
    // walk the transcript: for each step, the tried list accumulates rejected guesses
    std::vector<std::string> rejected;
    int step = -1;
    for (const auto& r : out.transcript.records) {
        if (r.step != step) {
            rejected.clear();
            step = r.step;
        }
        if (r.attempt > 0) {
            for (const auto& guess : rejected) {
                CHECK(r.prompt.find(guess) != std::string::npos);
            }
        }
        if (r.verdict != "valid") rejected.push_back(r.response);
    }
}

TEST_CASE("transcripts round-trip through JSONL and drive the scripted mock") {
    Transcript t;
    TranscriptRecord r;
    r.step = 0;
    r.attempt = 0;
    r.prompt = "p0";
    r.response = "(get_key)";
    r.verdict = "valid";
    t.add(r);
    r.step = 1;
    r.response = "(open_door)";
    t.add(r);
    const std::string jsonl = t.to_jsonl();
    const auto records = transcript_from_jsonl(jsonl);
    REQUIRE(records.size() == 2);
    CHECK(records[1].response == "(open_door)");

    auto mock = ScriptedBackend::from_jsonl(jsonl);
    CHECK(mock.complete("x") == "(get_key)");
    CHECK(mock.complete("x") == "(open_door)");
    CHECK_THROWS_AS(mock.complete("x"), TransportError);
}

TEST_CASE("guide plans round-trip through JSON in both modes") {
    const Abstraction mario = make_hierarchical_abstraction("mario");
    OracleBackend oracle(mario);
    const GuidePlan plan = direct_plan(oracle, mario);
    const GuidePlan back = plan_from_json(plan_to_json(plan));
    CHECK(back.complete == plan.complete);
    CHECK(back.actions.size() == plan.actions.size());
    // rebinding restores the effects needed by the shaping module
    CHECK(back.actions[0].add.contains({"at-bottom", {}}));

    worlds::GridWorld er = worlds::bundled_world("empty_random5");
    er.random_start = false;
    const Abstraction det = make_deterministic_abstraction(er);
    OracleBackend det_oracle(det);
    const GuidePlan det_plan = direct_plan(det_oracle, det);
    const GuidePlan det_back = plan_from_json(plan_to_json(det_plan));
    CHECK(det_back.steps == det_plan.steps);
    CHECK(det_back.achieved_reward == det_plan.achieved_reward);
}

TEST_CASE("http backend speaks the chat-completions protocol with retry and auth") {
    httplib::Server server;
    std::atomic<int> hits{0};
    std::string seen_auth;
    std::string seen_model;
    double seen_temperature = -1.0;
    server.Post("/v1/chat/completions",
                [&](const httplib::Request& req, httplib::Response& res) {
                    const int n = ++hits;
                    seen_auth = req.get_header_value("Authorization");
                    const auto body = nlohmann::json::parse(req.body);
                    seen_model = body.at("model").get<std::string>();
                    seen_temperature = body.at("temperature").get<double>();
                    if (n == 1) {  // first attempt fails, retry must recover
                        res.status = 503;
                        return;
                    }
                    nlohmann::json reply = {
                        {"choices",
                         nlohmann::json::array(
                             {{{"message",
                                {{"role", "assistant"}, {"content", "turn left"}}}}})}};
                    res.set_content(reply.dump(), "application/json");
                });
    const int port = server.bind_to_any_port("127.0.0.1");
    REQUIRE(port > 0);
    std::thread worker([&] { server.listen_after_bind(); });
    server.wait_until_ready();

    setenv("LLM_API_KEY", "sk-test-123", 1);
    HttpConfig config;
    config.url = "http://127.0.0.1:" + std::to_string(port) + "/v1/chat/completions";
    config.model = "test-model";
    config.temperature = 0.5;
    config.retries = 3;
    config.backoff_base_s = 0.01;
    HttpBackend backend(config);
    CHECK(backend.complete("hello") == "turn left");
    CHECK(hits == 2);
    CHECK(seen_auth == "Bearer sk-test-123");
    CHECK(seen_model == "test-model");
    CHECK(seen_temperature == doctest::Approx(0.5));

    server.stop();
    worker.join();

    // dead endpoint: retries exhaust into TransportError
    HttpConfig dead = config;
    dead.url = "http://127.0.0.1:1/v1/chat/completions";
    dead.retries = 1;
    dead.timeout_s = 1.0;
    HttpBackend dead_backend(dead);
    CHECK_THROWS_AS(dead_backend.complete("hello"), TransportError);
}

TEST_CASE("http backend fails fast on client errors") {
    httplib::Server server;
    std::atomic<int> hits{0};
    server.Post("/v1/chat/completions", [&](const httplib::Request&, httplib::Response& res) {
        ++hits;
        res.status = 401;
        res.set_content("{\"error\":\"bad key\"}", "application/json");
    });
    const int port = server.bind_to_any_port("127.0.0.1");
    std::thread worker([&] { server.listen_after_bind(); });
    server.wait_until_ready();

    HttpConfig config;
    config.url = "http://127.0.0.1:" + std::to_string(port) + "/v1/chat/completions";
    config.retries = 3;
    config.backoff_base_s = 0.01;
    HttpBackend backend(config);
    CHECK_THROWS_AS(backend.complete("hello"), TransportError);
    CHECK(hits == 1);  // no retry on 4xx

    server.stop();
    worker.join();
}
