#include "planshape/harness/runner.hpp"

#include <atomic>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <memory>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "json.hpp"
#include "planshape/shaping/potential.hpp"
#include "planshape/strips/parser.hpp"

namespace planshape::harness {

namespace fs = std::filesystem;

void write_file(const std::string& path, const std::string& content) {
    const fs::path p(path);
    if (p.has_parent_path()) fs::create_directories(p.parent_path());
    std::ofstream out(p, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path);
    out << content;
}

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot read " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

worlds::GridWorld world_from_config(const ExperimentConfig& config) {
    worlds::GridWorld env = worlds::bundled_world(config.environment);
    env.slip_prob = config.slip;
    if (config.horizon > 0) env.max_steps = config.horizon;
    return env;
}

guidance::Abstraction abstraction_from_config(const ExperimentConfig& config) {
    if (config.abstraction == "deterministic") {
        return guidance::make_deterministic_abstraction(world_from_config(config),
                                                        config.env_seed);
    }
    const worlds::GridWorld env = world_from_config(config);
    const std::string pddl = worlds::pddl_world_name(env);
    if (pddl.empty()) {
        throw std::invalid_argument("no bundled hierarchical model for '" +
                                    config.environment + "'");
    }
    return guidance::make_hierarchical_abstraction(
        pddl == "doorkey" ? config.environment : pddl);
}

namespace {

std::unique_ptr<guidance::ProposerBackend> backend_from_config(
    const ExperimentConfig& config, const guidance::Abstraction& abs) {
    if (config.backend == "oracle") {
        return std::make_unique<guidance::OracleBackend>(abs, config.corruption,
                                                         config.env_seed + 1,
                                                         config.partial_subgoals);
    }
    if (config.backend == "mock") {
        if (config.fixture.empty()) {
            throw std::invalid_argument("mock backend needs backend.fixture");
        }
        return std::make_unique<guidance::ScriptedBackend>(
            guidance::ScriptedBackend::from_jsonl(read_file(config.fixture)));
    }
    if (config.backend == "http") {
        return std::make_unique<guidance::HttpBackend>(config.http);
    }
    throw std::invalid_argument("unknown backend kind '" + config.backend + "'");
}

std::string curve_csv(const rl::LearningCurve& curve, std::uint64_t seed) {
    std::ostringstream out;
    out << "episode,return,steps,epsilon,seed\n";
    char row[160];
    for (const auto& p : curve) {
        std::snprintf(row, sizeof row, "%d,%.17g,%d,%.17g,%llu\n", p.episode,
                      p.episodic_return, p.steps, p.epsilon,
                      static_cast<unsigned long long>(seed));
        out << row;
    }
    return out.str();
}

void parallel_for(int workers, std::size_t n, const std::function<void(std::size_t)>& fn) {
    if (workers <= 1 || n <= 1) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    const int count = std::min<std::size_t>(workers, n);
    for (int w = 0; w < count; ++w) {
        pool.emplace_back([&] {
            for (;;) {
                const std::size_t i = next.fetch_add(1);
                if (i >= n) break;
                fn(i);
            }
        });
    }
    for (auto& t : pool) t.join();
}

}  // namespace

shaping::ShapingConfig shaping_from_config(const ExperimentConfig& config,
                                           const guidance::GuidePlan* plan,
                                           const worlds::GridWorld& env) {
    shaping::ShapingConfig out;
    out.gamma = config.train.gamma;
    out.scale = config.potential_scale;
    out.gamma_weighted = config.gamma_weighted;
    out.pure_state_potential = config.pure_state_potential;
    if (config.shaping == "none") {
        out.mode = shaping::ShapingConfig::Mode::none;
        return out;
    }
    if (!plan) throw std::invalid_argument("shaping '" + config.shaping + "' needs a plan");
    if (!plan->world_id.empty() && plan->world_id != env.id) {
        throw std::invalid_argument("plan was produced for '" + plan->world_id +
                                    "', not '" + env.id + "'");
    }
    if (config.shaping == "state") {
        if (plan->mode != guidance::GuidePlan::Mode::hierarchical) {
            throw std::invalid_argument("state shaping needs a hierarchical plan");
        }
        out.mode = shaping::ShapingConfig::Mode::state;
        out.table = shaping::potential_from_subgoals(
            *plan, shaping::default_designation(worlds::pddl_world_name(env)),
            config.potential_scale);
        return out;
    }
    if (plan->mode != guidance::GuidePlan::Mode::deterministic) {
        throw std::invalid_argument("look-back shaping needs a deterministic-mode plan");
    }
    out.mode = shaping::ShapingConfig::Mode::lookback;
    out.table = shaping::potential_from_plan_sa(env, *plan, config.potential_scale);
    return out;
}

PlanArtifacts run_plan(const ExperimentConfig& config) {
    const guidance::Abstraction abs = abstraction_from_config(config);
    auto backend = backend_from_config(config, abs);

    PlanArtifacts art;
    if (config.guidance == "direct") {
        art.plan = guidance::direct_plan(*backend, abs, &art.transcript);
        art.backend_calls = 1;
    } else if (config.guidance == "verified") {
        guidance::LoopBudget budget = guidance::default_budget(config.environment);
        if (config.budget_steps > 0) budget.max_steps = config.budget_steps;
        if (config.budget_backprompts > 0) {
            budget.max_backprompts_per_step = config.budget_backprompts;
        }
        auto out = guidance::verified_plan(*backend, abs, budget);
        art.plan = std::move(out.plan);
        art.transcript = std::move(out.transcript);
        art.backend_calls = out.backend_calls;
    } else {
        throw std::invalid_argument("guidance must be direct|verified, got '" +
                                    config.guidance + "'");
    }

    std::ostringstream metrics;
    metrics << "plan_length=" << art.plan.length() << " reward=";
    if (art.plan.mode == guidance::GuidePlan::Mode::deterministic) {
        metrics << format_number(art.plan.achieved_reward);
    } else {
        metrics << '-';
    }
    metrics << " subgoal_fraction=" << format_number(art.plan.subgoal_fraction)
            << " complete=" << (art.plan.complete ? 1 : 0);
    art.metrics_line = metrics.str();

    write_file(config.out_dir + "/plan.json", guidance::plan_to_json(art.plan));
    write_file(config.out_dir + "/transcript.jsonl", art.transcript.to_jsonl());
    write_file(config.out_dir + "/config_resolved.ini", config_to_text(config));
    write_file(config.out_dir + "/plan_metrics.txt", art.metrics_line + "\n");
    return art;
}

TrainArtifacts run_train(const ExperimentConfig& config, const guidance::GuidePlan* plan) {
    const worlds::GridWorld env = world_from_config(config);
    const shaping::ShapingConfig shaping_cfg = shaping_from_config(config, plan, env);

    TrainArtifacts art;
    art.per_seed.resize(config.seeds.size());
    parallel_for(config.workers, config.seeds.size(), [&](std::size_t i) {
        SeedResult& slot = art.per_seed[i];
        slot.seed = config.seeds[i];
        try {
            rl::TrainConfig tc = config.train;
            tc.seed = config.seeds[i];
            const auto result = rl::train(env, shaping_cfg, tc);
            slot.curve = result.curve;
            slot.episodes = result.episodes;
            slot.final_epsilon = result.final_epsilon;
            slot.first_success =
                result.first_success_episode < 0 ? result.episodes
                                                 : result.first_success_episode;
            for (const auto& p : result.curve) slot.auc += p.episodic_return;
            write_file(config.out_dir + "/curve_seed" + std::to_string(slot.seed) + ".csv",
                       curve_csv(result.curve, slot.seed));
        } catch (const std::exception& e) {
            slot.error = e.what();
        }
    });

    nlohmann::json per_seed = nlohmann::json::array();
    std::vector<double> aucs, first, episodes;
    for (const auto& s : art.per_seed) {
        if (!s.error.empty()) {
            ++art.failed_seeds;
            per_seed.push_back({{"seed", s.seed}, {"error", s.error}});
            continue;
        }
        aucs.push_back(s.auc);
        first.push_back(static_cast<double>(s.first_success));
        episodes.push_back(static_cast<double>(s.episodes));
        nlohmann::json row = {{"seed", s.seed},
                              {"auc", s.auc},
                              {"first_success_episode", s.first_success},
                              {"episodes", s.episodes},
                              {"final_epsilon", s.final_epsilon}};
        if (plan) {
            row["plan_length"] = plan->length();
            row["subgoal_fraction"] = plan->subgoal_fraction;
            if (plan->mode == guidance::GuidePlan::Mode::deterministic) {
                row["plan_reward"] = plan->achieved_reward;
            }
        }
        per_seed.push_back(row);
    }

    nlohmann::json summary;
    summary["environment"] = config.environment;
    summary["shaping"] = config.shaping;
    summary["seeds"] = per_seed;
    if (!aucs.empty()) {
        const Aggregate a = aggregate(aucs);
        const Aggregate f = aggregate(first);
        summary["aggregate"] = {
            {"auc", {{"mean", a.mean}, {"std", a.std}, {"formatted", format_mean_std(a)}}},
            {"first_success_episode",
             {{"mean", f.mean}, {"std", f.std}, {"formatted", format_mean_std(f)}}},
            {"auc_median", median(aucs)},
            {"episodes", aggregate(episodes).mean}};
    }
    if (plan) {
        summary["plan"] = {{"length", plan->length()},
                           {"subgoal_fraction", plan->subgoal_fraction},
                           {"complete", plan->complete}};
    }
    art.summary_json = summary.dump(2) + "\n";
    write_file(config.out_dir + "/summary.json", art.summary_json);
    write_file(config.out_dir + "/config_resolved.ini", config_to_text(config));
    return art;
}

namespace {

struct Condition {
    std::string name;
    std::string shaping;
    int partial_subgoals = 0;  // oracle plan truncation, 0 = complete
    bool needs_plan = false;
};

}  // namespace

int run_reproduce(const std::string& suite, const ExperimentConfig& base) {
    std::vector<std::string> envs;
    bool hierarchical = true;
    if (suite == "babyai") {
        envs = {"doorkey5", "empty_random5", "lavagap5"};
        hierarchical = false;
    } else if (suite == "household" || suite == "mario" || suite == "minecraft") {
        envs = {suite};
    } else {
        throw std::invalid_argument("unknown suite '" + suite +
                                    "' (babyai|household|mario|minecraft)");
    }
    const std::string shaped_mode = hierarchical ? "state" : "lookback";
    const std::vector<Condition> conditions = {
        {"vanilla", "none", 0, false},
        {"partial-plan", shaped_mode, 1, true},
        {"complete-plan", shaped_mode, 0, true},
    };

    std::ostringstream report;
    report << "reproduce suite: " << suite << "\n";
    report << "conditions: vanilla | partial-plan | complete-plan, seeds:";
    for (auto s : base.seeds) report << ' ' << s;
    report << "\n\n";

    int failed = 0;
    int total = 0;
    for (const auto& env_id : envs) {
        ExperimentConfig cfg = base;
        cfg.environment = env_id;
        cfg.abstraction = hierarchical ? "hierarchical" : "deterministic";
        cfg.backend = "oracle";
        cfg.guidance = "direct";

        report << "environment: " << env_id << "\n";
        report << "  condition        plan_len  subgoals  auc(mean)        auc(median)  "
                  "first_success(mean)\n";

        std::vector<double> medians;
        for (const auto& cond : conditions) {
            ExperimentConfig run_cfg = cfg;
            run_cfg.shaping = cond.shaping;
            run_cfg.partial_subgoals = cond.partial_subgoals;
            run_cfg.out_dir = base.out_dir + "/" + env_id + "/" + cond.name;

            std::optional<guidance::GuidePlan> plan;
            if (cond.needs_plan) {
                PlanArtifacts art = run_plan(run_cfg);
                plan = art.plan;
            }
            TrainArtifacts art = run_train(run_cfg, plan ? &*plan : nullptr);
            failed += art.failed_seeds;
            total += static_cast<int>(run_cfg.seeds.size());

            std::vector<double> aucs, first;
            for (const auto& s : art.per_seed) {
                if (!s.error.empty()) {
                    report << "  seed " << s.seed << " FAILED: " << s.error << "\n";
                    continue;
                }
                aucs.push_back(s.auc);
                first.push_back(static_cast<double>(s.first_success));
            }
            char row[256];
            if (!aucs.empty()) {
                const double med = median(aucs);
                medians.push_back(med);
                std::snprintf(row, sizeof row,
                              "  %-16s %-9s %-9s %-16s %-12s %s\n", cond.name.c_str(),
                              plan ? std::to_string(plan->length()).c_str() : "-",
                              plan ? format_number(plan->subgoal_fraction).c_str() : "-",
                              format_mean_std(aggregate(aucs)).c_str(),
                              format_number(med).c_str(),
                              format_mean_std(aggregate(first)).c_str());
                report << row;
            } else {
                medians.push_back(0.0);
                report << "  " << cond.name << " produced no successful seeds\n";
            }
        }
        if (medians.size() == 3) {
            const double vanilla = medians[0], partial = medians[1], complete = medians[2];
            report << "  ordering (median auc): complete=" << format_number(complete)
                   << " partial=" << format_number(partial)
                   << " vanilla=" << format_number(vanilla) << " -> "
                   << ((complete > partial && partial > vanilla) ? "complete > partial > vanilla"
                                                                 : "unexpected ordering")
                   << "\n";
        }
        report << "\n";
    }

    write_file(base.out_dir + "/report.txt", report.str());
    std::fputs(report.str().c_str(), stdout);
    return failed >= total ? -1 : failed;
}

strips::ValidationResult validate_plan_files(const std::string& domain_path,
                                             const std::string& problem_path,
                                             const std::string& plan_path,
                                             std::size_t* prefix_out) {
    const strips::Domain domain = strips::parse_domain(read_file(domain_path));
    const strips::StripsProblem problem =
        strips::parse_problem(read_file(problem_path), domain);
    const auto actions = strips::ground(domain, problem.objects);

    guidance::Abstraction abs;
    abs.mode = guidance::Abstraction::Mode::hierarchical;
    abs.domain = domain;
    abs.problem = problem;
    abs.ground_actions = actions;
    const auto parsed = guidance::parse_response(read_file(plan_path), abs, true);
    if (!parsed.ok) {
        throw std::invalid_argument("malformed plan file: '" + parsed.error + "'");
    }
    std::vector<strips::GroundAction> plan;
    for (auto idx : parsed.hier_actions) plan.push_back(actions[idx]);
    const auto result = strips::validate_plan(problem, plan);
    if (prefix_out) *prefix_out = result.valid_prefix_len;
    return result;
}

}  // namespace planshape::harness
