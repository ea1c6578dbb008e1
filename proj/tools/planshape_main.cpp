// planshape CLI: plan / train / validate / reproduce over the bundled worlds.

#include <cstdio>
#include <exception>
#include <string>

#include "CLI11.hpp"
#include "planshape/guidance/plan.hpp"
#include "planshape/harness/config.hpp"
#include "planshape/harness/runner.hpp"

namespace {

using planshape::harness::ExperimentConfig;

struct Overrides {
    std::string out;
    std::string seeds;
    std::string backend;
    std::string shaping;
    int budget_steps = 0;
    int budget_backprompts = 0;
    double slip = -1.0;
    int workers = 0;
};

void add_override_flags(CLI::App* cmd, Overrides& o) {
    cmd->add_option("--out", o.out, "output directory (overrides config)");
    cmd->add_option("--seeds", o.seeds, "comma-separated training seeds");
    cmd->add_option("--backend", o.backend, "oracle|mock|http");
    cmd->add_option("--shaping", o.shaping, "none|state|lookback");
    cmd->add_option("--budget-steps", o.budget_steps, "loop step budget");
    cmd->add_option("--budget-backprompts", o.budget_backprompts,
                    "back-prompts per step");
    cmd->add_option("--slip", o.slip, "slip probability override");
    cmd->add_option("--workers", o.workers, "parallel seed runs");
}

ExperimentConfig resolve(const std::string& config_path, const Overrides& o) {
    ExperimentConfig cfg = config_path.empty()
                               ? ExperimentConfig{}
                               : planshape::harness::load_config(config_path);
    if (!o.out.empty()) cfg.out_dir = o.out;
    if (!o.seeds.empty()) {
        cfg.seeds.clear();
        std::string item;
        std::stringstream in(o.seeds);
        while (std::getline(in, item, ',')) {
            if (!item.empty()) cfg.seeds.push_back(std::stoull(item));
        }
    }
    if (!o.backend.empty()) cfg.backend = o.backend;
    if (!o.shaping.empty()) cfg.shaping = o.shaping;
    if (o.budget_steps > 0) cfg.budget_steps = o.budget_steps;
    if (o.budget_backprompts > 0) cfg.budget_backprompts = o.budget_backprompts;
    if (o.slip >= 0.0) cfg.slip = o.slip;
    if (o.workers > 0) cfg.workers = o.workers;
    return cfg;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"plan-guided reward shaping for sparse-reward gridworlds"};
    app.require_subcommand(1);

    std::string config_path;
    Overrides o;

    auto* plan_cmd = app.add_subcommand("plan", "query the proposer for a guide plan");
    plan_cmd->add_option("config", config_path, "experiment config file")->required();
    add_override_flags(plan_cmd, o);

    std::string plan_file;
    auto* train_cmd = app.add_subcommand("train", "train tabular Q-learning, optionally shaped");
    train_cmd->add_option("config", config_path, "experiment config file")->required();
    train_cmd->add_option("--plan", plan_file, "guide plan JSON from the plan step");
    add_override_flags(train_cmd, o);

    std::string domain_path, problem_path, planfile_path;
    auto* validate_cmd = app.add_subcommand("validate", "check a plan against a PDDL pair");
    validate_cmd->add_option("domain", domain_path, "domain .pddl")->required();
    validate_cmd->add_option("problem", problem_path, "problem .pddl")->required();
    validate_cmd->add_option("plan", planfile_path, "plan text file")->required();

    std::string suite;
    auto* reproduce_cmd =
        app.add_subcommand("reproduce", "oracle plan + shaped vs vanilla training report");
    reproduce_cmd->add_option("suite", suite, "babyai|household|mario|minecraft")->required();
    reproduce_cmd->add_option("--config", config_path, "base experiment config");
    add_override_flags(reproduce_cmd, o);

    CLI11_PARSE(app, argc, argv);

    try {
        if (*plan_cmd) {
            const ExperimentConfig cfg = resolve(config_path, o);
            const auto art = planshape::harness::run_plan(cfg);
            std::printf("%s\n", art.metrics_line.c_str());
            std::printf("wrote %s/plan.json and transcript.jsonl\n", cfg.out_dir.c_str());
            return 0;
        }
        if (*train_cmd) {
            const ExperimentConfig cfg = resolve(config_path, o);
            planshape::guidance::GuidePlan plan;
            const bool have_plan = !plan_file.empty();
            if (have_plan) {
                plan = planshape::guidance::plan_from_json(
                    planshape::harness::read_file(plan_file));
            }
            const auto art =
                planshape::harness::run_train(cfg, have_plan ? &plan : nullptr);
            std::printf("wrote %zu curve files and summary.json under %s\n",
                        cfg.seeds.size(), cfg.out_dir.c_str());
            return art.failed_seeds == static_cast<int>(cfg.seeds.size()) ? 1 : 0;
        }
        if (*validate_cmd) {
            std::size_t prefix = 0;
            const auto result = planshape::harness::validate_plan_files(
                domain_path, problem_path, planfile_path, &prefix);
            std::printf("valid_prefix_len=%zu goal_reached=%d\n", result.valid_prefix_len,
                        result.goal_reached ? 1 : 0);
            if (result.failure) {
                std::printf("first failure at step %zu: unsatisfied %s\n",
                            result.failure->step, result.failure->unsatisfied.c_str());
            }
            return result.goal_reached ? 0 : 1;
        }
        if (*reproduce_cmd) {
            const ExperimentConfig cfg = resolve(config_path, o);
            const int failed = planshape::harness::run_reproduce(suite, cfg);
            if (failed < 0) {
                std::fprintf(stderr, "all seeds failed\n");
                return 1;
            }
            if (failed > 0) std::fprintf(stderr, "%d seed run(s) failed\n", failed);
            return 0;
        }
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    }
    return 0;
}
