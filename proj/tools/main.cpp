// emot: train, evaluate and analyse UAV edge-computing policies.
//
// Exit status: 0 success, 2 configuration or usage error, 1 runtime failure.

#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "emot/baselines.hpp"
#include "emot/config.hpp"
#include "emot/evo.hpp"
#include "emot/experiment.hpp"
#include "emot/scheduler.hpp"

namespace fs = std::filesystem;

namespace {

struct Overrides {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out;
  std::optional<int> workers;
  std::optional<std::string> scheduler;
  std::optional<std::string> update_rule;
};

void add_common(CLI::App* cmd, Overrides& o) {
  cmd->add_option("--config", o.config, "experiment config (JSON)")->required();
  cmd->add_option("--seed", o.seed, "master seed, overrides the config");
  cmd->add_option("--out", o.out, "output directory");
  cmd->add_option("--workers", o.workers, "parallel training workers")->check(CLI::PositiveNumber);
  cmd->add_option("--scheduler", o.scheduler, "queue scheduler: sa, fcfs, sjf, ps");
}

emot::config::ExperimentConfig resolve(const Overrides& o) {
  emot::config::ExperimentConfig cfg = emot::config::load(o.config);
  try {
    if (o.seed) cfg.seed = *o.seed;
    if (o.workers) cfg.run.evo.workers = *o.workers;
    if (o.scheduler) cfg.run.env.scheduler_kind = emot::sched::parse_scheduler_kind(*o.scheduler);
    if (o.update_rule) cfg.run.rule = emot::evo::parse_update_rule(*o.update_rule);
  } catch (const std::invalid_argument& e) {
    throw emot::config::ConfigError(e.what());
  }
  return cfg;
}

// --out wins; otherwise the config's output_dir, placed under
// $EMOT_OUTPUT_ROOT when that is set and the path is relative.
fs::path output_dir(const Overrides& o, const emot::config::ExperimentConfig& cfg) {
  if (o.out) return *o.out;
  fs::path p = cfg.output_dir;
  if (const char* root = std::getenv("EMOT_OUTPUT_ROOT"); root && *root && p.is_relative()) p = fs::path(root) / p;
  return p;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"UAV edge-computing multi-objective policy training"};
  app.require_subcommand(1);

  Overrides train_o;
  CLI::App* train = app.add_subcommand("train", "run evolutionary multi-objective training");
  add_common(train, train_o);
  train->add_option("--update-rule", train_o.update_rule, "policy update: ppo or tdl");

  Overrides eval_o;
  std::optional<std::string> checkpoint;
  std::optional<std::string> eval_baseline;
  std::optional<int> episodes;
  CLI::App* evaluate = app.add_subcommand("evaluate", "evaluate a checkpoint or a baseline with mean actions");
  add_common(evaluate, eval_o);
  evaluate->add_option("--checkpoint", checkpoint, "policy checkpoint (.bin)");
  evaluate->add_option("--baseline", eval_baseline, "baseline kind instead of a checkpoint");
  evaluate->add_option("--episodes", episodes, "number of evaluation seeds")->check(CLI::PositiveNumber);

  Overrides base_o;
  std::optional<std::string> base_kind;
  std::optional<int> base_episodes;
  CLI::App* baseline = app.add_subcommand("baseline", "evaluate a non-learning trajectory baseline");
  add_common(baseline, base_o);
  baseline->add_option("--baseline", base_kind, "random_walk, circular, spiral or hover (default: config)");
  baseline->add_option("--episodes", base_episodes, "number of evaluation seeds")->check(CLI::PositiveNumber);

  std::string run_dir;
  CLI::App* pareto = app.add_subcommand("pareto", "cluster and summarise the archive of a training run");
  pareto->add_option("--run", run_dir, "training output directory")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (*train) {
      const auto cfg = resolve(train_o);
      const fs::path out = output_dir(train_o, cfg);
      emot::experiment::cmd_train(cfg, out, &std::cerr);
      std::cout << out.string() << '\n';
    } else if (*evaluate || *baseline) {
      const bool is_eval = evaluate->parsed();
      const Overrides& o = is_eval ? eval_o : base_o;
      const auto cfg = resolve(o);
      emot::experiment::EvalRequest req;
      if (is_eval) {
        if (checkpoint.has_value() == eval_baseline.has_value()) {
          std::cerr << "evaluate: pass exactly one of --checkpoint or --baseline\n";
          return 2;
        }
        if (checkpoint) req.checkpoint = fs::path(*checkpoint);
        if (eval_baseline) req.baseline = emot::baselines::parse_baseline_kind(*eval_baseline);
      } else {
        req.baseline = base_kind ? emot::baselines::parse_baseline_kind(*base_kind) : cfg.baseline.kind;
      }
      const std::optional<int> n = is_eval ? episodes : base_episodes;
      if (n) req.seeds = emot::evo::evaluation_seeds(cfg.seed, *n);
      const fs::path out = output_dir(o, cfg);
      for (const auto& row : emot::experiment::cmd_evaluate(cfg, req, out)) {
        std::cout << row.policy << " seed=" << row.seed << " f1_s=" << emot::experiment::format_double(row.f1)
                  << " f2_J=" << emot::experiment::format_double(row.f2) << '\n';
      }
    } else if (*pareto) {
      emot::experiment::cmd_pareto(run_dir);
      std::cout << (fs::path(run_dir) / "front.json").string() << '\n';
    }
  } catch (const emot::config::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 2;
  } catch (const std::invalid_argument& e) {
    std::cerr << "usage error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
