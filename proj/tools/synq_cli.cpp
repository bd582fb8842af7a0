// Command-line entry point: simulate, train and evaluate.

#include <CLI11.hpp>

#include <iostream>
#include <optional>

#include "synq/harness.hpp"

namespace {

struct CommonOptions {
  std::string config_path;
  std::optional<std::uint64_t> seed;
};

synq::RunConfig resolve(const CommonOptions& opts) {
  synq::RunConfig cfg = opts.config_path.empty() ? synq::RunConfig::defaults()
                                                 : synq::load_config(opts.config_path);
  if (opts.seed) cfg.seed = *opts.seed;
  return cfg;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Mean-field neuronal ensemble simulator and TD3 synchrony suppression"};
  app.require_subcommand(1);

  CommonOptions common;
  std::optional<std::size_t> steps;
  std::string out, checkpoint, log, trace, policy = "agent";
  std::optional<std::size_t> pre_steps, post_steps, transient;
  bool plot = false;

  auto add_common = [&](CLI::App* cmd) {
    cmd->add_option("--config", common.config_path, "Config file (key = value)");
    cmd->add_option("--seed", common.seed, "Run seed (overrides run.seed)");
  };

  auto* simulate = app.add_subcommand("simulate", "Zero-action rollout written as a trace CSV");
  add_common(simulate);
  simulate->add_option("--steps", steps, "Env steps")->required();
  simulate->add_option("--out", out, "Trace CSV path (default output.trace)");

  auto* train = app.add_subcommand("train", "Train a TD3 agent and save a checkpoint");
  add_common(train);
  train->add_option("--steps", steps, "Env steps")->required();
  train->add_option("--checkpoint", checkpoint, "Checkpoint path (default output.checkpoint)");
  train->add_option("--log", log, "Training log CSV (default output.log)");

  auto* evaluate = app.add_subcommand("evaluate", "Two-phase suppression evaluation");
  add_common(evaluate);
  evaluate->add_option("--checkpoint", checkpoint, "Checkpoint to load (policy agent)");
  evaluate->add_option("--policy", policy, "agent, zero or random")
      ->check(CLI::IsMember({"agent", "zero", "random"}));
  evaluate->add_option("--pre-steps", pre_steps, "Uncontrolled steps");
  evaluate->add_option("--post-steps", post_steps, "Controlled steps");
  evaluate->add_option("--transient", transient, "Steps ignored after control onset");
  evaluate->add_option("--out", out, "Report path (default output.report)");
  evaluate->add_option("--trace", trace, "Trace CSV path (default output.trace)");
  evaluate->add_flag("--plot", plot, "Also write an SVG chart (output.plot)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? synq::kExitOk : synq::kExitUsage;
  }

  try {
    synq::RunConfig cfg = resolve(common);
    if (*simulate) {
      cmd_simulate(cfg, *steps, out.empty() ? cfg.output.trace : out);
    } else if (*train) {
      const auto result = cmd_train(cfg, *steps, checkpoint.empty() ? cfg.output.checkpoint : checkpoint,
                                    log.empty() ? cfg.output.log : log);
      std::cout << "gradient_updates = " << result.gradient_updates << "\n";
      if (!result.log.empty())
        std::cout << "final_eval_reward = " << synq::format_double(result.log.back().eval_reward)
                  << "\n";
    } else if (*evaluate) {
      if (pre_steps) cfg.eval.pre_steps = *pre_steps;
      if (post_steps) cfg.eval.post_steps = *post_steps;
      if (transient) cfg.eval.transient = *transient;
      // Shrink the measurement window to fit shortened phases.
      cfg.eval.measure_window = std::min(
          cfg.eval.measure_window,
          std::min(cfg.eval.pre_steps, cfg.eval.post_steps > cfg.eval.transient
                                           ? cfg.eval.post_steps - cfg.eval.transient
                                           : std::size_t{0}));
      const auto kind = synq::parse_policy_kind(policy);
      if (kind == synq::PolicyKind::Agent && checkpoint.empty()) checkpoint = cfg.output.checkpoint;
      synq::EvaluateOutputs outputs{out.empty() ? cfg.output.report : out,
                                    trace.empty() ? cfg.output.trace : trace,
                                    plot ? std::optional<std::string>(cfg.output.plot) : std::nullopt};
      const auto run = cmd_evaluate(cfg, kind, checkpoint, outputs);
      std::cout << synq::report_to_text(run.report);
    }
  } catch (const synq::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return synq::kExitConfig;
  } catch (const synq::InvalidConfig& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return synq::kExitConfig;
  } catch (const synq::NumericalDivergence& e) {
    std::cerr << "numerical divergence: " << e.what() << "\n";
    return synq::kExitDivergence;
  } catch (const synq::CheckpointMismatch& e) {
    std::cerr << "checkpoint mismatch: " << e.what() << "\n";
    return synq::kExitCheckpoint;
  } catch (const synq::CheckpointError& e) {
    std::cerr << "checkpoint error: " << e.what() << "\n";
    return synq::kExitCheckpoint;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return synq::kExitUsage;
  }
  return synq::kExitOk;
}
