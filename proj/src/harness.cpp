#include "synq/harness.hpp"

#include <filesystem>
#include <fstream>

#include "synq/plot.hpp"
#include "synq/training.hpp"

namespace synq {

namespace fs = std::filesystem;

namespace {

enum : std::uint64_t { kRandomPolicyStream = 4 };

}  // namespace

PolicyKind parse_policy_kind(const std::string& name) {
  if (name == "agent") return PolicyKind::Agent;
  if (name == "zero") return PolicyKind::Zero;
  if (name == "random") return PolicyKind::Random;
  throw std::invalid_argument("unknown policy '" + name + "' (expected agent, zero or random)");
}

void write_text_file(const std::string& path, const std::string& content) {
  const fs::path p(path);
  if (p.has_parent_path()) fs::create_directories(p.parent_path());
  std::ofstream out(p, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write '" + path + "'");
  out << content;
  if (!out) throw std::runtime_error("failed writing '" + path + "'");
}

void echo_config(const RunConfig& config, const std::string& output_path) {
  const fs::path dir = fs::path(output_path).parent_path();
  write_text_file((dir / kResolvedConfigName).string(), config_to_text(config));
}

std::vector<TraceRecord> cmd_simulate(const RunConfig& config, std::size_t steps,
                                      const std::string& out_path) {
  config.validate();
  Environment env(config.env);
  env.reset(config.seed);
  std::vector<TraceRecord> trace;
  trace.reserve(steps);
  for (std::size_t i = 0; i < steps; ++i) {
    const StepResult r = env.step(0.0);
    trace.push_back({i, r.info.time, r.info.mean_field, r.info.action, r.reward});
  }
  write_text_file(out_path, trace_to_csv(trace));
  echo_config(config, out_path);
  return trace;
}

Checkpoint make_checkpoint(const RunConfig& config, const Agent& agent,
                           std::uint64_t training_steps) {
  Checkpoint c;
  c.regime = config.env.ensemble.regime;
  c.config_text = config_to_text(config);
  c.seed = config.seed;
  c.training_steps = training_steps;
  c.arrays = agent.export_state();
  return c;
}

Agent restore_agent(const RunConfig& config, const Checkpoint& ckpt) {
  if (ckpt.regime != config.env.ensemble.regime)
    throw CheckpointMismatch("checkpoint was trained on the " +
                             std::string(to_string(ckpt.regime)) +
                             " regime but the config selects " +
                             std::string(to_string(config.env.ensemble.regime)));
  Rng scratch(0);
  Agent agent(config.env.window_len, config.env.a_max, config.td3, scratch);
  try {
    agent.import_state(ckpt.arrays);
  } catch (const DimensionMismatch& e) {
    throw CheckpointMismatch(std::string("checkpoint does not match the configured networks: ") +
                             e.what());
  }
  return agent;
}

TrainOutcome cmd_train(const RunConfig& config, std::size_t steps,
                       const std::string& checkpoint_path, const std::string& log_path) {
  config.validate();
  TrainResult result = train_agent(config.env, config.td3, config.train, steps, config.seed);
  save_checkpoint(checkpoint_path, make_checkpoint(config, result.agent, steps));
  write_text_file(log_path, train_log_to_csv(result.log));
  echo_config(config, checkpoint_path);
  echo_config(config, log_path);
  return {result.agent.update_count(), std::move(result.log)};
}

std::string report_csv_path(const std::string& report_path) {
  fs::path p(report_path);
  p.replace_extension(".csv");
  if (p.string() == report_path) p += ".csv";
  return p.string();
}

EvaluationRun cmd_evaluate(const RunConfig& config, PolicyKind policy,
                           const std::string& checkpoint_path, const EvaluateOutputs& outputs) {
  config.validate();
  EvaluationRun run;
  switch (policy) {
    case PolicyKind::Agent: {
      const Agent agent = restore_agent(config, load_checkpoint(checkpoint_path));
      GreedyPolicy p(agent);
      run = run_evaluation(config.env, p, config.eval, config.seed);
      break;
    }
    case PolicyKind::Zero: {
      ZeroPolicy p;
      run = run_evaluation(config.env, p, config.eval, config.seed);
      break;
    }
    case PolicyKind::Random: {
      RandomPolicy p(config.env.a_max, derive_seed(config.seed, kRandomPolicyStream));
      run = run_evaluation(config.env, p, config.eval, config.seed);
      break;
    }
  }
  write_text_file(outputs.report_path, report_to_text(run.report));
  write_text_file(report_csv_path(outputs.report_path),
                  report_csv_header() + "\n" + report_to_csv_row(run.report) + "\n");
  write_text_file(outputs.trace_path, trace_to_csv(run.trace));
  if (outputs.plot_path) write_text_file(*outputs.plot_path, render_trace_svg(run.trace));
  echo_config(config, outputs.report_path);
  echo_config(config, outputs.trace_path);
  return run;
}

}  // namespace synq
