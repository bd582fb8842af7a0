#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>

#include "synq/checkpoint.hpp"
#include "synq/config.hpp"
#include "synq/evaluation.hpp"

namespace synq {

// Process exit codes of the CLI.
enum ExitCode : int {
  kExitOk = 0,
  kExitUsage = 1,
  kExitConfig = 2,
  kExitDivergence = 3,
  kExitCheckpoint = 4,
};

/// Raised when a checkpoint does not fit the configured regime or networks.
class CheckpointMismatch : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class PolicyKind { Agent, Zero, Random };
PolicyKind parse_policy_kind(const std::string& name);

inline constexpr const char* kResolvedConfigName = "resolved_config.txt";

/// Writes the resolved config next to `output_path`.
void echo_config(const RunConfig& config, const std::string& output_path);

/// Zero-action rollout of `steps` env steps after reset; writes the trace CSV.
std::vector<TraceRecord> cmd_simulate(const RunConfig& config, std::size_t steps,
                                      const std::string& out_path);

struct TrainOutcome {
  std::uint64_t gradient_updates = 0;
  std::vector<TrainLogRow> log;
};

/// Trains for `steps` env steps and writes the checkpoint and training log.
TrainOutcome cmd_train(const RunConfig& config, std::size_t steps,
                       const std::string& checkpoint_path, const std::string& log_path);

Checkpoint make_checkpoint(const RunConfig& config, const Agent& agent,
                           std::uint64_t training_steps);
/// Rebuilds the agent described by `config` and loads the checkpoint into it.
Agent restore_agent(const RunConfig& config, const Checkpoint& ckpt);

struct EvaluateOutputs {
  std::string report_path;
  std::string trace_path;
  std::optional<std::string> plot_path;
};

/// Runs the two-phase protocol with the chosen policy. The checkpoint is
/// only read for PolicyKind::Agent. Writes the key-value report, a one-row
/// report CSV (report path with a .csv extension), the trace and the plot.
EvaluationRun cmd_evaluate(const RunConfig& config, PolicyKind policy,
                           const std::string& checkpoint_path, const EvaluateOutputs& outputs);

std::string report_csv_path(const std::string& report_path);

void write_text_file(const std::string& path, const std::string& content);

}  // namespace synq
