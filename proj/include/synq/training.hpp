#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "synq/environment.hpp"
#include "synq/td3.hpp"

namespace synq {

struct TrainSchedule {
  std::size_t eval_interval = 1000;
  std::size_t eval_steps = 1000;
  std::size_t updates_per_step = 1;
};

struct TrainLogRow {
  std::size_t step = 0;
  double eval_reward = 0.0;
  double eval_reward_std = 0.0;
  std::size_t episodes = 0;
  std::uint64_t updates = 0;
  double critic1_loss = 0.0;
  double critic2_loss = 0.0;
  double mean_target = 0.0;
};

struct TrainResult {
  Agent agent;
  std::vector<TrainLogRow> log;
  std::size_t env_steps = 0;
};

// Independent sub-seeds derived from the run seed.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream, std::uint64_t index = 0);

/// Mean and std of rewards from a greedy rollout of `steps` steps on a fresh
/// environment reset with `seed`.
std::pair<double, double> greedy_rollout_reward(const EnvConfig& env_config, const Agent& agent,
                                                std::size_t steps, std::uint64_t seed);

/// Interleaved environment/agent loop for `steps` env steps. Actions before
/// learn_start are uniform random; afterwards the actor with Gaussian
/// exploration noise. Every eval_interval steps a greedy rollout on a
/// separately seeded evaluation environment is logged.
TrainResult train_agent(const EnvConfig& env_config, const Td3Hyperparams& hp,
                        const TrainSchedule& schedule, std::size_t steps, std::uint64_t seed,
                        const std::function<void(const TrainLogRow&)>& on_log = {});

std::string train_log_csv_header();
std::string train_log_to_csv(const std::vector<TrainLogRow>& rows);

}  // namespace synq
