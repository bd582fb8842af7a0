#include "synq/training.hpp"

#include <cmath>

#include "synq/evaluation.hpp"

namespace synq {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

enum Stream : std::uint64_t { kAgentStream = 1, kTrainEnvStream = 2, kEvalEnvStream = 3 };

}  // namespace

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream, std::uint64_t index) {
  return splitmix64(splitmix64(splitmix64(seed) ^ stream) ^ index);
}

std::pair<double, double> greedy_rollout_reward(const EnvConfig& env_config, const Agent& agent,
                                                std::size_t steps, std::uint64_t seed) {
  Environment env(env_config);
  GreedyPolicy policy(agent);
  Observation obs = env.reset(seed);
  std::vector<double> rewards;
  rewards.reserve(steps);
  for (std::size_t i = 0; i < steps; ++i) {
    StepResult r = env.step(policy.act(obs));
    rewards.push_back(r.reward);
    obs = std::move(r.observation);
  }
  double mean = 0.0;
  for (double r : rewards) mean += r;
  mean /= static_cast<double>(rewards.size());
  return {mean, population_stddev(rewards)};
}

TrainResult train_agent(const EnvConfig& env_config, const Td3Hyperparams& hp,
                        const TrainSchedule& schedule, std::size_t steps, std::uint64_t seed,
                        const std::function<void(const TrainLogRow&)>& on_log) {
  env_config.validate();
  hp.validate();
  if (schedule.eval_interval == 0 || schedule.eval_steps == 0)
    throw InvalidConfig("train.eval_interval and train.eval_steps must be >= 1");

  Rng rng(derive_seed(seed, kAgentStream));
  TrainResult result{Agent(env_config.window_len, env_config.a_max, hp, rng), {}, 0};
  Agent& agent = result.agent;
  ReplayBuffer buffer(hp.buffer_capacity, env_config.window_len);
  Environment env(env_config);
  const std::uint64_t eval_seed = derive_seed(seed, kEvalEnvStream);

  std::size_t episodes = 0;
  Observation obs = env.reset(derive_seed(seed, kTrainEnvStream, episodes));
  TrainDiagnostics last;
  std::uniform_real_distribution<double> uniform_action(-env_config.a_max, env_config.a_max);
  const std::size_t ready = std::max(hp.batch_size, hp.learn_start);

  for (std::size_t step = 1; step <= steps; ++step) {
    const double action = buffer.size() < hp.learn_start ? uniform_action(rng)
                                                         : agent.select_action(obs, true, rng);
    StepResult r = env.step(action);
    buffer.push(obs, r.info.action, r.reward, r.observation, r.done);
    if (r.done) {
      ++episodes;
      obs = env.reset(derive_seed(seed, kTrainEnvStream, episodes));
    } else {
      obs = std::move(r.observation);
    }
    if (buffer.size() >= ready)
      for (std::size_t u = 0; u < schedule.updates_per_step; ++u)
        last = agent.train_step(buffer, rng);

    if (step % schedule.eval_interval == 0) {
      const auto [mean, sd] =
          greedy_rollout_reward(env_config, agent, schedule.eval_steps, eval_seed);
      TrainLogRow row{step,           mean, sd, episodes, agent.update_count(),
                      last.critic1_loss, last.critic2_loss, last.mean_target};
      result.log.push_back(row);
      if (on_log) on_log(row);
    }
  }
  result.env_steps = steps;
  return result;
}

std::string train_log_csv_header() {
  return "step,eval_reward,eval_reward_std,episodes,updates,critic1_loss,critic2_loss,"
         "mean_target";
}

std::string train_log_to_csv(const std::vector<TrainLogRow>& rows) {
  std::string out = train_log_csv_header() + "\n";
  for (const auto& r : rows) {
    out += std::to_string(r.step) + ',' + format_double(r.eval_reward) + ',' +
           format_double(r.eval_reward_std) + ',' + std::to_string(r.episodes) + ',' +
           std::to_string(r.updates) + ',' + format_double(r.critic1_loss) + ',' +
           format_double(r.critic2_loss) + ',' + format_double(r.mean_target) + '\n';
  }
  return out;
}

}  // namespace synq
