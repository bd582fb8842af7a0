#pragma once

#include <Eigen/Core>

#include <functional>
#include <span>
#include <stdexcept>
#include <vector>

#include "synq/approximator.hpp"

namespace synq {

struct Td3Hyperparams {
  double gamma = 0.95;
  double tau = 0.005;
  // Absolute values; the config layer resolves them as fractions of a_max.
  double policy_noise_sigma = 0.2;
  double noise_clip = 0.5;
  // Relative to a_max.
  double exploration_sigma = 0.1;
  std::size_t policy_delay = 2;
  std::size_t batch_size = 64;
  std::size_t buffer_capacity = 200000;
  std::size_t learn_start = 1000;
  double actor_lr = 1e-4;
  double critic_lr = 3e-4;
  std::vector<std::size_t> hidden = {64, 64};
  // Time-limit episode ends do not cut the bootstrap unless this is set.
  bool truncate_on_done = false;
  // Weight of a squared pre-tanh activation penalty on the actor output.
  double preact_penalty = 1.0;

  void validate() const;
};

struct Transition {
  std::vector<double> observation;
  double action = 0.0;
  double reward = 0.0;
  std::vector<double> next_observation;
  bool done = false;

  bool operator==(const Transition&) const = default;
};

/// Column-per-sample view of a set of transitions.
struct Batch {
  Eigen::MatrixXd observations;       // K x B
  Eigen::VectorXd actions;            // B
  Eigen::VectorXd rewards;            // B
  Eigen::MatrixXd next_observations;  // K x B
  Eigen::VectorXd dones;              // B, 1.0 for done

  std::size_t size() const { return static_cast<std::size_t>(rewards.size()); }
  static Batch from_transitions(std::span<const Transition> transitions);
};

class BufferTooSmall : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Fixed-capacity FIFO ring of transitions. Storage grows on demand up to the
/// capacity, so a large capacity costs nothing until it is used.
class ReplayBuffer {
 public:
  ReplayBuffer(std::size_t capacity, std::size_t obs_dim);

  void push(const Transition& t);
  void push(std::span<const double> obs, double action, double reward,
            std::span<const double> next_obs, bool done);

  std::size_t size() const { return size_; }
  std::size_t capacity() const { return capacity_; }
  std::size_t obs_dim() const { return obs_dim_; }

  /// i-th stored transition, 0 = oldest.
  Transition at(std::size_t i) const;

  /// Uniform sample with replacement.
  Batch sample(std::size_t n, Rng& rng) const;

 private:
  std::size_t slot(std::size_t i) const;
  void fill_column(std::size_t slot, std::size_t col, Batch& b) const;

  std::size_t capacity_;
  std::size_t obs_dim_;
  std::size_t cursor_ = 0;
  std::size_t size_ = 0;
  std::vector<double> obs_, next_obs_;
  std::vector<double> actions_, rewards_;
  std::vector<unsigned char> dones_;
};

// Evaluators used to form bootstrap targets. The agent binds them to its target
// networks; tests can plug in arbitrary stubs.
using ActionFn = std::function<Eigen::VectorXd(const Eigen::MatrixXd& obs)>;
using CriticFn =
    std::function<Eigen::VectorXd(const Eigen::MatrixXd& obs, const Eigen::VectorXd& actions)>;

/// Clipped Gaussian noise: N(0, sigma) clamped to [-clip, clip].
double clipped_noise(double sigma, double clip, Rng& rng);

/// Target action for each column of `next_obs`: target policy plus clipped
/// smoothing noise, clamped to [-a_max, a_max]. One noise draw per column.
Eigen::VectorXd smoothed_target_actions(const ActionFn& target_actor,
                                        const Eigen::MatrixXd& next_obs,
                                        const Td3Hyperparams& hp, double a_max, Rng& rng);

/// y = r + (1 - d) * gamma * min(q1, q2), where d is the done flag when
/// truncation is enabled and 0 otherwise.
Eigen::VectorXd clipped_double_q(const Batch& batch, const Eigen::VectorXd& q1_next,
                                 const Eigen::VectorXd& q2_next, const Td3Hyperparams& hp);

Eigen::VectorXd compute_target(const Batch& batch, const ActionFn& target_actor,
                               const CriticFn& critic1_target,
                               const CriticFn& critic2_target, const Td3Hyperparams& hp,
                               double a_max, Rng& rng);

struct TrainDiagnostics {
  double critic1_loss = 0.0;
  double critic2_loss = 0.0;
  double actor_loss = 0.0;  // NaN when the actor was not updated
  double mean_target = 0.0;
  bool actor_updated = false;
};

class Agent {
 public:
  Agent(std::size_t obs_dim, double a_max, Td3Hyperparams hp, Rng& rng);

  double select_action(std::span<const double> obs, bool explore, Rng& rng) const;
  /// Greedy actions for a batch of observations (columns).
  Eigen::VectorXd policy(const Eigen::MatrixXd& obs) const;

  double smoothed_target_action(std::span<const double> next_obs, Rng& rng) const;
  Eigen::VectorXd compute_target(const Batch& batch, Rng& rng) const;

  /// One Adam step on each critic towards `targets`. Returns pre-update MSEs.
  std::pair<double, double> update_critics(const Batch& batch, const Eigen::VectorXd& targets);

  /// Gradient ascent step for the actor on mean Q1(s, pi(s)) followed by
  /// soft updates of the three target networks. Returns the pre-update
  /// actor loss, i.e. -mean Q1.
  double update_actor_and_targets(const Batch& batch);

  /// Sample, update critics and, every policy_delay calls, the actor.
  TrainDiagnostics train_step(const ReplayBuffer& buffer, Rng& rng);

  /// Q value of `critic` for (obs, action) columns.
  static Eigen::VectorXd critic_values(const Network& critic, const Eigen::MatrixXd& obs,
                                       const Eigen::VectorXd& actions);

  std::vector<NamedArray> export_state() const;
  void import_state(const std::vector<NamedArray>& arrays);

  const Td3Hyperparams& hyperparams() const { return hp_; }
  double a_max() const { return a_max_; }
  std::size_t obs_dim() const { return obs_dim_; }
  std::uint64_t update_count() const { return updates_; }

  Network actor, actor_target;
  Network critic1, critic2, critic1_target, critic2_target;
  OptimizerState actor_opt, critic1_opt, critic2_opt;

 private:
  std::size_t obs_dim_;
  double a_max_;
  Td3Hyperparams hp_;
  std::uint64_t updates_ = 0;
};

}  // namespace synq
