#include "synq/td3.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "synq/environment.hpp"

namespace synq {

void Td3Hyperparams::validate() const {
  if (!(gamma >= 0.0 && gamma < 1.0)) throw InvalidConfig("td3.gamma must be in [0, 1)");
  if (!(tau > 0.0 && tau <= 1.0)) throw InvalidConfig("td3.tau must be in (0, 1]");
  if (!(policy_noise_sigma >= 0.0) || !(noise_clip >= 0.0) || !(exploration_sigma >= 0.0))
    throw InvalidConfig("td3 noise parameters must be >= 0");
  if (policy_delay == 0) throw InvalidConfig("td3.policy_delay must be >= 1");
  if (batch_size == 0) throw InvalidConfig("td3.batch_size must be >= 1");
  if (buffer_capacity < batch_size)
    throw InvalidConfig("td3.buffer_capacity must be >= td3.batch_size");
  if (!(actor_lr > 0.0) || !(critic_lr > 0.0))
    throw InvalidConfig("td3 learning rates must be > 0");
  if (hidden.empty()) throw InvalidConfig("td3.hidden needs at least one layer");
  for (auto h : hidden)
    if (h == 0) throw InvalidConfig("td3.hidden sizes must be positive");
}

Batch Batch::from_transitions(std::span<const Transition> transitions) {
  Batch b;
  const auto n = static_cast<Eigen::Index>(transitions.size());
  const auto k = transitions.empty()
                     ? Eigen::Index{0}
                     : static_cast<Eigen::Index>(transitions.front().observation.size());
  b.observations.resize(k, n);
  b.next_observations.resize(k, n);
  b.actions.resize(n);
  b.rewards.resize(n);
  b.dones.resize(n);
  for (Eigen::Index j = 0; j < n; ++j) {
    const auto& t = transitions[static_cast<std::size_t>(j)];
    b.observations.col(j) = Eigen::Map<const Eigen::VectorXd>(t.observation.data(), k);
    b.next_observations.col(j) =
        Eigen::Map<const Eigen::VectorXd>(t.next_observation.data(), k);
    b.actions(j) = t.action;
    b.rewards(j) = t.reward;
    b.dones(j) = t.done ? 1.0 : 0.0;
  }
  return b;
}

ReplayBuffer::ReplayBuffer(std::size_t capacity, std::size_t obs_dim)
    : capacity_(capacity), obs_dim_(obs_dim) {
  if (capacity == 0) throw InvalidConfig("replay buffer capacity must be >= 1");
  if (obs_dim == 0) throw InvalidConfig("observation dimension must be >= 1");
}

void ReplayBuffer::push(const Transition& t) {
  push(t.observation, t.action, t.reward, t.next_observation, t.done);
}

void ReplayBuffer::push(std::span<const double> obs, double action, double reward,
                        std::span<const double> next_obs, bool done) {
  if (obs.size() != obs_dim_ || next_obs.size() != obs_dim_)
    throw DimensionMismatch("transition observation has wrong length");
  if (size_ < capacity_ && cursor_ == size_) {
    obs_.resize((size_ + 1) * obs_dim_);
    next_obs_.resize((size_ + 1) * obs_dim_);
    actions_.push_back(0.0);
    rewards_.push_back(0.0);
    dones_.push_back(0);
  }
  std::copy(obs.begin(), obs.end(), obs_.begin() + static_cast<std::ptrdiff_t>(cursor_ * obs_dim_));
  std::copy(next_obs.begin(), next_obs.end(),
            next_obs_.begin() + static_cast<std::ptrdiff_t>(cursor_ * obs_dim_));
  actions_[cursor_] = action;
  rewards_[cursor_] = reward;
  dones_[cursor_] = done ? 1 : 0;
  cursor_ = (cursor_ + 1) % capacity_;
  size_ = std::min(size_ + 1, capacity_);
}

std::size_t ReplayBuffer::slot(std::size_t i) const {
  // Oldest entry sits at the cursor once the ring has wrapped.
  return size_ < capacity_ ? i : (cursor_ + i) % capacity_;
}

Transition ReplayBuffer::at(std::size_t i) const {
  if (i >= size_) throw std::out_of_range("replay buffer index out of range");
  const std::size_t s = slot(i);
  const auto begin = static_cast<std::ptrdiff_t>(s * obs_dim_);
  const auto end = begin + static_cast<std::ptrdiff_t>(obs_dim_);
  Transition t;
  t.observation.assign(obs_.begin() + begin, obs_.begin() + end);
  t.next_observation.assign(next_obs_.begin() + begin, next_obs_.begin() + end);
  t.action = actions_[s];
  t.reward = rewards_[s];
  t.done = dones_[s] != 0;
  return t;
}

void ReplayBuffer::fill_column(std::size_t s, std::size_t col, Batch& b) const {
  const auto k = static_cast<Eigen::Index>(obs_dim_);
  const auto c = static_cast<Eigen::Index>(col);
  b.observations.col(c) = Eigen::Map<const Eigen::VectorXd>(obs_.data() + s * obs_dim_, k);
  b.next_observations.col(c) =
      Eigen::Map<const Eigen::VectorXd>(next_obs_.data() + s * obs_dim_, k);
  b.actions(c) = actions_[s];
  b.rewards(c) = rewards_[s];
  b.dones(c) = dones_[s] ? 1.0 : 0.0;
}

Batch ReplayBuffer::sample(std::size_t n, Rng& rng) const {
  if (size_ == 0) throw BufferTooSmall("cannot sample from an empty replay buffer");
  Batch b;
  const auto k = static_cast<Eigen::Index>(obs_dim_);
  const auto bn = static_cast<Eigen::Index>(n);
  b.observations.resize(k, bn);
  b.next_observations.resize(k, bn);
  b.actions.resize(bn);
  b.rewards.resize(bn);
  b.dones.resize(bn);
  std::uniform_int_distribution<std::size_t> pick(0, size_ - 1);
  for (std::size_t j = 0; j < n; ++j) fill_column(pick(rng), j, b);
  return b;
}

double clipped_noise(double sigma, double clip, Rng& rng) {
  if (sigma == 0.0) return 0.0;
  const double e = std::normal_distribution<double>(0.0, sigma)(rng);
  return std::clamp(e, -clip, clip);
}

Eigen::VectorXd smoothed_target_actions(const ActionFn& target_actor,
                                        const Eigen::MatrixXd& next_obs,
                                        const Td3Hyperparams& hp, double a_max, Rng& rng) {
  Eigen::VectorXd a = target_actor(next_obs);
  for (Eigen::Index j = 0; j < a.size(); ++j) {
    const double eps = clipped_noise(hp.policy_noise_sigma, hp.noise_clip, rng);
    a(j) = std::clamp(a(j) + eps, -a_max, a_max);
  }
  return a;
}

Eigen::VectorXd clipped_double_q(const Batch& batch, const Eigen::VectorXd& q1_next,
                                 const Eigen::VectorXd& q2_next, const Td3Hyperparams& hp) {
  const Eigen::VectorXd bootstrap = q1_next.cwiseMin(q2_next);
  Eigen::VectorXd keep = Eigen::VectorXd::Ones(batch.rewards.size());
  if (hp.truncate_on_done) keep -= batch.dones;
  return batch.rewards + hp.gamma * keep.cwiseProduct(bootstrap);
}

Eigen::VectorXd compute_target(const Batch& batch, const ActionFn& target_actor,
                               const CriticFn& critic1_target,
                               const CriticFn& critic2_target, const Td3Hyperparams& hp,
                               double a_max, Rng& rng) {
  if (batch.size() == 0) throw std::invalid_argument("compute_target needs a non-empty batch");
  const Eigen::VectorXd a =
      smoothed_target_actions(target_actor, batch.next_observations, hp, a_max, rng);
  const Eigen::VectorXd q1 = critic1_target(batch.next_observations, a);
  const Eigen::VectorXd q2 = critic2_target(batch.next_observations, a);
  return clipped_double_q(batch, q1, q2, hp);
}

namespace {

Eigen::MatrixXd critic_input(const Eigen::MatrixXd& obs, const Eigen::VectorXd& actions) {
  Eigen::MatrixXd in(obs.rows() + 1, obs.cols());
  in.topRows(obs.rows()) = obs;
  in.row(obs.rows()) = actions.transpose();
  return in;
}

}  // namespace

Agent::Agent(std::size_t obs_dim, double a_max, Td3Hyperparams hp, Rng& rng)
    : obs_dim_(obs_dim), a_max_(a_max), hp_(std::move(hp)) {
  hp_.validate();
  if (!(a_max > 0.0)) throw InvalidConfig("a_max must be > 0");
  const auto actor_specs =
      mlp_specs(obs_dim, hp_.hidden, 1, Activation::Relu, Activation::Tanh);
  const auto critic_specs =
      mlp_specs(obs_dim + 1, hp_.hidden, 1, Activation::Relu, Activation::Identity);
  actor = Network(actor_specs, rng);
  critic1 = Network(critic_specs, rng);
  critic2 = Network(critic_specs, rng);
  actor_target = actor;
  critic1_target = critic1;
  critic2_target = critic2;
  actor_opt = OptimizerState::for_network(actor, hp_.actor_lr);
  critic1_opt = OptimizerState::for_network(critic1, hp_.critic_lr);
  critic2_opt = OptimizerState::for_network(critic2, hp_.critic_lr);
}

Eigen::VectorXd Agent::policy(const Eigen::MatrixXd& obs) const {
  return a_max_ * actor.forward(obs).row(0).transpose();
}

double Agent::select_action(std::span<const double> obs, bool explore, Rng& rng) const {
  if (obs.size() != obs_dim_) throw DimensionMismatch("observation has wrong length");
  Eigen::VectorXd in = Eigen::Map<const Eigen::VectorXd>(obs.data(), static_cast<Eigen::Index>(obs.size()));
  double a = a_max_ * actor.forward(in)(0);
  if (explore && hp_.exploration_sigma > 0.0)
    a += std::normal_distribution<double>(0.0, hp_.exploration_sigma * a_max_)(rng);
  return std::clamp(a, -a_max_, a_max_);
}

Eigen::VectorXd Agent::critic_values(const Network& critic, const Eigen::MatrixXd& obs,
                                     const Eigen::VectorXd& actions) {
  return critic.forward(critic_input(obs, actions)).row(0).transpose();
}

double Agent::smoothed_target_action(std::span<const double> next_obs, Rng& rng) const {
  Eigen::MatrixXd in = Eigen::Map<const Eigen::VectorXd>(next_obs.data(),
                                                         static_cast<Eigen::Index>(next_obs.size()));
  ActionFn target = [this](const Eigen::MatrixXd& o) -> Eigen::VectorXd {
    return a_max_ * actor_target.forward(o).row(0).transpose();
  };
  return smoothed_target_actions(target, in, hp_, a_max_, rng)(0);
}

Eigen::VectorXd Agent::compute_target(const Batch& batch, Rng& rng) const {
  ActionFn target = [this](const Eigen::MatrixXd& o) -> Eigen::VectorXd {
    return a_max_ * actor_target.forward(o).row(0).transpose();
  };
  CriticFn q1 = [this](const Eigen::MatrixXd& o, const Eigen::VectorXd& a) {
    return critic_values(critic1_target, o, a);
  };
  CriticFn q2 = [this](const Eigen::MatrixXd& o, const Eigen::VectorXd& a) {
    return critic_values(critic2_target, o, a);
  };
  return synq::compute_target(batch, target, q1, q2, hp_, a_max_, rng);
}

std::pair<double, double> Agent::update_critics(const Batch& batch,
                                                const Eigen::VectorXd& targets) {
  const Eigen::MatrixXd in = critic_input(batch.observations, batch.actions);
  const double n = static_cast<double>(batch.size());
  auto step = [&](Network& critic, OptimizerState& opt) {
    Tape tape;
    const Eigen::RowVectorXd q = critic.forward(in, tape).row(0);
    const Eigen::RowVectorXd residual = q - targets.transpose();
    const double loss = residual.squaredNorm() / n;
    const Eigen::MatrixXd upstream = (2.0 / n) * residual;
    optimizer_step(critic, critic.backward(tape, upstream), opt);
    return loss;
  };
  const double l1 = step(critic1, critic1_opt);
  const double l2 = step(critic2, critic2_opt);
  return {l1, l2};
}

double Agent::update_actor_and_targets(const Batch& batch) {
  const double n = static_cast<double>(batch.size());
  Tape actor_tape;
  const Eigen::RowVectorXd squashed = actor.forward(batch.observations, actor_tape).row(0);
  const Eigen::VectorXd actions = a_max_ * squashed.transpose();

  Tape critic_tape;
  const Eigen::RowVectorXd q =
      critic1.forward(critic_input(batch.observations, actions), critic_tape).row(0);
  const double loss = -q.mean();

  // d(-mean Q)/dQ = -1/n per sample; only the action row of the input
  // gradient is needed, and critic parameters stay fixed.
  const Eigen::MatrixXd dq = Eigen::MatrixXd::Constant(1, q.size(), -1.0 / n);
  const Gradients through_critic = critic1.backward(critic_tape, dq, false);
  Eigen::MatrixXd d_squashed =
      a_max_ * through_critic.input.row(static_cast<Eigen::Index>(obs_dim_));
  if (hp_.preact_penalty > 0.0) {
    // d/dy of lambda*mean(atanh(y)^2) = lambda*2*atanh(y)/(1-y^2)/n
    for (Eigen::Index j = 0; j < d_squashed.cols(); ++j) {
      const double y = std::clamp(squashed(j), -0.999999, 0.999999);
      d_squashed(0, j) += hp_.preact_penalty * 2.0 * std::atanh(y) / (1.0 - y * y) / n;
    }
  }
  optimizer_step(actor, actor.backward(actor_tape, d_squashed), actor_opt);

  soft_update(actor_target, actor, hp_.tau);
  soft_update(critic1_target, critic1, hp_.tau);
  soft_update(critic2_target, critic2, hp_.tau);
  return loss;
}

TrainDiagnostics Agent::train_step(const ReplayBuffer& buffer, Rng& rng) {
  const std::size_t needed = std::max(hp_.batch_size, hp_.learn_start);
  if (buffer.size() < needed)
    throw BufferTooSmall("replay buffer holds " + std::to_string(buffer.size()) +
                         " transitions, need " + std::to_string(needed));
  const Batch batch = buffer.sample(hp_.batch_size, rng);
  const Eigen::VectorXd y = compute_target(batch, rng);

  TrainDiagnostics d;
  d.mean_target = y.mean();
  const double alarm = 2.0 * kMaxReward / (1.0 - hp_.gamma);
  if (!std::isfinite(d.mean_target) || std::abs(d.mean_target) > alarm)
    throw NumericalDivergence("bootstrap targets left the reward-implied bound (mean " +
                              std::to_string(d.mean_target) + ")");
  std::tie(d.critic1_loss, d.critic2_loss) = update_critics(batch, y);
  ++updates_;
  d.actor_loss = std::numeric_limits<double>::quiet_NaN();
  if (updates_ % hp_.policy_delay == 0) {
    d.actor_loss = update_actor_and_targets(batch);
    d.actor_updated = true;
  }
  return d;
}

std::vector<NamedArray> Agent::export_state() const {
  std::vector<NamedArray> out;
  auto append = [&out](std::vector<NamedArray> more) {
    out.insert(out.end(), std::make_move_iterator(more.begin()),
               std::make_move_iterator(more.end()));
  };
  append(actor.export_parameters("actor"));
  append(actor_target.export_parameters("actor_target"));
  append(critic1.export_parameters("critic1"));
  append(critic2.export_parameters("critic2"));
  append(critic1_target.export_parameters("critic1_target"));
  append(critic2_target.export_parameters("critic2_target"));
  append(actor_opt.export_state("actor_opt"));
  append(critic1_opt.export_state("critic1_opt"));
  append(critic2_opt.export_state("critic2_opt"));
  out.push_back({"agent.update_count", {static_cast<double>(updates_)}});
  return out;
}

void Agent::import_state(const std::vector<NamedArray>& arrays) {
  actor.import_parameters(arrays, "actor");
  actor_target.import_parameters(arrays, "actor_target");
  critic1.import_parameters(arrays, "critic1");
  critic2.import_parameters(arrays, "critic2");
  critic1_target.import_parameters(arrays, "critic1_target");
  critic2_target.import_parameters(arrays, "critic2_target");
  actor_opt.import_state(arrays, "actor_opt");
  critic1_opt.import_state(arrays, "critic1_opt");
  critic2_opt.import_state(arrays, "critic2_opt");
  for (const auto& a : arrays) {
    if (a.name == "agent.update_count" && a.values.size() == 1) {
      updates_ = static_cast<std::uint64_t>(a.values[0]);
      return;
    }
  }
  throw DimensionMismatch("missing parameter array 'agent.update_count'");
}

}  // namespace synq
