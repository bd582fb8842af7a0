#include "synq/environment.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace synq {

void TemporalRepConfig::validate() const {
  if (n_parts == 0) throw InvalidConfig("temporal.n_parts must be >= 1");
  if (!(part_weight > 0.0)) throw InvalidConfig("temporal.part_weight must be > 0");
  if (onset_delay == 0) throw InvalidConfig("temporal.onset_delay must be >= 1");
}

double temporal_representation(std::span<const double> raw_history,
                               const TemporalRepConfig& cfg) {
  if (raw_history.empty()) return 0.0;
  const std::size_t newest = raw_history.size() - 1;
  double acc = 0.0;
  for (std::size_t n = 0; n < cfg.n_parts; ++n) {
    const std::size_t lag = n * cfg.onset_delay;
    const double sample = lag <= newest ? raw_history[newest - lag] : raw_history.front();
    acc += cfg.part_weight * sample;
  }
  return acc;
}

double compute_reward(double mean_field_now, double window_mean,
                      double action_mag) {
  const double diff = mean_field_now - window_mean;
  return 100.0 / (diff * diff + 10.0) + 3.0 / (action_mag + 10.0);
}

void EnvConfig::validate() const {
  ensemble.validate();
  temporal.validate();
  if (window_len == 0) throw InvalidConfig("env.window_len must be >= 1");
  if (!(a_max > 0.0)) throw InvalidConfig("env.a_max must be > 0");
  if (episode_len == 0) throw InvalidConfig("env.episode_len must be >= 1");
  if (window_len < temporal.n_parts * temporal.onset_delay)
    throw InvalidConfig("env.window_len must be >= n_parts * onset_delay");
}

Environment::Environment(EnvConfig cfg) : cfg_(std::move(cfg)) {
  cfg_.validate();
}

void Environment::push_sample(double raw) {
  const std::size_t history =
      cfg_.window_len + (cfg_.temporal.n_parts - 1) * cfg_.temporal.onset_delay;
  raw_.push_back(raw);
  if (raw_.size() > history) raw_.pop_front();

  // history >= lags, so a short buffer only happens right after reset and its
  // front is the earliest sample.
  const std::size_t lags = (cfg_.temporal.n_parts - 1) * cfg_.temporal.onset_delay + 1;
  scratch_.assign(raw_.end() - static_cast<std::ptrdiff_t>(std::min(lags, raw_.size())),
                  raw_.end());
  transformed_.push_back(temporal_representation(scratch_, cfg_.temporal));
  if (transformed_.size() > cfg_.window_len) transformed_.pop_front();
}

Observation Environment::reset(std::uint64_t seed) {
  Rng rng(seed);
  state_ = init_ensemble(cfg_.ensemble, rng);
  raw_.clear();
  transformed_.clear();
  push_sample(mean_field(state_));
  for (std::size_t i = 0; i < cfg_.warmup_steps; ++i) {
    step_ensemble_inplace(state_, 0.0, cfg_.ensemble);
    push_sample(mean_field(state_));
  }
  episode_step_ = 0;
  return observation();
}

Observation Environment::observation() const {
  Observation obs(cfg_.window_len);
  const std::size_t have = transformed_.size();
  const std::size_t pad = cfg_.window_len - have;
  std::fill(obs.begin(), obs.begin() + static_cast<std::ptrdiff_t>(pad),
            transformed_.front());
  std::copy(transformed_.begin(), transformed_.end(),
            obs.begin() + static_cast<std::ptrdiff_t>(pad));
  return obs;
}

double Environment::window_mean() const {
  // Raw samples aligned with the observation window, left-padded the same way.
  const std::size_t k = cfg_.window_len;
  const std::size_t have = std::min(raw_.size(), k);
  double sum = 0.0;
  for (std::size_t i = raw_.size() - have; i < raw_.size(); ++i) sum += raw_[i];
  sum += static_cast<double>(k - have) * raw_[raw_.size() - have];
  return sum / static_cast<double>(k);
}

StepResult Environment::step(double action) {
  if (raw_.empty()) throw std::logic_error("Environment::step called before reset");
  if (!std::isfinite(action)) throw ActionOutOfBounds("action is not finite");
  if (std::abs(action) > cfg_.a_max) {
    if (!cfg_.clamp_actions)
      throw ActionOutOfBounds("|action| = " + std::to_string(std::abs(action)) +
                              " exceeds a_max");
    action = std::clamp(action, -cfg_.a_max, cfg_.a_max);
  }
  step_ensemble_inplace(state_, action, cfg_.ensemble);
  const double field = mean_field(state_);
  push_sample(field);
  ++episode_step_;

  StepResult r;
  r.observation = observation();
  r.reward = compute_reward(field, window_mean(), std::abs(action));
  r.done = episode_step_ % cfg_.episode_len == 0;
  r.info = {field, action, state_.t};
  return r;
}

}  // namespace synq
