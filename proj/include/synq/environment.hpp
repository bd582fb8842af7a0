#pragma once

#include <cstdint>
#include <deque>
#include <span>
#include <stdexcept>
#include <vector>

#include "synq/dynamics.hpp"

namespace synq {

// Replaces a signal by a sum of `n_parts` copies of itself, each scaled by
// `part_weight` and delayed by successive multiples of `onset_delay` steps.
struct TemporalRepConfig {
  std::size_t n_parts = 3;
  double part_weight = 0.33;
  std::size_t onset_delay = 1;

  void validate() const;
};

/// Transformed value at the newest index of `raw_history` (oldest first).
/// Delayed indices that fall before the start of the history read the
/// earliest sample.
double temporal_representation(std::span<const double> raw_history,
                               const TemporalRepConfig& cfg);

/// Stimulation reward: 100 / ((x - mean)^2 + 10) + 3 / (|a| + 10).
double compute_reward(double mean_field_now, double window_mean,
                      double action_mag);

inline constexpr double kMaxReward = 10.3;

class ActionOutOfBounds : public std::out_of_range {
 public:
  using std::out_of_range::out_of_range;
};

struct EnvConfig {
  EnsembleConfig ensemble;
  TemporalRepConfig temporal;
  std::size_t window_len = 250;
  double a_max = 1.0;
  std::size_t episode_len = 1000;
  std::size_t warmup_steps = 1000;
  bool clamp_actions = true;

  void validate() const;
};

/// Last K transformed mean-field samples, oldest first.
using Observation = std::vector<double>;

struct StepInfo {
  double mean_field = 0.0;
  double action = 0.0;
  double time = 0.0;
};

struct StepResult {
  Observation observation;
  double reward = 0.0;
  bool done = false;
  StepInfo info;
};

class Environment {
 public:
  explicit Environment(EnvConfig cfg);

  /// Re-initialise the ensemble from `seed`, run the zero-action warm-up and
  /// return the initial observation.
  Observation reset(std::uint64_t seed);

  StepResult step(double action);

  Observation observation() const;
  const EnvConfig& config() const { return cfg_; }
  const EnsembleState& ensemble() const { return state_; }
  double current_mean_field() const { return raw_.back(); }
  /// Mean of the raw mean-field samples currently in the window.
  double window_mean() const;
  std::size_t episode_step() const { return episode_step_; }

 private:
  void push_sample(double raw);

  EnvConfig cfg_;
  EnsembleState state_;
  // Raw samples kept long enough to cover both the observation window and
  // the temporal-representation delays.
  std::deque<double> raw_;
  std::deque<double> transformed_;
  std::size_t episode_step_ = 0;
  std::vector<double> scratch_;
};

}  // namespace synq
