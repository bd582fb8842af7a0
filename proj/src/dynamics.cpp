#include "synq/dynamics.hpp"

#include <cmath>
#include <numeric>

namespace synq {

std::string_view to_string(RegimeKind regime) {
  switch (regime) {
    case RegimeKind::Regular:
      return "regular";
    case RegimeKind::Chaotic:
      return "chaotic";
    case RegimeKind::Bursting:
      return "bursting";
  }
  return "unknown";
}

RegimeKind parse_regime(std::string_view name) {
  if (name == "regular") return RegimeKind::Regular;
  if (name == "chaotic") return RegimeKind::Chaotic;
  if (name == "bursting") return RegimeKind::Bursting;
  throw InvalidConfig("unknown regime '" + std::string(name) + "'");
}

std::size_t state_dim(RegimeKind regime) {
  return regime == RegimeKind::Bursting ? 3 : 2;
}

double default_coupling(RegimeKind regime) {
  switch (regime) {
    case RegimeKind::Regular:
      return 0.03;
    case RegimeKind::Chaotic:
      return 0.02;
    case RegimeKind::Bursting:
      return 0.2;
  }
  return 0.0;
}

// The alpha centres fix the unforced time-averaged mean field: for a bounded
// BvdP orbit, ydot = x + alpha averages to zero, so <x_i> = -alpha_i. The HR
// current band puts each neuron on a spiking orbit with <x> close to -0.277.
Heterogeneity Heterogeneity::defaults_for(RegimeKind regime) {
  switch (regime) {
    case RegimeKind::Regular:
      return {0.2268, 0.2868, 0.6, 0.6};
    case RegimeKind::Chaotic:
      return {0.2136, 0.3136, 0.55, 0.65};
    case RegimeKind::Bursting:
      return {0.0, 0.0, 5.9, 6.1};
  }
  return {};
}

EnsembleConfig EnsembleConfig::defaults_for(RegimeKind regime) {
  EnsembleConfig c;
  c.regime = regime;
  c.coupling = default_coupling(regime);
  c.heterogeneity = Heterogeneity::defaults_for(regime);
  return c;
}

void EnsembleConfig::validate() const {
  if (n_neurons == 0) throw InvalidConfig("n_neurons must be >= 1");
  if (!(dt > 0.0) || !std::isfinite(dt)) throw InvalidConfig("dt must be > 0");
  if (substeps_per_env_step == 0)
    throw InvalidConfig("substeps_per_env_step must be >= 1");
  if (!(coupling >= 0.0) || !std::isfinite(coupling))
    throw InvalidConfig("coupling must be >= 0");
  const auto& h = heterogeneity;
  if (!(h.alpha_min <= h.alpha_max) || !(h.current_min <= h.current_max))
    throw InvalidConfig("heterogeneity ranges must satisfy min <= max");
}

namespace {

double draw(Rng& rng, double lo, double hi) {
  if (lo == hi) return lo;
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}

}  // namespace

EnsembleState init_ensemble(const EnsembleConfig& config, Rng& rng) {
  config.validate();
  EnsembleState s;
  s.regime = config.regime;
  s.dim = state_dim(config.regime);
  s.states.resize(config.n_neurons * s.dim);
  s.params.resize(config.n_neurons);
  const auto& h = config.heterogeneity;
  // Draw order per neuron: state variables, then current, then alpha.
  for (std::size_t i = 0; i < config.n_neurons; ++i) {
    auto row = s.row(i);
    row[0] = draw(rng, -1.0, 1.0);
    row[1] = draw(rng, -1.0, 1.0);
    if (s.dim == 3) row[2] = draw(rng, 2.5, 3.5);
    s.params[i].current = draw(rng, h.current_min, h.current_max);
    if (config.regime != RegimeKind::Bursting)
      s.params[i].alpha = draw(rng, h.alpha_min, h.alpha_max);
  }
  s.t = 0.0;
  return s;
}

namespace {

double mean_of_first_column(std::span<const double> states, std::size_t dim) {
  const std::size_t n = states.size() / dim;
  double sum = 0.0;
  for (std::size_t i = 0; i < n; ++i) sum += states[i * dim];
  return sum / static_cast<double>(n);
}

}  // namespace

double mean_field(const EnsembleState& state) {
  return mean_of_first_column(state.states, state.dim);
}

void derivatives(RegimeKind regime, std::span<const double> neuron,
                 const NeuronParams& intrinsic, double mean_field, double drive,
                 double coupling, std::span<double> out) {
  const double x = neuron[0];
  const double y = neuron[1];
  const double forcing = intrinsic.current + coupling * mean_field + drive;
  if (regime == RegimeKind::Bursting) {
    const double z = neuron[2];
    out[0] = y + 3.0 * x * x - x * x * x - z + forcing;
    out[1] = 1.0 - 5.0 * x * x - y;
    out[2] = kHrRate * (kHrScale * (x - kHrRest) - z);
  } else {
    out[0] = x - x * x * x / 3.0 - y + forcing;
    out[1] = x + intrinsic.alpha;
  }
}

void integrate_rk4(std::vector<double>& states, const EnsembleRhs& rhs,
                   double dt, std::size_t substeps) {
  const std::size_t n = states.size();
  std::vector<double> k1(n), k2(n), k3(n), k4(n), stage(n);
  for (std::size_t s = 0; s < substeps; ++s) {
    rhs(states, k1);
    for (std::size_t i = 0; i < n; ++i) stage[i] = states[i] + 0.5 * dt * k1[i];
    rhs(stage, k2);
    for (std::size_t i = 0; i < n; ++i) stage[i] = states[i] + 0.5 * dt * k2[i];
    rhs(stage, k3);
    for (std::size_t i = 0; i < n; ++i) stage[i] = states[i] + dt * k3[i];
    rhs(stage, k4);
    for (std::size_t i = 0; i < n; ++i)
      states[i] += dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
  }
}

void step_ensemble_inplace(EnsembleState& state, double action,
                           const EnsembleConfig& config) {
  const std::size_t dim = state.dim;
  const RegimeKind regime = state.regime;
  const auto& params = state.params;
  const double coupling = config.coupling;
  auto rhs = [&](std::span<const double> xs, std::span<double> out) {
    const double field = mean_of_first_column(xs, dim);
    for (std::size_t i = 0; i < params.size(); ++i) {
      derivatives(regime, xs.subspan(i * dim, dim), params[i], field, action,
                  coupling, out.subspan(i * dim, dim));
    }
  };
  integrate_rk4(state.states, rhs, config.dt, config.substeps_per_env_step);
  state.t += config.dt * static_cast<double>(config.substeps_per_env_step);
  for (double v : state.states) {
    if (!std::isfinite(v) || std::abs(v) > kDivergenceThreshold)
      throw NumericalDivergence("ensemble state diverged at t=" +
                                std::to_string(state.t));
  }
}

EnsembleState step_ensemble(const EnsembleState& state, double action,
                            const EnsembleConfig& config) {
  EnsembleState next = state;
  step_ensemble_inplace(next, action, config);
  return next;
}

}  // namespace synq
