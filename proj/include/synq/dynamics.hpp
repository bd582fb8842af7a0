#pragma once

#include <cstdint>
#include <functional>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace synq {

using Rng = std::mt19937_64;

// Regular and Chaotic use the two-variable Bonhoeffer-van der Pol neuron,
// Bursting uses the three-variable Hindmarsh-Rose neuron.
enum class RegimeKind { Regular, Chaotic, Bursting };

std::string_view to_string(RegimeKind regime);
RegimeKind parse_regime(std::string_view name);

/// Number of state variables per neuron for the regime's model.
std::size_t state_dim(RegimeKind regime);

/// Thrown when any state variable becomes non-finite or exceeds the blow-up
/// threshold.
class NumericalDivergence : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class InvalidConfig : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Per-neuron parameter ranges. Each neuron draws alpha and its bias current
// independently from the closed uniform ranges; a degenerate range (lo == hi)
// gives a homogeneous parameter. alpha is unused by Hindmarsh-Rose.
struct Heterogeneity {
  double alpha_min = 0.0;
  double alpha_max = 0.0;
  double current_min = 0.0;
  double current_max = 0.0;

  static Heterogeneity defaults_for(RegimeKind regime);
};

struct EnsembleConfig {
  RegimeKind regime = RegimeKind::Regular;
  std::size_t n_neurons = 100;
  double coupling = 0.03;
  double dt = 0.05;
  std::size_t substeps_per_env_step = 2;
  Heterogeneity heterogeneity = Heterogeneity::defaults_for(RegimeKind::Regular);
  std::uint64_t seed = 0;

  /// Regime-specific defaults for coupling and heterogeneity.
  static EnsembleConfig defaults_for(RegimeKind regime);

  void validate() const;
};

double default_coupling(RegimeKind regime);

// Hindmarsh-Rose slow-variable constants.
inline constexpr double kHrRate = 0.006;
inline constexpr double kHrScale = 4.0;
inline constexpr double kHrRest = -1.6;

inline constexpr double kDivergenceThreshold = 1e6;

/// Intrinsic parameters of one neuron.
struct NeuronParams {
  double current = 0.0;
  double alpha = 0.0;

  bool operator==(const NeuronParams&) const = default;
};

/// N x D state matrix (row-major) plus per-neuron parameters and the clock.
struct EnsembleState {
  RegimeKind regime = RegimeKind::Regular;
  std::size_t dim = 2;
  std::vector<double> states;
  std::vector<NeuronParams> params;
  double t = 0.0;

  std::size_t size() const { return params.size(); }
  std::span<double> row(std::size_t i) { return {states.data() + i * dim, dim}; }
  std::span<const double> row(std::size_t i) const {
    return {states.data() + i * dim, dim};
  }

  bool operator==(const EnsembleState&) const = default;
};

EnsembleState init_ensemble(const EnsembleConfig& config, Rng& rng);

/// Arithmetic mean of the first state variable over all neurons.
double mean_field(const EnsembleState& state);

/// Time derivative of one neuron under global mean-field coupling and a
/// common drive added to the first-variable equation. `out` must have the
/// same length as `neuron`.
void derivatives(RegimeKind regime, std::span<const double> neuron,
                 const NeuronParams& intrinsic, double mean_field, double drive,
                 double coupling, std::span<double> out);

// Right-hand side for the whole ensemble: fills `out` (same layout as
// `states`) with time derivatives of all rows.
using EnsembleRhs = std::function<void(std::span<const double> states,
                                       std::span<double> out)>;

/// Classical RK4 over `substeps` steps of size `dt`, in place.
void integrate_rk4(std::vector<double>& states, const EnsembleRhs& rhs,
                   double dt, std::size_t substeps);

/// Advance the coupled ensemble by one env step with a constant drive. The
/// mean field is recomputed from the stage states at every RK4 stage.
EnsembleState step_ensemble(const EnsembleState& state, double action,
                            const EnsembleConfig& config);

/// In-place variant used by the environment hot loop.
void step_ensemble_inplace(EnsembleState& state, double action,
                           const EnsembleConfig& config);

}  // namespace synq
