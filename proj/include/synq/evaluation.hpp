#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "synq/environment.hpp"
#include "synq/td3.hpp"

namespace synq {

struct TraceRecord {
  std::size_t step = 0;
  double time = 0.0;
  double mean_field = 0.0;
  double action = 0.0;
  double reward = 0.0;

  bool operator==(const TraceRecord&) const = default;
};

struct EvalProtocol {
  std::size_t pre_steps = 10000;
  std::size_t post_steps = 10000;
  std::size_t transient = 500;
  std::size_t measure_window = 5000;

  void validate() const;
};

struct SuppressionReport {
  std::uint64_t seed = 0;
  RegimeKind regime = RegimeKind::Regular;
  double sigma_before = 0.0;
  double sigma_after = 0.0;
  double S = 0.0;
  // Set when sigma_after is exactly zero; S is then +infinity.
  bool degenerate_after = false;
  double M = 0.0;
  double energy = 0.0;
  double mean_reward = 0.0;
  std::size_t controlled_steps = 0;

  bool operator==(const SuppressionReport&) const = default;
};

struct SuppressionResult {
  double value = 0.0;
  bool degenerate_after = false;
};

/// Population standard deviation.
double population_stddev(std::span<const double> xs);

/// sigma(before) / sigma(after); +infinity with the degenerate flag set when
/// sigma(after) is exactly zero.
SuppressionResult suppression_coefficient(std::span<const double> before,
                                          std::span<const double> after);

/// Sum of |a| over the actions.
double energy(std::span<const double> actions);

/// Mean of the trace after dropping the first `transient` samples.
double mean_point_of_convergence(std::span<const double> trace, std::size_t transient);

/// Decision rule mapping an observation to an action.
class Policy {
 public:
  virtual ~Policy() = default;
  virtual double act(std::span<const double> observation) = 0;
};

class ZeroPolicy : public Policy {
 public:
  double act(std::span<const double>) override { return 0.0; }
};

/// Uniform random pulses in [-a_max, a_max].
class RandomPolicy : public Policy {
 public:
  RandomPolicy(double a_max, std::uint64_t seed) : a_max_(a_max), rng_(seed) {}
  double act(std::span<const double>) override;

 private:
  double a_max_;
  Rng rng_;
};

/// Noise-free actions from a copy of the agent's actor.
class GreedyPolicy : public Policy {
 public:
  explicit GreedyPolicy(const Agent& agent) : actor_(agent.actor), a_max_(agent.a_max()) {}
  double act(std::span<const double> observation) override;

 private:
  Network actor_;
  double a_max_;
};

struct EvaluationRun {
  SuppressionReport report;
  std::vector<TraceRecord> trace;
};

/// Two-phase protocol: `pre_steps` uncontrolled steps, then `post_steps` with
/// the policy in the loop. sigma_before uses the last `measure_window` samples
/// of the first phase; sigma_after and M use the second phase after the
/// transient; energy and mean reward cover the whole second phase.
EvaluationRun run_evaluation(const EnvConfig& env_config, Policy& policy,
                             const EvalProtocol& protocol, std::uint64_t seed);

/// Builds the report from a finished two-phase trace.
SuppressionReport summarize(std::span<const TraceRecord> trace, const EvalProtocol& protocol);

/// `key = value` lines in CSV field order.
std::string report_to_text(const SuppressionReport& r);
std::string report_csv_header();
std::string report_to_csv_row(const SuppressionReport& r);

/// Shortest decimal form that parses back to the same double.
std::string format_double(double v);

std::string trace_csv_header();
std::string trace_to_csv(std::span<const TraceRecord> trace);

}  // namespace synq
