#include "synq/evaluation.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>
#include <stdexcept>

namespace synq {

void EvalProtocol::validate() const {
  if (post_steps == 0 || transient >= post_steps)
    throw InvalidConfig("eval.transient must be < eval.post_steps");
  if (pre_steps == 0) throw InvalidConfig("eval.pre_steps must be >= 1");
  if (measure_window < 2 || measure_window > std::min(pre_steps, post_steps - transient))
    throw InvalidConfig(
        "eval.measure_window must lie in [2, min(pre_steps, post_steps - transient)]");
}

double population_stddev(std::span<const double> xs) {
  if (xs.empty()) return 0.0;
  // Shifted by the first sample so that a constant slice gives exactly 0.
  const double n = static_cast<double>(xs.size());
  const double shift = xs.front();
  double mean = 0.0;
  for (double x : xs) mean += x - shift;
  mean /= n;
  double ss = 0.0;
  for (double x : xs) ss += (x - shift - mean) * (x - shift - mean);
  return std::sqrt(ss / n);
}

SuppressionResult suppression_coefficient(std::span<const double> before,
                                          std::span<const double> after) {
  if (before.size() < 2 || after.size() < 2)
    throw std::invalid_argument("suppression_coefficient needs at least 2 samples per slice");
  const double sb = population_stddev(before);
  const double sa = population_stddev(after);
  if (sa == 0.0) return {std::numeric_limits<double>::infinity(), true};
  return {sb / sa, false};
}

double energy(std::span<const double> actions) {
  double e = 0.0;
  for (double a : actions) e += std::abs(a);
  return e;
}

double mean_point_of_convergence(std::span<const double> trace, std::size_t transient) {
  if (trace.size() <= transient)
    throw std::invalid_argument("trace must be longer than the transient");
  const auto tail = trace.subspan(transient);
  return std::accumulate(tail.begin(), tail.end(), 0.0) / static_cast<double>(tail.size());
}

double RandomPolicy::act(std::span<const double>) {
  return std::uniform_real_distribution<double>(-a_max_, a_max_)(rng_);
}

double GreedyPolicy::act(std::span<const double> observation) {
  Eigen::VectorXd in = Eigen::Map<const Eigen::VectorXd>(
      observation.data(), static_cast<Eigen::Index>(observation.size()));
  return std::clamp(a_max_ * actor_.forward(in)(0), -a_max_, a_max_);
}

SuppressionReport summarize(std::span<const TraceRecord> trace, const EvalProtocol& protocol) {
  if (trace.size() != protocol.pre_steps + protocol.post_steps)
    throw std::invalid_argument("trace length does not match the protocol");
  std::vector<double> field(trace.size()), actions, rewards;
  for (std::size_t i = 0; i < trace.size(); ++i) field[i] = trace[i].mean_field;
  for (std::size_t i = protocol.pre_steps; i < trace.size(); ++i) {
    actions.push_back(trace[i].action);
    rewards.push_back(trace[i].reward);
  }
  const std::span<const double> all(field);
  const auto before = all.subspan(protocol.pre_steps - protocol.measure_window,
                                  protocol.measure_window);
  const auto controlled = all.subspan(protocol.pre_steps);
  const auto after = controlled.subspan(protocol.transient);

  SuppressionReport r;
  r.sigma_before = population_stddev(before);
  r.sigma_after = population_stddev(after);
  const auto s = suppression_coefficient(before, after);
  r.S = s.value;
  r.degenerate_after = s.degenerate_after;
  r.M = mean_point_of_convergence(controlled, protocol.transient);
  r.energy = energy(actions);
  r.mean_reward =
      std::accumulate(rewards.begin(), rewards.end(), 0.0) / static_cast<double>(rewards.size());
  r.controlled_steps = protocol.post_steps;
  return r;
}

EvaluationRun run_evaluation(const EnvConfig& env_config, Policy& policy,
                             const EvalProtocol& protocol, std::uint64_t seed) {
  protocol.validate();
  Environment env(env_config);
  Observation obs = env.reset(seed);
  EvaluationRun run;
  run.trace.reserve(protocol.pre_steps + protocol.post_steps);
  const std::size_t total = protocol.pre_steps + protocol.post_steps;
  for (std::size_t step = 0; step < total; ++step) {
    const double action = step < protocol.pre_steps ? 0.0 : policy.act(obs);
    StepResult r = env.step(action);
    run.trace.push_back({step, r.info.time, r.info.mean_field, r.info.action, r.reward});
    obs = std::move(r.observation);
  }
  run.report = summarize(run.trace, protocol);
  run.report.seed = seed;
  run.report.regime = env_config.ensemble.regime;
  return run;
}

std::string format_double(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  if (std::isnan(v)) return "nan";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

std::string report_to_text(const SuppressionReport& r) {
  std::ostringstream os;
  os << "seed = " << r.seed << "\n"
     << "regime = " << to_string(r.regime) << "\n"
     << "sigma_before = " << format_double(r.sigma_before) << "\n"
     << "sigma_after = " << format_double(r.sigma_after) << "\n"
     << "S = " << format_double(r.S) << "\n"
     << "M = " << format_double(r.M) << "\n"
     << "energy = " << format_double(r.energy) << "\n"
     << "mean_reward = " << format_double(r.mean_reward) << "\n"
     << "sigma_after_zero = " << (r.degenerate_after ? "true" : "false") << "\n"
     << "controlled_steps = " << r.controlled_steps << "\n";
  return os.str();
}

std::string report_csv_header() {
  return "seed,regime,sigma_before,sigma_after,S,M,energy,mean_reward";
}

std::string report_to_csv_row(const SuppressionReport& r) {
  std::ostringstream os;
  os << r.seed << ',' << to_string(r.regime) << ',' << format_double(r.sigma_before) << ','
     << format_double(r.sigma_after) << ',' << format_double(r.S) << ','
     << format_double(r.M) << ',' << format_double(r.energy) << ','
     << format_double(r.mean_reward);
  return os.str();
}

std::string trace_csv_header() { return "step,time,mean_field,action,reward"; }

std::string trace_to_csv(std::span<const TraceRecord> trace) {
  std::string out = trace_csv_header() + "\n";
  for (const auto& t : trace) {
    out += std::to_string(t.step);
    out += ',';
    out += format_double(t.time);
    out += ',';
    out += format_double(t.mean_field);
    out += ',';
    out += format_double(t.action);
    out += ',';
    out += format_double(t.reward);
    out += '\n';
  }
  return out;
}

}  // namespace synq
