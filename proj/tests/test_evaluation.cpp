#include <doctest.h>

#include <charconv>
#include <cmath>
#include <random>
#include <sstream>

#include "oracles.hpp"
#include "synq/evaluation.hpp"

using namespace synq;

namespace {

EnvConfig small_env() {
  EnvConfig cfg;
  cfg.ensemble = EnsembleConfig::defaults_for(RegimeKind::Regular);
  cfg.ensemble.n_neurons = 20;
  cfg.warmup_steps = 200;
  return cfg;
}

EvalProtocol short_protocol() { return {600, 600, 50, 400}; }

}  // namespace

TEST_CASE("suppression coefficient on identical and half-scaled slices") {
  const auto before = oracle::sinusoid(1000, 1.3, -0.25);
  CHECK(std::abs(suppression_coefficient(before, before).value - 1.0) < 1e-12);

  std::vector<double> half(before.size());
  for (std::size_t i = 0; i < half.size(); ++i) half[i] = -0.25 + 0.5 * (before[i] + 0.25);
  CHECK(std::abs(suppression_coefficient(before, half).value - 2.0) < 1e-12);
}

TEST_CASE("suppression coefficient of sinusoids against direct summation") {
  const auto before = oracle::sinusoid(5000, 1.0);
  const auto after = oracle::sinusoid(5000, 0.1);
  const double expected = oracle::direct_stddev(before) / oracle::direct_stddev(after);
  CHECK(std::abs(expected - 10.0) < 1e-9);
  CHECK(std::abs(suppression_coefficient(before, after).value - 10.0) < 1e-9);
  CHECK(population_stddev(before) == doctest::Approx(oracle::direct_stddev(before)).epsilon(1e-13));
}

TEST_CASE("suppression coefficient is scale equivariant") {
  std::mt19937_64 rng(3);
  std::normal_distribution<double> n(0.0, 1.0);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<double> a(200), b(200);
    for (auto& v : a) v = n(rng);
    for (auto& v : b) v = 0.3 * n(rng);
    const double c = trial % 2 ? -7.5 : 0.02;
    std::vector<double> ac(a), bc(b);
    for (auto& v : ac) v *= c;
    for (auto& v : bc) v *= c;
    CHECK(suppression_coefficient(ac, bc).value ==
          doctest::Approx(suppression_coefficient(a, b).value).epsilon(1e-12));
  }
}

TEST_CASE("flat after slice is flagged, short slices are rejected") {
  const std::vector<double> before{1.0, 2.0, 3.0};
  const std::vector<double> flat(10, -1.005);
  const auto r = suppression_coefficient(before, flat);
  CHECK(r.degenerate_after);
  CHECK(std::isinf(r.value));
  CHECK_FALSE(suppression_coefficient(before, before).degenerate_after);
  CHECK_THROWS_AS(suppression_coefficient(std::vector<double>{1.0}, before), std::invalid_argument);
}

TEST_CASE("energy") {
  CHECK(energy(std::vector<double>{}) == 0.0);
  CHECK(energy(std::vector<double>{1.0, -1.0, 0.5}) == 2.5);

  std::mt19937_64 rng(8);
  std::normal_distribution<double> n(0.0, 1.0);
  std::vector<double> a(100), b(60);
  for (auto& v : a) v = n(rng);
  for (auto& v : b) v = n(rng);
  std::vector<double> ab(a);
  ab.insert(ab.end(), b.begin(), b.end());
  std::vector<double> flipped(a);
  for (auto& v : flipped) v = -v;
  CHECK(energy(a) >= 0.0);
  CHECK(energy(ab) == doctest::Approx(energy(a) + energy(b)).epsilon(1e-14));
  CHECK(energy(flipped) == energy(a));
}

TEST_CASE("mean point of convergence") {
  const std::vector<double> flat(100, -1.005);
  CHECK(mean_point_of_convergence(flat, 10) == doctest::Approx(-1.005).epsilon(1e-15));

  const std::vector<double> ramp{1.0, 2.0, 3.0, 4.0};
  CHECK(mean_point_of_convergence(ramp, 3) == 4.0);
  CHECK_THROWS_AS(mean_point_of_convergence(ramp, 4), std::invalid_argument);

  // Whole periods of a zero-mean sinusoid average to zero.
  const auto wave = oracle::sinusoid(100 + 50 * 40, 1.0);
  CHECK(std::abs(mean_point_of_convergence(wave, 100)) < 1e-12);

  std::vector<double> shifted(wave);
  for (auto& v : shifted) v += 2.75;
  CHECK(mean_point_of_convergence(shifted, 100) ==
        doctest::Approx(mean_point_of_convergence(wave, 100) + 2.75).epsilon(1e-12));
}

TEST_CASE("invalid protocols are rejected") {
  EvalProtocol p = short_protocol();
  p.measure_window = 700;
  CHECK_THROWS_AS(p.validate(), InvalidConfig);
  p = short_protocol();
  p.transient = 600;
  CHECK_THROWS_AS(p.validate(), InvalidConfig);
}

TEST_CASE("zero policy leaves the ensemble unperturbed") {
  ZeroPolicy zero;
  const auto run = run_evaluation(small_env(), zero, short_protocol(), 4);
  const auto& r = run.report;
  CHECK(run.trace.size() == 1200);
  CHECK(r.energy == 0.0);
  CHECK(r.S > 0.5);
  CHECK(r.S < 1.5);
  CHECK(r.controlled_steps == 600);
  CHECK(r.seed == 4);
  CHECK(r.regime == RegimeKind::Regular);
  for (const auto& t : run.trace) CHECK(t.action == 0.0);
}

TEST_CASE("report fields agree with the trace") {
  RandomPolicy random(1.0, 5);
  const auto p = short_protocol();
  const auto run = run_evaluation(small_env(), random, p, 6);
  const auto& r = run.report;
  CHECK(std::abs(r.S - r.sigma_before / r.sigma_after) < 1e-12);

  std::vector<double> before, after, actions;
  double reward = 0.0;
  for (std::size_t i = p.pre_steps - p.measure_window; i < p.pre_steps; ++i)
    before.push_back(run.trace[i].mean_field);
  for (std::size_t i = p.pre_steps; i < run.trace.size(); ++i) {
    if (i >= p.pre_steps + p.transient) after.push_back(run.trace[i].mean_field);
    actions.push_back(run.trace[i].action);
    reward += run.trace[i].reward;
  }
  CHECK(r.sigma_before == doctest::Approx(oracle::direct_stddev(before)).epsilon(1e-12));
  CHECK(r.sigma_after == doctest::Approx(oracle::direct_stddev(after)).epsilon(1e-12));
  CHECK(r.energy == doctest::Approx(energy(actions)).epsilon(1e-12));
  CHECK(r.mean_reward == doctest::Approx(reward / 600.0).epsilon(1e-12));
  for (std::size_t i = 0; i < p.pre_steps; ++i) CHECK(run.trace[i].action == 0.0);
  for (std::size_t i = 0; i < run.trace.size(); ++i) CHECK(run.trace[i].step == i);
}

TEST_CASE("random policy spends about a_max / 2 per step") {
  RandomPolicy random(0.8, 1);
  std::vector<double> a(20000);
  for (auto& v : a) v = random.act({});
  for (double v : a) CHECK(std::abs(v) <= 0.8);
  CHECK(energy(a) / 20000.0 == doctest::Approx(0.4).epsilon(0.02));
}

TEST_CASE("evaluation is deterministic under the seed") {
  Rng rng(1);
  Td3Hyperparams hp;
  hp.hidden = {8};
  const auto env = small_env();
  const Agent agent(env.window_len, env.a_max, hp, rng);
  GreedyPolicy p1(agent), p2(agent);
  const auto a = run_evaluation(env, p1, short_protocol(), 9);
  const auto b = run_evaluation(env, p2, short_protocol(), 9);
  CHECK(a.report == b.report);
  CHECK(a.trace == b.trace);
  CHECK(report_to_text(a.report) == report_to_text(b.report));
}

TEST_CASE("report serialisation") {
  SuppressionReport r;
  r.seed = 3;
  r.sigma_before = 0.1;
  r.sigma_after = 0.02;
  r.S = 5.000000000000001;
  r.M = -1.005;
  r.energy = 12.5;
  r.mean_reward = 10.1;
  CHECK(report_csv_header() == "seed,regime,sigma_before,sigma_after,S,M,energy,mean_reward");
  CHECK(report_to_csv_row(r) == "3,regular,0.1,0.02,5.000000000000001,-1.005,12.5,10.1");
  const std::string text = report_to_text(r);
  CHECK(text.find("S = 5.000000000000001\n") != std::string::npos);
  CHECK(text.find("regime = regular\n") != std::string::npos);
}

TEST_CASE("trace CSV round-trips every double") {
  std::mt19937_64 rng(12);
  std::normal_distribution<double> n(0.0, 1.0);
  std::vector<TraceRecord> trace;
  for (std::size_t i = 0; i < 50; ++i) trace.push_back({i, 0.1 * static_cast<double>(i), n(rng), n(rng), n(rng)});
  const std::string csv = trace_to_csv(trace);
  std::istringstream in(csv);
  std::string line;
  std::getline(in, line);
  CHECK(line == trace_csv_header());
  CHECK(line == "step,time,mean_field,action,reward");
  std::size_t row = 0;
  while (std::getline(in, line)) {
    std::vector<double> fields;
    std::size_t pos = 0;
    while (pos <= line.size()) {
      const std::size_t comma = std::min(line.find(',', pos), line.size());
      double v = 0.0;
      std::from_chars(line.data() + pos, line.data() + comma, v);
      fields.push_back(v);
      pos = comma + 1;
    }
    REQUIRE(fields.size() == 5);
    CHECK(fields[0] == static_cast<double>(trace[row].step));
    CHECK(fields[1] == trace[row].time);
    CHECK(fields[2] == trace[row].mean_field);
    CHECK(fields[3] == trace[row].action);
    CHECK(fields[4] == trace[row].reward);
    ++row;
  }
  CHECK(row == trace.size());
}
