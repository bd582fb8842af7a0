// Acceptance run: prints one PASS/FAIL line per criterion and exits non-zero
// if any criterion fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "oracles.hpp"
#include "synq/config.hpp"
#include "synq/environment.hpp"
#include "synq/evaluation.hpp"
#include "synq/harness.hpp"
#include "synq/training.hpp"

using namespace synq;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

int failures = 0;

void report(int id, const std::string& name, const std::function<Outcome()>& check) {
  const auto start = std::chrono::steady_clock::now();
  Outcome o;
  try {
    o = check();
  } catch (const std::exception& e) {
    o = {false, std::string("exception: ") + e.what()};
  }
  const double secs =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  if (!o.pass) ++failures;
  std::printf("criterion %d: %s  %s [%.1f s] %s\n", id, o.pass ? "PASS" : "FAIL", name.c_str(),
              secs, o.detail.c_str());
  std::fflush(stdout);
}

std::string fmt(double v, int prec = 4) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*g", prec, v);
  return buf;
}

Outcome formula_suite() {
  const auto start = std::chrono::steady_clock::now();
  bool ok = true;
  ok &= std::abs(compute_reward(0.0, 0.0, 0.0) - 10.3) < 1e-12;
  ok &= std::abs(compute_reward(std::sqrt(90.0), 0.0, 0.0) - 1.3) < 1e-12;
  const std::vector<double> ones(8, 1.0);
  ok &= std::abs(temporal_representation(ones, {}) - 0.99) < 1e-12;
  std::vector<double> impulse(10, 0.0);
  impulse[4] = 1.0;
  for (std::size_t t = 0; t < impulse.size(); ++t) {
    const double v = temporal_representation(std::span(impulse).first(t + 1), {});
    ok &= std::abs(v - ((t >= 4 && t <= 6) ? 0.33 : 0.0)) < 1e-12;
  }
  const auto before = oracle::sinusoid(2000, 0.8, -0.26);
  std::vector<double> half(before);
  for (auto& v : half) v = -0.26 + 0.5 * (v + 0.26);
  ok &= std::abs(suppression_coefficient(before, before).value - 1.0) < 1e-12;
  ok &= std::abs(suppression_coefficient(before, half).value - 2.0) < 1e-12;
  const double secs =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return {ok && secs < 1.0, "runtime " + fmt(secs, 2) + " s"};
}

Outcome gradient_suite() {
  std::mt19937_64 rng(2718);
  std::normal_distribution<double> n(0.0, 1.0);
  double worst = 0.0;
  const int trials = 200;
  for (int t = 0; t < trials; ++t) {
    Network net = oracle::random_small_network(rng);
    const auto b = static_cast<Eigen::Index>(1 + t % 3);
    Eigen::MatrixXd x(net.input_dim(), b), up(net.output_dim(), b);
    for (auto& v : x.reshaped()) v = n(rng);
    for (auto& v : up.reshaped()) v = n(rng);
    worst = std::max(worst, oracle::worst_gradient_error(net, x, up));
  }
  return {worst < 1e-4, std::to_string(trials) + " trials, worst relative error " + fmt(worst)};
}

Outcome clipped_double_q_property() {
  std::mt19937_64 gen(31415);
  std::normal_distribution<double> n(0.0, 1.0);
  ActionFn actor = [](const Eigen::MatrixXd& o) {
    return Eigen::VectorXd(o.row(0).transpose().array().tanh());
  };
  CriticFn q1 = [](const Eigen::MatrixXd& o, const Eigen::VectorXd& a) {
    return Eigen::VectorXd(25.0 * (2.0 * o.row(1).transpose().array() - a.array()).sin());
  };
  CriticFn q2 = [](const Eigen::MatrixXd& o, const Eigen::VectorXd& a) {
    return Eigen::VectorXd(30.0 * (o.row(0).transpose().array() + 3.0 * a.array()).cos() - 1.0);
  };
  std::size_t checked = 0, violations = 0;
  for (int round = 0; round < 80; ++round) {
    Batch b;
    const Eigen::Index size = 128;
    b.observations = Eigen::MatrixXd(2, size);
    b.next_observations = Eigen::MatrixXd(2, size);
    b.actions = Eigen::VectorXd(size);
    b.rewards = Eigen::VectorXd(size);
    b.dones = Eigen::VectorXd(size);
    for (Eigen::Index j = 0; j < size; ++j) {
      for (int r = 0; r < 2; ++r) {
        b.observations(r, j) = n(gen);
        b.next_observations(r, j) = n(gen);
      }
      b.actions(j) = std::tanh(n(gen));
      b.rewards(j) = 10.3 * std::abs(std::tanh(n(gen)));
      b.dones(j) = n(gen) > 1.0 ? 1.0 : 0.0;
    }
    Td3Hyperparams hp;
    hp.gamma = std::uniform_real_distribution<double>(0.0, 0.999)(gen);
    hp.truncate_on_done = round % 2 == 1;
    Rng rng(static_cast<std::uint64_t>(round) + 100);
    Rng replay = rng;
    const Eigen::VectorXd y = compute_target(b, actor, q1, q2, hp, 1.0, rng);
    const Eigen::VectorXd a = smoothed_target_actions(actor, b.next_observations, hp, 1.0, replay);
    const Eigen::VectorXd v1 = q1(b.next_observations, a), v2 = q2(b.next_observations, a);
    for (Eigen::Index j = 0; j < size; ++j) {
      const double d = hp.truncate_on_done ? b.dones(j) : 0.0;
      if (y(j) > oracle::single_target(b.rewards(j), d, hp.gamma, v1(j)) ||
          y(j) > oracle::single_target(b.rewards(j), d, hp.gamma, v2(j)))
        ++violations;
      ++checked;
    }
  }
  return {checked >= 10000 && violations == 0,
          std::to_string(checked) + " transitions, " + std::to_string(violations) + " violations"};
}

Outcome replay_buffer_property() {
  std::mt19937_64 gen(1618);
  std::size_t trials = 0, bad = 0;
  for (; trials < 200; ++trials) {
    const std::size_t capacity = std::uniform_int_distribution<std::size_t>(1, 300)(gen);
    const std::size_t k = std::uniform_int_distribution<std::size_t>(0, 500)(gen);
    ReplayBuffer buf(capacity, 2);
    for (std::size_t i = 0; i < capacity + k; ++i) {
      const double id = static_cast<double>(i);
      const std::vector<double> o{id, -id};
      buf.push(o, id, id, o, i % 7 == 0);
    }
    bool ok = buf.size() == capacity;
    for (std::size_t i = 0; ok && i < capacity; ++i) {
      const Transition t = buf.at(i);
      const double id = static_cast<double>(k + i);
      ok = t.action == id && t.observation[0] == id && t.next_observation[1] == -id &&
           t.done == ((k + i) % 7 == 0);
    }
    if (!ok) ++bad;
  }
  return {bad == 0, std::to_string(trials) + " randomized capacity/k trials, " +
                        std::to_string(bad) + " mismatches"};
}

Outcome calibration() {
  struct Target {
    RegimeKind regime;
    double equilibrium;
  };
  bool ok = true;
  std::string detail;
  for (const Target t : {Target{RegimeKind::Regular, -0.2568}, Target{RegimeKind::Chaotic, -0.2636},
                         Target{RegimeKind::Bursting, -0.2772}}) {
    const auto start = std::chrono::steady_clock::now();
    const auto cfg = EnsembleConfig::defaults_for(t.regime);
    Rng rng(0);
    EnsembleState s = init_ensemble(cfg, rng);
    // Warm-up as in the environment, then two consecutive 5,000-step windows.
    const std::size_t warmup = 1000, steps = 10000, windows = 2;
    for (std::size_t i = 0; i < warmup; ++i) step_ensemble_inplace(s, 0.0, cfg);
    std::vector<double> xs;
    for (std::size_t i = 0; i < steps; ++i) {
      step_ensemble_inplace(s, 0.0, cfg);
      xs.push_back(mean_field(s));
    }
    const std::size_t w = xs.size() / windows;
    double worst_change = 0.0;
    double prev = population_stddev(std::span(xs).first(w));
    for (std::size_t k = 1; k < windows; ++k) {
      const double sd = population_stddev(std::span(xs).subspan(k * w, w));
      worst_change = std::max(worst_change, std::abs(sd - prev) / prev);
      prev = sd;
    }
    const double mean = mean_point_of_convergence(xs, 0);
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    const bool pass = worst_change < 0.5 && std::abs(mean - t.equilibrium) <= 0.1 &&
                      prev > 1e-3 && secs < 30.0;
    ok &= pass;
    detail += std::string(to_string(t.regime)) + ": mean " + fmt(mean) + " (target " +
              fmt(t.equilibrium) + "), sigma " + fmt(prev) + ", window change " +
              fmt(100 * worst_change, 3) + "%, " + fmt(secs, 2) + " s; ";
  }
  return {ok, detail};
}

struct TrainedSeed {
  std::uint64_t seed;
  SuppressionReport agent_report;
  std::vector<double> agent_rewards;
  std::vector<double> zero_rewards;
  double first_eval = 0.0;
  double last_eval = 0.0;
};

std::vector<double> post_rewards(const EvaluationRun& run, const EvalProtocol& p) {
  std::vector<double> r;
  for (std::size_t i = p.pre_steps; i < run.trace.size(); ++i) r.push_back(run.trace[i].reward);
  return r;
}

std::vector<TrainedSeed> train_seed_set() {
  std::vector<TrainedSeed> out;
  const RunConfig cfg = RunConfig::defaults(RegimeKind::Regular);
  for (std::uint64_t seed : {0ull, 1ull, 2ull}) {
    const TrainResult tr = train_agent(cfg.env, cfg.td3, cfg.train, 50000, seed);
    GreedyPolicy greedy(tr.agent);
    const EvaluationRun run = run_evaluation(cfg.env, greedy, cfg.eval, seed);
    ZeroPolicy zero;
    const EvaluationRun base = run_evaluation(cfg.env, zero, cfg.eval, seed);
    out.push_back({seed, run.report, post_rewards(run, cfg.eval), post_rewards(base, cfg.eval),
                   tr.log.front().eval_reward, tr.log.back().eval_reward});
    const auto& r = run.report;
    std::printf("  seed %llu: S %s, sigma_before %s, sigma_after %s, M %s, energy/step %s, "
                "eval reward %s -> %s\n",
                static_cast<unsigned long long>(seed), fmt(r.S).c_str(),
                fmt(r.sigma_before).c_str(), fmt(r.sigma_after).c_str(), fmt(r.M).c_str(),
                fmt(r.energy / static_cast<double>(r.controlled_steps)).c_str(),
                fmt(tr.log.front().eval_reward, 6).c_str(), fmt(tr.log.back().eval_reward, 6).c_str());
    std::fflush(stdout);
  }
  return out;
}

Outcome suppression(const std::vector<TrainedSeed>& seeds) {
  const double random_energy = RunConfig::defaults().env.a_max / 2.0;
  int suppressed = 0;
  bool cheap = true;
  std::string detail;
  for (const auto& s : seeds) {
    const auto& r = s.agent_report;
    const double per_step = r.energy / static_cast<double>(r.controlled_steps);
    if (r.S >= 5.0 && r.sigma_after < r.sigma_before / 5.0) ++suppressed;
    cheap &= per_step < random_energy;
    detail += "seed " + std::to_string(s.seed) + " S=" + fmt(r.S) + " E/step=" + fmt(per_step) + "; ";
  }
  detail += std::to_string(suppressed) + "/3 suppressed, random E/step=" + fmt(random_energy);
  return {suppressed >= 2 && cheap, detail};
}

Outcome reward_trace(const std::vector<TrainedSeed>& seeds) {
  int better = 0;
  std::string detail;
  for (const auto& s : seeds) {
    const double am = mean_point_of_convergence(s.agent_rewards, 0);
    const double zm = mean_point_of_convergence(s.zero_rewards, 0);
    const double asd = population_stddev(s.agent_rewards);
    const double zsd = population_stddev(s.zero_rewards);
    if (am > zm && asd < zsd) ++better;
    detail += "seed " + std::to_string(s.seed) + " mean " + fmt(am, 6) + " vs " + fmt(zm, 6) +
              ", std " + fmt(asd) + " vs " + fmt(zsd) + "; ";
  }
  detail += std::to_string(better) + "/3 better than zero action";
  return {better >= 2, detail};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Outcome reproducibility() {
  const fs::path root = fs::temp_directory_path() / "synq_acceptance_repro";
  fs::remove_all(root);
  RunConfig cfg = RunConfig::defaults(RegimeKind::Regular);
  cfg.seed = 7;
  cfg.eval = {2000, 2000, 200, 1500};
  for (const char* d : {"a", "b"}) {
    const fs::path dir = root / d;
    cmd_train(cfg, 3000, (dir / "model.synq").string(), (dir / "train_log.csv").string());
    cmd_evaluate(cfg, PolicyKind::Agent, (dir / "model.synq").string(),
                 {(dir / "report.txt").string(), (dir / "trace.csv").string(),
                  (dir / "trace.svg").string()});
  }
  std::string detail;
  bool ok = true;
  for (const char* f : {"model.synq", "train_log.csv", "report.txt", "report.csv", "trace.csv",
                        "trace.svg", "resolved_config.txt"}) {
    const std::string a = slurp(root / "a" / f), b = slurp(root / "b" / f);
    const bool same = !a.empty() && a == b;
    ok &= same;
    if (!same) detail += std::string(f) + " differs; ";
  }
  fs::remove_all(root);
  return {ok, ok ? "checkpoint, log, report, report CSV, trace, plot identical" : detail};
}

}  // namespace

int main() {
  report(1, "formula unit suite", formula_suite);
  report(2, "gradient suite", gradient_suite);
  report(3, "clipped double-Q property", clipped_double_q_property);
  report(4, "replay buffer property", replay_buffer_property);
  report(5, "unforced-dynamics calibration", calibration);

  std::vector<TrainedSeed> seeds;
  const auto start = std::chrono::steady_clock::now();
  try {
    seeds = train_seed_set();
  } catch (const std::exception& e) {
    std::printf("  training failed: %s\n", e.what());
  }
  const double train_secs =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  report(6, "end-to-end suppression", [&]() -> Outcome {
    if (seeds.size() != 3) return {false, "training did not complete"};
    Outcome o = suppression(seeds);
    o.pass &= train_secs < 15 * 60;
    o.detail += ", training+evaluation " + fmt(train_secs, 4) + " s";
    return o;
  });
  report(7, "reproducibility", reproducibility);
  report(8, "reward-trace property", [&]() -> Outcome {
    if (seeds.size() != 3) return {false, "training did not complete"};
    return reward_trace(seeds);
  });
  std::printf("%d criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}
