// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit if any fails.

#include <chrono>
#include <cstdio>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "cli_runner.hpp"
#include "fapsm/associative.hpp"
#include "fapsm/evaluation.hpp"
#include "fapsm/format.hpp"
#include "fapsm/pipeline.hpp"
#include "fapsm/synth.hpp"
#include "fapsm/weights.hpp"
#include "oracles.hpp"

using namespace fapsm;

namespace {

struct Outcome {
  bool pass;
  std::string detail;
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

Eigen::MatrixXd uniform_matrix(Index rows, Index cols, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  Eigen::MatrixXd z(rows, cols);
  for (Index i = 0; i < z.size(); ++i) z.data()[i] = u(rng);
  return z;
}

Eigen::MatrixXd binary_matrix(Index rows, Index cols, std::mt19937_64& rng) {
  std::bernoulli_distribution b(0.5);
  Eigen::MatrixXd d(rows, cols);
  for (Index i = 0; i < d.size(); ++i) d.data()[i] = b(rng) ? 1.0 : 0.0;
  return d;
}

Outcome ridge_oracle() {
  const auto start = Clock::now();
  std::mt19937_64 rng(101);
  double worst_gap = 0, worst_dist = 0;
  for (int trial = 0; trial < 20; ++trial) {
    const Index n = 2 + Index(rng() % 49), m = 1 + Index(rng() % 8);
    const double lambda = std::uniform_real_distribution<double>(0.1, 2.0)(rng);
    const auto z = uniform_matrix(n, m, rng);
    const auto d = binary_matrix(n, m, rng);
    const Eigen::MatrixXd w = fit_linear<double>(z, d, lambda);
    const Eigen::MatrixXd ref = oracle::ridge_gradient_descent(z, d, lambda);
    worst_gap = std::max(worst_gap, std::abs(oracle::ridge_objective(z, d, w, lambda) -
                                             oracle::ridge_objective(z, d, ref, lambda)));
    worst_dist = std::max(worst_dist, (w - ref).norm());
  }
  const double t = seconds_since(start);
  return {worst_gap <= 1e-6 && worst_dist <= 1e-5 && t < 10.0,
          "max objective gap " + format_number(worst_gap) + ", max distance " + format_number(worst_dist) +
              ", " + format_fixed(t, 2) + " s"};
}

Outcome kernel_linear_identity() {
  std::mt19937_64 rng(202);
  double worst = 0;
  for (int trial = 0; trial < 20; ++trial) {
    const Index n = 2 + Index(rng() % 60), m = 1 + Index(rng() % 8);
    const double lambda = std::uniform_real_distribution<double>(0.05, 3.0)(rng);
    const auto z = uniform_matrix(n, m, rng);
    const auto d = binary_matrix(n, m, rng);
    const auto kernel = fit_kernel<double>(z, d, lambda, {KernelKind::linear, 1.0}, n, rng());
    const auto linear = make_linear_model<double>(fit_linear<double>(z, d, lambda), lambda, 0.4);
    const auto probe = uniform_matrix(25, m, rng);
    worst = std::max(worst, (predict_global(kernel, probe) - predict_global(linear, probe)).cwiseAbs().maxCoeff());
  }
  return {worst <= 1e-8, "max prediction difference " + format_number(worst)};
}

Outcome weight_solver_oracle() {
  std::mt19937_64 rng(303);
  std::uniform_real_distribution<double> reliability(0.55, 0.95);
  double worst_coord = 0, worst_excess = -1;
  for (int trial = 0; trial < 10; ++trial) {
    const Index m = trial < 5 ? 2 : 3;
    std::vector<double> rel;
    for (Index j = 0; j < m; ++j) rel.push_back(reliability(rng));
    const auto h = oracle::random_decisions(20, rel, rng);
    const auto q = fit_weights<double>(h, 0.01).weights;
    const auto grid = oracle::weights_grid_search(h, 0.01);
    worst_coord = std::max(worst_coord, (q - grid.q).cwiseAbs().maxCoeff());
    worst_excess = std::max(worst_excess, oracle::weights_objective_direct(h, q, 0.01) - grid.objective);
  }
  return {worst_coord <= 2e-3 && worst_excess <= 1e-12,
          "max coordinate gap " + format_number(worst_coord) + ", solver minus grid objective " +
              format_number(worst_excess)};
}

Outcome clean_exactness() {
  const auto start = Clock::now();
  SynthConfig cfg;
  cfg.identities = 50;
  cfg.probes_per_identity = 10;
  const auto data = generate(cfg);
  const auto report = train(data.gallery, data.probes, PipelineConfig{});
  const double t = seconds_since(start);
  return {report.baseline_accuracy == 1.0 && report.fapsm_accuracy == 1.0 && t < 30.0,
          "baseline " + format_fixed(report.baseline_accuracy, 4) + ", fapsm " +
              format_fixed(report.fapsm_accuracy, 4) + ", " + format_fixed(t, 2) + " s"};
}

Outcome corrupted_improvement() {
  const auto start = Clock::now();
  double total_gain = 0, worst_gain = 1, total_baseline = 0, total_fapsm = 0;
  std::string per_seed;
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    SynthConfig cfg;
    cfg.identities = 100;
    cfg.probes_per_identity = 20;
    cfg.noise_sigma = 0.1;
    cfg.occlusion_prob = 0.1;
    cfg.corruption_probs = std::vector<double>(std::size_t(cfg.patch_count), 0.0);
    cfg.corruption_probs[6] = 0.5;
    cfg.corruption_probs[7] = 0.5;
    cfg.seed = seed;
    const auto data = generate(cfg);
    PipelineConfig pc;
    pc.seed = seed;
    const auto report = train(data.gallery, data.probes, pc);
    const auto test = generate_probes(cfg, data.gallery, "synth.test_probes");
    const auto outcome = match(data.gallery, test, report.matcher);
    const auto eval = evaluate(outcome, test.truth());
    const double gain = 100.0 * (eval.fapsm_accuracy - eval.baseline_accuracy);
    total_gain += gain;
    total_baseline += eval.baseline_accuracy;
    total_fapsm += eval.fapsm_accuracy;
    worst_gain = std::min(worst_gain, gain);
    per_seed += (seed > 1 ? " " : "") + format_fixed(gain, 2);
  }
  const double mean_gain = total_gain / 10.0;
  const double t = seconds_since(start);
  return {mean_gain >= 2.0 && worst_gain >= -0.5 && t < 300.0,
          "mean rank-1 baseline " + format_fixed(total_baseline / 10.0, 4) + ", fapsm " +
              format_fixed(total_fapsm / 10.0, 4) + ", mean gain " + format_fixed(mean_gain, 3) +
              " points (per seed: " + per_seed + "), worst " + format_fixed(worst_gain, 3) + ", " +
              format_fixed(t, 1) + " s"};
}

Outcome statistics_anchor() {
  const double cd = bonferroni_dunn_cd(1.65, 2, 30);
  const auto report = significance_from_ranks(Eigen::Vector2d(1.28, 1.72), 30, {"FAPSM", "baseline"}, 0.10);
  const auto same = friedman_iman(Eigen::Vector2d(1.5, 1.5), 30);
  const bool pass = std::abs(cd - 0.30) <= 0.005 && report.significant_pairs.size() == 1 && same.chi2 == 0.0 &&
                    same.iman_f == 0.0;
  return {pass, "CD " + format_fixed(cd, 5) + ", significant pairs " +
                    std::to_string(report.significant_pairs.size()) + ", equal ranks give (" +
                    format_number(same.chi2) + ", " + format_number(same.iman_f) + ")"};
}

Outcome threshold_boundary() {
  std::mt19937_64 rng(707);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  int mismatches = 0;
  for (int trial = 0; trial < 1000; ++trial) {
    const Index n = 1 + Index(rng() % 6), m = 1 + Index(rng() % 8);
    const double t = u(rng);
    LocalMatchResult<double> local;
    local.scores.resize(n, m);
    local.identities.resize(n, m);
    for (Index i = 0; i < n; ++i)
      for (Index j = 0; j < m; ++j) {
        // Some scores land exactly on t to exercise the boundary.
        local.scores(i, j) = rng() % 4 == 0 ? t : u(rng);
        local.identities(i, j) = rng() % 5 == 0 ? kRejected : Label(1 + rng() % 20);
      }
    const auto model = make_linear_model<double>(Eigen::MatrixXd::Identity(m, m), 1.0, t);
    const auto global = globalize(model, local);
    for (Index i = 0; i < n; ++i)
      for (Index j = 0; j < m; ++j) {
        const double y = local.scores(i, j);
        const Label expected = y >= t ? local.identities(i, j) : kRejected;
        if (global.identities(i, j) != expected || global.scores(i, j) != y) ++mismatches;
      }
  }
  return {mismatches == 0, std::to_string(mismatches) + " mismatching entries over 1000 triples"};
}

Outcome cli_determinism() {
  const auto dir = testing::scratch_dir("acceptance_cli");
  const std::vector<std::pair<std::string, std::vector<std::string>>> steps = {
      {"generate --gallery g.sig --probes p.sig --test_probes t.sig --identities 12 --probes_per_identity 5 --b 16 "
       "--m 4 --noise_sigma 0.1 --occlusion_prob 0.1 --corruption_probs 0,0,0.5,0.5 --seed 9",
       {"g.sig", "p.sig", "t.sig"}},
      {"train --gallery g.sig --probes p.sig --model m.txt --weights w.txt --output train.txt --sigma 0.3 --nk 40 "
       "--seed 9",
       {"m.txt", "w.txt", "train.txt"}},
      {"match --gallery g.sig --probes t.sig --model m.txt --weights w.txt --output match.csv", {"match.csv"}},
      {"evaluate --gallery g.sig --probes t.sig --model m.txt --weights w.txt --output eval.txt", {"eval.txt"}},
      {"sweep --gallery g.sig --probes p.sig --sigma 0.3 --nk 40 --seed 9 --output sweep.txt", {"sweep.txt"}},
      {"stats --input splits.csv --output stats.txt", {"stats.txt"}},
  };
  std::ofstream(dir / "splits.csv") << "split,FAPSM,baseline,holistic\n1,0.91,0.9,0.8\n2,0.88,0.9,0.85\n"
                                       "3,0.93,0.91,0.9\n4,0.9,0.9,0.7\n";
  std::vector<std::string> failures;
  for (const auto& [args, files] : steps) {
    std::vector<std::string> first;
    bool ok = true;
    for (int pass = 0; pass < 2 && ok; ++pass) {
      const auto run = testing::run_cli(dir, args);
      if (run.status != 0) {
        failures.push_back(args.substr(0, args.find(' ')) + " exited " + std::to_string(run.status));
        ok = false;
        break;
      }
      for (std::size_t f = 0; f < files.size(); ++f) {
        const auto content = testing::slurp(dir / files[f]);
        if (pass == 0) first.push_back(content);
        else if (content != first[f]) failures.push_back(files[f] + " differs between runs");
      }
    }
  }
  std::filesystem::remove_all(dir);
  std::string detail = failures.empty() ? "6 commands byte-identical across reruns" : "";
  for (const auto& f : failures) detail += (detail.empty() ? "" : "; ") + f;
  return {failures.empty(), detail};
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
      {"1 ridge solution matches an iterative minimizer", ridge_oracle},
      {"2 linear-kernel ridge reproduces the linear path", kernel_linear_identity},
      {"3 weight solver matches grid search", weight_solver_oracle},
      {"4 clean synthetic data is matched exactly", clean_exactness},
      {"5 corrupted synthetic data: gain over the holistic baseline", corrupted_improvement},
      {"6 statistics anchors", statistics_anchor},
      {"7 threshold boundary", threshold_boundary},
      {"8 CLI determinism", cli_determinism},
  };
  int failed = 0;
  for (const auto& [name, check] : criteria) {
    Outcome o;
    try {
      o = check();
    } catch (const std::exception& e) {
      o = {false, std::string("threw: ") + e.what()};
    }
    std::printf("[%s] %s: %s\n", o.pass ? "PASS" : "FAIL", name.c_str(), o.detail.c_str());
    std::fflush(stdout);
    failed += o.pass ? 0 : 1;
  }
  std::printf("%d of %zu criteria passed\n", int(criteria.size()) - failed, criteria.size());
  return failed == 0 ? 0 : 1;
}
