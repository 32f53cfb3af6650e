#include "fapsm/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "fapsm/errors.hpp"
#include "fapsm/evaluation.hpp"
#include "fapsm/format.hpp"
#include "fapsm/seeding.hpp"

namespace fapsm {

namespace {

constexpr Index kDefaultMaxSamples = 1000;

// Runs one pipeline stage, prefixing any failure with the stage name.
template <typename F>
auto stage(const char* name, F&& f) {
  try {
    return f();
  } catch (const Error& e) {
    throw Error(e.code(), std::string(name) + ": " + e.what());
  }
}

std::vector<Label> final_decisions(const LocalMatchResult<double>& local, const GlobalMatchResult<double>& global,
                                   const PatchWeights<double>& weights, std::vector<double>* scores) {
  const Index n = local.probe_count();
  std::vector<Label> ids(std::size_t(n), kRejected);
  if (scores) scores->assign(std::size_t(n), 0.0);
  for (Index i = 0; i < n; ++i) {
    std::optional<BaselineVote<double>> baseline;
    const Label b = local.baseline_identities[std::size_t(i)];
    if (b != kRejected) baseline = BaselineVote<double>{b, local.baseline_scores[std::size_t(i)]};
    try {
      const auto fin = final_identity(global.identities.row(i), global.scores.row(i), weights, baseline);
      ids[std::size_t(i)] = fin.identity;
      if (scores) (*scores)[std::size_t(i)] = fin.score;
    } catch (const Error& e) {
      // A probe with no visible patch in common with any gallery entry stays unmatched.
      if (e.code() != Errc::no_candidates) throw;
    }
  }
  return ids;
}

AssociativeModel<double> fit_model(const LocalMatchResult<double>& local, const std::vector<Label>& truth,
                                   const PipelineConfig& config) {
  const Eigen::MatrixXd d = stage("corrected_matrix", [&] { return corrected_matrix(local, truth); });
  auto model = stage("fit_associative", [&] {
    if (config.mode == AssociativeMode::linear)
      return make_linear_model(fit_linear(local.scores, d, config.lambda1), config.lambda1, config.threshold);
    return fit_kernel(local.scores, d, config.lambda1, config.kernel,
                      config.effective_sample_count(local.probe_count()), derive_seed(config.seed, "kernel.sample"));
  });
  model.threshold = config.threshold;
  return model;
}

std::string percent(double v) { return format_fixed(100.0 * v, 2) + "%"; }

}  // namespace

void PipelineConfig::validate() const {
  if (!(lambda1 > 0.0) || !std::isfinite(lambda1)) throw Error(Errc::invalid_argument, "lambda1 must be positive");
  if (!(lambda2 > 0.0) || !std::isfinite(lambda2)) throw Error(Errc::invalid_argument, "lambda2 must be positive");
  if (!(threshold >= 0.0 && threshold <= 1.0)) throw Error(Errc::invalid_argument, "threshold must lie in [0, 1]");
  if (sample_count < 0) throw Error(Errc::invalid_argument, "nk must be non-negative");
  kernel.validate();
}

Index PipelineConfig::effective_sample_count(Index training_rows) const {
  if (sample_count == 0) return std::min(training_rows, kDefaultMaxSamples);
  if (sample_count > training_rows)
    throw Error(Errc::invalid_argument, "nk = " + std::to_string(sample_count) + " exceeds the " +
                                            std::to_string(training_rows) + " training probes");
  return sample_count;
}

TrainReport train(const Gallery& gallery, const ProbeSet& probes, const PipelineConfig& config) {
  config.validate();
  stage("validate_pairing", [&] {
    validate_pairing(gallery, probes).require_ok();
    probes.truth();
    if (probes.size() == 0) throw Error(Errc::invalid_argument, "training probe set is empty");
    return 0;
  });
  const auto& truth = probes.truth();

  auto local = stage("local_match", [&] { return local_match(gallery, probes); });
  auto model = fit_model(local, truth, config);
  auto global = stage("globalize", [&] { return globalize(model, local); });
  const Eigen::MatrixXd h = stage("decision_matrix", [&] { return decision_matrix(global.identities, truth); });
  auto weights = stage("fit_weights", [&] { return fit_weights(h, config.lambda2); });

  TrainReport report{{std::move(model), std::move(weights)}, {}, 0.0, 0.0};
  report.outcome.final_identities =
      final_decisions(local, global, report.matcher.weights, &report.outcome.final_scores);
  report.outcome.local = std::move(local);
  report.outcome.global = std::move(global);
  report.baseline_accuracy = rank1_accuracy(report.outcome.local.baseline_identities, truth);
  report.fapsm_accuracy = rank1_accuracy(report.outcome.final_identities, truth);
  return report;
}

MatchOutcome combine(LocalMatchResult<double> local, const TrainedMatcher& matcher) {
  if (matcher.model.patch_count() != local.patch_count() || matcher.weights.patch_count() != local.patch_count())
    throw Error(Errc::dimension_mismatch, "trained matcher patch count differs from the signatures' m");
  MatchOutcome out;
  out.global = stage("globalize", [&] { return globalize(matcher.model, local); });
  out.final_identities = final_decisions(local, out.global, matcher.weights, &out.final_scores);
  out.local = std::move(local);
  return out;
}

MatchOutcome match(const Gallery& gallery, const ProbeSet& probes, const TrainedMatcher& matcher) {
  auto local = stage("local_match", [&] { return local_match(gallery, probes); });
  return combine(std::move(local), matcher);
}

std::string format_match_results(const MatchOutcome& outcome) {
  std::ostringstream os;
  for (std::size_t i = 0; i < outcome.final_identities.size(); ++i) {
    os << i << ',' << outcome.final_identities[i] << ',' << format_number(outcome.final_scores[i]) << ','
       << outcome.local.baseline_identities[i] << ',' << format_number(outcome.local.baseline_scores[i]) << '\n';
  }
  return os.str();
}

EvaluationReport evaluate(const MatchOutcome& outcome, const std::vector<Label>& truth) {
  const Index n = outcome.local.probe_count();
  const Index m = outcome.local.patch_count();
  if (Index(truth.size()) != n) throw Error(Errc::dimension_mismatch, "evaluate: truth length differs from probes");
  EvaluationReport r;
  r.baseline_accuracy = rank1_accuracy(outcome.local.baseline_identities, truth);
  r.fapsm_accuracy = rank1_accuracy(outcome.final_identities, truth);
  r.local_patch_accuracy = Eigen::VectorXd::Zero(m);
  r.global_patch_accuracy = Eigen::VectorXd::Zero(m);
  r.acceptance_rate = Eigen::VectorXd::Zero(m);
  for (Index i = 0; i < n; ++i) {
    const Label c = truth[std::size_t(i)];
    for (Index j = 0; j < m; ++j) {
      r.local_patch_accuracy[j] += outcome.local.identities(i, j) == c ? 1.0 : 0.0;
      r.global_patch_accuracy[j] += outcome.global.identities(i, j) == c ? 1.0 : 0.0;
      r.acceptance_rate[j] += outcome.global.identities(i, j) != kRejected ? 1.0 : 0.0;
    }
  }
  r.local_patch_accuracy /= double(n);
  r.global_patch_accuracy /= double(n);
  r.acceptance_rate /= double(n);
  return r;
}

std::string EvaluationReport::to_text() const {
  std::ostringstream os;
  os << "rank-1 baseline: " << percent(baseline_accuracy) << "\n";
  os << "rank-1 fapsm:    " << percent(fapsm_accuracy) << "\n";
  os << "patch,local_accuracy,global_accuracy,accepted\n";
  for (Index j = 0; j < local_patch_accuracy.size(); ++j)
    os << (j + 1) << ',' << format_fixed(local_patch_accuracy[j], 4) << ',' << format_fixed(global_patch_accuracy[j], 4)
       << ',' << format_fixed(acceptance_rate[j], 4) << '\n';
  return os.str();
}

SweepResult sweep_threshold(const Gallery& gallery, const ProbeSet& probes, const std::vector<double>& candidates,
                            const PipelineConfig& config) {
  if (candidates.empty()) throw Error(Errc::invalid_argument, "sweep_threshold: empty candidate list");
  config.validate();
  for (double t : candidates)
    if (!(t >= 0.0 && t <= 1.0)) throw Error(Errc::invalid_argument, "sweep_threshold: candidate outside [0, 1]");
  stage("validate_pairing", [&] {
    validate_pairing(gallery, probes).require_ok();
    probes.truth();
    return 0;
  });
  const auto& truth = probes.truth();

  // The associative fit does not depend on t; only thresholding and weights do.
  const auto local = stage("local_match", [&] { return local_match(gallery, probes); });
  const auto model = fit_model(local, truth, config);
  const Eigen::MatrixXd scores = stage("predict_global", [&] { return predict_global(model, local.scores); });

  SweepResult result;
  result.baseline_accuracy = rank1_accuracy(local.baseline_identities, truth);
  bool found = false;
  for (double t : candidates) {
    SweepRow row{t, std::nullopt, {}};
    GlobalMatchResult<double> global{scores, apply_threshold(scores, local.identities, t)};
    try {
      const auto weights = fit_weights(decision_matrix(global.identities, truth), config.lambda2);
      row.accuracy = rank1_accuracy(final_decisions(local, global, weights, nullptr), truth);
    } catch (const Error& e) {
      if (classify(e.code()) != ErrorClass::numerical) throw;
      row.failure = e.what();
    }
    if (row.accuracy && (!found || *row.accuracy > result.best_accuracy ||
                         (*row.accuracy == result.best_accuracy && t < result.best_threshold))) {
      found = true;
      result.best_accuracy = *row.accuracy;
      result.best_threshold = t;
    }
    result.table.push_back(std::move(row));
  }
  if (!found) throw Error(Errc::non_convergence, "sweep_threshold: weight fitting failed for every candidate");
  return result;
}

std::string SweepResult::to_text() const {
  std::ostringstream os;
  os << "t,fapsm_accuracy\n";
  for (const auto& row : table) {
    os << format_number(row.threshold) << ',';
    if (row.accuracy) os << format_fixed(*row.accuracy, 4);
    else os << "failed (" << row.failure << ")";
    os << '\n';
  }
  os << "baseline_accuracy=" << format_fixed(baseline_accuracy, 4) << '\n';
  os << "best_t=" << format_number(best_threshold) << '\n';
  os << "best_accuracy=" << format_fixed(best_accuracy, 4) << '\n';
  return os.str();
}

}  // namespace fapsm
