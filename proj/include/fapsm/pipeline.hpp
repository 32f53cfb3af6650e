#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "fapsm/associative.hpp"
#include "fapsm/local_matcher.hpp"
#include "fapsm/signature.hpp"
#include "fapsm/weights.hpp"

namespace fapsm {

struct PipelineConfig {
  AssociativeMode mode = AssociativeMode::kernel;
  double lambda1 = 1.0;
  double lambda2 = 0.01;
  double threshold = 0.4;
  KernelSpec<double> kernel{KernelKind::gaussian, 0.05};
  Index sample_count = 0;  // 0 selects min(n, 1000)
  std::uint64_t seed = 1;

  void validate() const;
  Index effective_sample_count(Index training_rows) const;
};

struct TrainedMatcher {
  AssociativeModel<double> model;
  PatchWeights<double> weights;
};

/// Outcome of matching a probe set: local, global and final decisions.
struct MatchOutcome {
  LocalMatchResult<double> local;
  GlobalMatchResult<double> global;
  std::vector<Label> final_identities;  // kRejected when nothing could vote
  std::vector<double> final_scores;
};

struct TrainReport {
  TrainedMatcher matcher;
  MatchOutcome outcome;
  double baseline_accuracy = 0;
  double fapsm_accuracy = 0;
};

/// Local matching -> supervision -> associative fit -> thresholding -> weight fit.
TrainReport train(const Gallery& gallery, const ProbeSet& probes, const PipelineConfig& config);

/// Final decisions from precomputed local matches.
MatchOutcome combine(LocalMatchResult<double> local, const TrainedMatcher& matcher);

MatchOutcome match(const Gallery& gallery, const ProbeSet& probes, const TrainedMatcher& matcher);

/// One "probe_index,final_identity,final_score,baseline_identity,baseline_score" line per probe.
std::string format_match_results(const MatchOutcome& outcome);

struct EvaluationReport {
  double baseline_accuracy = 0;
  double fapsm_accuracy = 0;
  Eigen::VectorXd local_patch_accuracy;   // P == truth
  Eigen::VectorXd global_patch_accuracy;  // G == truth
  Eigen::VectorXd acceptance_rate;        // G != rejected

  std::string to_text() const;
};

EvaluationReport evaluate(const MatchOutcome& outcome, const std::vector<Label>& truth);

struct SweepRow {
  double threshold;
  std::optional<double> accuracy;  // empty when weight fitting failed
  std::string failure;
};

struct SweepResult {
  double best_threshold = 0;
  double best_accuracy = 0;
  double baseline_accuracy = 0;
  std::vector<SweepRow> table;

  std::string to_text() const;
};

/// Trains at each candidate threshold and keeps the most accurate (ties -> smaller t).
SweepResult sweep_threshold(const Gallery& gallery, const ProbeSet& probes, const std::vector<double>& candidates,
                            const PipelineConfig& config);

}  // namespace fapsm
