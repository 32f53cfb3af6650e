#pragma once

#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "fapsm/types.hpp"

namespace fapsm {

/// Fraction of predictions equal to the truth label.
double rank1_accuracy(std::span<const Label> predictions, std::span<const Label> truth);

/// Per-split accuracies: one row per data split, one column per method.
struct SplitResults {
  std::vector<std::string> method_names;
  Eigen::MatrixXd accuracies;

  Index split_count() const noexcept { return accuracies.rows(); }
  Index method_count() const noexcept { return accuracies.cols(); }

  void validate() const;
};

/// Mean rank of each method over splits (1 = best; ties share the mean rank).
Eigen::VectorXd average_ranks(const SplitResults& results);

struct FriedmanStatistics {
  double chi2;
  double iman_f;
};

/// Friedman chi-square and the Iman-Davenport F statistic from average ranks.
/// Throws degenerate_statistic when N(k-1) - chi2 <= 0.
FriedmanStatistics friedman_iman(const Eigen::VectorXd& ranks, Index splits);

/// Bonferroni-Dunn critical difference q_alpha * sqrt(k(k+1) / (6N)).
double bonferroni_dunn_cd(double q_alpha, Index methods, Index splits);

/// Two-tailed Bonferroni-Dunn critical value for k in [2, 10], alpha in {0.05, 0.10}.
std::optional<double> bonferroni_dunn_q(Index methods, double alpha);

struct StatReport {
  std::vector<std::string> method_names;
  Eigen::VectorXd avg_ranks;
  double friedman_chi2 = 0;
  double iman_f = 0;  // +inf when the Iman-Davenport denominator vanishes
  double critical_difference = 0;
  double alpha = 0.10;
  double q_alpha = 0;
  Index splits = 0;
  std::vector<std::pair<std::string, std::string>> significant_pairs;

  std::string to_text() const;
  std::string to_key_values() const;
};

/// Builds a report from average ranks; `q_alpha` overrides the built-in table.
StatReport significance_from_ranks(const Eigen::VectorXd& ranks, Index splits,
                                   std::vector<std::string> method_names, double alpha,
                                   std::optional<double> q_alpha = std::nullopt);

StatReport significance_report(const SplitResults& results, double alpha,
                               std::optional<double> q_alpha = std::nullopt);

}  // namespace fapsm
