#include "fapsm/evaluation.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

#include "fapsm/errors.hpp"
#include "fapsm/format.hpp"

namespace fapsm {

double rank1_accuracy(std::span<const Label> predictions, std::span<const Label> truth) {
  if (predictions.size() != truth.size())
    throw Error(Errc::dimension_mismatch, "rank1_accuracy: prediction and truth lengths differ");
  if (predictions.empty()) throw Error(Errc::invalid_argument, "rank1_accuracy: empty input");
  std::size_t hits = 0;
  for (std::size_t i = 0; i < truth.size(); ++i) hits += predictions[i] == truth[i] ? 1 : 0;
  return double(hits) / double(truth.size());
}

void SplitResults::validate() const {
  if (split_count() < 2 || method_count() < 2)
    throw Error(Errc::invalid_argument, "split results need at least 2 splits and 2 methods");
  if (Index(method_names.size()) != method_count())
    throw Error(Errc::dimension_mismatch, "method name count differs from accuracy columns");
  for (Index i = 0; i < accuracies.rows(); ++i)
    for (Index j = 0; j < accuracies.cols(); ++j) {
      const double a = accuracies(i, j);
      if (!(a >= 0.0 && a <= 1.0))
        throw Error(Errc::invalid_argument, "accuracy at split " + std::to_string(i + 1) +
                                                " method " + std::to_string(j + 1) + " outside [0, 1]");
    }
}

Eigen::VectorXd average_ranks(const SplitResults& results) {
  results.validate();
  const Index k = results.method_count();
  Eigen::VectorXd total = Eigen::VectorXd::Zero(k);
  std::vector<Index> order(static_cast<std::size_t>(k));
  for (Index s = 0; s < results.split_count(); ++s) {
    const auto row = results.accuracies.row(s);
    std::iota(order.begin(), order.end(), Index(0));
    std::stable_sort(order.begin(), order.end(), [&](Index a, Index b) { return row(a) > row(b); });
    std::size_t pos = 0;
    while (pos < order.size()) {
      std::size_t end = pos + 1;
      while (end < order.size() && row(order[end]) == row(order[pos])) ++end;
      // Positions pos..end-1 hold ranks pos+1..end; share their mean.
      const double shared = 0.5 * double(pos + 1 + end);
      for (std::size_t t = pos; t < end; ++t) total[order[t]] += shared;
      pos = end;
    }
  }
  return total / double(results.split_count());
}

FriedmanStatistics friedman_iman(const Eigen::VectorXd& ranks, Index splits) {
  const Index k = ranks.size();
  if (k < 2 || splits < 2) throw Error(Errc::invalid_argument, "friedman_iman requires k >= 2 and N >= 2");
  const double n = double(splits);
  const double kk = double(k);
  double chi2 = 12.0 * n / (kk * (kk + 1.0)) * (ranks.squaredNorm() - kk * (kk + 1.0) * (kk + 1.0) / 4.0);
  // Rounding of exactly tied ranks can leave a tiny negative value.
  if (std::abs(chi2) < 1e-12 * n) chi2 = 0.0;
  const double denom = n * (kk - 1.0) - chi2;
  if (denom <= 1e-12 * n * kk) {
    throw Error(Errc::degenerate_statistic,
                "Iman-Davenport denominator N(k-1) - chi2 = " + format_number(denom) + " is not positive");
  }
  return {chi2, (n - 1.0) * chi2 / denom};
}

double bonferroni_dunn_cd(double q_alpha, Index methods, Index splits) {
  if (!(q_alpha > 0.0)) throw Error(Errc::invalid_argument, "bonferroni_dunn_cd: q_alpha must be positive");
  if (methods < 2 || splits < 1) throw Error(Errc::invalid_argument, "bonferroni_dunn_cd: need k >= 2, N >= 1");
  const double k = double(methods);
  return q_alpha * std::sqrt(k * (k + 1.0) / (6.0 * double(splits)));
}

std::optional<double> bonferroni_dunn_q(Index methods, double alpha) {
  // Two-tailed Bonferroni-Dunn critical values, k = 2..10. The k = 2, alpha = 0.10
  // entry is rounded to 1.65.
  static constexpr std::array<double, 9> q05 = {1.960, 2.241, 2.394, 2.498, 2.576, 2.638, 2.690, 2.724, 2.773};
  static constexpr std::array<double, 9> q10 = {1.65, 1.960, 2.128, 2.241, 2.326, 2.394, 2.450, 2.498, 2.539};
  if (methods < 2 || methods > 10) return std::nullopt;
  const auto slot = std::size_t(methods - 2);
  if (std::abs(alpha - 0.05) < 1e-12) return q05[slot];
  if (std::abs(alpha - 0.10) < 1e-12) return q10[slot];
  return std::nullopt;
}

StatReport significance_from_ranks(const Eigen::VectorXd& ranks, Index splits,
                                   std::vector<std::string> method_names, double alpha,
                                   std::optional<double> q_alpha) {
  const Index k = ranks.size();
  if (Index(method_names.size()) != k)
    throw Error(Errc::dimension_mismatch, "significance: method name count differs from rank count");
  if (!q_alpha) q_alpha = bonferroni_dunn_q(k, alpha);
  if (!q_alpha)
    throw Error(Errc::invalid_argument, "no built-in Bonferroni-Dunn value for k=" + std::to_string(k) +
                                            " alpha=" + format_number(alpha) + "; pass q_alpha explicitly");

  StatReport report;
  report.method_names = std::move(method_names);
  report.avg_ranks = ranks;
  report.alpha = alpha;
  report.q_alpha = *q_alpha;
  report.splits = splits;
  try {
    const auto stats = friedman_iman(ranks, splits);
    report.friedman_chi2 = stats.chi2;
    report.iman_f = stats.iman_f;
  } catch (const Error& e) {
    if (e.code() != Errc::degenerate_statistic) throw;
    // Perfectly consistent orderings: chi2 attains N(k-1) and F_F is unbounded.
    const double kk = double(k);
    const double n = double(splits);
    report.friedman_chi2 = 12.0 * n / (kk * (kk + 1.0)) * (ranks.squaredNorm() - kk * (kk + 1.0) * (kk + 1.0) / 4.0);
    report.iman_f = std::numeric_limits<double>::infinity();
  }
  report.critical_difference = bonferroni_dunn_cd(*q_alpha, k, splits);
  for (Index a = 0; a < k; ++a)
    for (Index b = a + 1; b < k; ++b)
      if (std::abs(ranks[a] - ranks[b]) > report.critical_difference)
        report.significant_pairs.emplace_back(report.method_names[std::size_t(a)],
                                              report.method_names[std::size_t(b)]);
  return report;
}

StatReport significance_report(const SplitResults& results, double alpha, std::optional<double> q_alpha) {
  return significance_from_ranks(average_ranks(results), results.split_count(), results.method_names, alpha,
                                 q_alpha);
}

std::string StatReport::to_text() const {
  std::ostringstream os;
  os << "Friedman / Iman-Davenport comparison over " << splits << " splits, " << method_names.size()
     << " methods\n";
  os << "average ranks:\n";
  for (std::size_t j = 0; j < method_names.size(); ++j)
    os << "  " << method_names[j] << ": " << format_fixed(avg_ranks[Index(j)], 4) << "\n";
  os << "Friedman chi2 = " << format_fixed(friedman_chi2, 4) << "\n";
  os << "Iman-Davenport F = " << (std::isinf(iman_f) ? std::string("inf") : format_fixed(iman_f, 4)) << "\n";
  os << "Bonferroni-Dunn q_alpha = " << format_number(q_alpha) << " (alpha = " << format_number(alpha)
     << "), CD = " << format_fixed(critical_difference, 4) << "\n";
  if (significant_pairs.empty()) {
    os << "no significantly different pairs\n";
  } else {
    for (const auto& [a, b] : significant_pairs) os << "significant: " << a << " vs " << b << "\n";
  }
  return os.str();
}

std::string StatReport::to_key_values() const {
  std::ostringstream os;
  os << "splits=" << splits << "\n";
  os << "methods=";
  for (std::size_t j = 0; j < method_names.size(); ++j) os << (j ? "," : "") << method_names[j];
  os << "\navg_ranks=";
  for (Index j = 0; j < avg_ranks.size(); ++j) os << (j ? "," : "") << format_number(avg_ranks[j]);
  os << "\nfriedman_chi2=" << format_number(friedman_chi2) << "\n";
  os << "iman_f=" << (std::isinf(iman_f) ? std::string("inf") : format_number(iman_f)) << "\n";
  os << "alpha=" << format_number(alpha) << "\n";
  os << "q_alpha=" << format_number(q_alpha) << "\n";
  os << "critical_difference=" << format_number(critical_difference) << "\n";
  os << "significant_pairs=";
  for (std::size_t p = 0; p < significant_pairs.size(); ++p)
    os << (p ? ";" : "") << significant_pairs[p].first << ":" << significant_pairs[p].second;
  os << "\n";
  return os.str();
}

}  // namespace fapsm
