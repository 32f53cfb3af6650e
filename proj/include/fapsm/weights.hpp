#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <optional>
#include <span>
#include <string>

#include "fapsm/errors.hpp"
#include "fapsm/types.hpp"

namespace fapsm {

/// +1 where the global identity is the true label, -1 otherwise (rejections included).
template <typename Scalar = double>
Matrix<Scalar> decision_matrix(const LabelMatrix& global_identities, std::span<const Label> truth) {
  if (Index(truth.size()) != global_identities.rows())
    throw Error(Errc::dimension_mismatch, "decision_matrix: truth length differs from row count");
  Matrix<Scalar> h(global_identities.rows(), global_identities.cols());
  for (Index i = 0; i < h.rows(); ++i)
    for (Index j = 0; j < h.cols(); ++j)
      h(i, j) = global_identities(i, j) == truth[std::size_t(i)] ? Scalar(1) : Scalar(-1);
  return h;
}

template <typename Scalar>
struct PatchWeights {
  Vector<Scalar> weights;
  Scalar lambda2 = Scalar(0.01);

  Index patch_count() const noexcept { return weights.size(); }
};

struct WeightSolverOptions {
  double tolerance = 1e-10;  // max coordinate change per sweep
  int max_sweeps = 10000;
  double kkt_tolerance = 1e-6;
};

template <typename Scalar>
struct WeightSolution {
  PatchWeights<Scalar> weights;
  int sweeps = 0;
  Scalar max_change = Scalar(0);
  Scalar kkt_residual = Scalar(0);
};

namespace detail {

// Augmented system: rows of H followed by a row of ones; all-ones target.
template <typename Scalar>
Matrix<Scalar> augment_decisions(const Matrix<Scalar>& h) {
  Matrix<Scalar> aug(h.rows() + 1, h.cols());
  aug.topRows(h.rows()) = h;
  aug.row(h.rows()).setOnes();
  return aug;
}

// Worst violation of the optimality conditions for q >= 0.
template <typename Scalar>
Scalar weight_kkt_residual(const Vector<Scalar>& gradient, const Vector<Scalar>& q) {
  Scalar worst(0);
  for (Index j = 0; j < q.size(); ++j) {
    const Scalar v = q[j] > Scalar(0) ? std::abs(gradient[j]) : std::max(Scalar(0), -gradient[j]);
    worst = std::max(worst, v);
  }
  return worst;
}

}  // namespace detail

/// |e' - H' q|^2 + lambda2 |q|_1 with H' = [H; 1^T], e' = 1.
template <typename Scalar>
Scalar weights_objective(const Matrix<Scalar>& h, const Vector<Scalar>& q, Scalar lambda2) {
  const Matrix<Scalar> aug = detail::augment_decisions(h);
  return (Vector<Scalar>::Ones(aug.rows()) - aug * q).squaredNorm() + lambda2 * q.cwiseAbs().sum();
}

/**
 * Non-negative l1-regularized patch weights by cyclic coordinate descent on the
 * augmented least-squares problem. Throws non_convergence if the sweep budget
 * runs out or the KKT check fails, and all_weights_zero if every weight is
 * shrunk to zero.
 */
template <typename Scalar>
WeightSolution<Scalar> solve_weights(const Matrix<Scalar>& h, Scalar lambda2,
                                     const WeightSolverOptions& opts = {}) {
  if (h.rows() < 1 || h.cols() < 1) throw Error(Errc::invalid_argument, "fit_weights: empty decision matrix");
  if (!(lambda2 > Scalar(0))) throw Error(Errc::invalid_argument, "fit_weights: lambda2 must be positive");

  const Matrix<Scalar> aug = detail::augment_decisions(h);
  const Matrix<Scalar> gram = aug.transpose() * aug;
  const Vector<Scalar> corr = aug.transpose() * Vector<Scalar>::Ones(aug.rows());
  const Index m = h.cols();
  const Scalar half_penalty = lambda2 / Scalar(2);

  Vector<Scalar> q = Vector<Scalar>::Zero(m);
  Vector<Scalar> gq = Vector<Scalar>::Zero(m);  // gram * q

  WeightSolution<Scalar> sol;
  bool converged = false;
  while (sol.sweeps < opts.max_sweeps) {
    ++sol.sweeps;
    Scalar max_change(0);
    for (Index j = 0; j < m; ++j) {
      const Scalar a = gram(j, j);
      const Scalar rho = corr[j] - gq[j] + a * q[j];
      const Scalar next = std::max(Scalar(0), (rho - half_penalty) / a);
      const Scalar delta = next - q[j];
      if (delta != Scalar(0)) {
        gq += delta * gram.col(j);
        q[j] = next;
        max_change = std::max(max_change, std::abs(delta));
      }
    }
    sol.max_change = max_change;
    if (max_change < Scalar(opts.tolerance)) {
      converged = true;
      break;
    }
  }

  const Vector<Scalar> gradient = Scalar(2) * (gram * q - corr) + Vector<Scalar>::Constant(m, lambda2);
  sol.kkt_residual = detail::weight_kkt_residual(gradient, q);
  if (!converged || sol.kkt_residual > Scalar(opts.kkt_tolerance)) {
    throw Error(Errc::non_convergence,
                "coordinate descent did not converge after " + std::to_string(sol.sweeps) +
                    " sweeps (max change " + std::to_string(double(sol.max_change)) +
                    ", KKT residual " + std::to_string(double(sol.kkt_residual)) + ")");
  }
  if ((q.array() > Scalar(0)).count() == 0) {
    throw Error(Errc::all_weights_zero,
                "lambda2 = " + std::to_string(double(lambda2)) + " shrinks every weight to zero");
  }
  sol.weights = PatchWeights<Scalar>{std::move(q), lambda2};
  return sol;
}

template <typename Scalar>
PatchWeights<Scalar> fit_weights(const Matrix<Scalar>& h, Scalar lambda2, const WeightSolverOptions& opts = {}) {
  return solve_weights(h, lambda2, opts).weights;
}

template <typename Scalar>
struct BaselineVote {
  Label identity;
  Scalar score;
};

template <typename Scalar>
struct FinalMatch {
  Label identity;
  Scalar score;
};

/**
 * Weighted vote over the accepted patch identities of one probe: each
 * candidate c collects sum of q_i * y_i over patches with g_i == c, and the
 * holistic rank-1 identity adds its score with weight 1. Ties go to the
 * smaller identity.
 */
template <typename Scalar, typename DerivedG, typename DerivedY>
FinalMatch<Scalar> final_identity(const Eigen::MatrixBase<DerivedG>& global_identities,
                                  const Eigen::MatrixBase<DerivedY>& global_scores,
                                  const PatchWeights<Scalar>& weights,
                                  const std::optional<BaselineVote<Scalar>>& baseline = std::nullopt) {
  const Index m = weights.patch_count();
  if (global_identities.size() != m || global_scores.size() != m)
    throw Error(Errc::dimension_mismatch, "final_identity: row lengths differ from weight count");

  std::map<Label, Scalar> votes;
  for (Index i = 0; i < m; ++i) {
    const Label c = global_identities(i);
    if (c == kRejected) continue;
    votes[c] += weights.weights[i] * Scalar(global_scores(i));
  }
  if (baseline && baseline->identity != kRejected) votes[baseline->identity] += baseline->score;

  if (votes.empty()) throw Error(Errc::no_candidates, "final_identity: every patch rejected and no baseline");
  auto best = votes.begin();
  for (auto it = std::next(votes.begin()); it != votes.end(); ++it)
    if (it->second > best->second) best = it;
  return {best->first, best->second};
}

}  // namespace fapsm
