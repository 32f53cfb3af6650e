#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "fapsm/errors.hpp"
#include "fapsm/local_matcher.hpp"
#include "fapsm/types.hpp"

namespace fapsm {

/// Binary supervision: 1 where the local patch identity equals the truth label.
template <typename Scalar = double>
Matrix<Scalar> corrected_matrix(const LabelMatrix& local_identities, std::span<const Label> truth) {
  if (Index(truth.size()) != local_identities.rows()) {
    throw Error(Errc::dimension_mismatch, "corrected_matrix: truth has " +
                                              std::to_string(truth.size()) + " labels for " +
                                              std::to_string(local_identities.rows()) + " rows");
  }
  Matrix<Scalar> d(local_identities.rows(), local_identities.cols());
  for (Index i = 0; i < d.rows(); ++i)
    for (Index j = 0; j < d.cols(); ++j)
      d(i, j) = local_identities(i, j) == truth[std::size_t(i)] ? Scalar(1) : Scalar(0);
  return d;
}

template <typename Scalar>
Matrix<Scalar> corrected_matrix(const LocalMatchResult<Scalar>& local, std::span<const Label> truth) {
  return corrected_matrix<Scalar>(local.identities, truth);
}

enum class KernelKind { linear, gaussian };

inline std::string to_string(KernelKind k) { return k == KernelKind::linear ? "linear" : "gaussian"; }

/// Gaussian form is exp(-|a - b|^2 / (2 sigma^2)).
template <typename Scalar>
struct KernelSpec {
  KernelKind kind = KernelKind::gaussian;
  Scalar sigma = Scalar(0.05);

  void validate() const {
    if (kind == KernelKind::gaussian && !(sigma > Scalar(0) && std::isfinite(sigma))) {
      throw Error(Errc::invalid_argument, "gaussian kernel requires sigma > 0");
    }
  }

  template <typename DerivedA, typename DerivedB>
  Scalar operator()(const Eigen::MatrixBase<DerivedA>& a, const Eigen::MatrixBase<DerivedB>& b) const {
    if (kind == KernelKind::linear) return a.dot(b);
    return std::exp(-(a - b).squaredNorm() / (Scalar(2) * sigma * sigma));
  }
};

/// Kernel matrix between the rows of `a` and the rows of `b`.
template <typename Scalar, typename DerivedA, typename DerivedB>
Matrix<Scalar> kernel_matrix(const KernelSpec<Scalar>& kernel, const Eigen::MatrixBase<DerivedA>& a,
                             const Eigen::MatrixBase<DerivedB>& b) {
  if (kernel.kind == KernelKind::linear) return a * b.transpose();
  Matrix<Scalar> k(a.rows(), b.rows());
  for (Index i = 0; i < a.rows(); ++i)
    for (Index j = 0; j < b.rows(); ++j) k(i, j) = kernel(a.row(i), b.row(j));
  return k;
}

enum class AssociativeMode { linear, kernel };

inline std::string to_string(AssociativeMode m) { return m == AssociativeMode::linear ? "linear" : "kernel"; }

/**
 * Trained fully associative structure mapping a local score row to a global
 * score row. Linear mode stores the m x m weight matrix; kernel mode stores the
 * retained training rows and the dual coefficients (K + lambda1 I)^-1 D.
 */
template <typename Scalar>
struct AssociativeModel {
  AssociativeMode mode = AssociativeMode::kernel;
  Matrix<Scalar> linear_weights;
  Matrix<Scalar> support_scores;
  Matrix<Scalar> alpha;
  Scalar lambda1 = Scalar(1);
  KernelSpec<Scalar> kernel;
  Scalar threshold = Scalar(0.4);

  Index patch_count() const {
    return mode == AssociativeMode::linear ? linear_weights.cols() : alpha.cols();
  }
  Index support_count() const { return mode == AssociativeMode::kernel ? support_scores.rows() : 0; }

  void validate() const {
    if (!(lambda1 > Scalar(0))) throw Error(Errc::invalid_argument, "lambda1 must be positive");
    if (!(threshold >= Scalar(0) && threshold <= Scalar(1)))
      throw Error(Errc::invalid_argument, "threshold must lie in [0, 1]");
    kernel.validate();
    if (mode == AssociativeMode::linear) {
      if (linear_weights.rows() != linear_weights.cols() || linear_weights.size() == 0)
        throw Error(Errc::dimension_mismatch, "linear weights must be square and nonempty");
      if (!linear_weights.allFinite()) throw Error(Errc::invalid_argument, "non-finite linear weights");
    } else {
      if (support_scores.rows() < 1 || support_scores.rows() != alpha.rows() ||
          support_scores.cols() != alpha.cols())
        throw Error(Errc::dimension_mismatch, "support rows and alpha rows disagree");
    }
  }
};

namespace detail {

template <typename Scalar>
void require_finite(const Matrix<Scalar>& a, const char* what) {
  if (!a.allFinite()) throw Error(Errc::invalid_argument, std::string(what) + " has non-finite entries");
}

// Solves (A + lambda I) X = B for symmetric PSD A and lambda > 0.
template <typename Scalar>
Matrix<Scalar> regularized_spd_solve(const Matrix<Scalar>& a, Scalar lambda, const Matrix<Scalar>& b) {
  Matrix<Scalar> lhs = a;
  lhs.diagonal().array() += lambda;
  Eigen::LLT<Matrix<Scalar>> llt(lhs);
  if (llt.info() != Eigen::Success) {
    throw Error(Errc::solve_failure, "regularized system is not positive definite");
  }
  Matrix<Scalar> x = llt.solve(b);
  const Scalar scale = std::max<Scalar>({Scalar(1), lhs.cwiseAbs().maxCoeff(), b.cwiseAbs().maxCoeff()});
  const Scalar residual = b.size() == 0 ? Scalar(0) : (lhs * x - b).cwiseAbs().maxCoeff();
  if (!x.allFinite() || residual > Scalar(1e-8) * scale) {
    throw Error(Errc::solve_failure,
                "regularized solve residual " + std::to_string(double(residual)) + " too large");
  }
  return x;
}

}  // namespace detail

/// Ridge solution W = (Z^T Z + lambda1 I)^-1 Z^T D.
template <typename Scalar>
Matrix<Scalar> fit_linear(const Matrix<Scalar>& z, const Matrix<Scalar>& d, Scalar lambda1) {
  if (z.rows() != d.rows() || z.cols() != d.cols())
    throw Error(Errc::dimension_mismatch, "fit_linear: Z and D differ in shape");
  if (!(lambda1 > Scalar(0))) throw Error(Errc::invalid_argument, "fit_linear: lambda1 must be positive");
  detail::require_finite(z, "Z");
  detail::require_finite(d, "D");
  const Matrix<Scalar> gram = z.transpose() * z;
  const Matrix<Scalar> rhs = z.transpose() * d;
  return detail::regularized_spd_solve<Scalar>(gram, lambda1, rhs);
}

template <typename Scalar>
AssociativeModel<Scalar> make_linear_model(Matrix<Scalar> weights, Scalar lambda1, Scalar threshold) {
  AssociativeModel<Scalar> model;
  model.mode = AssociativeMode::linear;
  model.linear_weights = std::move(weights);
  model.lambda1 = lambda1;
  model.kernel.kind = KernelKind::linear;
  model.threshold = threshold;
  model.validate();
  return model;
}

/// Uniform selection of `count` of `n` row indices without replacement, ascending.
inline std::vector<Index> select_samples(Index n, Index count, std::uint64_t seed) {
  if (count < 1 || count > n)
    throw Error(Errc::invalid_argument, "sample count must satisfy 1 <= n_k <= n");
  std::vector<Index> idx(static_cast<std::size_t>(n));
  std::iota(idx.begin(), idx.end(), Index(0));
  std::mt19937_64 rng(seed);
  for (Index i = 0; i < count; ++i) {
    std::uniform_int_distribution<Index> pick(i, n - 1);
    std::swap(idx[std::size_t(i)], idx[std::size_t(pick(rng))]);
  }
  idx.resize(std::size_t(count));
  std::sort(idx.begin(), idx.end());
  return idx;
}

/// Kernel ridge fit on `sample_count` rows drawn uniformly from (Z, D).
template <typename Scalar>
AssociativeModel<Scalar> fit_kernel(const Matrix<Scalar>& z, const Matrix<Scalar>& d, Scalar lambda1,
                                    const KernelSpec<Scalar>& kernel, Index sample_count,
                                    std::uint64_t seed) {
  if (z.rows() != d.rows() || z.cols() != d.cols())
    throw Error(Errc::dimension_mismatch, "fit_kernel: Z and D differ in shape");
  if (!(lambda1 > Scalar(0))) throw Error(Errc::invalid_argument, "fit_kernel: lambda1 must be positive");
  kernel.validate();
  detail::require_finite(z, "Z");
  detail::require_finite(d, "D");

  const auto rows = select_samples(z.rows(), sample_count, seed);
  const Matrix<Scalar> support = z(rows, Eigen::all);
  const Matrix<Scalar> targets = d(rows, Eigen::all);

  AssociativeModel<Scalar> model;
  model.mode = AssociativeMode::kernel;
  model.lambda1 = lambda1;
  model.kernel = kernel;
  model.alpha = detail::regularized_spd_solve<Scalar>(kernel_matrix(kernel, support, support), lambda1, targets);
  model.support_scores = support;
  return model;
}

/// Global scores for a batch of local score rows (one row per probe).
template <typename Scalar, typename Derived>
Matrix<Scalar> predict_global(const AssociativeModel<Scalar>& model, const Eigen::MatrixBase<Derived>& z) {
  if (z.cols() != model.patch_count())
    throw Error(Errc::dimension_mismatch, "predict_global: score row has " + std::to_string(z.cols()) +
                                              " entries, model expects " +
                                              std::to_string(model.patch_count()));
  if (model.mode == AssociativeMode::linear) return z * model.linear_weights;
  return kernel_matrix(model.kernel, z, model.support_scores) * model.alpha;
}

/// Single-row convenience overload.
template <typename Scalar>
RowVector<Scalar> predict_global_row(const AssociativeModel<Scalar>& model, const RowVector<Scalar>& z) {
  return predict_global(model, z).row(0);
}

template <typename Scalar>
struct GlobalMatchResult {
  Matrix<Scalar> scores;   // Y
  LabelMatrix identities;  // G
};

/// G(i, j) = P(i, j) where Y(i, j) >= t, otherwise kRejected.
template <typename Scalar>
LabelMatrix apply_threshold(const Matrix<Scalar>& scores, const LabelMatrix& local_identities, Scalar threshold) {
  if (scores.rows() != local_identities.rows() || scores.cols() != local_identities.cols())
    throw Error(Errc::dimension_mismatch, "apply_threshold: Y and P differ in shape");
  return (scores.array() >= threshold).select(local_identities, LabelMatrix::Constant(scores.rows(), scores.cols(), kRejected));
}

template <typename Scalar>
GlobalMatchResult<Scalar> globalize(const AssociativeModel<Scalar>& model, const LocalMatchResult<Scalar>& local) {
  GlobalMatchResult<Scalar> out;
  out.scores = predict_global(model, local.scores);
  out.identities = apply_threshold(out.scores, local.identities, model.threshold);
  return out;
}

}  // namespace fapsm
