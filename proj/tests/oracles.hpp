#pragma once

// Independent reference computations used only by tests. None of these call
// into the library's solvers; they exist to check them.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <random>
#include <vector>

#include <Eigen/Dense>

#include "fapsm/types.hpp"

namespace fapsm::oracle {

inline double plain_cosine(const Eigen::VectorXd& u, const Eigen::VectorXd& v) {
  double dot = 0, nu = 0, nv = 0;
  for (Eigen::Index i = 0; i < u.size(); ++i) {
    dot += u[i] * v[i];
    nu += u[i] * u[i];
    nv += v[i] * v[i];
  }
  return dot / (std::sqrt(nu) * std::sqrt(nv));
}

/// |D - Z W|_F^2 + lambda |W|_F^2
inline double ridge_objective(const Eigen::MatrixXd& z, const Eigen::MatrixXd& d, const Eigen::MatrixXd& w,
                              double lambda) {
  return (d - z * w).squaredNorm() + lambda * w.squaredNorm();
}

/// Plain gradient descent on the ridge objective with step 1/L, L bounded by
/// the Frobenius norm. Runs until the gradient vanishes to `grad_tol`.
inline Eigen::MatrixXd ridge_gradient_descent(const Eigen::MatrixXd& z, const Eigen::MatrixXd& d, double lambda,
                                              double grad_tol = 1e-13, long max_iters = 5'000'000) {
  const double lipschitz = 2.0 * (z.squaredNorm() + lambda);
  const double step = 1.0 / lipschitz;
  Eigen::MatrixXd w = Eigen::MatrixXd::Zero(z.cols(), d.cols());
  for (long it = 0; it < max_iters; ++it) {
    const Eigen::MatrixXd grad = 2.0 * (z.transpose() * (z * w - d) + lambda * w);
    if (grad.cwiseAbs().maxCoeff() < grad_tol) break;
    w -= step * grad;
  }
  return w;
}

/// Augmented-weight objective evaluated directly from H, row by row.
inline double weights_objective_direct(const Eigen::MatrixXd& h, const Eigen::VectorXd& q, double lambda2) {
  double loss = 0;
  for (Eigen::Index i = 0; i < h.rows(); ++i) {
    double margin = 0;
    for (Eigen::Index j = 0; j < h.cols(); ++j) margin += q[j] * h(i, j);
    loss += (1.0 - margin) * (1.0 - margin);
  }
  const double total = q.sum();
  loss += (1.0 - total) * (1.0 - total);
  double l1 = 0;
  for (Eigen::Index j = 0; j < q.size(); ++j) l1 += std::abs(q[j]);
  return loss + lambda2 * l1;
}

struct GridOptimum {
  Eigen::VectorXd q;
  double objective;
};

/**
 * Exact minimum of the augmented-weight objective over the grid
 * {0, step, ..., upper}^m for m = 2 or 3. m = 2 enumerates every point; m = 3
 * enumerates (q1, q2) and, the objective being a convex quadratic in q3,
 * inspects the two grid points bracketing the continuous minimizer in q3.
 */
inline GridOptimum weights_grid_search(const Eigen::MatrixXd& h, double lambda2, double step = 1e-3,
                                       double upper = 2.0) {
  const Eigen::Index m = h.cols();
  const long points = std::lround(upper / step);
  // Quadratic form of the objective: const - 2 c.q + q.A q + lambda2 sum(q).
  Eigen::MatrixXd a = Eigen::MatrixXd::Ones(m, m);
  Eigen::VectorXd c = Eigen::VectorXd::Ones(m);
  for (Eigen::Index i = 0; i < h.rows(); ++i)
    for (Eigen::Index j = 0; j < m; ++j) {
      c[j] += h(i, j);
      for (Eigen::Index k = 0; k < m; ++k) a(j, k) += h(i, j) * h(i, k);
    }
  const double constant = double(h.rows() + 1);
  auto eval = [&](const Eigen::VectorXd& q) {
    return constant - 2.0 * c.dot(q) + q.dot(a * q) + lambda2 * q.sum();
  };

  GridOptimum best{Eigen::VectorXd::Zero(m), std::numeric_limits<double>::infinity()};
  Eigen::VectorXd q(m);
  if (m == 2) {
    for (long i = 0; i <= points; ++i)
      for (long j = 0; j <= points; ++j) {
        q << i * step, j * step;
        const double f = eval(q);
        if (f < best.objective) best = {q, f};
      }
  } else if (m == 3) {
    for (long i = 0; i <= points; ++i)
      for (long j = 0; j <= points; ++j) {
        const double q1 = i * step, q2 = j * step;
        const double lin = 2.0 * (a(0, 2) * q1 + a(1, 2) * q2) - 2.0 * c[2] + lambda2;
        const double cont = -lin / (2.0 * a(2, 2));
        const long lo = std::clamp(long(std::floor(cont / step)), 0L, points);
        for (long k : {lo, std::min(lo + 1, points)}) {
          q << q1, q2, k * step;
          const double f = eval(q);
          if (f < best.objective) best = {q, f};
        }
      }
  }
  return best;
}

/// Random decision matrix whose column j is +1 with probability reliability[j].
inline Eigen::MatrixXd random_decisions(Eigen::Index rows, const std::vector<double>& reliability,
                                        std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  Eigen::MatrixXd h(rows, Eigen::Index(reliability.size()));
  for (Eigen::Index i = 0; i < rows; ++i)
    for (Eigen::Index j = 0; j < h.cols(); ++j) h(i, j) = u(rng) < reliability[std::size_t(j)] ? 1.0 : -1.0;
  return h;
}

}  // namespace fapsm::oracle
