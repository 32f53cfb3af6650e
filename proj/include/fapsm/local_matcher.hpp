#pragma once

#include <algorithm>
#include <vector>

#include "fapsm/errors.hpp"
#include "fapsm/signature.hpp"
#include "fapsm/types.hpp"

namespace fapsm {

/// Cosine of the angle between two equal-length, nonzero vectors.
template <typename DerivedU, typename DerivedV>
typename DerivedU::Scalar cosine_score(const Eigen::MatrixBase<DerivedU>& u,
                                       const Eigen::MatrixBase<DerivedV>& v) {
  using Scalar = typename DerivedU::Scalar;
  if (u.size() != v.size()) {
    throw Error(Errc::dimension_mismatch, "cosine_score: vectors differ in length");
  }
  const Scalar nu = u.norm();
  const Scalar nv = v.norm();
  if (nu == Scalar(0) || nv == Scalar(0)) {
    throw Error(Errc::zero_vector, "cosine_score: zero vector");
  }
  return u.dot(v) / (nu * nv);
}

template <typename Scalar>
struct BaselineScore {
  Scalar score;
  Index shared_patches;  // k: patches visible in both signatures
};

/// Holistic signature score: mean cosine over mutually visible patches.
template <typename Scalar>
BaselineScore<Scalar> baseline_score(const BasicSignature<Scalar>& gallery,
                                     const BasicSignature<Scalar>& probe) {
  if (gallery.feature_dim() != probe.feature_dim() ||
      gallery.patch_count() != probe.patch_count()) {
    throw Error(Errc::dimension_mismatch, "baseline_score: signatures differ in b or m");
  }
  Scalar sum(0);
  Index k = 0;
  for (Index j = 0; j < probe.patch_count(); ++j) {
    if (gallery.visible(j) && probe.visible(j)) {
      sum += cosine_score(gallery.patch(j), probe.patch(j));
      ++k;
    }
  }
  if (k == 0) {
    throw Error(Errc::incomparable_pair, "baseline_score: no mutually visible patch");
  }
  return {sum / Scalar(k), k};
}

/**
 * Per-patch local matching for a probe set.
 *
 * identities(i, j) is the gallery label whose patch j is most similar to probe
 * i's patch j; scores(i, j) is that cosine clipped to [0, 1]. Occluded probe
 * patches, and patches occluded across the whole gallery, get kRejected / 0.
 * baseline_* hold the rank-1 identity and score of the holistic matcher
 * (kRejected / 0 when no gallery entry shares a visible patch with the probe).
 */
template <typename Scalar>
struct LocalMatchResult {
  LabelMatrix identities;
  Matrix<Scalar> scores;
  std::vector<Label> baseline_identities;
  std::vector<Scalar> baseline_scores;

  Index probe_count() const noexcept { return identities.rows(); }
  Index patch_count() const noexcept { return identities.cols(); }
};

namespace detail {

// Column-normalized copy of patch j for every gallery entry (zero if occluded).
template <typename Scalar>
Matrix<Scalar> normalized_gallery_patch(const BasicGallery<Scalar>& gallery, Index j) {
  Matrix<Scalar> out = Matrix<Scalar>::Zero(gallery.feature_dim(), Index(gallery.size()));
  for (std::size_t e = 0; e < gallery.size(); ++e) {
    const auto& sig = gallery[e].signature;
    if (sig.visible(j)) out.col(Index(e)) = sig.patch(j).normalized();
  }
  return out;
}

}  // namespace detail

template <typename Scalar>
LocalMatchResult<Scalar> local_match(const BasicGallery<Scalar>& gallery,
                                     const BasicProbeSet<Scalar>& probes) {
  validate_pairing(gallery, probes).require_ok();

  const Index n = Index(probes.size());
  const Index m = gallery.patch_count();
  const Index l = Index(gallery.size());

  std::vector<Matrix<Scalar>> patches;
  patches.reserve(std::size_t(m));
  for (Index j = 0; j < m; ++j) patches.push_back(detail::normalized_gallery_patch(gallery, j));

  LocalMatchResult<Scalar> result;
  result.identities = LabelMatrix::Constant(n, m, kRejected);
  result.scores = Matrix<Scalar>::Zero(n, m);
  result.baseline_identities.assign(std::size_t(n), kRejected);
  result.baseline_scores.assign(std::size_t(n), Scalar(0));

  Matrix<Scalar> cosines(l, m);
  Vector<Scalar> sums(l);
  Eigen::VectorXi shared(l);

  for (Index i = 0; i < n; ++i) {
    const auto& probe = probes[std::size_t(i)];
    sums.setZero();
    shared.setZero();
    for (Index j = 0; j < m; ++j) {
      if (!probe.visible(j)) continue;
      cosines.col(j).noalias() = patches[std::size_t(j)].transpose() * probe.patch(j).normalized();

      Index best = -1;
      for (Index e = 0; e < l; ++e) {
        if (!gallery[std::size_t(e)].signature.visible(j)) continue;
        sums[e] += cosines(e, j);
        shared[e] += 1;
        if (best < 0 || cosines(e, j) > cosines(best, j)) best = e;
      }
      if (best >= 0) {
        result.identities(i, j) = gallery[std::size_t(best)].identity;
        result.scores(i, j) = std::clamp(cosines(best, j), Scalar(0), Scalar(1));
      }
    }

    Index best = -1;
    Scalar best_score(0);
    for (Index e = 0; e < l; ++e) {
      if (shared[e] == 0) continue;
      const Scalar s = sums[e] / Scalar(shared[e]);
      if (best < 0 || s > best_score) {
        best = e;
        best_score = s;
      }
    }
    if (best >= 0) {
      result.baseline_identities[std::size_t(i)] = gallery[std::size_t(best)].identity;
      result.baseline_scores[std::size_t(i)] = best_score;
    }
  }
  return result;
}

}  // namespace fapsm
