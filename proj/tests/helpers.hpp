#pragma once

#include <random>
#include <vector>

#include "fapsm/signature.hpp"

namespace fapsm::testing {

/// Gallery of `identities` entries whose patch j of identity i is the basis
/// vector e_{(i * m + j) mod b}, so distinct (identity, patch) pairs are orthogonal
/// when b >= identities * m.
inline Gallery basis_gallery(Index identities, Index b, Index m) {
  std::vector<GalleryEntry<double>> entries;
  for (Index id = 0; id < identities; ++id) {
    Eigen::MatrixXd f = Eigen::MatrixXd::Zero(b, m);
    for (Index j = 0; j < m; ++j) f((id * m + j) % b, j) = 1.0;
    entries.push_back({Label(id + 1), Signature(f)});
  }
  return Gallery(std::move(entries));
}

inline Signature random_signature(Index b, Index m, std::mt19937_64& rng, double occlusion_prob = 0.0) {
  std::normal_distribution<double> n(0.0, 1.0);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  Eigen::MatrixXd f(b, m);
  for (Index i = 0; i < f.size(); ++i) f.data()[i] = n(rng);
  OcclusionMask o = OcclusionMask::Ones(m);
  for (Index j = 0; j < m; ++j)
    if (u(rng) < occlusion_prob) o[j] = 0;
  return Signature(f, o);
}

}  // namespace fapsm::testing
