#pragma once

#include <cstdint>
#include <string_view>
#include <vector>

#include "fapsm/signature.hpp"

namespace fapsm {

/**
 * Synthetic signature generator settings.
 *
 * Each identity gets one random unit prototype per patch. A probe starts from
 * its identity's prototypes; per patch it is replaced by another identity's
 * prototype with probability corruption_probs[j], perturbed by Gaussian noise
 * of std noise_sigma per feature and re-normalized, then flagged occluded with
 * probability occlusion_prob.
 */
struct SynthConfig {
  Index identities = 50;
  Index probes_per_identity = 10;
  Index feature_dim = 512;
  Index patch_count = 8;
  double noise_sigma = 0.0;
  double occlusion_prob = 0.0;
  std::vector<double> corruption_probs;  // empty = no corruption
  std::uint64_t seed = 1;

  void validate() const;
  double corruption(Index patch) const {
    return corruption_probs.empty() ? 0.0 : corruption_probs[std::size_t(patch)];
  }
};

struct SynthData {
  Gallery gallery;
  ProbeSet probes;
};

/// Gallery of clean prototypes (labels 1..l) plus a labeled probe set.
SynthData generate(const SynthConfig& config);

/// Additional labeled probes for the same gallery from an independent stream.
ProbeSet generate_probes(const SynthConfig& config, const Gallery& gallery, std::string_view stream);

}  // namespace fapsm
