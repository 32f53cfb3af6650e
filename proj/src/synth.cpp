#include "fapsm/synth.hpp"

#include <cmath>
#include <random>
#include <string>

#include "fapsm/errors.hpp"
#include "fapsm/seeding.hpp"

namespace fapsm {

namespace {

constexpr double kMaxPrototypeCosine = 0.999;

bool is_probability(double p) { return p >= 0.0 && p <= 1.0; }

Eigen::VectorXd random_unit_vector(Index dim, std::mt19937_64& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  Eigen::VectorXd v(dim);
  do {
    for (Index i = 0; i < dim; ++i) v[i] = normal(rng);
  } while (v.squaredNorm() == 0.0);
  return v.normalized();
}

}  // namespace

void SynthConfig::validate() const {
  if (identities < 2) throw Error(Errc::invalid_argument, "synth: need at least 2 identities");
  if (probes_per_identity < 0) throw Error(Errc::invalid_argument, "synth: negative probe count");
  if (feature_dim < 1 || patch_count < 1) throw Error(Errc::invalid_argument, "synth: b and m must be >= 1");
  if (!(noise_sigma >= 0.0) || !std::isfinite(noise_sigma))
    throw Error(Errc::invalid_argument, "synth: noise_sigma must be a non-negative finite value");
  if (!is_probability(occlusion_prob)) throw Error(Errc::invalid_argument, "synth: occlusion_prob outside [0, 1]");
  if (!corruption_probs.empty() && Index(corruption_probs.size()) != patch_count)
    throw Error(Errc::dimension_mismatch, "synth: corruption_probs needs one entry per patch");
  for (double p : corruption_probs)
    if (!is_probability(p)) throw Error(Errc::invalid_argument, "synth: corruption probability outside [0, 1]");
}

SynthData generate(const SynthConfig& config) {
  config.validate();
  const Index l = config.identities;
  const Index b = config.feature_dim;
  const Index m = config.patch_count;

  std::mt19937_64 rng(derive_seed(config.seed, "synth.prototypes"));
  // prototypes[j] holds patch j's prototype for every identity, one per column.
  std::vector<Eigen::MatrixXd> prototypes(std::size_t(m), Eigen::MatrixXd(b, l));
  for (Index id = 0; id < l; ++id) {
    for (Index j = 0; j < m; ++j) {
      auto& bank = prototypes[std::size_t(j)];
      for (;;) {
        bank.col(id) = random_unit_vector(b, rng);
        if (id == 0 || (bank.leftCols(id).transpose() * bank.col(id)).maxCoeff() < kMaxPrototypeCosine) break;
      }
    }
  }

  std::vector<GalleryEntry<double>> entries;
  entries.reserve(std::size_t(l));
  for (Index id = 0; id < l; ++id) {
    Eigen::MatrixXd features(b, m);
    for (Index j = 0; j < m; ++j) features.col(j) = prototypes[std::size_t(j)].col(id);
    entries.push_back({Label(id + 1), Signature(std::move(features))});
  }
  Gallery gallery(std::move(entries));
  ProbeSet probes = generate_probes(config, gallery, "synth.probes");
  return {std::move(gallery), std::move(probes)};
}

ProbeSet generate_probes(const SynthConfig& config, const Gallery& gallery, std::string_view stream) {
  config.validate();
  const Index l = Index(gallery.size());
  const Index b = gallery.feature_dim();
  const Index m = gallery.patch_count();
  if (l < 2) throw Error(Errc::invalid_argument, "synth: need at least 2 gallery identities");
  if (m != config.patch_count) throw Error(Errc::dimension_mismatch, "synth: gallery m differs from config");

  std::vector<Signature> samples;
  std::vector<Label> truth;
  samples.reserve(std::size_t(l * config.probes_per_identity));
  truth.reserve(samples.capacity());

  std::uint64_t probe_index = 0;
  for (Index owner = 0; owner < l; ++owner) {
    for (Index r = 0; r < config.probes_per_identity; ++r, ++probe_index) {
      // One stream per probe keeps generation order-independent.
      std::mt19937_64 rng(derive_seed(config.seed, stream, probe_index));
      std::uniform_real_distribution<double> unit(0.0, 1.0);
      std::normal_distribution<double> normal(0.0, 1.0);
      std::uniform_int_distribution<Index> other(0, l - 2);
      Eigen::MatrixXd features(b, m);
      OcclusionMask occlusion = OcclusionMask::Ones(m);
      for (Index j = 0; j < m; ++j) {
        Index source = owner;
        if (unit(rng) < config.corruption(j)) {
          source = other(rng);
          if (source >= owner) ++source;
        }
        Eigen::VectorXd v = gallery[std::size_t(source)].signature.patch(j);
        if (config.noise_sigma > 0.0) {
          Eigen::VectorXd noisy(b);
          do {
            for (Index i = 0; i < b; ++i) noisy[i] = v[i] + config.noise_sigma * normal(rng);
          } while (noisy.squaredNorm() == 0.0);
          v = noisy.normalized();
        }
        features.col(j) = v;
        if (unit(rng) < config.occlusion_prob) occlusion[j] = 0;
      }
      samples.emplace_back(std::move(features), std::move(occlusion));
      truth.push_back(gallery[std::size_t(owner)].identity);
    }
  }
  return ProbeSet(std::move(samples), std::move(truth));
}

}  // namespace fapsm
