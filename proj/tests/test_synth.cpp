#include <doctest.h>

#include "fapsm/local_matcher.hpp"
#include "fapsm/synth.hpp"

using namespace fapsm;

TEST_CASE("clean probes reproduce their gallery entries") {
  SynthConfig cfg;
  cfg.identities = 6;
  cfg.probes_per_identity = 3;
  cfg.feature_dim = 16;
  cfg.patch_count = 4;
  const auto data = generate(cfg);
  REQUIRE(data.gallery.size() == 6);
  REQUIRE(data.probes.size() == 18);
  const auto& truth = data.probes.truth();
  for (std::size_t i = 0; i < data.probes.size(); ++i) {
    const auto& entry = data.gallery.entries()[std::size_t(truth[i] - 1)];
    CHECK(entry.identity == truth[i]);
    CHECK((data.probes[i].features() - entry.signature.features()).cwiseAbs().maxCoeff() <= 1e-15);
  }
  const auto local = local_match(data.gallery, data.probes);
  for (std::size_t i = 0; i < data.probes.size(); ++i) CHECK(local.baseline_identities[i] == truth[i]);
}

TEST_CASE("generated columns are unit norm and prototypes distinct") {
  SynthConfig cfg;
  cfg.identities = 10;
  cfg.probes_per_identity = 5;
  cfg.feature_dim = 8;
  cfg.patch_count = 3;
  cfg.noise_sigma = 0.3;
  cfg.occlusion_prob = 0.2;
  cfg.corruption_probs = {0.1, 0.5, 0.0};
  const auto data = generate(cfg);
  for (const auto& e : data.gallery.entries())
    for (Index j = 0; j < 3; ++j) CHECK(std::abs(e.signature.patch(j).norm() - 1.0) <= 1e-9);
  for (const auto& s : data.probes.samples())
    for (Index j = 0; j < 3; ++j)
      if (s.visible(j)) CHECK(std::abs(s.patch(j).norm() - 1.0) <= 1e-9);
  for (Index j = 0; j < 3; ++j)
    for (std::size_t a = 0; a < data.gallery.size(); ++a)
      for (std::size_t b = a + 1; b < data.gallery.size(); ++b)
        CHECK(data.gallery[a].signature.patch(j).dot(data.gallery[b].signature.patch(j)) < 0.999);
}

TEST_CASE("generation is deterministic under a seed") {
  SynthConfig cfg;
  cfg.identities = 5;
  cfg.probes_per_identity = 4;
  cfg.feature_dim = 12;
  cfg.patch_count = 3;
  cfg.noise_sigma = 0.2;
  cfg.occlusion_prob = 0.3;
  cfg.corruption_probs = {0.3, 0.3, 0.3};
  cfg.seed = 77;
  const auto a = generate(cfg);
  const auto b = generate(cfg);
  for (std::size_t i = 0; i < a.gallery.size(); ++i) CHECK(a.gallery[i].signature == b.gallery[i].signature);
  for (std::size_t i = 0; i < a.probes.size(); ++i) CHECK(a.probes[i] == b.probes[i]);

  cfg.seed = 78;
  const auto c = generate(cfg);
  CHECK_FALSE(a.gallery[0].signature == c.gallery[0].signature);

  const auto extra = generate_probes(cfg, c.gallery, "synth.test_probes");
  CHECK(extra.size() == c.probes.size());
  CHECK_FALSE(extra[0] == c.probes[0]);
}

TEST_CASE("a patch corrupted with probability 0.8 is locally right about 20% of the time") {
  SynthConfig cfg;
  cfg.identities = 50;
  cfg.probes_per_identity = 12;
  cfg.feature_dim = 32;
  cfg.patch_count = 8;
  cfg.corruption_probs = std::vector<double>(8, 0.0);
  cfg.corruption_probs[7] = 0.8;
  cfg.seed = 5;
  const auto data = generate(cfg);
  REQUIRE(data.probes.size() >= 500);
  const auto local = local_match(data.gallery, data.probes);
  const auto& truth = data.probes.truth();
  Eigen::VectorXd acc = Eigen::VectorXd::Zero(8);
  for (Index i = 0; i < local.identities.rows(); ++i)
    for (Index j = 0; j < 8; ++j) acc[j] += local.identities(i, j) == truth[std::size_t(i)] ? 1.0 : 0.0;
  acc /= double(local.identities.rows());
  for (Index j = 0; j < 7; ++j) CHECK(acc[j] == 1.0);
  CHECK(std::abs(acc[7] - 0.2) <= 0.05);
}

TEST_CASE("invalid configurations are rejected") {
  SynthConfig cfg;
  cfg.identities = 1;
  CHECK_THROWS_AS(generate(cfg), Error);
  cfg = {};
  cfg.occlusion_prob = 1.5;
  CHECK_THROWS_AS(generate(cfg), Error);
  cfg = {};
  cfg.corruption_probs = {0.1, 0.2};
  CHECK_THROWS_AS(generate(cfg), Error);
  cfg = {};
  cfg.noise_sigma = -1;
  CHECK_THROWS_AS(generate(cfg), Error);
}
