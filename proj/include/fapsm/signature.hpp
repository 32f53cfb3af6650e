#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "fapsm/errors.hpp"
#include "fapsm/types.hpp"

namespace fapsm {

/**
 * A patch-based signature: a b x m feature matrix (one column per patch)
 * and an m-long occlusion mask.
 *
 * Occluded columns may hold any finite values; no scoring path reads them.
 * Visible columns must have nonzero norm.
 */
template <typename Scalar>
class BasicSignature {
 public:
  using FeatureMatrix = Matrix<Scalar>;

  BasicSignature(FeatureMatrix features, OcclusionMask occlusion)
      : features_(std::move(features)), occlusion_(std::move(occlusion)) {
    if (features_.rows() < 1 || features_.cols() < 1) {
      throw Error(Errc::invalid_argument, "signature must have b >= 1 and m >= 1");
    }
    if (occlusion_.size() != features_.cols()) {
      throw Error(Errc::dimension_mismatch,
                  "occlusion mask has " + std::to_string(occlusion_.size()) +
                      " entries, expected " + std::to_string(features_.cols()));
    }
    if (!features_.allFinite()) {
      throw Error(Errc::invalid_argument, "signature features must be finite");
    }
    for (Index j = 0; j < occlusion_.size(); ++j) {
      if (occlusion_[j] > 1) {
        throw Error(Errc::invalid_argument, "occlusion flags must be 0 or 1");
      }
      if (occlusion_[j] == 1 && features_.col(j).squaredNorm() == Scalar(0)) {
        throw Error(Errc::zero_vector,
                    "visible patch " + std::to_string(j) + " has a zero feature vector");
      }
    }
  }

  /// All patches visible.
  explicit BasicSignature(FeatureMatrix features)
      : BasicSignature(features, OcclusionMask::Ones(features.cols())) {}

  const FeatureMatrix& features() const noexcept { return features_; }
  const OcclusionMask& occlusion() const noexcept { return occlusion_; }

  auto patch(Index j) const { return features_.col(j); }
  bool visible(Index j) const { return occlusion_[j] == 1; }

  Index feature_dim() const noexcept { return features_.rows(); }
  Index patch_count() const noexcept { return features_.cols(); }
  Index visible_count() const { return occlusion_.template cast<Index>().sum(); }

  friend bool operator==(const BasicSignature& a, const BasicSignature& b) {
    return a.features_.rows() == b.features_.rows() &&
           a.features_.cols() == b.features_.cols() && a.features_ == b.features_ &&
           a.occlusion_ == b.occlusion_;
  }

 private:
  FeatureMatrix features_;
  OcclusionMask occlusion_;
};

template <typename Scalar>
struct GalleryEntry {
  Label identity;
  BasicSignature<Scalar> signature;

  friend bool operator==(const GalleryEntry&, const GalleryEntry&) = default;
};

/// Ordered 1-to-N search space. One signature per identity; uniform b, m.
template <typename Scalar>
class BasicGallery {
 public:
  using Entry = GalleryEntry<Scalar>;

  explicit BasicGallery(std::vector<Entry> entries) : entries_(std::move(entries)) {
    if (entries_.empty()) throw Error(Errc::empty_gallery, "gallery is empty");
    const Index b = entries_.front().signature.feature_dim();
    const Index m = entries_.front().signature.patch_count();
    std::set<Label> seen;
    for (const auto& e : entries_) {
      if (e.identity <= 0) {
        throw Error(Errc::invalid_argument,
                    "gallery identity " + std::to_string(e.identity) + " is not a positive integer");
      }
      if (!seen.insert(e.identity).second) {
        throw Error(Errc::duplicate_identity,
                    "gallery identity " + std::to_string(e.identity) + " appears twice");
      }
      if (e.signature.feature_dim() != b || e.signature.patch_count() != m) {
        throw Error(Errc::dimension_mismatch, "gallery signatures differ in b or m");
      }
    }
  }

  const std::vector<Entry>& entries() const noexcept { return entries_; }
  const Entry& operator[](std::size_t i) const { return entries_[i]; }
  std::size_t size() const noexcept { return entries_.size(); }

  Index feature_dim() const { return entries_.front().signature.feature_dim(); }
  Index patch_count() const { return entries_.front().signature.patch_count(); }

  bool contains(Label id) const {
    return std::any_of(entries_.begin(), entries_.end(),
                       [id](const Entry& e) { return e.identity == id; });
  }

  friend bool operator==(const BasicGallery&, const BasicGallery&) = default;

 private:
  std::vector<Entry> entries_;
};

/// Query samples, optionally labeled with their true identities.
template <typename Scalar>
class BasicProbeSet {
 public:
  explicit BasicProbeSet(std::vector<BasicSignature<Scalar>> samples,
                         std::optional<std::vector<Label>> identities = std::nullopt)
      : samples_(std::move(samples)), identities_(std::move(identities)) {
    if (identities_ && identities_->size() != samples_.size()) {
      throw Error(Errc::dimension_mismatch, "probe label count differs from sample count");
    }
  }

  const std::vector<BasicSignature<Scalar>>& samples() const noexcept { return samples_; }
  const BasicSignature<Scalar>& operator[](std::size_t i) const { return samples_[i]; }
  std::size_t size() const noexcept { return samples_.size(); }

  bool labeled() const noexcept { return identities_.has_value(); }
  const std::optional<std::vector<Label>>& identities() const noexcept { return identities_; }

  /// Throws when the set carries no labels.
  const std::vector<Label>& truth() const {
    if (!identities_) throw Error(Errc::invalid_argument, "probe set has no identity labels");
    return *identities_;
  }

  friend bool operator==(const BasicProbeSet&, const BasicProbeSet&) = default;

 private:
  std::vector<BasicSignature<Scalar>> samples_;
  std::optional<std::vector<Label>> identities_;
};

using Signature = BasicSignature<double>;
using Gallery = BasicGallery<double>;
using ProbeSet = BasicProbeSet<double>;

struct PairingViolation {
  Errc kind;
  std::size_t probe_index;
  std::string message;
};

struct PairingReport {
  std::vector<PairingViolation> violations;

  bool ok() const noexcept { return violations.empty(); }

  /// Throws the first violation, if any.
  void require_ok() const {
    if (!ok()) {
      const auto& v = violations.front();
      throw Error(v.kind, v.message + " (" + std::to_string(violations.size()) +
                              " violation(s) total)");
    }
  }
};

/// Checks every probe for matching (b, m) and, when labeled, gallery membership.
template <typename Scalar>
PairingReport validate_pairing(const BasicGallery<Scalar>& gallery,
                               const BasicProbeSet<Scalar>& probes) {
  PairingReport report;
  const Index b = gallery.feature_dim();
  const Index m = gallery.patch_count();
  std::set<Label> known;
  for (const auto& e : gallery.entries()) known.insert(e.identity);

  for (std::size_t i = 0; i < probes.size(); ++i) {
    const auto& s = probes[i];
    if (s.feature_dim() != b || s.patch_count() != m) {
      report.violations.push_back(
          {Errc::dimension_mismatch, i,
           "probe " + std::to_string(i) + " has b=" + std::to_string(s.feature_dim()) +
               " m=" + std::to_string(s.patch_count()) + ", gallery has b=" +
               std::to_string(b) + " m=" + std::to_string(m)});
    }
    if (probes.labeled()) {
      const Label c = (*probes.identities())[i];
      if (!known.contains(c)) {
        report.violations.push_back({Errc::unknown_label, i,
                                     "probe " + std::to_string(i) + " label " +
                                         std::to_string(c) + " is not a gallery identity"});
      }
    }
  }
  return report;
}

/// Maps external string names onto gallery labels 1, 2, ... in order of first use.
class IdentityMap {
 public:
  Label intern(const std::string& name) {
    auto [it, inserted] = by_name_.try_emplace(name, static_cast<Label>(names_.size()) + 1);
    if (inserted) names_.push_back(name);
    return it->second;
  }

  std::optional<Label> find(const std::string& name) const {
    auto it = by_name_.find(name);
    if (it == by_name_.end()) return std::nullopt;
    return it->second;
  }

  const std::string& name(Label id) const {
    if (id < 1 || id > static_cast<Label>(names_.size())) {
      throw Error(Errc::unknown_label, "no name for identity " + std::to_string(id));
    }
    return names_[static_cast<std::size_t>(id - 1)];
  }

  std::size_t size() const noexcept { return names_.size(); }
  const std::vector<std::string>& names() const noexcept { return names_; }

 private:
  std::map<std::string, Label> by_name_;
  std::vector<std::string> names_;
};

}  // namespace fapsm
