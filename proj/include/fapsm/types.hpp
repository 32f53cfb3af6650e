#pragma once

#include <cstdint>

#include <Eigen/Dense>

namespace fapsm {

/// Gallery identities are opaque positive integers.
using Label = std::int64_t;

/// Reserved label: rejected by thresholding, or no matchable patch.
inline constexpr Label kRejected = -1;

using Index = Eigen::Index;

template <typename Scalar>
using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

template <typename Scalar>
using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

template <typename Scalar>
using RowVector = Eigen::Matrix<Scalar, 1, Eigen::Dynamic>;

using LabelMatrix = Eigen::Matrix<Label, Eigen::Dynamic, Eigen::Dynamic>;

/// Per-patch visibility flags: 1 = non-occluded, 0 = occluded.
using OcclusionMask = Eigen::Matrix<std::uint8_t, Eigen::Dynamic, 1>;

}  // namespace fapsm
