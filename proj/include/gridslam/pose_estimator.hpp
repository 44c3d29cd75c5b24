#ifndef GRIDSLAM_POSE_ESTIMATOR_HPP
#define GRIDSLAM_POSE_ESTIMATOR_HPP

#include "gridslam/grid.hpp"
#include "gridslam/observation.hpp"
#include "gridslam/pose_types.hpp"
#include "gridslam/tensor_ops.hpp"

namespace gridslam {

/// Probability field over discrete poses: R x H x W, nonnegative, sums to 1.
struct PoseBelief {
    Grid3d grid;

    Index orientations() const { return grid.channels; }
};

/// Resample an egocentric observation at R candidate allocentric headings.
/// Slice r is the observation rotated by 2*pi*r/R; slice 0 is an identity
/// copy.
KernelStackd rotationStack(const ObservationMap& obs, Index rotations);

/// Correlate every rotation hypothesis against the global map and normalize
/// the scores into a pose probability field.
PoseBelief visualBelief(const Grid3d& map, const KernelStackd& stack);

/// Index of the maximum belief entry; ties break toward the smallest
/// (r, x, y) in lexicographic order.
DiscretePose argmaxPose(const PoseBelief& belief);

}  // namespace gridslam

#endif  // GRIDSLAM_POSE_ESTIMATOR_HPP
