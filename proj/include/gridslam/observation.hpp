#ifndef GRIDSLAM_OBSERVATION_HPP
#define GRIDSLAM_OBSERVATION_HPP

#include <vector>

#include "gridslam/grid.hpp"
#include "gridslam/scene.hpp"

namespace gridslam {

/// Egocentric semantic observation: an L x h x h grid, camera at the center
/// cell, heading along +x. Values live in [0,1] once scene invariants hold
/// (at most one object per cell).
struct ObservationMap {
    Grid3d grid;
    Index timestamp = 0;
};

/// Accumulate detections into an h x h egocentric window of L channels.
/// Cells outside the window are dropped. Additive over detections:
/// o(l,x,y) = sum over class-l detections of their visible mass at (x,y).
ObservationMap projectFeatures(const std::vector<Detection>& detections, Index classes, Index h);

/// Zero every entry strictly below beta; entries at or above it pass
/// unchanged. Idempotent.
ObservationMap filterNoise(const ObservationMap& o, double beta = 0.02);

}  // namespace gridslam

#endif  // GRIDSLAM_OBSERVATION_HPP
