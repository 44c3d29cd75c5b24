#ifndef GRIDSLAM_FUSION_HPP
#define GRIDSLAM_FUSION_HPP

#include <array>

#include "gridslam/pose_estimator.hpp"
#include "gridslam/pose_types.hpp"
#include "gridslam/scene.hpp"

namespace gridslam {

/// Gates of the visual/inertial cross-check: the maximum deviation the IMU
/// could plausibly produce over one step.
struct FusionConfig {
    double gamma1 = 2.0;  // position gate, grid cells
    double gamma2 = 1.5;  // orientation gate, levels
};

/// Gate defaults derived from an IMU model: 3 sigma plus one step of bias.
FusionConfig fusionConfigFromImu(const ImuModel& imu, Index orientationLevels);

enum class PoseSource { Visual, Inertial };

struct FusionOutcome {
    DiscretePose pose;
    PoseBelief belief;
    PoseSource source = PoseSource::Visual;
};

/// Propagate the previous pose estimate by one egocentric IMU displacement
/// (forward, left, dtheta-radians): rotate into the world frame by the
/// previous heading, round to the nearest cell, clamp to the map extent,
/// and wrap the orientation level.
DiscretePose deadReckon(const DiscretePose& prev, const std::array<double, 3>& u,
                        Index orientationLevels, Index height, Index width);

/// Accept the visual pose only when it sits within both gates of the
/// inertial estimate: Euclidean position distance < gamma1 and circular
/// orientation-level distance < gamma2 (strict).
PoseSource crossCheck(const DiscretePose& visual, const DiscretePose& inertial,
                      const FusionConfig& cfg, Index orientationLevels);

/// Visual source keeps the soft belief; inertial replaces it with a one-hot
/// tensor at the dead-reckoned pose.
FusionOutcome selectBelief(const PoseBelief& visual, const DiscretePose& inertial,
                           PoseSource source);

}  // namespace gridslam

#endif  // GRIDSLAM_FUSION_HPP
