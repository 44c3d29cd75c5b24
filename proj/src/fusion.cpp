#include "gridslam/fusion.hpp"

#include <algorithm>
#include <cmath>

namespace gridslam {

FusionConfig fusionConfigFromImu(const ImuModel& imu, Index orientationLevels) {
    FusionConfig cfg;
    cfg.gamma1 = 3.0 * imu.sigmaPos + imu.biasPos;
    const double thetaNoise = 3.0 * imu.sigmaTheta + imu.biasTheta;  // radians
    cfg.gamma2 = thetaNoise * static_cast<double>(orientationLevels) / (2.0 * std::numbers::pi);
    return cfg;
}

DiscretePose deadReckon(const DiscretePose& prev, const std::array<double, 3>& u,
                        Index orientationLevels, Index height, Index width) {
    const double theta = headingAngle(prev.r, orientationLevels);
    double wx, wy;
    egoToWorld(u[0], u[1], theta, wx, wy);
    DiscretePose next;
    next.x = std::clamp<Index>(prev.x + std::llround(wx), 0, height - 1);
    next.y = std::clamp<Index>(prev.y + std::llround(wy), 0, width - 1);
    const Index dLevels = static_cast<Index>(
        std::llround(u[2] * static_cast<double>(orientationLevels) / (2.0 * std::numbers::pi)));
    next.r = wrapLevel(prev.r + dLevels, orientationLevels);
    return next;
}

PoseSource crossCheck(const DiscretePose& visual, const DiscretePose& inertial,
                      const FusionConfig& cfg, Index orientationLevels) {
    const double dx = static_cast<double>(visual.x - inertial.x);
    const double dy = static_cast<double>(visual.y - inertial.y);
    const double posDist = std::hypot(dx, dy);
    const double angDist =
        static_cast<double>(circularLevelDistance(visual.r, inertial.r, orientationLevels));
    return (posDist < cfg.gamma1 && angDist < cfg.gamma2) ? PoseSource::Visual
                                                          : PoseSource::Inertial;
}

FusionOutcome selectBelief(const PoseBelief& visual, const DiscretePose& inertial,
                           PoseSource source) {
    FusionOutcome out;
    out.source = source;
    if (source == PoseSource::Visual) {
        out.belief = visual;
        out.pose = argmaxPose(visual);
    } else {
        Grid3d oneHot(visual.grid.channels, visual.grid.height, visual.grid.width);
        oneHot(inertial.r, inertial.x, inertial.y) = 1.0;
        out.belief = {std::move(oneHot)};
        out.pose = inertial;
    }
    return out;
}

}  // namespace gridslam
