#include "gridslam/pose_estimator.hpp"

#include <stdexcept>

namespace gridslam {

KernelStackd rotationStack(const ObservationMap& obs, Index rotations) {
    if (rotations < 1) throw std::invalid_argument("rotationStack: need at least one rotation");
    const Grid3d& o = obs.grid;
    KernelStackd stack(rotations, o.channels, o.height);
    stack.setSlice(0, o);
    for (Index r = 1; r < rotations; ++r)
        stack.setSlice(r, rotateBilinear(o, headingAngle(r, rotations)));
    return stack;
}

PoseBelief visualBelief(const Grid3d& map, const KernelStackd& stack) {
    return {softmaxAll(correlate(map, stack))};
}

DiscretePose argmaxPose(const PoseBelief& belief) {
    const Grid3d& g = belief.grid;
    Index best = 0;
    for (Index i = 1; i < g.size(); ++i)
        if (g.data[i] > g.data[best]) best = i;
    DiscretePose pose;
    pose.r = best / (g.height * g.width);
    pose.x = (best / g.width) % g.height;
    pose.y = best % g.width;
    return pose;
}

}  // namespace gridslam
