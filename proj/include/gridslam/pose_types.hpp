#ifndef GRIDSLAM_POSE_TYPES_HPP
#define GRIDSLAM_POSE_TYPES_HPP

#include <cmath>
#include <cstdint>
#include <numbers>

#include "gridslam/grid.hpp"

namespace gridslam {

/// Discrete pose on the grid: orientation level r in [0,R), row x in [0,H),
/// column y in [0,W).
///
/// Frame convention, used everywhere: heading level r points along angle
/// 2*pi*r/R measured from the +x (row) axis, counter-clockwise toward +y.
/// Egocentric +x is "ahead".
struct DiscretePose {
    Index r = 0;
    Index x = 0;
    Index y = 0;

    bool operator==(const DiscretePose&) const = default;
};

inline double headingAngle(Index r, Index levels) {
    return 2.0 * std::numbers::pi * static_cast<double>(r) / static_cast<double>(levels);
}

/// Wrap an orientation level into [0, levels).
inline Index wrapLevel(Index r, Index levels) {
    const Index m = r % levels;
    return m < 0 ? m + levels : m;
}

/// Circular distance between orientation levels: min(d, R-d).
inline Index circularLevelDistance(Index a, Index b, Index levels) {
    const Index d = std::abs(wrapLevel(a, levels) - wrapLevel(b, levels));
    return std::min(d, levels - d);
}

/// Signed minimal level difference b - a, wrapped into (-R/2, R/2].
inline Index signedLevelDelta(Index a, Index b, Index levels) {
    Index d = wrapLevel(b - a, levels);
    if (d > levels / 2) d -= levels;
    return d;
}

/// Rotate an egocentric displacement into the world frame of heading angle
/// `theta`: +x ahead maps onto the heading direction.
inline void egoToWorld(double ex, double ey, double theta, double& wx, double& wy) {
    const double c = std::cos(theta), s = std::sin(theta);
    wx = c * ex - s * ey;
    wy = s * ex + c * ey;
}

inline void worldToEgo(double wx, double wy, double theta, double& ex, double& ey) {
    const double c = std::cos(theta), s = std::sin(theta);
    ex = c * wx + s * wy;
    ey = -s * wx + c * wy;
}

}  // namespace gridslam

#endif  // GRIDSLAM_POSE_TYPES_HPP
