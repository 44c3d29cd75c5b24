#include "gridslam/observation.hpp"

#include <stdexcept>

namespace gridslam {

ObservationMap projectFeatures(const std::vector<Detection>& detections, Index classes, Index h) {
    if (h < 1 || h % 2 == 0)
        throw std::invalid_argument("projectFeatures: window size must be odd and positive");
    ObservationMap obs;
    obs.grid = Grid3d(classes, h, h);
    const Index c = h / 2;
    for (const Detection& det : detections) {
        if (det.classId < 0 || det.classId >= classes) continue;
        for (const Detection::CellMass& cm : det.cells) {
            const Index x = c + cm.x;
            const Index y = c + cm.y;
            if (x < 0 || x >= h || y < 0 || y >= h) continue;
            obs.grid(det.classId, x, y) += cm.mass;
        }
    }
    return obs;
}

ObservationMap filterNoise(const ObservationMap& o, double beta) {
    if (beta < 0.0) throw std::invalid_argument("filterNoise: beta must be >= 0");
    ObservationMap out = o;
    out.grid.data = (out.grid.data < beta).select(0.0, out.grid.data);
    return out;
}

}  // namespace gridslam
