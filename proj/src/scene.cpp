#include "gridslam/scene.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <stdexcept>

namespace gridslam {

Eigen::ArrayXXi occupancyGrid(const Scene& scene) {
    Eigen::ArrayXXi occ = Eigen::ArrayXXi::Constant(scene.height, scene.width, kFreeCell);
    for (const Cell& w : scene.walls) occ(w.x, w.y) = kWallCell;
    for (std::size_t i = 0; i < scene.objects.size(); ++i)
        for (const Cell& c : scene.objects[i].cells) occ(c.x, c.y) = static_cast<int>(i);
    return occ;
}

bool isFreeCell(const Scene& scene, Index x, Index y) {
    if (x < 0 || x >= scene.height || y < 0 || y >= scene.width) return false;
    return occupancyGrid(scene)(x, y) == kFreeCell;
}

Scene generateScene(std::uint64_t seed, const SceneParams& params) {
    if (params.height < 4 || params.width < 4)
        throw std::invalid_argument("generateScene: grid too small");
    Scene scene;
    scene.height = params.height;
    scene.width = params.width;
    scene.classes = params.classes;

    for (Index x = 0; x < params.height; ++x) {
        scene.walls.push_back({x, 0});
        scene.walls.push_back({x, params.width - 1});
    }
    for (Index y = 1; y < params.width - 1; ++y) {
        scene.walls.push_back({0, y});
        scene.walls.push_back({params.height - 1, y});
    }

    Eigen::ArrayXXi occ = Eigen::ArrayXXi::Constant(scene.height, scene.width, kFreeCell);
    for (const Cell& w : scene.walls) occ(w.x, w.y) = kWallCell;

    Rng rng(mixSeed(seed, 0x5CE4E001ULL));
    const Index maxTries = 200 * std::max<Index>(params.objectCount, 1);
    Index tries = 0;
    while (static_cast<Index>(scene.objects.size()) < params.objectCount) {
        if (++tries > maxTries)
            throw std::runtime_error("generateScene: object placement failed after bounded retries");
        const Index sh = params.minObjectSize +
                         rng.uniformInt(params.maxObjectSize - params.minObjectSize + 1);
        const Index sw = params.minObjectSize +
                         rng.uniformInt(params.maxObjectSize - params.minObjectSize + 1);
        if (params.height - 2 - sh < 1 || params.width - 2 - sw < 1) continue;
        const Index x0 = 1 + rng.uniformInt(params.height - 2 - sh + 1);
        const Index y0 = 1 + rng.uniformInt(params.width - 2 - sw + 1);
        bool clear = true;
        for (Index x = x0; x < x0 + sh && clear; ++x)
            for (Index y = y0; y < y0 + sw && clear; ++y)
                if (occ(x, y) != kFreeCell) clear = false;
        if (!clear) continue;
        SceneObject obj;
        obj.classId = rng.uniformInt(params.classes);
        for (Index x = x0; x < x0 + sh; ++x)
            for (Index y = y0; y < y0 + sw; ++y) {
                obj.cells.push_back({x, y});
                occ(x, y) = static_cast<int>(scene.objects.size());
            }
        scene.objects.push_back(std::move(obj));
    }
    return scene;
}

Grid3d groundTruthMap(const Scene& scene) {
    Grid3d map(scene.classes, scene.height, scene.width);
    for (const SceneObject& obj : scene.objects)
        for (const Cell& c : obj.cells) map(obj.classId, c.x, c.y) = 1.0;
    return map;
}

namespace {

struct RayHit {
    int object = -1;
    Index egoX = 0;
    Index egoY = 0;
};

}  // namespace

std::vector<Detection> raycastObserve(const Scene& scene, const DiscretePose& pose,
                                      const CameraModel& camera, Index orientationLevels) {
    if (camera.fov <= 0.0 || camera.fov > 2.0 * std::numbers::pi + 1e-12)
        throw std::invalid_argument("raycastObserve: fov out of (0, 2*pi]");
    const Eigen::ArrayXXi occ = occupancyGrid(scene);
    if (pose.x < 0 || pose.x >= scene.height || pose.y < 0 || pose.y >= scene.width ||
        occ(pose.x, pose.y) != kFreeCell)
        throw std::invalid_argument("raycastObserve: pose is not on a free cell");

    const double heading = headingAngle(pose.r, orientationLevels);
    const int numObjects = static_cast<int>(scene.objects.size());

    // realCounts[o]: egocentric cell -> rays whose first opaque hit was o at
    // that cell. idealCounts[o]: rays that reach o with occluders removed.
    std::vector<std::map<std::pair<Index, Index>, int>> realCounts(numObjects);
    std::vector<int> idealCounts(numObjects, 0);

    const double inf = std::numeric_limits<double>::infinity();
    std::vector<char> seenIdeal(numObjects);

    for (int k = 0; k < camera.rays; ++k) {
        const double phi = -camera.fov / 2.0 + (k + 0.5) * camera.fov / camera.rays;
        const double theta = heading + phi;
        const double dx = std::cos(theta), dy = std::sin(theta);

        Index ix = pose.x, iy = pose.y;
        const Index stepX = dx > 0 ? 1 : -1;
        const Index stepY = dy > 0 ? 1 : -1;
        const double tDeltaX = dx != 0.0 ? 1.0 / std::abs(dx) : inf;
        const double tDeltaY = dy != 0.0 ? 1.0 / std::abs(dy) : inf;
        double tMaxX = dx != 0.0 ? 0.5 / std::abs(dx) : inf;
        double tMaxY = dy != 0.0 ? 0.5 / std::abs(dy) : inf;

        std::fill(seenIdeal.begin(), seenIdeal.end(), 0);
        bool realBlocked = false;

        while (true) {
            double tEntry;
            if (tMaxX < tMaxY) {
                tEntry = tMaxX;
                ix += stepX;
                tMaxX += tDeltaX;
            } else {
                tEntry = tMaxY;
                iy += stepY;
                tMaxY += tDeltaY;
            }
            if (tEntry > camera.maxRange) break;
            if (ix < 0 || ix >= scene.height || iy < 0 || iy >= scene.width) break;
            const int code = occ(ix, iy);
            if (code == kFreeCell) continue;
            if (code == kWallCell) {
                realBlocked = true;
                continue;  // walls are occluders; the ideal pass sees through them
            }
            // object cell
            if (!seenIdeal[code]) {
                seenIdeal[code] = 1;
                ++idealCounts[code];
                if (!realBlocked) {
                    const double tExit = std::min(tMaxX, tMaxY);
                    const double tMid = 0.5 * (tEntry + tExit);
                    const Index ex = static_cast<Index>(std::llround(tMid * std::cos(phi)));
                    const Index ey = static_cast<Index>(std::llround(tMid * std::sin(phi)));
                    ++realCounts[code][{ex, ey}];
                }
            }
            realBlocked = true;  // object cells occlude everything behind them
        }
    }

    std::vector<Detection> detections;
    for (int o = 0; o < numObjects; ++o) {
        if (realCounts[o].empty()) continue;
        Detection det;
        det.classId = scene.objects[o].classId;
        for (const auto& [cell, count] : realCounts[o]) {
            const double mass = static_cast<double>(count) / idealCounts[o];
            det.cells.push_back({cell.first, cell.second, mass});
            det.totalMass += mass;
        }
        detections.push_back(std::move(det));
    }
    return detections;
}

void applyObservationErrors(std::vector<Detection>& detections, Index classes,
                            const ObservationErrorModel& model, Rng& rng) {
    for (Detection& det : detections) {
        if (model.classFlipProb > 0.0 && rng.uniformReal() < model.classFlipProb && classes > 1) {
            Index flipped = rng.uniformInt(classes - 1);
            if (flipped >= det.classId) ++flipped;
            det.classId = flipped;
        }
        if (model.massJitter > 0.0) {
            det.totalMass = 0.0;
            for (auto& cm : det.cells) {
                cm.mass = std::max(0.0, cm.mass * (1.0 + rng.uniformReal(-model.massJitter,
                                                                         model.massJitter)));
                det.totalMass += cm.mass;
            }
        }
    }
}

std::array<double, 3> imuRead(const std::array<double, 3>& trueDelta, const ImuModel& model,
                              std::uint64_t stepIndex) {
    Rng rng(mixSeed(model.seed, stepIndex));
    return {trueDelta[0] + model.biasPos + model.sigmaPos * rng.gaussian(),
            trueDelta[1] + model.biasPos + model.sigmaPos * rng.gaussian(),
            trueDelta[2] + model.biasTheta + model.sigmaTheta * rng.gaussian()};
}

namespace {

bool lineOfCellsFree(const Eigen::ArrayXXi& occ, Index x0, Index y0, Index x1, Index y1) {
    const Index steps = 4 * std::max<Index>(std::abs(x1 - x0), std::abs(y1 - y0));
    for (Index s = 1; s <= steps; ++s) {
        const double f = static_cast<double>(s) / steps;
        const Index cx = static_cast<Index>(std::llround(x0 + f * (x1 - x0)));
        const Index cy = static_cast<Index>(std::llround(y0 + f * (y1 - y0)));
        if (occ(cx, cy) != kFreeCell) return false;
    }
    return true;
}

}  // namespace

Trajectory generateTrajectory(const Scene& scene, std::uint64_t seed, Index steps,
                              const MotionParams& motion) {
    if (steps < 1) throw std::invalid_argument("generateTrajectory: steps must be >= 1");
    const Eigen::ArrayXXi occ = occupancyGrid(scene);
    Rng rng(mixSeed(seed, 0x7A41EC70ULL));

    // start on a free cell with at least one reachable neighbor
    DiscretePose start;
    bool found = false;
    for (int tries = 0; tries < 1000 && !found; ++tries) {
        const Index x = 1 + rng.uniformInt(scene.height - 2);
        const Index y = 1 + rng.uniformInt(scene.width - 2);
        if (occ(x, y) != kFreeCell) continue;
        for (Index dx = -1; dx <= 1 && !found; ++dx)
            for (Index dy = -1; dy <= 1 && !found; ++dy)
                if ((dx || dy) && occ(x + dx, y + dy) == kFreeCell) found = true;
        if (found) {
            start.x = x;
            start.y = y;
            start.r = rng.uniformInt(motion.orientationLevels);
        }
    }
    if (!found) throw std::runtime_error("generateTrajectory: no viable start cell");

    Trajectory traj;
    traj.poses.push_back(start);

    std::vector<std::pair<Index, Index>> candidates;
    for (Index t = 1; t < steps; ++t) {
        const DiscretePose prev = traj.poses.back();
        candidates.clear();
        for (Index dx = -motion.maxStepCells; dx <= motion.maxStepCells; ++dx) {
            for (Index dy = -motion.maxStepCells; dy <= motion.maxStepCells; ++dy) {
                if (dx == 0 && dy == 0) continue;
                const Index nx = prev.x + dx, ny = prev.y + dy;
                if (nx < 0 || nx >= scene.height || ny < 0 || ny >= scene.width) continue;
                if (occ(nx, ny) != kFreeCell) continue;
                if (!lineOfCellsFree(occ, prev.x, prev.y, nx, ny)) continue;
                candidates.emplace_back(dx, dy);
            }
        }
        Index dx = 0, dy = 0;
        if (!candidates.empty()) {
            const auto [cx, cy] = candidates[rng.uniformInt(candidates.size())];
            dx = cx;
            dy = cy;
        }
        const Index turn = -motion.maxTurnLevels + rng.uniformInt(2 * motion.maxTurnLevels + 1);

        DiscretePose next;
        next.x = prev.x + dx;
        next.y = prev.y + dy;
        next.r = wrapLevel(prev.r + turn, motion.orientationLevels);
        traj.poses.push_back(next);

        const double theta = headingAngle(prev.r, motion.orientationLevels);
        double ex, ey;
        worldToEgo(static_cast<double>(dx), static_cast<double>(dy), theta, ex, ey);
        const double dtheta = 2.0 * std::numbers::pi *
                              static_cast<double>(signedLevelDelta(prev.r, next.r,
                                                                   motion.orientationLevels)) /
                              static_cast<double>(motion.orientationLevels);
        traj.trueDeltas.push_back({ex, ey, dtheta});
    }
    return traj;
}

}  // namespace gridslam
