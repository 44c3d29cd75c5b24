#ifndef GRIDSLAM_SCENE_HPP
#define GRIDSLAM_SCENE_HPP

#include <array>
#include <cstdint>
#include <vector>

#include "gridslam/grid.hpp"
#include "gridslam/pose_types.hpp"
#include "gridslam/rng.hpp"

namespace gridslam {

struct Cell {
    Index x = 0;
    Index y = 0;
    bool operator==(const Cell&) const = default;
};

struct SceneObject {
    Index classId = 0;
    std::vector<Cell> cells;
};

/// A labeled indoor scene on an H x W grid: perimeter walls (opaque,
/// class-less) and non-overlapping objects, each a set of occupied cells
/// with one class label.
struct Scene {
    Index height = 0;
    Index width = 0;
    Index classes = 0;
    std::vector<Cell> walls;
    std::vector<SceneObject> objects;
};

/// Occupancy codes used by the derived lookup grid.
inline constexpr int kFreeCell = -1;
inline constexpr int kWallCell = -2;

/// H x W lookup: kFreeCell, kWallCell, or the occupying object's index.
Eigen::ArrayXXi occupancyGrid(const Scene& scene);

bool isFreeCell(const Scene& scene, Index x, Index y);

struct SceneParams {
    Index height = 33;
    Index width = 33;
    Index classes = 5;
    Index objectCount = 8;
    Index minObjectSize = 1;  // rectangle side, cells
    Index maxObjectSize = 2;
};

/// Deterministically generate a walled scene with non-overlapping
/// rectangular objects. Throws std::runtime_error if placement fails
/// after bounded retries.
Scene generateScene(std::uint64_t seed, const SceneParams& params);

/// Per-class ground truth: channel l is 1 on cells occupied by a class-l
/// object, 0 elsewhere. Walls are class-less and excluded.
Grid3d groundTruthMap(const Scene& scene);

struct CameraModel {
    double fov = std::numbers::pi / 2.0;  // radians, in (0, 2*pi]
    double maxRange = 12.0;               // grid cells
    int rays = 720;                       // per sweep
};

/// One detected object: per-cell visible mass in egocentric coordinates
/// (camera at origin, heading = +x axis). An unoccluded object in range has
/// total mass 1; occlusion only removes mass.
struct Detection {
    Index classId = 0;
    struct CellMass {
        Index x = 0;
        Index y = 0;
        double mass = 0.0;
    };
    std::vector<CellMass> cells;
    double totalMass = 0.0;
};

/// Cast rays across the camera FOV from a free-cell pose. The first opaque
/// cell hit per ray contributes a visibility sample to that object; the
/// per-object denominator counts rays that would hit the object with all
/// occluders (walls and other objects) removed, mirroring per-object mass
/// normalization. Throws std::invalid_argument if the pose is not on a free
/// cell.
std::vector<Detection> raycastObserve(const Scene& scene, const DiscretePose& pose,
                                      const CameraModel& camera, Index orientationLevels);

/// Error injection for the "projection error" tier: class flips and
/// multiplicative per-cell mass jitter.
struct ObservationErrorModel {
    double classFlipProb = 0.0;
    double massJitter = 0.0;  // mass *= 1 + U(-j, j), clamped at 0
};

void applyObservationErrors(std::vector<Detection>& detections, Index classes,
                            const ObservationErrorModel& model, Rng& rng);

struct ImuModel {
    double sigmaPos = 0.0;    // grid cells, Gaussian std per component
    double sigmaTheta = 0.0;  // radians, Gaussian std
    double biasPos = 0.0;     // grid cells per step, added to each component
    double biasTheta = 0.0;   // radians per step
    std::uint64_t seed = 0;
};

/// Noisy IMU reading for one step: true + bias + Gaussian(0, sigma) per
/// component. Deterministic for fixed (model.seed, stepIndex).
std::array<double, 3> imuRead(const std::array<double, 3>& trueDelta, const ImuModel& model,
                              std::uint64_t stepIndex);

struct MotionParams {
    Index orientationLevels = 8;  // R
    Index maxStepCells = 2;       // Chebyshev bound per step
    Index maxTurnLevels = 2;
};

/// T poses plus the per-step egocentric motion, as sensed ideally and by a
/// noisy IMU. trueDeltas[i] moves poses[i] to poses[i+1]; deltas are
/// (forward, left, dtheta-radians) in the frame of poses[i].
struct Trajectory {
    std::vector<DiscretePose> poses;
    std::vector<std::array<double, 3>> trueDeltas;
    std::vector<std::array<double, 3>> imuDeltas;

    Index steps() const { return static_cast<Index>(poses.size()); }
};

/// Random walk over free cells respecting per-step motion bounds. Emits
/// true deltas only; IMU deltas are filled by the dataset generator.
/// Throws std::runtime_error if no viable start cell is found.
Trajectory generateTrajectory(const Scene& scene, std::uint64_t seed, Index steps,
                              const MotionParams& motion);

}  // namespace gridslam

#endif  // GRIDSLAM_SCENE_HPP
