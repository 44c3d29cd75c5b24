#ifndef GRIDSLAM_IO_HPP
#define GRIDSLAM_IO_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "gridslam/map_update.hpp"
#include "gridslam/scene.hpp"

namespace gridslam {

inline constexpr int kDatasetVersion = 1;
inline constexpr int kCheckpointVersion = 1;
inline constexpr int kSnapshotVersion = 1;

/// A generated benchmark: scenes with their trajectories, plus the sensor
/// models the trajectories were recorded with.
struct Dataset {
    Index orientationLevels = 8;  // R used to discretize trajectory headings
    CameraModel camera;
    ImuModel imu;
    struct SceneEntry {
        Scene scene;
        std::vector<Trajectory> trajectories;
    };
    std::vector<SceneEntry> scenes;
};

void saveDataset(const Dataset& dataset, const std::string& path);
Dataset loadDataset(const std::string& path);

struct CheckpointManifest {
    Index epoch = 0;
    double loss = 0.0;
    std::string configHash;
};

/// Binary checkpoint (header + parameter blocks as doubles) with a JSON
/// manifest at <path>.json.
void saveCheckpoint(const ConvLstmParams& params, const std::string& path,
                    const CheckpointManifest& manifest);
ConvLstmParams loadCheckpoint(const std::string& path);
CheckpointManifest loadCheckpointManifest(const std::string& path);

struct SnapshotMeta {
    Index step = 0;
    DiscretePose pose;
    std::string source;
};

/// Flat binary map snapshot (header {version, L, H, W} + row-major doubles
/// for grid and cell state) with a JSON sidecar at <path>.json.
void saveMapSnapshot(const SemanticMap& map, const std::string& path, const SnapshotMeta& meta);
SemanticMap loadMapSnapshot(const std::string& path);
SnapshotMeta loadSnapshotMeta(const std::string& path);

/// FNV-1a hex digest, used to stamp configs into checkpoint manifests.
std::string hashString(const std::string& text);

}  // namespace gridslam

#endif  // GRIDSLAM_IO_HPP
