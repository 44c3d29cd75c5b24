#ifndef GRIDSLAM_EPISODE_HPP
#define GRIDSLAM_EPISODE_HPP

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "gridslam/fusion.hpp"
#include "gridslam/kl.hpp"
#include "gridslam/map_update.hpp"
#include "gridslam/observation.hpp"
#include "gridslam/pose_estimator.hpp"
#include "gridslam/scene.hpp"

namespace gridslam {

/// Observation-error tiers. Real carries projection, obstruction and
/// rotation error; Obstructed drops the injected projection errors; Ideal
/// bypasses the ray caster entirely and resamples the true map window, so
/// only rotation interpolation error remains.
enum class Tier { Real, Obstructed, Ideal };

enum class PoseMode { Visual, VisualInertial, DeadReckoning };

enum class UpdateRule { ConvLstm, Heuristic, None };

struct PipelineConfig {
    Index rotations = 8;  // R
    Index window = 11;    // h, odd
    double beta = 0.02;
    CameraModel camera;
    Tier tier = Tier::Real;
    ObservationErrorModel errors;  // applied on the Real tier only
    FusionConfig fusion;
    PoseMode poseMode = PoseMode::VisualInertial;
    UpdateRule updateRule = UpdateRule::ConvLstm;
    double heuristicAlpha = 0.3;
    bool teacherForcing = false;
    std::uint64_t noiseSeed = 0;
};

/// Build the egocentric observation for one step under the configured tier.
/// All tiers end with the beta noise filter.
ObservationMap makeObservation(const Scene& scene, const Grid3d& groundTruth,
                               const DiscretePose& truePose, const PipelineConfig& cfg,
                               std::uint64_t episodeSeed, Index stepIndex);

enum class StepSource { Start, Visual, Inertial, Truth };

std::string sourceName(StepSource source);

struct StepRow {
    Index step = 0;
    DiscretePose truePose;
    DiscretePose estPose;
    double posErr = 0.0;
    double dirErrDeg = 0.0;
    StepSource source = StepSource::Start;
    double mapMse = 0.0;     // smoothed per-cell distribution space
    double mapMseRaw = 0.0;  // raw entries
};

struct EpisodeResult {
    std::vector<StepRow> rows;
    SemanticMap finalMap;
    double maxBeliefSumError = 0.0;  // max |sum(belief) - 1| over steps
    Index inertialSteps = 0;
    Index estimatedSteps = 0;

    double ape() const;      // mean position error over estimated steps
    double ade() const;      // mean circular direction error, degrees
    double finalMapMse() const;
};

/// Run one episode: step 0 anchors the known start pose on a zero map (no
/// observation); each later step dead-reckons from the previous estimate,
/// observes, estimates the pose per the configured mode, registers the
/// observation and updates the map per the configured rule. An initial map
/// (e.g. the ground truth, for oracle-localization studies) may replace the
/// zero map.
EpisodeResult runEpisode(const Scene& scene, const Trajectory& traj, const PipelineConfig& cfg,
                         const ConvLstmParams* params, std::uint64_t episodeSeed,
                         const SemanticMap* initialMap = nullptr);

}  // namespace gridslam

#endif  // GRIDSLAM_EPISODE_HPP
