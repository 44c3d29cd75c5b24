#include "gridslam/episode.hpp"

#include <cmath>
#include <stdexcept>

#include "gridslam/tensor_ops.hpp"

namespace gridslam {

namespace {

/// L x h x h window of the ground-truth map centered at the pose,
/// resampled into the egocentric frame (rotation interpolation error only).
ObservationMap idealObservation(const Grid3d& groundTruth, const DiscretePose& pose, Index h,
                                Index rotations) {
    const Index L = groundTruth.channels;
    const Index c = h / 2;
    Grid3d window(L, h, h);
    for (Index l = 0; l < L; ++l)
        for (Index i = 0; i < h; ++i)
            for (Index j = 0; j < h; ++j) {
                const Index x = pose.x + i - c, y = pose.y + j - c;
                if (x < 0 || x >= groundTruth.height || y < 0 || y >= groundTruth.width) continue;
                window(l, i, j) = groundTruth(l, x, y);
            }
    ObservationMap obs;
    obs.grid = rotateBilinear(window, -headingAngle(pose.r, rotations));
    return obs;
}

}  // namespace

ObservationMap makeObservation(const Scene& scene, const Grid3d& groundTruth,
                               const DiscretePose& truePose, const PipelineConfig& cfg,
                               std::uint64_t episodeSeed, Index stepIndex) {
    ObservationMap obs;
    if (cfg.tier == Tier::Ideal) {
        obs = idealObservation(groundTruth, truePose, cfg.window, cfg.rotations);
    } else {
        std::vector<Detection> detections =
            raycastObserve(scene, truePose, cfg.camera, cfg.rotations);
        if (cfg.tier == Tier::Real) {
            Rng rng(mixSeed(mixSeed(cfg.noiseSeed, episodeSeed), static_cast<std::uint64_t>(stepIndex)));
            applyObservationErrors(detections, scene.classes, cfg.errors, rng);
        }
        obs = projectFeatures(detections, scene.classes, cfg.window);
    }
    obs.timestamp = stepIndex;
    return filterNoise(obs, cfg.beta);
}

std::string sourceName(StepSource source) {
    switch (source) {
        case StepSource::Start: return "start";
        case StepSource::Visual: return "visual";
        case StepSource::Inertial: return "inertial";
        case StepSource::Truth: return "truth";
    }
    return "unknown";
}

double EpisodeResult::ape() const {
    double acc = 0.0;
    Index n = 0;
    for (const StepRow& row : rows)
        if (row.step > 0) {
            acc += row.posErr;
            ++n;
        }
    return n ? acc / n : 0.0;
}

double EpisodeResult::ade() const {
    double acc = 0.0;
    Index n = 0;
    for (const StepRow& row : rows)
        if (row.step > 0) {
            acc += row.dirErrDeg;
            ++n;
        }
    return n ? acc / n : 0.0;
}

double EpisodeResult::finalMapMse() const { return rows.empty() ? 0.0 : rows.back().mapMse; }

EpisodeResult runEpisode(const Scene& scene, const Trajectory& traj, const PipelineConfig& cfg,
                         const ConvLstmParams* params, std::uint64_t episodeSeed,
                         const SemanticMap* initialMap) {
    if (traj.poses.empty()) throw std::invalid_argument("runEpisode: empty trajectory");
    if (cfg.updateRule == UpdateRule::ConvLstm && params == nullptr)
        throw std::invalid_argument("runEpisode: ConvLSTM update needs parameters");

    const Index H = scene.height, W = scene.width, R = cfg.rotations;
    const Grid3d gt = groundTruthMap(scene);
    SemanticMap map = initialMap ? *initialMap : SemanticMap(scene.classes, H, W);

    EpisodeResult result;
    DiscretePose est = traj.poses.front();

    StepRow first;
    first.step = 0;
    first.truePose = est;
    first.estPose = est;
    first.source = StepSource::Start;
    first.mapMse = mapMse(gt, map.grid);
    first.mapMseRaw = rawMse(gt, map.grid);
    result.rows.push_back(first);

    const Index steps = traj.steps();
    for (Index t = 1; t < steps; ++t) {
        const DiscretePose& truePose = traj.poses[t];
        const DiscretePose reckoned = deadReckon(est, traj.imuDeltas[t - 1], R, H, W);

        StepSource source = StepSource::Inertial;
        DiscretePose pose = reckoned;
        PoseBelief belief;
        ObservationMap obs;
        KernelStackd stack;
        bool haveObs = false;

        if (cfg.poseMode != PoseMode::DeadReckoning || cfg.updateRule != UpdateRule::None) {
            obs = makeObservation(scene, gt, truePose, cfg, episodeSeed, t);
            stack = rotationStack(obs, R);
            haveObs = true;
        }

        switch (cfg.poseMode) {
            case PoseMode::DeadReckoning:
                break;
            case PoseMode::Visual: {
                belief = visualBelief(map.grid, stack);
                pose = argmaxPose(belief);
                source = StepSource::Visual;
                break;
            }
            case PoseMode::VisualInertial: {
                const PoseBelief visual = visualBelief(map.grid, stack);
                const DiscretePose visualPose = argmaxPose(visual);
                const PoseSource gate = crossCheck(visualPose, reckoned, cfg.fusion, R);
                FusionOutcome outcome = selectBelief(visual, reckoned, gate);
                pose = outcome.pose;
                belief = std::move(outcome.belief);
                source = gate == PoseSource::Visual ? StepSource::Visual : StepSource::Inertial;
                break;
            }
        }

        if (cfg.teacherForcing) {
            pose = truePose;
            source = StepSource::Truth;
            belief = PoseBelief{};
        }

        if (belief.grid.size() == 0 && cfg.updateRule != UpdateRule::None) {
            Grid3d oneHot(R, H, W);
            oneHot(pose.r, pose.x, pose.y) = 1.0;
            belief = {std::move(oneHot)};
        }

        if (belief.grid.size() > 0) {
            const double sumErr = std::abs(belief.grid.data.sum() - 1.0);
            result.maxBeliefSumError = std::max(result.maxBeliefSumError, sumErr);
        }

        if (cfg.updateRule != UpdateRule::None && haveObs) {
            const Grid3d projected = projectObservation(belief, stack);
            if (cfg.updateRule == UpdateRule::ConvLstm) {
                const RoiMask mask = roiMask(pose, cfg.window, H, W);
                map = convlstmUpdate(map, projected, mask, *params);
            } else {
                map = heuristicUpdate(map, projected, cfg.heuristicAlpha);
            }
            if (!map.grid.allFinite())
                throw std::runtime_error("runEpisode: non-finite map at step " + std::to_string(t));
        }

        StepRow row;
        row.step = t;
        row.truePose = truePose;
        row.estPose = pose;
        row.posErr = std::hypot(static_cast<double>(pose.x - truePose.x),
                                static_cast<double>(pose.y - truePose.y));
        row.dirErrDeg = static_cast<double>(circularLevelDistance(pose.r, truePose.r, R)) * 360.0 /
                        static_cast<double>(R);
        row.source = source;
        row.mapMse = mapMse(gt, map.grid);
        row.mapMseRaw = rawMse(gt, map.grid);
        result.rows.push_back(row);

        ++result.estimatedSteps;
        if (source == StepSource::Inertial) ++result.inertialSteps;
        est = pose;
    }

    result.finalMap = std::move(map);
    return result;
}

}  // namespace gridslam
