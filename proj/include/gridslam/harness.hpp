#ifndef GRIDSLAM_HARNESS_HPP
#define GRIDSLAM_HARNESS_HPP

#include <optional>
#include <string>
#include <vector>

#include "gridslam/episode.hpp"
#include "gridslam/io.hpp"
#include "gridslam/trainer.hpp"

namespace gridslam::harness {

struct GenerateOptions {
    std::string outPath;
    std::uint64_t seed = 1;
    Index scenes = 30;
    Index trajectoriesPerScene = 3;
    Index steps = 30;
    SceneParams sceneParams;
    MotionParams motion;
    CameraModel camera;
    ImuModel imu;  // seed is derived from `seed`; other fields are the noise model
};

void cmdGenerate(const GenerateOptions& opts);

struct EpisodeSummary {
    Index scene = 0;
    Index trajectory = 0;
    double ape = 0.0;
    double ade = 0.0;
    double finalMapMse = 0.0;
    double inertialFraction = 0.0;
};

struct RunSummary {
    std::string mode;
    double ape = 0.0;  // mean of per-episode APE
    double ade = 0.0;
    double finalMapMse = 0.0;
    double inertialFraction = 0.0;
    double maxBeliefSumError = 0.0;
    std::vector<EpisodeSummary> episodes;
    std::vector<double> meanPosErrByStep;  // across episodes, index = step
    std::vector<double> meanMapMseByStep;
    double oraclePoseMatchRate = 0.0;  // fraction of steps with est == true pose
};

struct RunOptions {
    std::string datasetPath;
    std::string checkpointPath;  // required for ConvLSTM map updates
    std::string outDir;
    std::string mode = "visual-inertial";  // visual|visual-inertial|dead-reckoning|heuristic
    double heuristicAlpha = 0.3;
    std::string tier = "real";  // real|obstructed|ideal
    ObservationErrorModel errors = {0.1, 0.25};
    double beta = 0.02;
    Index window = 11;
    bool teacherForcing = false;
    bool freezeMap = false;          // skip all map updates
    bool preloadGroundTruth = false; // start episodes from the true map
    std::optional<double> gamma1;    // default: derived from the dataset IMU model
    std::optional<double> gamma2;
    std::uint64_t seed = 1;
};

RunSummary cmdRun(const RunOptions& opts);

struct TrainSummary {
    std::vector<double> trainLoss;
    std::vector<double> heldOutLoss;
    Index trainEpisodes = 0;
    Index testEpisodes = 0;
};

struct TrainOptions {
    std::string datasetPath;
    std::string outPath;        // checkpoint; manifest at <outPath>.json
    std::string split = "intra";  // intra|cross
    double crossFraction = 2.0 / 3.0;
    TrainConfig train;
    std::string tier = "real";
    ObservationErrorModel errors = {0.1, 0.25};
    double beta = 0.02;
    Index window = 11;
    bool teacherForcing = true;
    Index kernelSize = 3;
};

TrainSummary cmdTrain(const TrainOptions& opts);

struct GradcheckOptions {
    std::string checkpointPath;  // optional; random init when empty
    std::uint64_t seed = 1;
    double fdStep = 1e-5;
    double tolerance = 1e-4;
};

struct GradcheckSummary {
    GradReport oneStep;
    GradReport fiveStep;
    bool pass(double tol) const { return oneStep.pass(tol) && fiveStep.pass(tol); }
};

GradcheckSummary cmdGradcheck(const GradcheckOptions& opts);

struct EvalMapMethod {
    std::string name;
    double mseMean = 0.0;  // mean over episodes of per-episode mean step MSE
    double mseStd = 0.0;
    double mseRawMean = 0.0;
    double mseRawStd = 0.0;
    std::vector<double> perStepMse;  // mean across episodes, index = step
};

struct EvalMapSummary {
    std::string tier;
    std::vector<EvalMapMethod> methods;  // "ours" first, then heuristics

    const EvalMapMethod& method(const std::string& name) const;
};

struct EvalMapOptions {
    std::string datasetPath;
    std::string checkpointPath;
    std::string outDir;
    std::string tier = "real";
    ObservationErrorModel errors = {0.1, 0.25};
    double beta = 0.02;
    Index window = 11;
    std::vector<double> alphas = {0.1, 0.3, 0.7, 1.0};
    std::uint64_t seed = 1;
};

EvalMapSummary cmdEvalMap(const EvalMapOptions& opts);

/// Split a dataset into train/test episode references. Intra-scene holds
/// out the last trajectory of every scene; cross-scene splits the scene set
/// disjointly.
struct Split {
    std::vector<EpisodeRef> train;
    std::vector<EpisodeRef> test;
};

Split makeSplit(const Dataset& dataset, const std::string& mode, double crossFraction,
                std::uint64_t seed);

Tier tierFromString(const std::string& name);

}  // namespace gridslam::harness

#endif  // GRIDSLAM_HARNESS_HPP
