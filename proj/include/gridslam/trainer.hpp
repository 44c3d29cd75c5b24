#ifndef GRIDSLAM_TRAINER_HPP
#define GRIDSLAM_TRAINER_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "gridslam/episode.hpp"
#include "gridslam/kl.hpp"
#include "gridslam/map_update.hpp"
#include "gridslam/scene.hpp"

namespace gridslam {

struct TrainConfig {
    Index epochs = 50;
    double learningRate = 1e-3;
    enum class Optimizer { Sgd, Adam };
    Optimizer optimizer = Optimizer::Adam;
    double adamBeta1 = 0.9;
    double adamBeta2 = 0.999;
    double adamEps = 1e-8;
    Index batch = 1;  // episodes per optimizer step
    double epsilonSmooth = kDefaultEpsilonSmooth;
    std::uint64_t seed = 0;
};

/// A training episode with everything that does not depend on the
/// parameters precomputed: the registered observations and ROI masks of a
/// teacher-forced rollout, plus the reconstruction target.
struct PreparedEpisode {
    Grid3d truth;
    std::vector<Grid3d> projectedObs;  // one per update step
    std::vector<RoiMask> masks;

    Index updateSteps() const { return static_cast<Index>(projectedObs.size()); }
};

/// Stamp the per-step observations at the ground-truth poses (teacher
/// forcing), so rollouts reduce to pure recurrent-cell math.
PreparedEpisode prepareEpisode(const Scene& scene, const Trajectory& traj,
                               const PipelineConfig& cfg, std::uint64_t episodeSeed);

struct RolloutResult {
    double loss = 0.0;
    ConvLstmParams grads;
};

/// Mean-over-steps KL map-reconstruction loss of one episode and its exact
/// gradient w.r.t. the cell parameters, backpropagated through every update
/// step. Pose beliefs are constants here by construction.
RolloutResult rolloutAndBackprop(const PreparedEpisode& episode, const ConvLstmParams& params,
                                 double epsilonSmooth = kDefaultEpsilonSmooth);

/// Forward-only episode loss.
double rolloutLoss(const PreparedEpisode& episode, const ConvLstmParams& params,
                   double epsilonSmooth = kDefaultEpsilonSmooth);

/// Like rolloutAndBackprop, but runs the live pose-estimation pipeline
/// (mode per cfg) instead of teacher forcing. Gradients do not flow through
/// the pose path: beliefs are treated as constants.
RolloutResult rolloutAndBackpropOnline(const Scene& scene, const Trajectory& traj,
                                       const PipelineConfig& cfg, const ConvLstmParams& params,
                                       double epsilonSmooth, std::uint64_t episodeSeed);

struct GradBlockReport {
    std::string name;
    double maxRelErr = 0.0;
    Index coordsChecked = 0;
};

struct GradReport {
    double fdStep = 1e-5;
    std::vector<GradBlockReport> blocks;

    double maxRelErr() const;
    bool pass(double tol = 1e-4) const { return maxRelErr() < tol; }
};

/// Verify analytic gradients against central finite differences on a random
/// coordinate subset (at least minCoords per parameter block, or the whole
/// block when smaller). Relative error is |a-b| / max(|a|,|b|,1e-12).
GradReport gradCheck(const PreparedEpisode& episode, const ConvLstmParams& params, double fdStep,
                     std::uint64_t seed, Index minCoords = 100,
                     double epsilonSmooth = kDefaultEpsilonSmooth);

struct EpisodeRef {
    const Scene* scene = nullptr;
    const Trajectory* trajectory = nullptr;
    std::uint64_t episodeSeed = 0;
};

struct TrainResult {
    ConvLstmParams params;
    std::vector<double> trainLoss;    // mean rollout loss per epoch
    std::vector<double> heldOutLoss;  // per epoch; empty without a test set
};

/// Optimize the cell parameters over shuffled episodes. Deterministic for a
/// fixed (seed, dataset, config). Throws if the loss diverges past 1e3x the
/// initial loss or turns non-finite.
TrainResult train(const std::vector<EpisodeRef>& trainSet, const std::vector<EpisodeRef>& testSet,
                  const ConvLstmParams& initial, const TrainConfig& cfg,
                  const PipelineConfig& pipeline);

}  // namespace gridslam

#endif  // GRIDSLAM_TRAINER_HPP
