#include "gridslam/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "gridslam/rng.hpp"
#include "gridslam/tensor_ops.hpp"

namespace gridslam {

PreparedEpisode prepareEpisode(const Scene& scene, const Trajectory& traj,
                               const PipelineConfig& cfg, std::uint64_t episodeSeed) {
    PreparedEpisode ep;
    ep.truth = groundTruthMap(scene);
    const Index steps = traj.steps();
    for (Index t = 1; t < steps; ++t) {
        const DiscretePose& pose = traj.poses[t];
        const ObservationMap obs = makeObservation(scene, ep.truth, pose, cfg, episodeSeed, t);
        const KernelStackd stack = rotationStack(obs, cfg.rotations);
        Grid3d oneHot(cfg.rotations, scene.height, scene.width);
        oneHot(pose.r, pose.x, pose.y) = 1.0;
        ep.projectedObs.push_back(projectObservation({std::move(oneHot)}, stack));
        ep.masks.push_back(roiMask(pose, cfg.window, scene.height, scene.width));
    }
    return ep;
}

namespace {

RolloutResult backpropOverCaches(const std::vector<ConvLstmStepCache>& caches,
                                 const std::vector<Grid3d>& lossGrads, double lossSum,
                                 const ConvLstmParams& params) {
    const Index n = static_cast<Index>(caches.size());
    RolloutResult result;
    result.loss = lossSum / static_cast<double>(n);
    result.grads = ConvLstmParams::zeros(params.channels, params.kernelSize);

    const Grid3d& shape = caches.front().obs;
    Grid3d dGrid(shape.channels, shape.height, shape.width);
    Grid3d dCell(shape.channels, shape.height, shape.width);
    for (Index t = n - 1; t >= 0; --t) {
        dGrid.data += lossGrads[t].data / static_cast<double>(n);
        convlstmBackward(caches[t], params, dGrid, dCell, result.grads);
    }
    if (!result.grads.allFinite())
        throw std::runtime_error("rolloutAndBackprop: non-finite gradient");
    return result;
}

}  // namespace

RolloutResult rolloutAndBackprop(const PreparedEpisode& episode, const ConvLstmParams& params,
                                 double epsilonSmooth) {
    const Index n = episode.updateSteps();
    if (n == 0) throw std::invalid_argument("rolloutAndBackprop: episode has no update steps");

    const Grid3d& truth = episode.truth;
    SemanticMap map(truth.channels, truth.height, truth.width);
    std::vector<ConvLstmStepCache> caches(n);
    std::vector<Grid3d> lossGrads(n);
    double lossSum = 0.0;
    for (Index t = 0; t < n; ++t) {
        map = convlstmForward(map, episode.projectedObs[t], episode.masks[t], params, caches[t]);
        const double stepLoss = klLossGrad(truth, map.grid, epsilonSmooth, lossGrads[t]);
        if (!std::isfinite(stepLoss))
            throw std::runtime_error("rolloutAndBackprop: non-finite loss at step " +
                                     std::to_string(t + 1));
        lossSum += stepLoss;
    }
    return backpropOverCaches(caches, lossGrads, lossSum, params);
}

double rolloutLoss(const PreparedEpisode& episode, const ConvLstmParams& params,
                   double epsilonSmooth) {
    const Index n = episode.updateSteps();
    if (n == 0) throw std::invalid_argument("rolloutLoss: episode has no update steps");
    const Grid3d& truth = episode.truth;
    SemanticMap map(truth.channels, truth.height, truth.width);
    ConvLstmStepCache cache;
    double lossSum = 0.0;
    for (Index t = 0; t < n; ++t) {
        map = convlstmForward(map, episode.projectedObs[t], episode.masks[t], params, cache);
        lossSum += klLoss(truth, map.grid, epsilonSmooth);
    }
    return lossSum / static_cast<double>(n);
}

RolloutResult rolloutAndBackpropOnline(const Scene& scene, const Trajectory& traj,
                                       const PipelineConfig& cfg, const ConvLstmParams& params,
                                       double epsilonSmooth, std::uint64_t episodeSeed) {
    const Index steps = traj.steps();
    if (steps < 2) throw std::invalid_argument("rolloutAndBackpropOnline: need at least 2 poses");
    const Index H = scene.height, W = scene.width, R = cfg.rotations;
    const Grid3d gt = groundTruthMap(scene);

    SemanticMap map(scene.classes, H, W);
    DiscretePose est = traj.poses.front();
    std::vector<ConvLstmStepCache> caches(steps - 1);
    std::vector<Grid3d> lossGrads(steps - 1);
    double lossSum = 0.0;

    for (Index t = 1; t < steps; ++t) {
        const DiscretePose& truePose = traj.poses[t];
        const ObservationMap obs = makeObservation(scene, gt, truePose, cfg, episodeSeed, t);
        const KernelStackd stack = rotationStack(obs, R);

        DiscretePose pose;
        PoseBelief belief;
        if (cfg.teacherForcing) {
            pose = truePose;
            Grid3d oneHot(R, H, W);
            oneHot(pose.r, pose.x, pose.y) = 1.0;
            belief = {std::move(oneHot)};
        } else {
            const DiscretePose reckoned = deadReckon(est, traj.imuDeltas[t - 1], R, H, W);
            const PoseBelief visual = visualBelief(map.grid, stack);
            const DiscretePose visualPose = argmaxPose(visual);
            const PoseSource gate = crossCheck(visualPose, reckoned, cfg.fusion, R);
            FusionOutcome outcome = selectBelief(visual, reckoned, gate);
            pose = outcome.pose;
            belief = std::move(outcome.belief);
        }

        const Grid3d projected = projectObservation(belief, stack);
        const RoiMask mask = roiMask(pose, cfg.window, H, W);
        map = convlstmForward(map, projected, mask, params, caches[t - 1]);
        const double stepLoss = klLossGrad(gt, map.grid, epsilonSmooth, lossGrads[t - 1]);
        if (!std::isfinite(stepLoss))
            throw std::runtime_error("rolloutAndBackpropOnline: non-finite loss at step " +
                                     std::to_string(t));
        lossSum += stepLoss;
        est = pose;
    }
    return backpropOverCaches(caches, lossGrads, lossSum, params);
}

double GradReport::maxRelErr() const {
    double m = 0.0;
    for (const GradBlockReport& b : blocks) m = std::max(m, b.maxRelErr);
    return m;
}

GradReport gradCheck(const PreparedEpisode& episode, const ConvLstmParams& params, double fdStep,
                     std::uint64_t seed, Index minCoords, double epsilonSmooth) {
    if (fdStep < 1e-7 || fdStep > 1e-3)
        throw std::invalid_argument("gradCheck: fd step outside [1e-7, 1e-3]");

    const RolloutResult analytic = rolloutAndBackprop(episode, params, epsilonSmooth);
    const Eigen::ArrayXd analyticFlat = analytic.grads.flatten();
    Eigen::ArrayXd theta = params.flatten();

    // block boundaries in flatten() order: per gate inputKernel/hiddenKernel/bias
    struct Block {
        std::string name;
        Index offset;
        Index size;
    };
    std::vector<Block> blocks;
    {
        Index at = 0;
        for (int q = 0; q < 4; ++q) {
            const auto& g = params.gates[q];
            const std::string gate = ConvLstmParams::kGateNames[q];
            blocks.push_back({gate + ".input_kernel", at, g.inputKernel.size()});
            at += g.inputKernel.size();
            blocks.push_back({gate + ".hidden_kernel", at, g.hiddenKernel.size()});
            at += g.hiddenKernel.size();
            blocks.push_back({gate + ".bias", at, g.bias.size()});
            at += g.bias.size();
        }
    }

    Rng rng(mixSeed(seed, 0x96AD0C4EULL));
    ConvLstmParams perturbed = params;
    GradReport report;
    report.fdStep = fdStep;

    for (const Block& block : blocks) {
        std::vector<Index> coords(block.size);
        std::iota(coords.begin(), coords.end(), Index{0});
        if (block.size > minCoords) {
            // Fisher-Yates prefix shuffle; keep the first minCoords entries
            for (Index i = 0; i < minCoords; ++i) {
                const Index j = i + rng.uniformInt(block.size - i);
                std::swap(coords[i], coords[j]);
            }
            coords.resize(minCoords);
        }

        GradBlockReport blockReport;
        blockReport.name = block.name;
        blockReport.coordsChecked = static_cast<Index>(coords.size());
        for (const Index c : coords) {
            const Index idx = block.offset + c;
            const double saved = theta[idx];
            theta[idx] = saved + fdStep;
            perturbed.unflatten(theta);
            const double plus = rolloutLoss(episode, perturbed, epsilonSmooth);
            theta[idx] = saved - fdStep;
            perturbed.unflatten(theta);
            const double minus = rolloutLoss(episode, perturbed, epsilonSmooth);
            theta[idx] = saved;

            const double fd = (plus - minus) / (2.0 * fdStep);
            const double a = analyticFlat[idx];
            const double rel = std::abs(a - fd) / std::max({std::abs(a), std::abs(fd), 1e-12});
            blockReport.maxRelErr = std::max(blockReport.maxRelErr, rel);
        }
        report.blocks.push_back(std::move(blockReport));
    }
    return report;
}

namespace {

class Optimizer {
  public:
    Optimizer(const TrainConfig& cfg, Index n)
        : cfg_(cfg), m_(Eigen::ArrayXd::Zero(n)), v_(Eigen::ArrayXd::Zero(n)) {}

    void step(Eigen::ArrayXd& theta, const Eigen::ArrayXd& grad) {
        if (cfg_.optimizer == TrainConfig::Optimizer::Sgd) {
            theta -= cfg_.learningRate * grad;
            return;
        }
        ++t_;
        m_ = cfg_.adamBeta1 * m_ + (1.0 - cfg_.adamBeta1) * grad;
        v_ = cfg_.adamBeta2 * v_ + (1.0 - cfg_.adamBeta2) * grad.square();
        const double mHat = 1.0 - std::pow(cfg_.adamBeta1, t_);
        const double vHat = 1.0 - std::pow(cfg_.adamBeta2, t_);
        theta -= cfg_.learningRate * (m_ / mHat) / ((v_ / vHat).sqrt() + cfg_.adamEps);
    }

  private:
    TrainConfig cfg_;
    Eigen::ArrayXd m_, v_;
    int t_ = 0;
};

}  // namespace

TrainResult train(const std::vector<EpisodeRef>& trainSet, const std::vector<EpisodeRef>& testSet,
                  const ConvLstmParams& initial, const TrainConfig& cfg,
                  const PipelineConfig& pipeline) {
    if (trainSet.empty()) throw std::invalid_argument("train: empty training set");
    if (cfg.learningRate < 0.0) throw std::invalid_argument("train: negative learning rate");

    TrainResult result;
    result.params = initial;

    // With teacher forcing the stamped observations never change; prepare
    // every episode once and train on pure cell math.
    std::vector<PreparedEpisode> prepTrain, prepTest;
    if (pipeline.teacherForcing) {
        prepTrain.reserve(trainSet.size());
        for (const EpisodeRef& ref : trainSet)
            prepTrain.push_back(
                prepareEpisode(*ref.scene, *ref.trajectory, pipeline, ref.episodeSeed));
        prepTest.reserve(testSet.size());
        for (const EpisodeRef& ref : testSet)
            prepTest.push_back(
                prepareEpisode(*ref.scene, *ref.trajectory, pipeline, ref.episodeSeed));
    }

    Eigen::ArrayXd theta = initial.flatten();
    Optimizer optimizer(cfg, theta.size());
    std::vector<Index> order(trainSet.size());
    std::iota(order.begin(), order.end(), Index{0});

    double initialLoss = -1.0;
    for (Index epoch = 0; epoch < cfg.epochs; ++epoch) {
        Rng shuffler(mixSeed(cfg.seed, 0xE90C0000ULL + static_cast<std::uint64_t>(epoch)));
        for (Index i = static_cast<Index>(order.size()) - 1; i > 0; --i)
            std::swap(order[i], order[shuffler.uniformInt(i + 1)]);

        double epochLoss = 0.0;
        Index processed = 0;
        while (processed < static_cast<Index>(order.size())) {
            const Index batchEnd =
                std::min<Index>(processed + cfg.batch, static_cast<Index>(order.size()));
            Eigen::ArrayXd batchGrad = Eigen::ArrayXd::Zero(theta.size());
            for (Index i = processed; i < batchEnd; ++i) {
                const Index e = order[i];
                RolloutResult rollout;
                if (pipeline.teacherForcing) {
                    rollout = rolloutAndBackprop(prepTrain[e], result.params, cfg.epsilonSmooth);
                } else {
                    const EpisodeRef& ref = trainSet[e];
                    rollout = rolloutAndBackpropOnline(*ref.scene, *ref.trajectory, pipeline,
                                                       result.params, cfg.epsilonSmooth,
                                                       ref.episodeSeed);
                }
                epochLoss += rollout.loss;
                batchGrad += rollout.grads.flatten();
            }
            batchGrad /= static_cast<double>(batchEnd - processed);
            optimizer.step(theta, batchGrad);
            result.params.unflatten(theta);
            processed = batchEnd;
        }
        epochLoss /= static_cast<double>(order.size());
        result.trainLoss.push_back(epochLoss);

        if (initialLoss < 0.0) initialLoss = epochLoss;
        if (!std::isfinite(epochLoss) || epochLoss > 1e3 * std::max(initialLoss, 1e-12))
            throw std::runtime_error("train: loss diverged at epoch " + std::to_string(epoch) +
                                     " (loss " + std::to_string(epochLoss) + ", initial " +
                                     std::to_string(initialLoss) + ")");

        if (!testSet.empty()) {
            double held = 0.0;
            if (pipeline.teacherForcing) {
                for (const PreparedEpisode& ep : prepTest)
                    held += rolloutLoss(ep, result.params, cfg.epsilonSmooth);
            } else {
                PipelineConfig evalCfg = pipeline;
                for (const EpisodeRef& ref : testSet) {
                    const PreparedEpisode ep =
                        prepareEpisode(*ref.scene, *ref.trajectory, evalCfg, ref.episodeSeed);
                    held += rolloutLoss(ep, result.params, cfg.epsilonSmooth);
                }
            }
            result.heldOutLoss.push_back(held / static_cast<double>(testSet.size()));
        }
    }
    return result;
}

}  // namespace gridslam
