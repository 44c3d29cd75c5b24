#include "gridslam/harness.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <stdexcept>

#include <json.hpp>

namespace gridslam::harness {

using nlohmann::json;

namespace {

int logLevel() {
    static const int level = [] {
        const char* env = std::getenv("GRIDSLAM_LOG");
        if (!env) return 1;
        const std::string v(env);
        if (v == "debug") return 0;
        if (v == "info") return 1;
        if (v == "warn") return 2;
        return 3;
    }();
    return level;
}

void logInfo(const std::string& msg) {
    if (logLevel() <= 1) std::fprintf(stderr, "[gridslam] %s\n", msg.c_str());
}

std::string formatDouble(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

void writeEpisodeCsv(const std::string& path, const EpisodeResult& result) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cmdRun: cannot open " + path);
    out << "step,true_r,true_x,true_y,est_r,est_x,est_y,pos_err,dir_err_deg,source,map_mse\n";
    for (const StepRow& row : result.rows) {
        out << row.step << ',' << row.truePose.r << ',' << row.truePose.x << ','
            << row.truePose.y << ',' << row.estPose.r << ',' << row.estPose.x << ','
            << row.estPose.y << ',' << formatDouble(row.posErr) << ','
            << formatDouble(row.dirErrDeg) << ',' << sourceName(row.source) << ','
            << formatDouble(row.mapMse) << '\n';
    }
    if (!out) throw std::runtime_error("cmdRun: write failed for " + path);
}

std::uint64_t episodeSeed(std::uint64_t base, Index sceneIdx, Index trajIdx) {
    return mixSeed(mixSeed(base, static_cast<std::uint64_t>(sceneIdx)),
                   static_cast<std::uint64_t>(trajIdx));
}

struct StepAccumulator {
    std::vector<double> sums;
    std::vector<Index> counts;

    void add(Index step, double value) {
        if (static_cast<Index>(sums.size()) <= step) {
            sums.resize(step + 1, 0.0);
            counts.resize(step + 1, 0);
        }
        sums[step] += value;
        ++counts[step];
    }

    std::vector<double> means() const {
        std::vector<double> out(sums.size());
        for (std::size_t i = 0; i < sums.size(); ++i)
            out[i] = counts[i] ? sums[i] / counts[i] : 0.0;
        return out;
    }
};

}  // namespace

Tier tierFromString(const std::string& name) {
    if (name == "real") return Tier::Real;
    if (name == "obstructed") return Tier::Obstructed;
    if (name == "ideal") return Tier::Ideal;
    throw std::invalid_argument("unknown tier: " + name);
}

void cmdGenerate(const GenerateOptions& opts) {
    if (opts.scenes < 1 || opts.trajectoriesPerScene < 1 || opts.steps < 1)
        throw std::invalid_argument("cmdGenerate: counts must be positive");
    Dataset dataset;
    dataset.orientationLevels = opts.motion.orientationLevels;
    dataset.camera = opts.camera;
    dataset.imu = opts.imu;
    dataset.imu.seed = mixSeed(opts.seed, 0x1A0B5EEDULL);

    for (Index si = 0; si < opts.scenes; ++si) {
        Dataset::SceneEntry entry;
        entry.scene = generateScene(mixSeed(opts.seed, static_cast<std::uint64_t>(si)),
                                    opts.sceneParams);
        for (Index tj = 0; tj < opts.trajectoriesPerScene; ++tj) {
            Trajectory traj = generateTrajectory(entry.scene, episodeSeed(opts.seed, si, tj),
                                                 opts.steps, opts.motion);
            ImuModel perTrajectory = dataset.imu;
            perTrajectory.seed = mixSeed(dataset.imu.seed,
                                         static_cast<std::uint64_t>(si * 8191 + tj));
            for (std::size_t k = 0; k < traj.trueDeltas.size(); ++k)
                traj.imuDeltas.push_back(imuRead(traj.trueDeltas[k], perTrajectory, k));
            entry.trajectories.push_back(std::move(traj));
        }
        dataset.scenes.push_back(std::move(entry));
    }
    saveDataset(dataset, opts.outPath);
    logInfo("wrote dataset with " + std::to_string(opts.scenes) + " scenes to " + opts.outPath);
}

RunSummary cmdRun(const RunOptions& opts) {
    const Dataset dataset = loadDataset(opts.datasetPath);
    if (dataset.scenes.empty()) throw std::runtime_error("cmdRun: dataset has no scenes");

    PipelineConfig cfg;
    cfg.rotations = dataset.orientationLevels;
    cfg.window = opts.window;
    cfg.beta = opts.beta;
    cfg.camera = dataset.camera;
    cfg.tier = tierFromString(opts.tier);
    cfg.errors = opts.errors;
    cfg.fusion = fusionConfigFromImu(dataset.imu, dataset.orientationLevels);
    if (opts.gamma1) cfg.fusion.gamma1 = *opts.gamma1;
    if (opts.gamma2) cfg.fusion.gamma2 = *opts.gamma2;
    cfg.teacherForcing = opts.teacherForcing;
    cfg.noiseSeed = opts.seed;
    cfg.heuristicAlpha = opts.heuristicAlpha;

    ConvLstmParams params;
    bool haveParams = false;
    if (opts.mode == "visual") {
        cfg.poseMode = PoseMode::Visual;
        cfg.updateRule = UpdateRule::ConvLstm;
    } else if (opts.mode == "visual-inertial") {
        cfg.poseMode = PoseMode::VisualInertial;
        cfg.updateRule = UpdateRule::ConvLstm;
    } else if (opts.mode == "dead-reckoning") {
        cfg.poseMode = PoseMode::DeadReckoning;
        cfg.updateRule = UpdateRule::None;
    } else if (opts.mode == "heuristic") {
        cfg.poseMode = PoseMode::VisualInertial;
        cfg.updateRule = UpdateRule::Heuristic;
    } else {
        throw std::invalid_argument("cmdRun: unknown mode " + opts.mode);
    }
    if (opts.freezeMap) cfg.updateRule = UpdateRule::None;
    if (cfg.updateRule == UpdateRule::ConvLstm) {
        if (opts.checkpointPath.empty())
            throw std::invalid_argument("cmdRun: mode " + opts.mode + " needs a checkpoint");
        params = loadCheckpoint(opts.checkpointPath);
        haveParams = true;
    }

    if (!opts.outDir.empty()) std::filesystem::create_directories(opts.outDir);

    RunSummary summary;
    summary.mode = opts.mode;
    StepAccumulator posErrByStep, mapMseByStep;
    Index matches = 0, estimated = 0, inertial = 0;
    double apeSum = 0.0, adeSum = 0.0, mseSum = 0.0, inertialFracSum = 0.0;

    json episodesJson = json::array();
    for (std::size_t si = 0; si < dataset.scenes.size(); ++si) {
        const Dataset::SceneEntry& entry = dataset.scenes[si];
        const Grid3d gt = groundTruthMap(entry.scene);
        SemanticMap preloaded;
        if (opts.preloadGroundTruth) {
            preloaded = SemanticMap(entry.scene.classes, entry.scene.height, entry.scene.width);
            preloaded.grid = gt;
        }
        for (std::size_t tj = 0; tj < entry.trajectories.size(); ++tj) {
            const EpisodeResult result =
                runEpisode(entry.scene, entry.trajectories[tj], cfg,
                           haveParams ? &params : nullptr, episodeSeed(opts.seed, si, tj),
                           opts.preloadGroundTruth ? &preloaded : nullptr);

            if (!opts.outDir.empty()) {
                char name[64];
                std::snprintf(name, sizeof(name), "scene%03zu_traj%zu.csv", si, tj);
                writeEpisodeCsv(opts.outDir + "/" + name, result);
            }

            EpisodeSummary ep;
            ep.scene = static_cast<Index>(si);
            ep.trajectory = static_cast<Index>(tj);
            ep.ape = result.ape();
            ep.ade = result.ade();
            ep.finalMapMse = result.finalMapMse();
            ep.inertialFraction =
                result.estimatedSteps
                    ? static_cast<double>(result.inertialSteps) / result.estimatedSteps
                    : 0.0;
            summary.episodes.push_back(ep);

            apeSum += ep.ape;
            adeSum += ep.ade;
            mseSum += ep.finalMapMse;
            inertialFracSum += ep.inertialFraction;
            summary.maxBeliefSumError =
                std::max(summary.maxBeliefSumError, result.maxBeliefSumError);
            for (const StepRow& row : result.rows) {
                posErrByStep.add(row.step, row.posErr);
                mapMseByStep.add(row.step, row.mapMse);
                if (row.step > 0) {
                    ++estimated;
                    if (row.estPose == row.truePose) ++matches;
                    if (row.source == StepSource::Inertial) ++inertial;
                }
            }

            episodesJson.push_back({{"scene", si},
                                    {"trajectory", tj},
                                    {"ape", ep.ape},
                                    {"ade", ep.ade},
                                    {"final_map_mse", ep.finalMapMse},
                                    {"inertial_fraction", ep.inertialFraction}});
        }
    }

    const double n = static_cast<double>(summary.episodes.size());
    summary.ape = apeSum / n;
    summary.ade = adeSum / n;
    summary.finalMapMse = mseSum / n;
    summary.inertialFraction = inertialFracSum / n;
    summary.meanPosErrByStep = posErrByStep.means();
    summary.meanMapMseByStep = mapMseByStep.means();
    summary.oraclePoseMatchRate = estimated ? static_cast<double>(matches) / estimated : 0.0;

    if (!opts.outDir.empty()) {
        json doc = {{"version", 1},
                    {"mode", opts.mode},
                    {"tier", opts.tier},
                    {"ape", summary.ape},
                    {"ade", summary.ade},
                    {"final_map_mse", summary.finalMapMse},
                    {"inertial_fraction", summary.inertialFraction},
                    {"pose_match_rate", summary.oraclePoseMatchRate},
                    {"mean_pos_err_by_step", summary.meanPosErrByStep},
                    {"mean_map_mse_by_step", summary.meanMapMseByStep},
                    {"episodes", episodesJson}};
        std::ofstream out(opts.outDir + "/summary.json");
        if (!out) throw std::runtime_error("cmdRun: cannot open summary.json");
        out << doc.dump(1) << '\n';
    }
    logInfo("run mode=" + opts.mode + " APE=" + formatDouble(summary.ape) +
            " ADE=" + formatDouble(summary.ade));
    return summary;
}

Split makeSplit(const Dataset& dataset, const std::string& mode, double crossFraction,
                std::uint64_t seed) {
    Split split;
    const Index n = static_cast<Index>(dataset.scenes.size());
    if (mode == "intra") {
        for (Index si = 0; si < n; ++si) {
            const auto& trajectories = dataset.scenes[si].trajectories;
            const Index k = static_cast<Index>(trajectories.size());
            for (Index tj = 0; tj < k; ++tj) {
                EpisodeRef ref{&dataset.scenes[si].scene, &trajectories[tj],
                               episodeSeed(seed, si, tj)};
                if (k > 1 && tj == k - 1)
                    split.test.push_back(ref);
                else
                    split.train.push_back(ref);
            }
        }
    } else if (mode == "cross") {
        if (n < 2) throw std::invalid_argument("makeSplit: cross-scene split needs >= 2 scenes");
        std::vector<Index> order(n);
        std::iota(order.begin(), order.end(), Index{0});
        Rng rng(mixSeed(seed, 0x5B117ULL));
        for (Index i = n - 1; i > 0; --i) std::swap(order[i], order[rng.uniformInt(i + 1)]);
        const Index nTrain = std::clamp<Index>(
            static_cast<Index>(std::ceil(crossFraction * static_cast<double>(n))), 1, n - 1);
        for (Index i = 0; i < n; ++i) {
            const Index si = order[i];
            const auto& trajectories = dataset.scenes[si].trajectories;
            for (Index tj = 0; tj < static_cast<Index>(trajectories.size()); ++tj) {
                EpisodeRef ref{&dataset.scenes[si].scene, &trajectories[tj],
                               episodeSeed(seed, si, tj)};
                if (i < nTrain)
                    split.train.push_back(ref);
                else
                    split.test.push_back(ref);
            }
        }
    } else {
        throw std::invalid_argument("makeSplit: unknown split mode " + mode);
    }
    return split;
}

TrainSummary cmdTrain(const TrainOptions& opts) {
    const Dataset dataset = loadDataset(opts.datasetPath);
    if (dataset.scenes.empty()) throw std::runtime_error("cmdTrain: dataset has no scenes");

    const Split split = makeSplit(dataset, opts.split, opts.crossFraction, opts.train.seed);
    if (split.train.empty()) throw std::runtime_error("cmdTrain: empty training split");

    PipelineConfig pipeline;
    pipeline.rotations = dataset.orientationLevels;
    pipeline.window = opts.window;
    pipeline.beta = opts.beta;
    pipeline.camera = dataset.camera;
    pipeline.tier = tierFromString(opts.tier);
    pipeline.errors = opts.errors;
    pipeline.fusion = fusionConfigFromImu(dataset.imu, dataset.orientationLevels);
    pipeline.teacherForcing = opts.teacherForcing;
    pipeline.noiseSeed = opts.train.seed;

    const Index classes = dataset.scenes.front().scene.classes;
    const ConvLstmParams initial =
        ConvLstmParams::randomInit(classes, opts.train.seed, opts.kernelSize);

    logInfo("training on " + std::to_string(split.train.size()) + " episodes, holding out " +
            std::to_string(split.test.size()));
    const TrainResult result = train(split.train, split.test, initial, opts.train, pipeline);

    json cfgJson = {{"split", opts.split},        {"tier", opts.tier},
                    {"epochs", opts.train.epochs}, {"lr", opts.train.learningRate},
                    {"seed", opts.train.seed},     {"window", opts.window},
                    {"beta", opts.beta},           {"teacher_forcing", opts.teacherForcing},
                    {"kernel", opts.kernelSize}};
    CheckpointManifest manifest;
    manifest.epoch = opts.train.epochs;
    manifest.loss = result.trainLoss.empty() ? 0.0 : result.trainLoss.back();
    manifest.configHash = hashString(cfgJson.dump());
    saveCheckpoint(result.params, opts.outPath, manifest);

    TrainSummary summary;
    summary.trainLoss = result.trainLoss;
    summary.heldOutLoss = result.heldOutLoss;
    summary.trainEpisodes = static_cast<Index>(split.train.size());
    summary.testEpisodes = static_cast<Index>(split.test.size());
    for (std::size_t e = 0; e < summary.trainLoss.size(); ++e) {
        std::string line = "epoch " + std::to_string(e) +
                           " train_loss=" + formatDouble(summary.trainLoss[e]);
        if (e < summary.heldOutLoss.size())
            line += " held_out_loss=" + formatDouble(summary.heldOutLoss[e]);
        logInfo(line);
    }
    return summary;
}

GradcheckSummary cmdGradcheck(const GradcheckOptions& opts) {
    ConvLstmParams params = opts.checkpointPath.empty()
                                ? ConvLstmParams::randomInit(3, opts.seed)
                                : loadCheckpoint(opts.checkpointPath);

    SceneParams sceneParams;
    sceneParams.height = 9;
    sceneParams.width = 9;
    sceneParams.classes = params.channels;
    sceneParams.objectCount = 3;
    sceneParams.minObjectSize = 1;
    sceneParams.maxObjectSize = 1;
    const Scene scene = generateScene(mixSeed(opts.seed, 0x6CULL), sceneParams);

    MotionParams motion;
    motion.orientationLevels = 4;
    motion.maxStepCells = 1;
    motion.maxTurnLevels = 1;

    PipelineConfig cfg;
    cfg.rotations = 4;
    cfg.window = 3;
    cfg.beta = 0.02;
    cfg.camera.fov = 2.0 * std::numbers::pi;
    cfg.camera.rays = 360;
    cfg.camera.maxRange = 6.0;
    cfg.tier = Tier::Obstructed;
    cfg.teacherForcing = true;

    GradcheckSummary summary;
    const Trajectory one = generateTrajectory(scene, mixSeed(opts.seed, 1), 2, motion);
    const Trajectory five = generateTrajectory(scene, mixSeed(opts.seed, 2), 6, motion);
    summary.oneStep = gradCheck(prepareEpisode(scene, one, cfg, 11), params, opts.fdStep,
                                mixSeed(opts.seed, 3));
    summary.fiveStep = gradCheck(prepareEpisode(scene, five, cfg, 12), params, opts.fdStep,
                                 mixSeed(opts.seed, 4));

    for (const GradReport* report : {&summary.oneStep, &summary.fiveStep}) {
        logInfo(std::string("gradcheck ") + (report == &summary.oneStep ? "1-step" : "5-step") +
                " episode, fd_step=" + formatDouble(report->fdStep));
        for (const GradBlockReport& block : report->blocks)
            logInfo("  " + block.name + ": max_rel_err=" + formatDouble(block.maxRelErr) +
                    " (" + std::to_string(block.coordsChecked) + " coords)");
    }
    return summary;
}

const EvalMapMethod& EvalMapSummary::method(const std::string& name) const {
    for (const EvalMapMethod& m : methods)
        if (m.name == name) return m;
    throw std::invalid_argument("EvalMapSummary: no method " + name);
}

EvalMapSummary cmdEvalMap(const EvalMapOptions& opts) {
    const Dataset dataset = loadDataset(opts.datasetPath);
    if (dataset.scenes.empty()) throw std::runtime_error("cmdEvalMap: dataset has no scenes");
    const ConvLstmParams params = loadCheckpoint(opts.checkpointPath);

    PipelineConfig base;
    base.rotations = dataset.orientationLevels;
    base.window = opts.window;
    base.beta = opts.beta;
    base.camera = dataset.camera;
    base.tier = tierFromString(opts.tier);
    base.errors = opts.errors;
    base.teacherForcing = true;  // map-quality study assumes known poses
    base.noiseSeed = opts.seed;

    struct Method {
        std::string name;
        UpdateRule rule;
        double alpha;
    };
    std::vector<Method> methods = {{"ours", UpdateRule::ConvLstm, 0.0}};
    for (const double alpha : opts.alphas) {
        char name[32];
        std::snprintf(name, sizeof(name), "heuristic_%.1f", alpha);
        methods.push_back({name, UpdateRule::Heuristic, alpha});
    }

    EvalMapSummary summary;
    summary.tier = opts.tier;

    for (const Method& method : methods) {
        PipelineConfig cfg = base;
        cfg.updateRule = method.rule;
        cfg.heuristicAlpha = method.alpha;

        EvalMapMethod out;
        out.name = method.name;
        StepAccumulator stepAcc;
        std::vector<double> episodeMeans, episodeRawMeans;
        for (std::size_t si = 0; si < dataset.scenes.size(); ++si) {
            const Dataset::SceneEntry& entry = dataset.scenes[si];
            for (std::size_t tj = 0; tj < entry.trajectories.size(); ++tj) {
                const EpisodeResult result =
                    runEpisode(entry.scene, entry.trajectories[tj], cfg,
                               method.rule == UpdateRule::ConvLstm ? &params : nullptr,
                               episodeSeed(opts.seed, si, tj));
                double mseAcc = 0.0, rawAcc = 0.0;
                Index n = 0;
                for (const StepRow& row : result.rows) {
                    stepAcc.add(row.step, row.mapMse);
                    if (row.step > 0) {
                        mseAcc += row.mapMse;
                        rawAcc += row.mapMseRaw;
                        ++n;
                    }
                }
                episodeMeans.push_back(mseAcc / std::max<Index>(n, 1));
                episodeRawMeans.push_back(rawAcc / std::max<Index>(n, 1));
            }
        }
        const double n = static_cast<double>(episodeMeans.size());
        for (const double v : episodeMeans) out.mseMean += v;
        out.mseMean /= n;
        for (const double v : episodeRawMeans) out.mseRawMean += v;
        out.mseRawMean /= n;
        for (const double v : episodeMeans)
            out.mseStd += (v - out.mseMean) * (v - out.mseMean);
        out.mseStd = std::sqrt(out.mseStd / n);
        for (const double v : episodeRawMeans)
            out.mseRawStd += (v - out.mseRawMean) * (v - out.mseRawMean);
        out.mseRawStd = std::sqrt(out.mseRawStd / n);
        out.perStepMse = stepAcc.means();
        logInfo("eval-map " + opts.tier + " " + method.name + " mse=" +
                formatDouble(out.mseMean) + " (raw " + formatDouble(out.mseRawMean) + ")");
        summary.methods.push_back(std::move(out));
    }

    if (!opts.outDir.empty()) {
        std::filesystem::create_directories(opts.outDir);
        json doc = {{"version", 1}, {"tier", opts.tier}, {"methods", json::array()}};
        for (const EvalMapMethod& m : summary.methods)
            doc["methods"].push_back({{"name", m.name},
                                      {"mse_mean", m.mseMean},
                                      {"mse_std", m.mseStd},
                                      {"mse_raw_mean", m.mseRawMean},
                                      {"mse_raw_std", m.mseRawStd},
                                      {"per_step_mse", m.perStepMse}});
        std::ofstream out(opts.outDir + "/eval_map.json");
        if (!out) throw std::runtime_error("cmdEvalMap: cannot open eval_map.json");
        out << doc.dump(1) << '\n';

        std::ofstream series(opts.outDir + "/eval_map_series.csv");
        series << "step";
        for (const EvalMapMethod& m : summary.methods) series << ',' << m.name;
        series << '\n';
        const std::size_t steps = summary.methods.front().perStepMse.size();
        for (std::size_t t = 0; t < steps; ++t) {
            series << t;
            for (const EvalMapMethod& m : summary.methods)
                series << ',' << formatDouble(m.perStepMse[t]);
            series << '\n';
        }
    }
    return summary;
}

}  // namespace gridslam::harness
