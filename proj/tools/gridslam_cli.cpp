// Command-line front end: dataset generation, episode runs, training,
// gradient checking and map-quality evaluation. Every flag has a config-file
// equivalent (--config <file.json>, one section per subcommand, keys named
// after the long flags); flags given on the command line win.
//
// GRIDSLAM_LOG={debug,info,warn,error} controls log verbosity.

#include <cstdio>
#include <exception>
#include <fstream>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "gridslam/harness.hpp"

namespace {

using gridslam::Index;
using nlohmann::json;

json loadConfigSection(int argc, char** argv, const std::string& section) {
    for (int i = 1; i + 1 < argc; ++i) {
        if (std::string(argv[i]) == "--config") {
            std::ifstream in(argv[i + 1]);
            if (!in) throw std::runtime_error(std::string("cannot open config ") + argv[i + 1]);
            json doc = json::parse(in);
            if (doc.contains(section)) return doc.at(section);
            return json::object();
        }
    }
    return json::object();
}

template <typename T>
void maybe(const json& section, const std::string& key, T& var) {
    if (section.contains(key)) var = section.at(key).get<T>();
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"semantic grid SLAM engine"};
    app.require_subcommand(1);
    std::string configPath;

    gridslam::harness::GenerateOptions gen;
    gridslam::harness::RunOptions run;
    gridslam::harness::TrainOptions trainOpts;
    gridslam::harness::GradcheckOptions grad;
    gridslam::harness::EvalMapOptions evalMap;
    double runGamma1 = -1.0, runGamma2 = -1.0;
    std::string optimizer = "adam";

    try {
        const json genCfg = loadConfigSection(argc, argv, "generate");
        maybe(genCfg, "out", gen.outPath);
        maybe(genCfg, "seed", gen.seed);
        maybe(genCfg, "scenes", gen.scenes);
        maybe(genCfg, "trajectories-per-scene", gen.trajectoriesPerScene);
        maybe(genCfg, "steps", gen.steps);
        maybe(genCfg, "height", gen.sceneParams.height);
        maybe(genCfg, "width", gen.sceneParams.width);
        maybe(genCfg, "classes", gen.sceneParams.classes);
        maybe(genCfg, "objects", gen.sceneParams.objectCount);
        maybe(genCfg, "min-object-size", gen.sceneParams.minObjectSize);
        maybe(genCfg, "max-object-size", gen.sceneParams.maxObjectSize);
        maybe(genCfg, "rotations", gen.motion.orientationLevels);
        maybe(genCfg, "max-step", gen.motion.maxStepCells);
        maybe(genCfg, "max-turn", gen.motion.maxTurnLevels);
        maybe(genCfg, "fov", gen.camera.fov);
        maybe(genCfg, "max-range", gen.camera.maxRange);
        maybe(genCfg, "rays", gen.camera.rays);
        maybe(genCfg, "imu-sigma-pos", gen.imu.sigmaPos);
        maybe(genCfg, "imu-sigma-theta", gen.imu.sigmaTheta);
        maybe(genCfg, "imu-bias-pos", gen.imu.biasPos);
        maybe(genCfg, "imu-bias-theta", gen.imu.biasTheta);

        const json runCfg = loadConfigSection(argc, argv, "run");
        maybe(runCfg, "dataset", run.datasetPath);
        maybe(runCfg, "checkpoint", run.checkpointPath);
        maybe(runCfg, "out", run.outDir);
        maybe(runCfg, "mode", run.mode);
        maybe(runCfg, "alpha", run.heuristicAlpha);
        maybe(runCfg, "tier", run.tier);
        maybe(runCfg, "class-flip", run.errors.classFlipProb);
        maybe(runCfg, "mass-jitter", run.errors.massJitter);
        maybe(runCfg, "beta", run.beta);
        maybe(runCfg, "window", run.window);
        maybe(runCfg, "teacher-forcing", run.teacherForcing);
        maybe(runCfg, "freeze-map", run.freezeMap);
        maybe(runCfg, "preload-truth", run.preloadGroundTruth);
        maybe(runCfg, "seed", run.seed);
        if (runCfg.contains("gamma1")) runGamma1 = runCfg.at("gamma1").get<double>();
        if (runCfg.contains("gamma2")) runGamma2 = runCfg.at("gamma2").get<double>();

        const json trainCfg = loadConfigSection(argc, argv, "train");
        maybe(trainCfg, "dataset", trainOpts.datasetPath);
        maybe(trainCfg, "out", trainOpts.outPath);
        maybe(trainCfg, "split", trainOpts.split);
        maybe(trainCfg, "cross-fraction", trainOpts.crossFraction);
        maybe(trainCfg, "epochs", trainOpts.train.epochs);
        maybe(trainCfg, "lr", trainOpts.train.learningRate);
        maybe(trainCfg, "optimizer", optimizer);
        maybe(trainCfg, "batch", trainOpts.train.batch);
        maybe(trainCfg, "eps-smooth", trainOpts.train.epsilonSmooth);
        maybe(trainCfg, "seed", trainOpts.train.seed);
        maybe(trainCfg, "tier", trainOpts.tier);
        maybe(trainCfg, "class-flip", trainOpts.errors.classFlipProb);
        maybe(trainCfg, "mass-jitter", trainOpts.errors.massJitter);
        maybe(trainCfg, "beta", trainOpts.beta);
        maybe(trainCfg, "window", trainOpts.window);
        maybe(trainCfg, "teacher-forcing", trainOpts.teacherForcing);
        maybe(trainCfg, "kernel", trainOpts.kernelSize);

        const json gradCfg = loadConfigSection(argc, argv, "gradcheck");
        maybe(gradCfg, "checkpoint", grad.checkpointPath);
        maybe(gradCfg, "seed", grad.seed);
        maybe(gradCfg, "fd-step", grad.fdStep);
        maybe(gradCfg, "tolerance", grad.tolerance);

        const json evalCfg = loadConfigSection(argc, argv, "eval-map");
        maybe(evalCfg, "dataset", evalMap.datasetPath);
        maybe(evalCfg, "checkpoint", evalMap.checkpointPath);
        maybe(evalCfg, "out", evalMap.outDir);
        maybe(evalCfg, "tier", evalMap.tier);
        maybe(evalCfg, "class-flip", evalMap.errors.classFlipProb);
        maybe(evalCfg, "mass-jitter", evalMap.errors.massJitter);
        maybe(evalCfg, "beta", evalMap.beta);
        maybe(evalCfg, "window", evalMap.window);
        maybe(evalCfg, "alphas", evalMap.alphas);
        maybe(evalCfg, "seed", evalMap.seed);
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }

    CLI::App* cmdGen = app.add_subcommand("generate", "generate a scene/trajectory dataset");
    cmdGen->add_option("--config", configPath, "JSON config file");
    cmdGen->add_option("--out", gen.outPath, "output dataset path");
    cmdGen->add_option("--seed", gen.seed, "master seed");
    cmdGen->add_option("--scenes", gen.scenes, "number of scenes");
    cmdGen->add_option("--trajectories-per-scene", gen.trajectoriesPerScene, "paths per scene");
    cmdGen->add_option("--steps", gen.steps, "poses per trajectory");
    cmdGen->add_option("--height", gen.sceneParams.height, "grid rows");
    cmdGen->add_option("--width", gen.sceneParams.width, "grid columns");
    cmdGen->add_option("--classes", gen.sceneParams.classes, "semantic classes");
    cmdGen->add_option("--objects", gen.sceneParams.objectCount, "objects per scene");
    cmdGen->add_option("--min-object-size", gen.sceneParams.minObjectSize, "min side, cells");
    cmdGen->add_option("--max-object-size", gen.sceneParams.maxObjectSize, "max side, cells");
    cmdGen->add_option("--rotations", gen.motion.orientationLevels, "orientation levels R");
    cmdGen->add_option("--max-step", gen.motion.maxStepCells, "per-step motion bound");
    cmdGen->add_option("--max-turn", gen.motion.maxTurnLevels, "per-step turn bound");
    cmdGen->add_option("--fov", gen.camera.fov, "camera field of view, radians");
    cmdGen->add_option("--max-range", gen.camera.maxRange, "camera range, cells");
    cmdGen->add_option("--rays", gen.camera.rays, "rays per sweep");
    cmdGen->add_option("--imu-sigma-pos", gen.imu.sigmaPos, "IMU position noise std, cells");
    cmdGen->add_option("--imu-sigma-theta", gen.imu.sigmaTheta, "IMU heading noise std, rad");
    cmdGen->add_option("--imu-bias-pos", gen.imu.biasPos, "IMU position bias per step, cells");
    cmdGen->add_option("--imu-bias-theta", gen.imu.biasTheta, "IMU heading bias per step, rad");

    CLI::App* cmdRun = app.add_subcommand("run", "run episodes and write metrics");
    cmdRun->add_option("--config", configPath, "JSON config file");
    cmdRun->add_option("--dataset", run.datasetPath, "dataset path");
    cmdRun->add_option("--checkpoint", run.checkpointPath, "trained cell checkpoint");
    cmdRun->add_option("--out", run.outDir, "output directory");
    cmdRun->add_option("--mode", run.mode,
                       "visual | visual-inertial | dead-reckoning | heuristic");
    cmdRun->add_option("--alpha", run.heuristicAlpha, "heuristic blend factor");
    cmdRun->add_option("--tier", run.tier, "real | obstructed | ideal");
    cmdRun->add_option("--class-flip", run.errors.classFlipProb, "class flip probability");
    cmdRun->add_option("--mass-jitter", run.errors.massJitter, "mass jitter amplitude");
    cmdRun->add_option("--beta", run.beta, "observation noise threshold");
    cmdRun->add_option("--window", run.window, "observation window h");
    cmdRun->add_flag("--teacher-forcing", run.teacherForcing, "use ground-truth poses");
    cmdRun->add_flag("--freeze-map", run.freezeMap, "skip map updates");
    cmdRun->add_flag("--preload-truth", run.preloadGroundTruth, "start from the true map");
    cmdRun->add_option("--gamma1", runGamma1, "position gate, cells");
    cmdRun->add_option("--gamma2", runGamma2, "orientation gate, levels");
    cmdRun->add_option("--seed", run.seed, "run seed");

    CLI::App* cmdTrain = app.add_subcommand("train", "train the map-update cell");
    cmdTrain->add_option("--config", configPath, "JSON config file");
    cmdTrain->add_option("--dataset", trainOpts.datasetPath, "dataset path");
    cmdTrain->add_option("--out", trainOpts.outPath, "checkpoint output path");
    cmdTrain->add_option("--split", trainOpts.split, "intra | cross");
    cmdTrain->add_option("--cross-fraction", trainOpts.crossFraction, "train share of scenes");
    cmdTrain->add_option("--epochs", trainOpts.train.epochs, "training epochs");
    cmdTrain->add_option("--lr", trainOpts.train.learningRate, "learning rate");
    cmdTrain->add_option("--optimizer", optimizer, "sgd | adam");
    cmdTrain->add_option("--batch", trainOpts.train.batch, "episodes per update");
    cmdTrain->add_option("--eps-smooth", trainOpts.train.epsilonSmooth, "KL smoothing epsilon");
    cmdTrain->add_option("--seed", trainOpts.train.seed, "training seed");
    cmdTrain->add_option("--tier", trainOpts.tier, "observation tier for training");
    cmdTrain->add_option("--class-flip", trainOpts.errors.classFlipProb, "class flip prob");
    cmdTrain->add_option("--mass-jitter", trainOpts.errors.massJitter, "mass jitter amplitude");
    cmdTrain->add_option("--beta", trainOpts.beta, "observation noise threshold");
    cmdTrain->add_option("--window", trainOpts.window, "observation window h");
    cmdTrain->add_flag("--teacher-forcing,!--no-teacher-forcing", trainOpts.teacherForcing,
                       "train with ground-truth poses (default on)");
    cmdTrain->add_option("--kernel", trainOpts.kernelSize, "gate kernel size");

    CLI::App* cmdGrad = app.add_subcommand("gradcheck", "finite-difference gradient check");
    cmdGrad->add_option("--config", configPath, "JSON config file");
    cmdGrad->add_option("--checkpoint", grad.checkpointPath, "checkpoint to check (optional)");
    cmdGrad->add_option("--seed", grad.seed, "episode seed");
    cmdGrad->add_option("--fd-step", grad.fdStep, "central difference step");
    cmdGrad->add_option("--tolerance", grad.tolerance, "max relative error to pass");

    CLI::App* cmdEval = app.add_subcommand("eval-map", "map construction quality study");
    cmdEval->add_option("--config", configPath, "JSON config file");
    cmdEval->add_option("--dataset", evalMap.datasetPath, "dataset path");
    cmdEval->add_option("--checkpoint", evalMap.checkpointPath, "trained cell checkpoint");
    cmdEval->add_option("--out", evalMap.outDir, "output directory");
    cmdEval->add_option("--tier", evalMap.tier, "real | obstructed | ideal");
    cmdEval->add_option("--class-flip", evalMap.errors.classFlipProb, "class flip probability");
    cmdEval->add_option("--mass-jitter", evalMap.errors.massJitter, "mass jitter amplitude");
    cmdEval->add_option("--beta", evalMap.beta, "observation noise threshold");
    cmdEval->add_option("--window", evalMap.window, "observation window h");
    cmdEval->add_option("--alphas", evalMap.alphas, "heuristic alpha sweep");
    cmdEval->add_option("--seed", evalMap.seed, "evaluation seed");

    CLI11_PARSE(app, argc, argv);

    try {
        if (cmdGen->parsed()) {
            if (gen.outPath.empty()) throw std::invalid_argument("generate: --out is required");
            gridslam::harness::cmdGenerate(gen);
        } else if (cmdRun->parsed()) {
            if (run.datasetPath.empty()) throw std::invalid_argument("run: --dataset is required");
            if (runGamma1 >= 0.0) run.gamma1 = runGamma1;
            if (runGamma2 >= 0.0) run.gamma2 = runGamma2;
            gridslam::harness::cmdRun(run);
        } else if (cmdTrain->parsed()) {
            if (trainOpts.datasetPath.empty() || trainOpts.outPath.empty())
                throw std::invalid_argument("train: --dataset and --out are required");
            trainOpts.train.optimizer = optimizer == "sgd"
                                            ? gridslam::TrainConfig::Optimizer::Sgd
                                            : gridslam::TrainConfig::Optimizer::Adam;
            gridslam::harness::cmdTrain(trainOpts);
        } else if (cmdGrad->parsed()) {
            const gridslam::harness::GradcheckSummary summary =
                gridslam::harness::cmdGradcheck(grad);
            const bool ok = summary.pass(grad.tolerance);
            std::printf("gradcheck %s (1-step max %.3g, 5-step max %.3g, tolerance %.3g)\n",
                        ok ? "PASS" : "FAIL", summary.oneStep.maxRelErr(),
                        summary.fiveStep.maxRelErr(), grad.tolerance);
            return ok ? 0 : 2;
        } else if (cmdEval->parsed()) {
            if (evalMap.datasetPath.empty() || evalMap.checkpointPath.empty())
                throw std::invalid_argument("eval-map: --dataset and --checkpoint are required");
            gridslam::harness::cmdEvalMap(evalMap);
        }
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
    return 0;
}
