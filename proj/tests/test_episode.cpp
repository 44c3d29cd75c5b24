#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "gridslam/episode.hpp"
#include "gridslam/harness.hpp"

using namespace gridslam;

namespace {

struct Fixture {
    Scene scene;
    Trajectory traj;
    PipelineConfig cfg;
    ConvLstmParams params;

    Fixture() {
        SceneParams sp;
        sp.height = 21;
        sp.width = 21;
        sp.classes = 4;
        sp.objectCount = 6;
        sp.maxObjectSize = 2;
        scene = generateScene(31, sp);

        MotionParams motion;
        motion.orientationLevels = 8;
        traj = generateTrajectory(scene, 17, 12, motion);

        ImuModel imu;
        imu.sigmaPos = 0.2;
        imu.biasPos = 0.05;
        imu.sigmaTheta = 0.03;
        imu.seed = 23;
        for (std::size_t k = 0; k < traj.trueDeltas.size(); ++k)
            traj.imuDeltas.push_back(imuRead(traj.trueDeltas[k], imu, k));

        cfg.rotations = 8;
        cfg.window = 7;
        cfg.camera.fov = 2.0 * std::numbers::pi;
        cfg.camera.rays = 720;
        cfg.camera.maxRange = 10.0;
        cfg.tier = Tier::Obstructed;
        cfg.fusion = {2.0, 1.5};
        params = ConvLstmParams::randomInit(4, 5);
    }
};

}  // namespace

TEST_CASE("runEpisode: step 0 anchors the start pose on the zero map") {
    Fixture f;
    const EpisodeResult result = runEpisode(f.scene, f.traj, f.cfg, &f.params, 3);
    REQUIRE(result.rows.size() == 12);
    const StepRow& first = result.rows.front();
    CHECK(first.step == 0);
    CHECK(first.estPose == f.traj.poses.front());
    CHECK(first.posErr == 0.0);
    CHECK(first.source == StepSource::Start);

    const Grid3d zero(4, 21, 21);
    const Grid3d gt = groundTruthMap(f.scene);
    CHECK(first.mapMse == doctest::Approx(mapMse(gt, zero)));
    CHECK(first.mapMseRaw == doctest::Approx(rawMse(gt, zero)));
}

TEST_CASE("runEpisode: beliefs stay normalized at every step") {
    Fixture f;
    for (const PoseMode mode :
         {PoseMode::Visual, PoseMode::VisualInertial, PoseMode::DeadReckoning}) {
        f.cfg.poseMode = mode;
        const EpisodeResult result = runEpisode(f.scene, f.traj, f.cfg, &f.params, 3);
        CHECK(result.maxBeliefSumError <= 1e-9);
    }
}

TEST_CASE("runEpisode: dead reckoning with a perfect IMU has zero error") {
    Fixture f;
    Trajectory exact = f.traj;
    exact.imuDeltas = exact.trueDeltas;
    f.cfg.poseMode = PoseMode::DeadReckoning;
    f.cfg.updateRule = UpdateRule::None;
    const EpisodeResult result = runEpisode(f.scene, exact, f.cfg, nullptr, 3);
    CHECK(result.ape() == 0.0);
    CHECK(result.ade() == 0.0);
    for (const StepRow& row : result.rows)
        if (row.step > 0) CHECK(row.source == StepSource::Inertial);
}

TEST_CASE("runEpisode: teacher forcing pins the estimated pose to the truth") {
    Fixture f;
    f.cfg.teacherForcing = true;
    const EpisodeResult result = runEpisode(f.scene, f.traj, f.cfg, &f.params, 3);
    CHECK(result.ape() == 0.0);
    for (const StepRow& row : result.rows)
        if (row.step > 0) CHECK(row.source == StepSource::Truth);
}

TEST_CASE("runEpisode: direction error uses circular distance in degrees") {
    Fixture f;
    f.cfg.poseMode = PoseMode::DeadReckoning;
    f.cfg.updateRule = UpdateRule::None;
    Trajectory twisted = f.traj;
    twisted.imuDeltas = twisted.trueDeltas;
    // corrupt one step by a full-circle-minus-one-level turn: the reported
    // error must be 45 degrees (one level of R=8), not 315
    twisted.imuDeltas[3][2] += 2.0 * std::numbers::pi * 7.0 / 8.0;
    const EpisodeResult result = runEpisode(f.scene, twisted, f.cfg, nullptr, 3);
    CHECK(result.rows[4].dirErrDeg == doctest::Approx(45.0));
}

TEST_CASE("runEpisode: fused APE never exceeds dead reckoning plus the position gate") {
    Fixture f;
    f.cfg.poseMode = PoseMode::DeadReckoning;
    f.cfg.updateRule = UpdateRule::None;
    const double drApe = runEpisode(f.scene, f.traj, f.cfg, nullptr, 3).ape();

    f.cfg.poseMode = PoseMode::VisualInertial;
    f.cfg.updateRule = UpdateRule::ConvLstm;
    const double fusedApe = runEpisode(f.scene, f.traj, f.cfg, &f.params, 3).ape();
    CHECK(fusedApe <= drApe + f.cfg.fusion.gamma1 + 1e-12);
}

TEST_CASE("runEpisode: ideal tier reproduces the true window at axis headings") {
    Fixture f;
    f.cfg.tier = Tier::Ideal;
    const Grid3d gt = groundTruthMap(f.scene);
    // axis-aligned pose: the ideal observation is an exact window copy
    DiscretePose pose{0, 10, 10};
    const ObservationMap obs = makeObservation(f.scene, gt, pose, f.cfg, 0, 1);
    const Index c = f.cfg.window / 2;
    for (Index l = 0; l < 4; ++l)
        for (Index i = 0; i < f.cfg.window; ++i)
            for (Index j = 0; j < f.cfg.window; ++j) {
                const double want = gt(l, pose.x + i - c, pose.y + j - c);
                // sub-beta ghost mass is filtered; exact cells survive
                if (want >= f.cfg.beta) CHECK(obs.grid(l, i, j) == doctest::Approx(want));
            }
}

TEST_CASE("runEpisode: real tier with injected errors is deterministic per seed") {
    Fixture f;
    f.cfg.tier = Tier::Real;
    f.cfg.errors = {0.2, 0.3};
    f.cfg.noiseSeed = 77;
    const EpisodeResult a = runEpisode(f.scene, f.traj, f.cfg, &f.params, 3);
    const EpisodeResult b = runEpisode(f.scene, f.traj, f.cfg, &f.params, 3);
    REQUIRE(a.rows.size() == b.rows.size());
    for (std::size_t i = 0; i < a.rows.size(); ++i) {
        CHECK(a.rows[i].mapMse == b.rows[i].mapMse);
        CHECK(a.rows[i].estPose == b.rows[i].estPose);
    }
}

TEST_CASE("runEpisode: heuristic update needs no parameters") {
    Fixture f;
    f.cfg.updateRule = UpdateRule::Heuristic;
    f.cfg.heuristicAlpha = 0.3;
    const EpisodeResult result = runEpisode(f.scene, f.traj, f.cfg, nullptr, 3);
    CHECK(result.rows.size() == 12);
    CHECK(std::isfinite(result.finalMapMse()));
}

TEST_CASE("makeSplit: intra-scene holds out the last trajectory per scene") {
    Dataset dataset;
    dataset.orientationLevels = 4;
    for (int s = 0; s < 3; ++s) {
        Dataset::SceneEntry entry;
        entry.scene = generateScene(100 + s, SceneParams{17, 17, 3, 4, 1, 2});
        MotionParams motion;
        motion.orientationLevels = 4;
        for (int t = 0; t < 3; ++t) {
            Trajectory traj = generateTrajectory(entry.scene, 10 * s + t, 5, motion);
            traj.imuDeltas = traj.trueDeltas;
            entry.trajectories.push_back(std::move(traj));
        }
        dataset.scenes.push_back(std::move(entry));
    }

    const harness::Split split = harness::makeSplit(dataset, "intra", 0.5, 1);
    CHECK(split.train.size() == 6);  // two of the three per scene
    CHECK(split.test.size() == 3);

    const harness::Split cross = harness::makeSplit(dataset, "cross", 2.0 / 3.0, 1);
    CHECK(cross.train.size() == 6);
    CHECK(cross.test.size() == 3);
    for (const EpisodeRef& tr : cross.train)
        for (const EpisodeRef& te : cross.test) CHECK(tr.scene != te.scene);
}
