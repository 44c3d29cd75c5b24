#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <map>
#include <set>

#include "gridslam/scene.hpp"

using namespace gridslam;

namespace {

SceneParams desk() {
    SceneParams p;
    p.height = 33;
    p.width = 33;
    p.classes = 5;
    p.objectCount = 8;
    p.minObjectSize = 1;
    p.maxObjectSize = 2;
    return p;
}

bool sameScene(const Scene& a, const Scene& b) {
    if (a.height != b.height || a.width != b.width || a.classes != b.classes) return false;
    if (a.walls != b.walls || a.objects.size() != b.objects.size()) return false;
    for (std::size_t i = 0; i < a.objects.size(); ++i)
        if (a.objects[i].classId != b.objects[i].classId ||
            a.objects[i].cells != b.objects[i].cells)
            return false;
    return true;
}

Scene emptyWalled(Index h, Index w, Index classes) {
    SceneParams p;
    p.height = h;
    p.width = w;
    p.classes = classes;
    p.objectCount = 0;
    return generateScene(1, p);
}

std::map<Index, double> massByClass(const std::vector<Detection>& detections) {
    std::map<Index, double> mass;
    for (const Detection& d : detections) mass[d.classId] += d.totalMass;
    return mass;
}

}  // namespace

TEST_CASE("generateScene: zero objects leaves walls only") {
    const Scene scene = emptyWalled(33, 33, 5);
    CHECK(scene.objects.empty());
    CHECK(scene.walls.size() == 2u * 33 + 2u * 31);
}

TEST_CASE("generateScene: deterministic per seed") {
    const Scene a = generateScene(42, desk());
    const Scene b = generateScene(42, desk());
    const Scene c = generateScene(43, desk());
    CHECK(sameScene(a, b));
    CHECK_FALSE(sameScene(a, c));
}

TEST_CASE("generateScene: seed 7 places 8 disjoint in-bounds objects") {
    const Scene scene = generateScene(7, desk());
    REQUIRE(scene.objects.size() == 8);
    std::set<std::pair<Index, Index>> seen;
    for (const SceneObject& obj : scene.objects) {
        CHECK(obj.classId >= 0);
        CHECK(obj.classId < 5);
        for (const Cell& c : obj.cells) {
            CHECK(c.x >= 1);
            CHECK(c.x <= 31);
            CHECK(c.y >= 1);
            CHECK(c.y <= 31);
            CHECK(seen.insert({c.x, c.y}).second);  // disjoint footprints
        }
    }
}

TEST_CASE("groundTruthMap: empty scene maps to zero") {
    CHECK(groundTruthMap(emptyWalled(33, 33, 5)).data.abs().maxCoeff() == 0.0);
}

TEST_CASE("groundTruthMap: a 2-cell object writes exactly two ones in its channel") {
    Scene scene = emptyWalled(9, 9, 5);
    scene.objects.push_back({3, {{2, 2}, {2, 3}}});
    const Grid3d map = groundTruthMap(scene);
    CHECK(map(3, 2, 2) == 1.0);
    CHECK(map(3, 2, 3) == 1.0);
    CHECK(map.data.sum() == doctest::Approx(2.0));
}

TEST_CASE("groundTruthMap: 0/1 values, one class per cell, mass equals occupancy") {
    const Scene scene = generateScene(19, desk());
    const Grid3d map = groundTruthMap(scene);
    Index occupied = 0;
    for (const SceneObject& obj : scene.objects) occupied += static_cast<Index>(obj.cells.size());
    CHECK(map.data.sum() == doctest::Approx(static_cast<double>(occupied)));
    for (Index x = 0; x < 33; ++x)
        for (Index y = 0; y < 33; ++y) {
            int nonzero = 0;
            for (Index l = 0; l < 5; ++l) {
                const double v = map(l, x, y);
                CHECK((v == 0.0 || v == 1.0));
                if (v != 0.0) ++nonzero;
            }
            CHECK(nonzero <= 1);
        }
}

TEST_CASE("raycastObserve: empty scene sees nothing") {
    CameraModel camera;
    CHECK(raycastObserve(emptyWalled(33, 33, 5), {0, 16, 16}, camera, 8).empty());
}

TEST_CASE("raycastObserve: single cell straight ahead has mass 1 at (3,0)") {
    Scene scene = emptyWalled(33, 33, 5);
    scene.objects.push_back({2, {{19, 16}}});  // 3 cells ahead of (16,16) along +x

    CameraModel camera;
    const auto detections = raycastObserve(scene, {0, 16, 16}, camera, 8);
    REQUIRE(detections.size() == 1);
    CHECK(detections[0].classId == 2);
    CHECK(detections[0].totalMass == doctest::Approx(1.0));
    REQUIRE(detections[0].cells.size() == 1);
    CHECK(detections[0].cells[0].x == 3);
    CHECK(detections[0].cells[0].y == 0);
    CHECK(detections[0].cells[0].mass == doctest::Approx(1.0));
}

TEST_CASE("raycastObserve: heading rotates the egocentric frame") {
    Scene scene = emptyWalled(33, 33, 5);
    scene.objects.push_back({1, {{16, 19}}});  // 3 cells along +y

    CameraModel camera;
    const auto detections = raycastObserve(scene, {2, 16, 16}, camera, 8);  // heading 90 deg
    REQUIRE(detections.size() == 1);
    REQUIRE(detections[0].cells.size() == 1);
    CHECK(detections[0].cells[0].x == 3);  // ahead in the ego frame
    CHECK(detections[0].cells[0].y == 0);
}

TEST_CASE("raycastObserve: a wall in between fully occludes") {
    Scene scene = emptyWalled(33, 33, 5);
    scene.objects.push_back({2, {{20, 16}}});
    for (Index y = 14; y <= 18; ++y) scene.walls.push_back({18, y});

    CameraModel camera;
    CHECK(raycastObserve(scene, {0, 16, 16}, camera, 8).empty());
}

TEST_CASE("raycastObserve: unoccluded in-range objects reach total mass 1") {
    CameraModel camera;
    camera.fov = 2.0 * std::numbers::pi;
    camera.rays = 1440;
    camera.maxRange = 50.0;
    const Scene base = generateScene(7, desk());
    for (std::size_t o = 0; o < base.objects.size(); ++o) {
        Scene solo = base;
        solo.objects = {base.objects[o]};
        const auto detections = raycastObserve(solo, {0, 16, 16}, camera, 8);
        REQUIRE(detections.size() == 1);
        CHECK(detections[0].totalMass == doctest::Approx(1.0).epsilon(1.0 / 1440));
    }
}

TEST_CASE("raycastObserve: adding an object never increases another's mass") {
    CameraModel camera;
    camera.fov = 2.0 * std::numbers::pi;
    camera.rays = 720;
    camera.maxRange = 20.0;
    // distinct classes so detections map back to objects
    Scene scene = emptyWalled(17, 17, 4);
    scene.objects.push_back({0, {{8, 12}, {9, 12}}});
    scene.objects.push_back({1, {{4, 8}}});
    scene.objects.push_back({2, {{12, 4}, {12, 5}}});

    const DiscretePose pose{0, 8, 8};
    const auto before = massByClass(raycastObserve(scene, pose, camera, 8));

    Scene more = scene;
    more.objects.push_back({3, {{8, 10}, {6, 8}, {10, 5}}});  // occluders
    const auto after = massByClass(raycastObserve(more, pose, camera, 8));

    for (const auto& [cls, mass] : before) {
        const auto it = after.find(cls);
        const double afterMass = it == after.end() ? 0.0 : it->second;
        CHECK(afterMass <= mass + 1e-12);
    }
    CHECK(after.at(0) < before.at(0));  // the object straight ahead is now blocked
}

TEST_CASE("raycastObserve: pose on a wall is a contract violation") {
    const Scene scene = generateScene(3, desk());
    CameraModel camera;
    CHECK_THROWS_AS(raycastObserve(scene, {0, 0, 0}, camera, 8), std::invalid_argument);
}

TEST_CASE("applyObservationErrors: flips classes and keeps masses nonnegative") {
    std::vector<Detection> detections;
    Detection d;
    d.classId = 1;
    d.cells = {{1, 0, 0.5}, {2, 0, 0.5}};
    d.totalMass = 1.0;
    detections.push_back(d);

    ObservationErrorModel model;
    model.classFlipProb = 1.0;
    model.massJitter = 0.5;
    Rng rng(5);
    applyObservationErrors(detections, 4, model, rng);
    CHECK(detections[0].classId != 1);
    for (const auto& cm : detections[0].cells) CHECK(cm.mass >= 0.0);
}

TEST_CASE("imuRead: zero noise passes the true delta through") {
    ImuModel model;
    const auto out = imuRead({1.5, -0.5, 0.3}, model, 7);
    CHECK(out[0] == doctest::Approx(1.5));
    CHECK(out[1] == doctest::Approx(-0.5));
    CHECK(out[2] == doctest::Approx(0.3));
}

TEST_CASE("imuRead: pure bias shifts every step") {
    ImuModel model;
    model.biasPos = 0.1;
    for (std::uint64_t step = 0; step < 5; ++step) {
        const auto out = imuRead({1.0, 0.0, 0.0}, model, step);
        CHECK(out[0] == doctest::Approx(1.1));
        CHECK(out[1] == doctest::Approx(0.1));
        CHECK(out[2] == doctest::Approx(0.0));
    }
}

TEST_CASE("imuRead: deterministic per (seed, step)") {
    ImuModel model;
    model.sigmaPos = 0.5;
    model.seed = 99;
    const auto a = imuRead({0, 0, 0}, model, 3);
    const auto b = imuRead({0, 0, 0}, model, 3);
    const auto c = imuRead({0, 0, 0}, model, 4);
    CHECK(a == b);
    CHECK(a != c);
}

TEST_CASE("imuRead: Monte Carlo mean approaches true + bias") {
    ImuModel model;
    model.sigmaPos = 0.2;
    model.biasPos = 0.05;
    model.sigmaTheta = 0.1;
    model.seed = 12345;
    double sx = 0.0, sth = 0.0;
    const int n = 10000;
    for (int i = 0; i < n; ++i) {
        const auto out = imuRead({1.0, 0.0, 0.0}, model, static_cast<std::uint64_t>(i));
        sx += out[0];
        sth += out[2];
    }
    CHECK(std::abs(sx / n - 1.05) <= 3.0 * 0.2 / 100.0);
    CHECK(std::abs(sth / n) <= 3.0 * 0.1 / 100.0);
}

TEST_CASE("generateTrajectory: single step has no deltas") {
    const Scene scene = generateScene(3, desk());
    const Trajectory traj = generateTrajectory(scene, 5, 1, MotionParams{});
    CHECK(traj.poses.size() == 1);
    CHECK(traj.trueDeltas.empty());
}

TEST_CASE("generateTrajectory: poses stay free, in-bounds and within motion bounds") {
    const Scene scene = generateScene(3, desk());
    MotionParams motion;
    const Trajectory traj = generateTrajectory(scene, 3, 30, motion);
    REQUIRE(traj.poses.size() == 30);
    const Eigen::ArrayXXi occ = occupancyGrid(scene);
    for (std::size_t i = 0; i < traj.poses.size(); ++i) {
        const DiscretePose& p = traj.poses[i];
        CHECK(occ(p.x, p.y) == kFreeCell);
        CHECK(p.r >= 0);
        CHECK(p.r < motion.orientationLevels);
        if (i > 0) {
            CHECK(std::abs(p.x - traj.poses[i - 1].x) <= motion.maxStepCells);
            CHECK(std::abs(p.y - traj.poses[i - 1].y) <= motion.maxStepCells);
        }
    }
}

TEST_CASE("generateTrajectory: true deltas reconstruct the poses exactly") {
    const Scene scene = generateScene(9, desk());
    MotionParams motion;
    const Trajectory traj = generateTrajectory(scene, 11, 30, motion);
    DiscretePose pose = traj.poses.front();
    for (std::size_t t = 0; t < traj.trueDeltas.size(); ++t) {
        const auto& d = traj.trueDeltas[t];
        const double theta = headingAngle(pose.r, motion.orientationLevels);
        double wx, wy;
        egoToWorld(d[0], d[1], theta, wx, wy);
        pose.x += static_cast<Index>(std::llround(wx));
        pose.y += static_cast<Index>(std::llround(wy));
        pose.r = wrapLevel(
            pose.r + static_cast<Index>(std::llround(d[2] * motion.orientationLevels /
                                                     (2.0 * std::numbers::pi))),
            motion.orientationLevels);
        CHECK(pose == traj.poses[t + 1]);
    }
}

TEST_CASE("generateTrajectory: deterministic per seed") {
    const Scene scene = generateScene(9, desk());
    const Trajectory a = generateTrajectory(scene, 11, 30, MotionParams{});
    const Trajectory b = generateTrajectory(scene, 11, 30, MotionParams{});
    CHECK(a.poses == b.poses);
    CHECK(a.trueDeltas == b.trueDeltas);
}
