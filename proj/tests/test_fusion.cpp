#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "gridslam/fusion.hpp"
#include "gridslam/rng.hpp"

using namespace gridslam;

TEST_CASE("deadReckon: zero displacement is the identity") {
    const DiscretePose prev{3, 10, 12};
    CHECK(deadReckon(prev, {0, 0, 0}, 8, 33, 33) == prev);
}

TEST_CASE("deadReckon: forward motion follows the heading") {
    CHECK(deadReckon({0, 5, 5}, {2, 0, 0}, 8, 33, 33) == DiscretePose{0, 7, 5});
    CHECK(deadReckon({2, 5, 5}, {2, 0, 0}, 8, 33, 33) == DiscretePose{2, 5, 7});
    CHECK(deadReckon({4, 5, 5}, {2, 0, 0}, 8, 33, 33) == DiscretePose{4, 3, 5});
}

TEST_CASE("deadReckon: orientation wraps around") {
    const double oneLevel = 2.0 * std::numbers::pi / 8.0;
    CHECK(deadReckon({7, 5, 5}, {0, 0, oneLevel}, 8, 33, 33).r == 0);
    CHECK(deadReckon({0, 5, 5}, {0, 0, -oneLevel}, 8, 33, 33).r == 7);
}

TEST_CASE("deadReckon: positions clamp at the map border") {
    CHECK(deadReckon({0, 31, 31}, {5, 0, 0}, 8, 33, 33).x == 32);
    CHECK(deadReckon({4, 1, 1}, {5, 0, 0}, 8, 33, 33).x == 0);
}

TEST_CASE("deadReckon: integer-aligned round trips return to the start") {
    Rng rng(3);
    for (int trial = 0; trial < 50; ++trial) {
        const DiscretePose start{rng.uniformInt(8), 10 + rng.uniformInt(10),
                                 10 + rng.uniformInt(10)};
        // axis-aligned headings keep displacements integral
        const DiscretePose pose{2 * rng.uniformInt(4), start.x, start.y};
        const double dx = static_cast<double>(rng.uniformInt(5) - 2);
        const double dy = static_cast<double>(rng.uniformInt(5) - 2);
        const DiscretePose there = deadReckon(pose, {dx, dy, 0.0}, 8, 33, 33);
        const DiscretePose back = deadReckon(there, {-dx, -dy, 0.0}, 8, 33, 33);
        CHECK(back == pose);
    }
}

TEST_CASE("crossCheck: equal poses choose the visual source") {
    const FusionConfig cfg{2.0, 1.5};
    const DiscretePose p{1, 5, 5};
    CHECK(crossCheck(p, p, cfg, 8) == PoseSource::Visual);
}

TEST_CASE("crossCheck: distant visual estimate is rejected") {
    const FusionConfig cfg{2.0, 1.5};
    CHECK(crossCheck({1, 15, 5}, {1, 5, 5}, cfg, 8) == PoseSource::Inertial);
}

TEST_CASE("crossCheck: orientation distance is circular") {
    const FusionConfig cfg{2.0, 5.0};
    // levels 359 and 0 of R=360 are one apart, not 359
    CHECK(crossCheck({359, 5, 5}, {0, 5, 5}, cfg, 360) == PoseSource::Visual);
    CHECK(crossCheck({180, 5, 5}, {0, 5, 5}, cfg, 360) == PoseSource::Inertial);
}

TEST_CASE("crossCheck: gates are strict inequalities") {
    const FusionConfig cfg{2.0, 1.0};
    CHECK(crossCheck({0, 7, 5}, {0, 5, 5}, cfg, 8) == PoseSource::Inertial);  // dist == gamma1
    CHECK(crossCheck({1, 5, 5}, {0, 5, 5}, cfg, 8) == PoseSource::Inertial);  // dist == gamma2
    CHECK(crossCheck({0, 6, 5}, {0, 5, 5}, cfg, 8) == PoseSource::Visual);
}

TEST_CASE("crossCheck: symmetric in its arguments") {
    Rng rng(9);
    const FusionConfig cfg{2.5, 1.5};
    for (int trial = 0; trial < 100; ++trial) {
        const DiscretePose a{rng.uniformInt(8), rng.uniformInt(33), rng.uniformInt(33)};
        const DiscretePose b{rng.uniformInt(8), rng.uniformInt(33), rng.uniformInt(33)};
        CHECK(crossCheck(a, b, cfg, 8) == crossCheck(b, a, cfg, 8));
    }
}

TEST_CASE("crossCheck: truth table around the gates") {
    const FusionConfig cfg{2.0, 2.0};
    struct Case {
        DiscretePose visual;
        DiscretePose inertial;
        PoseSource want;
    };
    const Case cases[] = {
        {{0, 5, 5}, {0, 5, 5}, PoseSource::Visual},     // exact agreement
        {{0, 6, 5}, {0, 5, 5}, PoseSource::Visual},     // 1 cell apart
        {{0, 6, 6}, {0, 5, 5}, PoseSource::Visual},     // sqrt(2) apart
        {{0, 7, 5}, {0, 5, 5}, PoseSource::Inertial},   // 2 cells: gate closed
        {{1, 5, 5}, {0, 5, 5}, PoseSource::Visual},     // 1 level apart
        {{2, 5, 5}, {0, 5, 5}, PoseSource::Inertial},   // 2 levels: gate closed
        {{7, 5, 5}, {0, 5, 5}, PoseSource::Visual},     // wraparound distance 1
        {{4, 5, 5}, {0, 5, 5}, PoseSource::Inertial},   // opposite heading
        {{1, 6, 5}, {0, 5, 5}, PoseSource::Visual},     // both inside
        {{2, 7, 5}, {0, 5, 5}, PoseSource::Inertial},   // both outside
    };
    for (const Case& c : cases) CHECK(crossCheck(c.visual, c.inertial, cfg, 8) == c.want);
}

TEST_CASE("selectBelief: inertial source produces a one-hot belief") {
    PoseBelief visual;
    visual.grid = Grid3d(4, 7, 7);
    visual.grid.data.setConstant(1.0 / visual.grid.size());
    const FusionOutcome out = selectBelief(visual, {1, 2, 3}, PoseSource::Inertial);
    CHECK(out.pose == DiscretePose{1, 2, 3});
    CHECK(out.belief.grid(1, 2, 3) == 1.0);
    CHECK(out.belief.grid.data.sum() == doctest::Approx(1.0));
    CHECK(out.belief.grid.data.maxCoeff() == 1.0);
}

TEST_CASE("selectBelief: visual source keeps the belief bit-identical") {
    Rng rng(21);
    PoseBelief visual;
    visual.grid = Grid3d(4, 7, 7);
    for (Index i = 0; i < visual.grid.size(); ++i) visual.grid.data[i] = rng.uniformReal();
    visual.grid.data /= visual.grid.data.sum();
    const FusionOutcome out = selectBelief(visual, {1, 2, 3}, PoseSource::Visual);
    for (Index i = 0; i < visual.grid.size(); ++i)
        CHECK(out.belief.grid.data[i] == visual.grid.data[i]);
    CHECK(out.pose == argmaxPose(visual));
}

TEST_CASE("fusionConfigFromImu: three sigma plus one bias step") {
    ImuModel imu;
    imu.sigmaPos = 0.3;
    imu.biasPos = 0.1;
    imu.sigmaTheta = 0.05;
    imu.biasTheta = 0.02;
    const FusionConfig cfg = fusionConfigFromImu(imu, 8);
    CHECK(cfg.gamma1 == doctest::Approx(1.0));
    CHECK(cfg.gamma2 == doctest::Approx((3 * 0.05 + 0.02) * 8 / (2 * std::numbers::pi)));
}
