#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "gridslam/observation.hpp"
#include "gridslam/rng.hpp"

using namespace gridslam;

namespace {

Detection singleCell(Index classId, Index x, Index y, double mass) {
    Detection d;
    d.classId = classId;
    d.cells = {{x, y, mass}};
    d.totalMass = mass;
    return d;
}

}  // namespace

TEST_CASE("projectFeatures: a unit detection lands at center + offset") {
    const auto obs = projectFeatures({singleCell(2, 3, 0, 1.0)}, 5, 11);
    CHECK(obs.grid(2, 5 + 3, 5) == doctest::Approx(1.0));
    CHECK(obs.grid.data.sum() == doctest::Approx(1.0));
}

TEST_CASE("projectFeatures: half-and-half split across two cells") {
    Detection d;
    d.classId = 1;
    d.cells = {{2, 0, 0.5}, {2, 1, 0.5}};
    d.totalMass = 1.0;
    const auto obs = projectFeatures({d}, 3, 7);
    CHECK(obs.grid(1, 3 + 2, 3) == doctest::Approx(0.5));
    CHECK(obs.grid(1, 3 + 2, 4) == doctest::Approx(0.5));
}

TEST_CASE("projectFeatures: same-class objects are additive") {
    const auto obs = projectFeatures({singleCell(0, 1, 0, 1.0), singleCell(0, 2, 0, 1.0)}, 2, 7);
    CHECK(obs.grid(0, 3 + 1, 3) == doctest::Approx(1.0));
    CHECK(obs.grid(0, 3 + 2, 3) == doctest::Approx(1.0));
}

TEST_CASE("projectFeatures: additive over detection lists") {
    Rng rng(3);
    std::vector<Detection> a, b;
    for (int i = 0; i < 4; ++i)
        a.push_back(singleCell(rng.uniformInt(3), rng.uniformInt(7) - 3, rng.uniformInt(7) - 3,
                               rng.uniformReal()));
    for (int i = 0; i < 3; ++i)
        b.push_back(singleCell(rng.uniformInt(3), rng.uniformInt(7) - 3, rng.uniformInt(7) - 3,
                               rng.uniformReal()));
    std::vector<Detection> both = a;
    both.insert(both.end(), b.begin(), b.end());

    const auto oa = projectFeatures(a, 3, 7);
    const auto ob = projectFeatures(b, 3, 7);
    const auto oboth = projectFeatures(both, 3, 7);
    for (Index i = 0; i < oboth.grid.size(); ++i)
        CHECK(oboth.grid.data[i] == doctest::Approx(oa.grid.data[i] + ob.grid.data[i]));
}

TEST_CASE("projectFeatures: cells outside the window are dropped") {
    const auto obs = projectFeatures({singleCell(0, 9, 0, 1.0)}, 2, 11);
    CHECK(obs.grid.data.sum() == 0.0);
}

TEST_CASE("filterNoise: sub-threshold entries vanish, boundary survives") {
    ObservationMap obs;
    obs.grid = Grid3d(1, 1, 3);
    obs.grid(0, 0, 0) = 0.01;
    obs.grid(0, 0, 1) = 0.02;
    obs.grid(0, 0, 2) = 0.5;
    const auto out = filterNoise(obs, 0.02);
    CHECK(out.grid(0, 0, 0) == 0.0);
    CHECK(out.grid(0, 0, 1) == 0.02);
    CHECK(out.grid(0, 0, 2) == 0.5);
}

TEST_CASE("filterNoise: beta 0 is the identity") {
    ObservationMap obs;
    obs.grid = Grid3d(2, 3, 3);
    Rng rng(7);
    for (Index i = 0; i < obs.grid.size(); ++i) obs.grid.data[i] = rng.uniformReal();
    const auto out = filterNoise(obs, 0.0);
    for (Index i = 0; i < obs.grid.size(); ++i) CHECK(out.grid.data[i] == obs.grid.data[i]);
}

TEST_CASE("filterNoise: idempotent") {
    ObservationMap obs;
    obs.grid = Grid3d(2, 5, 5);
    Rng rng(11);
    for (Index i = 0; i < obs.grid.size(); ++i) obs.grid.data[i] = rng.uniformReal(0.0, 0.1);
    const auto once = filterNoise(obs, 0.03);
    const auto twice = filterNoise(once, 0.03);
    for (Index i = 0; i < once.grid.size(); ++i) CHECK(twice.grid.data[i] == once.grid.data[i]);
}
