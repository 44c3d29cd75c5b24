#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <unistd.h>

#include "gridslam/harness.hpp"
#include "gridslam/io.hpp"
#include "gridslam/rng.hpp"

using namespace gridslam;

namespace {

struct TempDir {
    std::filesystem::path path;
    TempDir() {
        path = std::filesystem::temp_directory_path() /
               ("gridslam_test_" + std::to_string(Rng(::getpid()).nextU64() % 100000));
        std::filesystem::create_directories(path);
    }
    ~TempDir() { std::filesystem::remove_all(path); }
    std::string file(const std::string& name) const { return (path / name).string(); }
};

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    return std::string(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

}  // namespace

TEST_CASE("dataset: round trip preserves scenes and trajectories") {
    TempDir dir;
    harness::GenerateOptions opts;
    opts.outPath = dir.file("d.json");
    opts.seed = 5;
    opts.scenes = 2;
    opts.trajectoriesPerScene = 2;
    opts.steps = 6;
    opts.sceneParams = {17, 17, 3, 4, 1, 2};
    opts.motion.orientationLevels = 4;
    opts.imu.sigmaPos = 0.2;
    opts.imu.biasPos = 0.05;
    harness::cmdGenerate(opts);

    const Dataset loaded = loadDataset(opts.outPath);
    CHECK(loaded.orientationLevels == 4);
    CHECK(loaded.scenes.size() == 2);
    CHECK(loaded.imu.sigmaPos == 0.2);
    for (const auto& entry : loaded.scenes) {
        CHECK(entry.scene.classes == 3);
        CHECK(entry.trajectories.size() == 2);
        for (const auto& traj : entry.trajectories) {
            CHECK(traj.poses.size() == 6);
            CHECK(traj.trueDeltas.size() == 5);
            CHECK(traj.imuDeltas.size() == 5);
        }
    }

    const std::string again = dir.file("d2.json");
    saveDataset(loaded, again);
    const Dataset reloaded = loadDataset(again);
    CHECK(reloaded.scenes[1].trajectories[1].poses == loaded.scenes[1].trajectories[1].poses);
    CHECK(reloaded.scenes[0].scene.walls == loaded.scenes[0].scene.walls);
}

TEST_CASE("dataset: same seed produces byte-identical files") {
    TempDir dir;
    harness::GenerateOptions opts;
    opts.seed = 11;
    opts.scenes = 1;
    opts.trajectoriesPerScene = 1;
    opts.steps = 5;
    opts.sceneParams = {17, 17, 3, 4, 1, 2};
    opts.outPath = dir.file("a.json");
    harness::cmdGenerate(opts);
    opts.outPath = dir.file("b.json");
    harness::cmdGenerate(opts);
    CHECK(slurp(dir.file("a.json")) == slurp(dir.file("b.json")));
    CHECK_FALSE(slurp(dir.file("a.json")).empty());
}

TEST_CASE("dataset: version mismatch is rejected") {
    TempDir dir;
    std::ofstream out(dir.file("bad.json"));
    out << R"({"version": 99, "R": 8, "camera": {"fov": 1.0, "max_range": 10, "rays": 100},)"
        << R"( "imu": {"sigma_pos": 0, "sigma_theta": 0, "bias_pos": 0, "bias_theta": 0, "seed": 0},)"
        << R"( "scenes": []})";
    out.close();
    CHECK_THROWS_AS(loadDataset(dir.file("bad.json")), std::runtime_error);
}

TEST_CASE("checkpoint: binary round trip is bit-exact") {
    TempDir dir;
    const ConvLstmParams params = ConvLstmParams::randomInit(4, 77);
    CheckpointManifest manifest;
    manifest.epoch = 12;
    manifest.loss = 0.125;
    manifest.configHash = hashString("config");
    saveCheckpoint(params, dir.file("ck.bin"), manifest);

    const ConvLstmParams loaded = loadCheckpoint(dir.file("ck.bin"));
    CHECK(loaded.channels == 4);
    CHECK(loaded.kernelSize == 3);
    CHECK((loaded.flatten() == params.flatten()).all());

    const CheckpointManifest meta = loadCheckpointManifest(dir.file("ck.bin"));
    CHECK(meta.epoch == 12);
    CHECK(meta.loss == 0.125);
    CHECK(meta.configHash == hashString("config"));
}

TEST_CASE("checkpoint: bad magic is rejected") {
    TempDir dir;
    std::ofstream out(dir.file("junk.bin"), std::ios::binary);
    out << "NOPEnope";
    out.close();
    CHECK_THROWS_AS(loadCheckpoint(dir.file("junk.bin")), std::runtime_error);
}

TEST_CASE("map snapshot: grid and cell state round trip with sidecar") {
    TempDir dir;
    Rng rng(3);
    SemanticMap map(3, 9, 9);
    for (Index i = 0; i < map.grid.size(); ++i) {
        map.grid.data[i] = rng.uniformReal();
        map.cellState.data[i] = rng.uniformReal(-1.0, 1.0);
    }
    SnapshotMeta meta;
    meta.step = 17;
    meta.pose = {2, 5, 6};
    meta.source = "visual";
    saveMapSnapshot(map, dir.file("map.bin"), meta);

    const SemanticMap loaded = loadMapSnapshot(dir.file("map.bin"));
    CHECK((loaded.grid.data == map.grid.data).all());
    CHECK((loaded.cellState.data == map.cellState.data).all());

    const SnapshotMeta got = loadSnapshotMeta(dir.file("map.bin"));
    CHECK(got.step == 17);
    CHECK(got.pose == DiscretePose{2, 5, 6});
    CHECK(got.source == "visual");
}

TEST_CASE("hashString: stable and input-sensitive") {
    CHECK(hashString("abc") == hashString("abc"));
    CHECK(hashString("abc") != hashString("abd"));
    CHECK(hashString("").size() == 16);
}
