#include "gridslam/io.hpp"

#include <fstream>
#include <stdexcept>

#include <json.hpp>

namespace gridslam {

using nlohmann::json;

namespace {

json cellsToJson(const std::vector<Cell>& cells) {
    json arr = json::array();
    for (const Cell& c : cells) arr.push_back({c.x, c.y});
    return arr;
}

std::vector<Cell> cellsFromJson(const json& arr) {
    std::vector<Cell> cells;
    for (const auto& c : arr) cells.push_back({c.at(0).get<Index>(), c.at(1).get<Index>()});
    return cells;
}

json deltasToJson(const std::vector<std::array<double, 3>>& deltas) {
    json arr = json::array();
    for (const auto& d : deltas) arr.push_back({d[0], d[1], d[2]});
    return arr;
}

std::vector<std::array<double, 3>> deltasFromJson(const json& arr) {
    std::vector<std::array<double, 3>> deltas;
    for (const auto& d : arr)
        deltas.push_back({d.at(0).get<double>(), d.at(1).get<double>(), d.at(2).get<double>()});
    return deltas;
}

void writeExact(std::ofstream& out, const void* data, std::size_t bytes) {
    out.write(static_cast<const char*>(data), static_cast<std::streamsize>(bytes));
    if (!out) throw std::runtime_error("io: write failed");
}

void readExact(std::ifstream& in, void* data, std::size_t bytes) {
    in.read(static_cast<char*>(data), static_cast<std::streamsize>(bytes));
    if (in.gcount() != static_cast<std::streamsize>(bytes))
        throw std::runtime_error("io: truncated file");
}

}  // namespace

void saveDataset(const Dataset& dataset, const std::string& path) {
    json doc;
    doc["version"] = kDatasetVersion;
    doc["R"] = dataset.orientationLevels;
    doc["camera"] = {{"fov", dataset.camera.fov},
                     {"max_range", dataset.camera.maxRange},
                     {"rays", dataset.camera.rays}};
    doc["imu"] = {{"sigma_pos", dataset.imu.sigmaPos},
                  {"sigma_theta", dataset.imu.sigmaTheta},
                  {"bias_pos", dataset.imu.biasPos},
                  {"bias_theta", dataset.imu.biasTheta},
                  {"seed", dataset.imu.seed}};
    json scenes = json::array();
    for (const Dataset::SceneEntry& entry : dataset.scenes) {
        json s;
        s["H"] = entry.scene.height;
        s["W"] = entry.scene.width;
        s["L"] = entry.scene.classes;
        s["walls"] = cellsToJson(entry.scene.walls);
        json objects = json::array();
        for (const SceneObject& obj : entry.scene.objects)
            objects.push_back({{"class", obj.classId}, {"cells", cellsToJson(obj.cells)}});
        s["objects"] = objects;
        json trajectories = json::array();
        for (const Trajectory& traj : entry.trajectories) {
            json poses = json::array();
            for (const DiscretePose& p : traj.poses) poses.push_back({p.r, p.x, p.y});
            trajectories.push_back({{"poses", poses},
                                    {"true_deltas", deltasToJson(traj.trueDeltas)},
                                    {"imu_deltas", deltasToJson(traj.imuDeltas)}});
        }
        s["trajectories"] = trajectories;
        scenes.push_back(std::move(s));
    }
    doc["scenes"] = std::move(scenes);

    std::ofstream out(path);
    if (!out) throw std::runtime_error("saveDataset: cannot open " + path);
    out << doc.dump(1) << '\n';
    if (!out) throw std::runtime_error("saveDataset: write failed for " + path);
}

Dataset loadDataset(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("loadDataset: cannot open " + path);
    json doc = json::parse(in);
    if (doc.at("version").get<int>() != kDatasetVersion)
        throw std::runtime_error("loadDataset: unsupported version in " + path);

    Dataset dataset;
    dataset.orientationLevels = doc.at("R").get<Index>();
    const json& cam = doc.at("camera");
    dataset.camera.fov = cam.at("fov").get<double>();
    dataset.camera.maxRange = cam.at("max_range").get<double>();
    dataset.camera.rays = cam.at("rays").get<int>();
    const json& imu = doc.at("imu");
    dataset.imu.sigmaPos = imu.at("sigma_pos").get<double>();
    dataset.imu.sigmaTheta = imu.at("sigma_theta").get<double>();
    dataset.imu.biasPos = imu.at("bias_pos").get<double>();
    dataset.imu.biasTheta = imu.at("bias_theta").get<double>();
    dataset.imu.seed = imu.at("seed").get<std::uint64_t>();

    for (const json& s : doc.at("scenes")) {
        Dataset::SceneEntry entry;
        entry.scene.height = s.at("H").get<Index>();
        entry.scene.width = s.at("W").get<Index>();
        entry.scene.classes = s.at("L").get<Index>();
        entry.scene.walls = cellsFromJson(s.at("walls"));
        for (const json& o : s.at("objects")) {
            SceneObject obj;
            obj.classId = o.at("class").get<Index>();
            obj.cells = cellsFromJson(o.at("cells"));
            entry.scene.objects.push_back(std::move(obj));
        }
        for (const json& t : s.at("trajectories")) {
            Trajectory traj;
            for (const auto& p : t.at("poses"))
                traj.poses.push_back(
                    {p.at(0).get<Index>(), p.at(1).get<Index>(), p.at(2).get<Index>()});
            traj.trueDeltas = deltasFromJson(t.at("true_deltas"));
            traj.imuDeltas = deltasFromJson(t.at("imu_deltas"));
            entry.trajectories.push_back(std::move(traj));
        }
        dataset.scenes.push_back(std::move(entry));
    }
    return dataset;
}

namespace {
constexpr char kCheckpointMagic[4] = {'G', 'S', 'L', 'M'};
constexpr char kSnapshotMagic[4] = {'G', 'S', 'M', 'P'};
}  // namespace

void saveCheckpoint(const ConvLstmParams& params, const std::string& path,
                    const CheckpointManifest& manifest) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("saveCheckpoint: cannot open " + path);
    writeExact(out, kCheckpointMagic, 4);
    const std::uint32_t header[3] = {static_cast<std::uint32_t>(kCheckpointVersion),
                                     static_cast<std::uint32_t>(params.channels),
                                     static_cast<std::uint32_t>(params.kernelSize)};
    writeExact(out, header, sizeof(header));
    const Eigen::ArrayXd flat = params.flatten();
    writeExact(out, flat.data(), sizeof(double) * static_cast<std::size_t>(flat.size()));

    json meta = {{"version", kCheckpointVersion},
                 {"epoch", manifest.epoch},
                 {"loss", manifest.loss},
                 {"config_hash", manifest.configHash}};
    std::ofstream metaOut(path + ".json");
    if (!metaOut) throw std::runtime_error("saveCheckpoint: cannot open " + path + ".json");
    metaOut << meta.dump(1) << '\n';
}

ConvLstmParams loadCheckpoint(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("loadCheckpoint: cannot open " + path);
    char magic[4];
    readExact(in, magic, 4);
    if (std::string(magic, 4) != std::string(kCheckpointMagic, 4))
        throw std::runtime_error("loadCheckpoint: bad magic in " + path);
    std::uint32_t header[3];
    readExact(in, header, sizeof(header));
    if (header[0] != static_cast<std::uint32_t>(kCheckpointVersion))
        throw std::runtime_error("loadCheckpoint: unsupported version in " + path);
    ConvLstmParams params = ConvLstmParams::zeros(header[1], header[2]);
    Eigen::ArrayXd flat(params.parameterCount());
    readExact(in, flat.data(), sizeof(double) * static_cast<std::size_t>(flat.size()));
    params.unflatten(flat);
    return params;
}

CheckpointManifest loadCheckpointManifest(const std::string& path) {
    std::ifstream in(path + ".json");
    if (!in) throw std::runtime_error("loadCheckpointManifest: cannot open " + path + ".json");
    json meta = json::parse(in);
    CheckpointManifest manifest;
    manifest.epoch = meta.at("epoch").get<Index>();
    manifest.loss = meta.at("loss").get<double>();
    manifest.configHash = meta.at("config_hash").get<std::string>();
    return manifest;
}

void saveMapSnapshot(const SemanticMap& map, const std::string& path, const SnapshotMeta& meta) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("saveMapSnapshot: cannot open " + path);
    writeExact(out, kSnapshotMagic, 4);
    const std::uint32_t header[4] = {static_cast<std::uint32_t>(kSnapshotVersion),
                                     static_cast<std::uint32_t>(map.grid.channels),
                                     static_cast<std::uint32_t>(map.grid.height),
                                     static_cast<std::uint32_t>(map.grid.width)};
    writeExact(out, header, sizeof(header));
    writeExact(out, map.grid.data.data(), sizeof(double) * static_cast<std::size_t>(map.grid.size()));
    writeExact(out, map.cellState.data.data(),
               sizeof(double) * static_cast<std::size_t>(map.cellState.size()));

    json sidecar = {{"version", kSnapshotVersion},
                    {"step", meta.step},
                    {"pose", {meta.pose.r, meta.pose.x, meta.pose.y}},
                    {"source", meta.source}};
    std::ofstream metaOut(path + ".json");
    if (!metaOut) throw std::runtime_error("saveMapSnapshot: cannot open " + path + ".json");
    metaOut << sidecar.dump(1) << '\n';
}

SemanticMap loadMapSnapshot(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("loadMapSnapshot: cannot open " + path);
    char magic[4];
    readExact(in, magic, 4);
    if (std::string(magic, 4) != std::string(kSnapshotMagic, 4))
        throw std::runtime_error("loadMapSnapshot: bad magic in " + path);
    std::uint32_t header[4];
    readExact(in, header, sizeof(header));
    if (header[0] != static_cast<std::uint32_t>(kSnapshotVersion))
        throw std::runtime_error("loadMapSnapshot: unsupported version in " + path);
    SemanticMap map(header[1], header[2], header[3]);
    readExact(in, map.grid.data.data(), sizeof(double) * static_cast<std::size_t>(map.grid.size()));
    readExact(in, map.cellState.data.data(),
              sizeof(double) * static_cast<std::size_t>(map.cellState.size()));
    return map;
}

SnapshotMeta loadSnapshotMeta(const std::string& path) {
    std::ifstream in(path + ".json");
    if (!in) throw std::runtime_error("loadSnapshotMeta: cannot open " + path + ".json");
    json sidecar = json::parse(in);
    SnapshotMeta meta;
    meta.step = sidecar.at("step").get<Index>();
    meta.pose = {sidecar.at("pose").at(0).get<Index>(), sidecar.at("pose").at(1).get<Index>(),
                 sidecar.at("pose").at(2).get<Index>()};
    meta.source = sidecar.at("source").get<std::string>();
    return meta;
}

std::string hashString(const std::string& text) {
    std::uint64_t hash = 0xCBF29CE484222325ULL;
    for (const unsigned char c : text) {
        hash ^= c;
        hash *= 0x100000001B3ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(hash));
    return std::string(buf);
}

}  // namespace gridslam
