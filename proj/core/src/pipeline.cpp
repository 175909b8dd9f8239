#include "roadtwin/pipeline.hpp"

#include <atomic>
#include <chrono>
#include <filesystem>
#include <fstream>
#include <functional>
#include <future>
#include <iostream>
#include <sstream>
#include <thread>

#include "roadtwin/geostore.hpp"
#include "roadtwin/spatial.hpp"

namespace fs = std::filesystem;

namespace roadtwin {

namespace {

void check_keys(const Json& j, std::initializer_list<const char*> allowed,
                const std::string& path) {
    if (!j.is_object()) throw ConfigError("config: " + path + " must be an object");
    for (const auto& [key, _] : j.items()) {
        bool ok = false;
        for (const char* a : allowed)
            if (key == a) ok = true;
        if (!ok) throw ConfigError("config: unknown key " + path + "/" + key);
    }
}

template <typename T>
void get_to(const Json& j, const char* key, T& out) {
    if (j.contains(key)) j.at(key).get_to(out);
}

void parse_cluster_params(const Json& j, const std::string& path, ClusterParams& out) {
    check_keys(j, {"Eps", "MinPts"}, path);
    get_to(j, "Eps", out.eps);
    get_to(j, "MinPts", out.min_pts);
}

}  // namespace

PipelineConfig PipelineConfig::from_json(const Json& j) {
    PipelineConfig cfg;
    check_keys(j, {"Preprocess", "Cluster", "Extract", "Mesh", "Format", "Threads", "SegmentName",
                   "EvalRawGT"},
               "");
    if (j.contains("Preprocess")) {
        const Json& p = j.at("Preprocess");
        check_keys(p, {"VoxelSize", "OutlierNeighbors", "OutlierStdRatio"}, "Preprocess");
        get_to(p, "VoxelSize", cfg.preprocess.voxel_size);
        get_to(p, "OutlierNeighbors", cfg.preprocess.outlier_neighbors);
        get_to(p, "OutlierStdRatio", cfg.preprocess.outlier_std_ratio);
    }
    if (j.contains("Cluster")) {
        const Json& c = j.at("Cluster");
        if (!c.is_object()) throw ConfigError("config: Cluster must be an object");
        for (const auto& [key, val] : c.items()) {
            const auto sem = semantic_from_string(key);
            if (!sem) throw ConfigError("config: unknown semantic Cluster/" + key);
            parse_cluster_params(val, "Cluster/" + key, cfg.cluster[*sem]);
        }
    }
    if (j.contains("Extract")) {
        const Json& e = j.at("Extract");
        check_keys(e,
                   {"AlphaFine", "AlphaCoarse", "AlphaGuardrailXY", "AlphaGuardrailXZ",
                    "AlphaSection", "GridW", "GridL", "Dh", "Dl", "Rays", "SplitSpacing",
                    "BlockLen", "MinBranchLenPlane", "MinBranchLenGuardrail", "MinBranchLenLight",
                    "DensifyStep", "DensifyStepThin", "Lift", "PartCluster"},
                   "Extract");
        ExtractConfig& x = cfg.extract;
        get_to(e, "AlphaFine", x.alpha_fine);
        get_to(e, "AlphaCoarse", x.alpha_coarse);
        get_to(e, "AlphaGuardrailXY", x.alpha_guardrail_xy);
        get_to(e, "AlphaGuardrailXZ", x.alpha_guardrail_xz);
        get_to(e, "AlphaSection", x.alpha_section);
        get_to(e, "GridW", x.grid_w);
        get_to(e, "GridL", x.grid_l);
        get_to(e, "Dh", x.dh);
        get_to(e, "Dl", x.dl);
        get_to(e, "Rays", x.n_rays);
        get_to(e, "SplitSpacing", x.split_spacing);
        get_to(e, "BlockLen", x.block_len);
        get_to(e, "MinBranchLenPlane", x.min_branch_len_plane);
        get_to(e, "MinBranchLenGuardrail", x.min_branch_len_guardrail);
        get_to(e, "MinBranchLenLight", x.min_branch_len_light);
        get_to(e, "DensifyStep", x.densify_step);
        get_to(e, "DensifyStepThin", x.densify_step_thin);
        if (e.contains("Lift")) {
            const Json& l = e.at("Lift");
            check_keys(l, {"Radius", "KNearest", "PairK"}, "Extract/Lift");
            get_to(l, "Radius", x.lift.radius);
            get_to(l, "KNearest", x.lift.k_nearest);
            get_to(l, "PairK", x.lift.pair_k);
        }
        if (e.contains("PartCluster"))
            parse_cluster_params(e.at("PartCluster"), "Extract/PartCluster", x.part_params);
    }
    if (j.contains("Mesh")) {
        const Json& m = j.at("Mesh");
        check_keys(m, {"Thickness"}, "Mesh");
        get_to(m, "Thickness", cfg.mesh.thickness);
    }
    if (j.contains("Format")) {
        const std::string f = j.at("Format").get<std::string>();
        if (f == "obj") cfg.format = MeshFormat::OBJ;
        else if (f == "ply") cfg.format = MeshFormat::PLY;
        else throw ConfigError("config: Format must be \"obj\" or \"ply\", got \"" + f + "\"");
    }
    get_to(j, "Threads", cfg.threads);
    get_to(j, "SegmentName", cfg.segment_name);
    get_to(j, "EvalRawGT", cfg.eval_raw_gt);
    if (cfg.threads < 0) throw ConfigError("config: Threads must be >= 0");
    return cfg;
}

Json PipelineConfig::to_json() const {
    Json j;
    j["Preprocess"] = {{"VoxelSize", preprocess.voxel_size},
                       {"OutlierNeighbors", preprocess.outlier_neighbors},
                       {"OutlierStdRatio", preprocess.outlier_std_ratio}};
    Json c = Json::object();
    for (const auto& [sem, params] : cluster)
        c[to_string(sem)] = {{"Eps", params.eps}, {"MinPts", params.min_pts}};
    j["Cluster"] = c;
    const ExtractConfig& x = extract;
    j["Extract"] = {{"AlphaFine", x.alpha_fine},
                    {"AlphaCoarse", x.alpha_coarse},
                    {"AlphaGuardrailXY", x.alpha_guardrail_xy},
                    {"AlphaGuardrailXZ", x.alpha_guardrail_xz},
                    {"AlphaSection", x.alpha_section},
                    {"GridW", x.grid_w},
                    {"GridL", x.grid_l},
                    {"Dh", x.dh},
                    {"Dl", x.dl},
                    {"Rays", x.n_rays},
                    {"SplitSpacing", x.split_spacing},
                    {"BlockLen", x.block_len},
                    {"MinBranchLenPlane", x.min_branch_len_plane},
                    {"MinBranchLenGuardrail", x.min_branch_len_guardrail},
                    {"MinBranchLenLight", x.min_branch_len_light},
                    {"DensifyStep", x.densify_step},
                    {"DensifyStepThin", x.densify_step_thin},
                    {"Lift",
                     {{"Radius", x.lift.radius},
                      {"KNearest", x.lift.k_nearest},
                      {"PairK", x.lift.pair_k}}},
                    {"PartCluster", {{"Eps", x.part_params.eps}, {"MinPts", x.part_params.min_pts}}}};
    j["Mesh"] = {{"Thickness", mesh.thickness}};
    j["Format"] = format == MeshFormat::OBJ ? "obj" : "ply";
    j["Threads"] = threads;
    j["SegmentName"] = segment_name;
    j["EvalRawGT"] = eval_raw_gt;
    return j;
}

namespace {

void write_text(const fs::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot open for writing: " + path.string());
    out << text;
    if (!out) throw DataError("write failed: " + path.string());
}

Json read_json(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open: " + path.string());
    Json j;
    try {
        in >> j;
    } catch (const Json::parse_error& e) {
        throw DataError("invalid JSON in " + path.string() + ": " + e.what());
    }
    return j;
}

std::string read_bytes(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open: " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

// Index-ordered parallel map: results land in their input slots regardless of
// the scheduling order, keeping downstream output bytes thread-count-invariant.
void parallel_for(size_t n, int threads, const std::function<void(size_t)>& fn) {
    const int n_threads = threads > 0 ? threads
                                      : static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
    if (n_threads == 1 || n <= 1) {
        for (size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    std::atomic<size_t> next{0};
    std::vector<std::future<void>> pool;
    for (int t = 0; t < std::min<size_t>(n_threads, n); ++t)
        pool.push_back(std::async(std::launch::async, [&] {
            for (size_t i = next.fetch_add(1); i < n; i = next.fetch_add(1)) fn(i);
        }));
    for (auto& f : pool) f.get();
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

Json timing_json(const std::map<std::string, double>& by_asset, double wall) {
    Json per = Json::object();
    for (const auto& [asset, s] : by_asset) per[asset] = s;
    Json j;
    j["PerAsset"] = per;
    j["WallSeconds"] = wall;
    return j;
}

std::string instance_filename(size_t index, Semantic sem) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "instance_%03zu_%s.ply", index, to_string(sem).c_str());
    return buf;
}

}  // namespace

void stage_segment(const std::string& cloud_path, const std::string& out_dir,
                   const PipelineConfig& cfg) {
    const fs::path dir = fs::path(out_dir) / "segment";
    fs::create_directories(dir);

    LabeledCloud cloud = load_cloud(cloud_path);
    cloud.validate();
    const LabeledCloud clean = preprocess(cloud, cfg.preprocess);
    const std::vector<Instance> instances = split_instances(clean, cfg.cluster);
    if (instances.empty()) throw DataError("segment: no instances found in " + cloud_path);

    Json files = Json::array();
    for (size_t i = 0; i < instances.size(); ++i) {
        const std::string name = instance_filename(i, instances[i].semantic);
        save_cloud(instances[i].cloud, (dir / name).string());
        Json entry;
        entry["File"] = name;
        entry["Semantic"] = to_string(instances[i].semantic);
        entry["Points"] = instances[i].cloud.size();
        files.push_back(entry);
    }
    Json manifest;
    manifest["Stage"] = "segment";
    manifest["Input"] = cloud_path;
    manifest["Files"] = files;
    write_text(dir / "manifest.json", manifest.dump(2) + "\n");
}

void stage_extract(const std::string& out_dir, const PipelineConfig& cfg) {
    const fs::path seg_dir = fs::path(out_dir) / "segment";
    const fs::path dir = fs::path(out_dir) / "extract";
    fs::create_directories(dir);
    const Json seg_manifest = read_json(seg_dir / "manifest.json");
    const Json& files = seg_manifest.at("Files");

    struct Result {
        std::string file;     // empty when failed
        std::string semantic;
        std::string error;
        double seconds = 0;
    };
    std::vector<Result> results(files.size());

    const auto t0 = std::chrono::steady_clock::now();
    parallel_for(files.size(), cfg.threads, [&](size_t i) {
        const std::string in_name = files.at(i).at("File").get<std::string>();
        Result& r = results[i];
        r.semantic = files.at(i).at("Semantic").get<std::string>();
        const auto ti = std::chrono::steady_clock::now();
        try {
            const LabeledCloud inst = load_cloud((seg_dir / in_name).string());
            GeometryRecord record = extract_instance(inst, cfg.extract);
            record.instance_id = static_cast<int>(i);
            record.segment_id = cfg.segment_name;
            record.validate();
            r.file = record_filename(record);
            write_text(dir / r.file, to_json(record));
        } catch (const DataError& e) {
            r.error = e.what();
        }
        r.seconds = seconds_since(ti);
    });
    const double wall = seconds_since(t0);

    Json records = Json::array();
    Json failed = Json::array();
    std::map<std::string, double> by_asset;
    for (size_t i = 0; i < results.size(); ++i) {
        const Result& r = results[i];
        by_asset[r.semantic] += r.seconds;
        if (r.file.empty()) {
            std::cerr << "[extract] warning: instance " << i << " (" << r.semantic
                      << ") skipped: " << r.error << "\n";
            Json entry;
            entry["Instance"] = i;
            entry["Semantic"] = r.semantic;
            entry["Error"] = r.error;
            failed.push_back(entry);
            continue;
        }
        Json entry;
        entry["File"] = r.file;
        entry["Semantic"] = r.semantic;
        entry["Instance"] = i;
        records.push_back(entry);
    }
    if (records.empty()) throw DataError("extract: every instance failed");
    Json manifest;
    manifest["Stage"] = "extract";
    manifest["Records"] = records;
    manifest["Failed"] = failed;
    write_text(dir / "manifest.json", manifest.dump(2) + "\n");
    write_text(dir / "timing.json", timing_json(by_asset, wall).dump(2) + "\n");
}

void stage_build(const std::string& out_dir, const PipelineConfig& cfg) {
    const fs::path ext_dir = fs::path(out_dir) / "extract";
    const fs::path dir = fs::path(out_dir) / "build";
    fs::create_directories(dir);
    const Json manifest_in = read_json(ext_dir / "manifest.json");
    const Json& records = manifest_in.at("Records");

    struct Result {
        std::string file;
        std::string semantic;
        double seconds = 0;
    };
    std::vector<Result> results(records.size());
    const char* ext = cfg.format == MeshFormat::OBJ ? ".obj" : ".ply";

    const auto t0 = std::chrono::steady_clock::now();
    parallel_for(records.size(), cfg.threads, [&](size_t i) {
        const Json& entry = records.at(i);
        const std::string json_name = entry.at("File").get<std::string>();
        Result& r = results[i];
        r.semantic = entry.at("Semantic").get<std::string>();
        const auto ti = std::chrono::steady_clock::now();
        const GeometryRecord record = from_json(read_bytes(ext_dir / json_name));
        const std::vector<NamedMesh> meshes = build_record_mesh(record, cfg.mesh);
        r.file = fs::path(json_name).stem().string() + ext;
        export_meshes(meshes, (dir / r.file).string(), cfg.format);
        r.seconds = seconds_since(ti);
    });
    const double wall = seconds_since(t0);

    Json meshes = Json::array();
    std::map<std::string, double> by_asset;
    for (size_t i = 0; i < results.size(); ++i) {
        by_asset[results[i].semantic] += results[i].seconds;
        Json entry;
        entry["File"] = results[i].file;
        entry["Record"] = records.at(i).at("File");
        entry["Semantic"] = results[i].semantic;
        entry["Instance"] = records.at(i).at("Instance");
        meshes.push_back(entry);
    }
    Json manifest;
    manifest["Stage"] = "build";
    manifest["Meshes"] = meshes;
    write_text(dir / "manifest.json", manifest.dump(2) + "\n");
    write_text(dir / "timing.json", timing_json(by_asset, wall).dump(2) + "\n");
}

DistanceReport stage_evaluate(const std::string& out_dir, const PipelineConfig& cfg) {
    const fs::path seg_dir = fs::path(out_dir) / "segment";
    const fs::path build_dir = fs::path(out_dir) / "build";
    const fs::path dir = fs::path(out_dir) / "evaluate";
    fs::create_directories(dir);
    const Json seg_manifest = read_json(seg_dir / "manifest.json");
    const Json build_manifest = read_json(build_dir / "manifest.json");

    // Instance meshes, indexed like the segment instances.
    const Json& files = seg_manifest.at("Files");
    std::vector<InstanceMeshes> instances(files.size());
    for (size_t i = 0; i < files.size(); ++i) {
        const auto sem = semantic_from_string(files.at(i).at("Semantic").get<std::string>());
        if (!sem) throw DataError("evaluate: bad semantic in segment manifest");
        instances[i].semantic = *sem;
    }
    for (const Json& entry : build_manifest.at("Meshes")) {
        const size_t inst = entry.at("Instance").get<size_t>();
        if (inst >= instances.size()) throw DataError("evaluate: mesh instance out of range");
        const std::string file = entry.at("File").get<std::string>();
        if (cfg.format == MeshFormat::OBJ) {
            for (NamedMesh& nm : import_obj((build_dir / file).string()))
                instances[inst].meshes.push_back(std::move(nm.mesh));
        } else {
            // binary PLY flattens names; rebuild the same meshes from the record
            const GeometryRecord record = from_json(
                read_bytes(fs::path(out_dir) / "extract" / entry.at("Record").get<std::string>()));
            for (NamedMesh& nm : build_record_mesh(record, cfg.mesh))
                instances[inst].meshes.push_back(std::move(nm.mesh));
        }
    }

    // Ground-truth points: the preprocessed instance clouds by default.
    LabeledCloud gt;
    std::vector<int32_t> point_instance;
    for (size_t i = 0; i < files.size(); ++i) {
        const LabeledCloud inst = load_cloud(
            (seg_dir / files.at(i).at("File").get<std::string>()).string());
        gt.append(inst);
        point_instance.insert(point_instance.end(), inst.size(), static_cast<int32_t>(i));
    }
    if (cfg.eval_raw_gt) {
        // raw points inherit the instance of their nearest preprocessed point
        const GridIndex3 index(gt.points, 0.5);
        const LabeledCloud raw = load_cloud(seg_manifest.at("Input").get<std::string>());
        LabeledCloud raw_gt;
        std::vector<int32_t> raw_inst;
        for (size_t i = 0; i < raw.size(); ++i) {
            const auto nn = index.knn(raw.points[i], 1);
            if (nn.empty()) continue;
            if (gt.semantic[nn[0]] != raw.semantic[i]) continue;
            raw_gt.push_back(raw.points[i], raw.semantic[i], raw.part[i]);
            raw_inst.push_back(point_instance[nn[0]]);
        }
        gt = std::move(raw_gt);
        point_instance = std::move(raw_inst);
    }

    const DistanceReport report = evaluate(gt, point_instance, instances, cfg.threads);
    write_text(dir / "report.txt", report.to_text());
    write_text(dir / "report.json", report.to_json().dump(2) + "\n");
    return report;
}

void stage_report(const std::string& out_dir, const PipelineConfig& cfg) {
    (void)cfg;
    const fs::path dir = fs::path(out_dir) / "report";
    fs::create_directories(dir);

    TimingReport timing;
    std::map<std::string, TimingReport::Row> rows;
    const Json extract_t = read_json(fs::path(out_dir) / "extract" / "timing.json");
    const Json build_t = read_json(fs::path(out_dir) / "build" / "timing.json");
    for (const auto& [asset, s] : extract_t.at("PerAsset").items()) {
        rows[asset].asset = asset;
        rows[asset].extract_s = s.get<double>();
    }
    for (const auto& [asset, s] : build_t.at("PerAsset").items()) {
        rows[asset].asset = asset;
        rows[asset].mesh_s = s.get<double>();
    }
    for (const auto& [_, row] : rows) timing.rows.push_back(row);
    timing.extract_total = extract_t.at("WallSeconds").get<double>();
    timing.mesh_total = build_t.at("WallSeconds").get<double>();
    timing.pipeline_total = timing.extract_total + timing.mesh_total;
    write_text(dir / "timing.txt", timing.to_text());
    write_text(dir / "timing.json", timing.to_json().dump(2) + "\n");

    std::vector<std::string> json_paths, mesh_paths;
    const Json build_manifest = read_json(fs::path(out_dir) / "build" / "manifest.json");
    for (const Json& entry : build_manifest.at("Meshes")) {
        json_paths.push_back(
            (fs::path(out_dir) / "extract" / entry.at("Record").get<std::string>()).string());
        mesh_paths.push_back(
            (fs::path(out_dir) / "build" / entry.at("File").get<std::string>()).string());
    }
    const SizeReport sizes = size_report(json_paths, mesh_paths);
    write_text(dir / "sizes.txt", sizes.to_text());
    write_text(dir / "sizes.json", sizes.to_json_table().dump(2) + "\n");
}

void stage_run(const std::string& cloud_path, const std::string& out_dir,
               const PipelineConfig& cfg) {
    stage_segment(cloud_path, out_dir, cfg);
    stage_extract(out_dir, cfg);
    stage_build(out_dir, cfg);
    stage_evaluate(out_dir, cfg);
    stage_report(out_dir, cfg);
}

}  // namespace roadtwin
