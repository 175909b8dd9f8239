#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <map>
#include <vector>

#include "roadtwin/ingest.hpp"
#include "roadtwin/pipeline.hpp"
#include "roadtwin/synth.hpp"

using namespace roadtwin;
namespace fs = std::filesystem;

namespace {

fs::path work_dir(const std::string& name) {
    auto dir = fs::temp_directory_path() / "roadtwin_test_pipeline" / name;
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

fs::path tiny_scene(const fs::path& dir) {
    SceneSpec spec;
    spec.length = 20.0;
    spec.density = 120.0;
    spec.slopes = 0;
    spec.signs.push_back({{10.0, 12.0}, 0.0});
    const auto scene = generate(spec);
    const auto path = dir / "scene.ply";
    save_cloud(scene.cloud, path.string());
    return path;
}

// stable byte map of every record/mesh file under out/, ignoring timing files
std::map<std::string, std::string> artifact_bytes(const fs::path& out) {
    std::map<std::string, std::string> files;
    for (const auto& e : fs::recursive_directory_iterator(out)) {
        if (!e.is_regular_file()) continue;
        const auto name = e.path().filename().string();
        const auto ext = e.path().extension().string();
        if (name == "timing.json" || name.rfind("report", 0) == 0 ||
            name.rfind("sizes", 0) == 0)
            continue;
        if (ext != ".json" && ext != ".obj" && ext != ".ply") continue;
        std::ifstream in(e.path(), std::ios::binary);
        files[fs::relative(e.path(), out).string()] =
            std::string((std::istreambuf_iterator<char>(in)), {});
    }
    return files;
}

}  // namespace

TEST_CASE("config: unknown keys rejected with their path") {
    Json j;
    j["Threads"] = 2;
    j["Extract"]["GridW"] = 0.5;
    j["Extract"]["NoSuchKnob"] = 1;
    try {
        PipelineConfig::from_json(j);
        FAIL("expected config error");
    } catch (const ConfigError& e) {
        CHECK(std::string(e.what()).find("NoSuchKnob") != std::string::npos);
        CHECK(std::string(e.what()).find("Extract") != std::string::npos);
    }
}

TEST_CASE("config: to_json/from_json round trip") {
    PipelineConfig cfg;
    cfg.threads = 3;
    cfg.extract.grid_w = 0.5;
    cfg.extract.n_rays = 24;
    cfg.segment_name = "alpha";
    const auto back = PipelineConfig::from_json(cfg.to_json());
    CHECK(back.threads == 3);
    CHECK(back.extract.grid_w == 0.5);
    CHECK(back.extract.n_rays == 24);
    CHECK(back.segment_name == "alpha");
    CHECK(back.to_json() == cfg.to_json());
}

TEST_CASE("pipeline: run equals chained stages, byte for byte") {
    const auto dir = work_dir("chain");
    const auto cloud = tiny_scene(dir);
    PipelineConfig cfg;
    cfg.threads = 2;

    const auto out_run = dir / "out_run";
    stage_run(cloud.string(), out_run.string(), cfg);

    const auto out_chain = dir / "out_chain";
    stage_segment(cloud.string(), out_chain.string(), cfg);
    stage_extract(out_chain.string(), cfg);
    stage_build(out_chain.string(), cfg);
    stage_evaluate(out_chain.string(), cfg);
    stage_report(out_chain.string(), cfg);

    const auto a = artifact_bytes(out_run);
    const auto b = artifact_bytes(out_chain);
    REQUIRE(!a.empty());
    CHECK(a == b);
}

TEST_CASE("pipeline: thread count does not change output bytes") {
    const auto dir = work_dir("threads");
    const auto cloud = tiny_scene(dir);

    PipelineConfig one;
    one.threads = 1;
    PipelineConfig many;
    many.threads = 8;
    stage_run(cloud.string(), (dir / "t1").string(), one);
    stage_run(cloud.string(), (dir / "t8").string(), many);
    const auto a = artifact_bytes(dir / "t1");
    const auto b = artifact_bytes(dir / "t8");
    REQUIRE(!a.empty());
    CHECK(a == b);
}

TEST_CASE("pipeline: smaller grid size produces more grid polygons") {
    const auto dir = work_dir("grid");
    const auto cloud = tiny_scene(dir);

    auto polygon_count = [&](double grid, const fs::path& out) {
        PipelineConfig cfg;
        cfg.threads = 2;
        cfg.extract.grid_w = cfg.extract.grid_l = grid;
        stage_segment(cloud.string(), out.string(), cfg);
        stage_extract(out.string(), cfg);
        size_t polys = 0;
        for (const auto& e : fs::directory_iterator(out / "extract")) {
            if (e.path().extension() != ".json" || e.path().filename() == "manifest.json" ||
                e.path().filename() == "timing.json")
                continue;
            std::ifstream in(e.path());
            const auto rec = from_json(std::string((std::istreambuf_iterator<char>(in)), {}));
            polys += rec.plane.size();
        }
        return polys;
    };
    CHECK(polygon_count(0.5, dir / "fine") > polygon_count(2.0, dir / "coarse"));
}

TEST_CASE("pipeline: corrupted record fails the build stage with a data error") {
    const auto dir = work_dir("corrupt");
    const auto cloud = tiny_scene(dir);
    PipelineConfig cfg;
    cfg.threads = 1;
    const auto out = dir / "out";
    stage_segment(cloud.string(), out.string(), cfg);
    stage_extract(out.string(), cfg);

    // clobber one record
    for (const auto& e : fs::directory_iterator(out / "extract")) {
        const auto name = e.path().filename().string();
        if (e.path().extension() == ".json" && name != "manifest.json" &&
            name != "timing.json") {
            std::ofstream(e.path()) << "{\"Meta\":{},\"Data\":{\"MultiPolygon\":{}}}";
            break;
        }
    }
    CHECK_THROWS_AS(stage_build(out.string(), cfg), DataError);
}

TEST_CASE("pipeline: evaluate report contains the expected asset rows") {
    const auto dir = work_dir("eval");
    const auto cloud = tiny_scene(dir);
    PipelineConfig cfg;
    cfg.threads = 2;
    const auto out = dir / "out";
    stage_run(cloud.string(), out.string(), cfg);
    const auto report = stage_evaluate(out.string(), cfg);
    CHECK(report.per_asset.size() >= 3);  // surface, lane, sign at minimum
    CHECK(report.overall.count > 0);
    CHECK(report.overall.avg < 0.05);  // 5 cm sanity ceiling on the tiny scene
    CHECK(fs::exists(out / "evaluate" / "report.txt"));
    CHECK(fs::exists(out / "report" / "sizes.txt"));
}
