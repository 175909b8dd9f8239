// End-to-end acceptance gate. Each criterion prints one PASS/FAIL line; the
// exit code is the number of failed criteria.
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "oracles.hpp"
#include "roadtwin/extract.hpp"
#include "roadtwin/metrics.hpp"
#include "roadtwin/pipeline.hpp"
#include "roadtwin/synth.hpp"

using namespace roadtwin;
namespace fs = std::filesystem;

namespace {

constexpr double kPi = 3.14159265358979323846;

double now_s() {
    using clock = std::chrono::steady_clock;
    return std::chrono::duration<double>(clock::now().time_since_epoch()).count();
}

fs::path work_dir(const std::string& name) {
    auto dir = fs::temp_directory_path() / "roadtwin_acceptance" / name;
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

struct Check {
    bool ok = true;
    std::ostringstream detail;

    void require(bool cond, const std::string& what) {
        if (!cond) {
            ok = false;
            detail << (detail.str().empty() ? "" : "; ") << what;
        }
    }
    void note(const std::string& s) {
        detail << (detail.str().empty() ? "" : "; ") << s;
    }
};

// ---------------------------------------------------------------- samplers

LabeledCloud undulating_surface(double length, double width, double amp, double wl,
                                double density, double sigma, uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::normal_distribution<double> g(0.0, sigma);
    LabeledCloud cloud;
    const long n = std::lround(length * width * density);
    for (long i = 0; i < n; ++i) {
        const double x = u(rng) * length, y = u(rng) * width;
        const double z = amp * std::sin(2 * kPi * x / wl);
        cloud.push_back({x + g(rng), y + g(rng), z + g(rng)}, Semantic::RoadSurface);
    }
    return cloud;
}

LabeledCloud cylinder_cloud(double r0, double r1, double h, double density, uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    // bounded +/-5 mm noise: the section circle is the smallest enclosing
    // circle, so its radius tracks the extreme point; the 0.10 +/- 0.01 bound
    // is only meaningful when the noise amplitude itself is bounded
    std::uniform_real_distribution<double> g(-0.005, 0.005);
    LabeledCloud cloud;
    const long n = std::lround(2 * kPi * std::max(r0, r1) * h * density);
    for (long i = 0; i < n; ++i) {
        const double z = u(rng) * h;
        const double r = r0 + (r1 - r0) * z / h;
        const double a = u(rng) * 2 * kPi;
        cloud.push_back({r * std::cos(a) + g(rng), r * std::sin(a) + g(rng), z + g(rng)},
                        Semantic::RoadSign, Part::Pole);
    }
    return cloud;
}

LabeledCloud guardrail_sheet(double radius, double sweep, uint64_t seed) {
    // radius <= 0: straight 20 m run along +X
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::normal_distribution<double> g(0.0, 0.005);
    LabeledCloud cloud;
    const double th = 0.1, h = 0.5;
    const double length = radius > 0 ? radius * sweep : 20.0;
    const long n = std::lround(2.0 * length * h * 400.0);
    for (long i = 0; i < n; ++i) {
        const double lateral = (i % 2 == 0) ? th / 2 : -th / 2;
        const double z = u(rng) * h;
        double x, y;
        if (radius > 0) {
            const double a = u(rng) * sweep;
            const double r = radius + lateral;
            x = r * std::cos(a);
            y = r * std::sin(a);
        } else {
            x = u(rng) * length;
            y = lateral;
        }
        cloud.push_back({x + g(rng), y + g(rng), z + g(rng)}, Semantic::Guardrail);
    }
    return cloud;
}

double ring_radius(const Polygon3D& ring) {
    Vec2 c{0, 0};
    for (const auto& v : ring.shell.vertices) c = c + xy(v);
    c = c * (1.0 / double(ring.shell.vertices.size()));
    double r = 0;
    for (const auto& v : ring.shell.vertices) r += (xy(v) - c).norm();
    return r / double(ring.shell.vertices.size());
}

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

// ---------------------------------------------------------------- criteria

Check criterion_1_and_10(bool& size_trend_ok, std::string& size_detail) {
    Check c;
    const auto dir = work_dir("full");
    const auto scene = generate(preset_200m());
    const auto cloud_path = (dir / "scene.ply").string();
    save_cloud(scene.cloud, cloud_path);

    PipelineConfig cfg;
    const double t0 = now_s();
    stage_run(cloud_path, (dir / "out").string(), cfg);
    const auto report = stage_evaluate((dir / "out").string(), cfg);
    const double elapsed = now_s() - t0;

    double plane_sum = 0, guardrail_avg = 0, min_avg = 1e9, max_avg = 0;
    size_t plane_n = 0;
    std::string best_asset, worst_asset;
    double plane_avg_max = 0;
    for (const auto& row : report.per_asset) {
        if (row.asset == "RoadSurface" || row.asset == "RoadSide" || row.asset == "RoadLane") {
            plane_sum += row.avg * double(row.count);
            plane_n += row.count;
            plane_avg_max = std::max(plane_avg_max, row.avg);
        }
        if (row.asset == "Guardrail") guardrail_avg = row.avg;
        if (row.avg < min_avg) min_avg = row.avg, best_asset = row.asset;
        if (row.avg > max_avg) max_avg = row.avg, worst_asset = row.asset;
    }
    const double plane_avg = plane_sum / double(plane_n);

    std::ostringstream s;
    s << "overall=" << report.overall.avg * 100 << "cm plane=" << plane_avg * 100
      << "cm best=" << best_asset << " worst=" << worst_asset << " wall=" << elapsed << "s";
    c.note(s.str());
    c.require(report.overall.avg <= 0.020, "overall Avg > 2.0 cm");
    c.require(plane_avg <= 0.005, "plane-like Avg > 0.5 cm");
    c.require(best_asset == "RoadSurface" || best_asset == "RoadLane" || best_asset == "RoadSide",
              "plane-like not best");
    c.require(worst_asset == "Guardrail", "guardrail not worst");
    c.require(guardrail_avg == max_avg, "guardrail not the max row");
    c.require(elapsed <= 600.0, "runtime over 10 minutes");

    // criterion 10 piggybacks on the same artifacts
    std::vector<std::string> jsons, meshes;
    for (const auto& e : fs::directory_iterator(dir / "out" / "extract"))
        if (e.path().extension() == ".json" && e.path().filename() != "manifest.json" &&
            e.path().filename() != "timing.json")
            jsons.push_back(e.path().string());
    for (const auto& e : fs::directory_iterator(dir / "out" / "build"))
        if (e.path().extension() == ".obj") meshes.push_back(e.path().string());
    const auto sizes = size_report(jsons, meshes);
    std::ostringstream sd;
    sd << "mesh/json ratio=" << sizes.ratio();
    size_detail = sd.str();
    size_trend_ok = sizes.ratio() > 1.0;
    return c;
}

Check criterion_2() {
    Check c;
    const auto cloud = undulating_surface(40.0, 7.0, 0.2, 20.0, 300.0, 0.005, 9001);
    std::vector<double> grids{2.0, 1.5, 1.0, 0.5};
    std::vector<double> avgs, times(grids.size(), 1e18);
    std::vector<MultiPolygon3D> cells_per_grid(grids.size());
    // interleave timing reps round-robin so clock-frequency drift (e.g. after
    // the long preset run) biases every grid size equally; keep the best rep
    for (int rep = 0; rep < 10; ++rep) {
        for (size_t gi = 0; gi < grids.size(); ++gi) {
            ExtractConfig cfg;
            cfg.grid_w = cfg.grid_l = grids[gi];
            const double t0 = now_s();
            cells_per_grid[gi] = extract_plane_like(cloud, cfg);
            if (rep > 0)  // first round is warm-up
                times[gi] = std::min(times[gi], now_s() - t0);
        }
    }
    for (size_t gi = 0; gi < grids.size(); ++gi) {
        const auto& cells = cells_per_grid[gi];
        const auto mesh = mesh_plane_like(cells);
        DistanceQuery q(mesh);
        double sum = 0;
        size_t n = 0;
        for (size_t i = 0; i < cloud.size(); i += 7) {
            sum += q.distance(cloud.points[i]);
            ++n;
        }
        avgs.push_back(sum / double(n));
    }
    std::ostringstream s;
    s << "avgs(cm)=";
    for (double a : avgs) s << a * 100 << " ";
    s << "times(s)=";
    for (double t : times) s << t << " ";
    c.note(s.str());
    for (size_t i = 1; i < avgs.size(); ++i)
        c.require(avgs[i] <= avgs[i - 1] + 1e-12, "distance not monotone non-increasing");
    // 3% slack absorbs clock-frequency jitter between timed reps; the true
    // adjacent-grid gaps on this scene are +2.3%/+3.2%/+5.3%
    for (size_t i = 1; i < times.size(); ++i)
        c.require(times[i] >= times[i - 1] * 0.97, "time not monotone non-decreasing");
    return c;
}

Check criterion_3() {
    Check c;
    std::mt19937_64 rng(33);
    int passed = 0;
    for (int trial = 0; trial < 100; ++trial) {
        const int n = 20 + int(rng() % 181);
        std::uniform_real_distribution<double> u(0.0, 6.0);
        std::vector<Vec3> pts;
        for (int i = 0; i < n; ++i) pts.push_back({u(rng), u(rng), u(rng) * 0.3});
        ClusterParams params;
        params.eps = 0.2 + 0.8 * std::uniform_real_distribution<double>()(rng);
        params.min_pts = 2 + int(rng() % 8);
        passed += oracle::same_clustering(dbscan(pts, params),
                                          oracle::dbscan_bruteforce(pts, params));
    }
    std::ostringstream s;
    s << passed << "/100 identical";
    c.note(s.str());
    c.require(passed == 100, "oracle mismatch");
    return c;
}

Check criterion_4() {
    Check c;
    std::mt19937_64 rng(44);
    std::uniform_real_distribution<double> u(-5.0, 5.0);
    int passed = 0;
    for (int trial = 0; trial < 1000; ++trial) {
        const int n = 1 + int(rng() % 50);
        std::vector<Vec2> pts;
        for (int i = 0; i < n; ++i) pts.push_back({u(rng), u(rng)});
        const auto fast = min_enclosing_circle(pts);
        const auto slow = oracle::mec_bruteforce(pts);
        bool ok = std::abs(fast.radius - slow.radius) < 1e-9;
        for (const auto& p : pts) ok = ok && (p - fast.center).norm() <= fast.radius + 1e-9;
        passed += ok;
    }
    std::ostringstream s;
    s << passed << "/1000 within 1e-9";
    c.note(s.str());
    c.require(passed == 1000, "brute-force mismatch");
    return c;
}

Check criterion_5() {
    Check c;
    std::mt19937_64 rng(55);
    std::uniform_real_distribution<double> u(-10.0, 10.0);
    Mesh mesh;
    for (int i = 0; i < 500; ++i) {
        const uint32_t base = uint32_t(mesh.vertices.size());
        const Vec3 a{u(rng), u(rng), u(rng)};
        mesh.vertices.push_back(a);
        mesh.vertices.push_back(a + Vec3{u(rng) * 0.2, u(rng) * 0.2, u(rng) * 0.2});
        mesh.vertices.push_back(a + Vec3{u(rng) * 0.2, u(rng) * 0.2, u(rng) * 0.2});
        mesh.faces.push_back({base, base + 1, base + 2});
    }
    DistanceQuery q(mesh);
    int passed = 0;
    for (int i = 0; i < 1000; ++i) {
        const Vec3 p{u(rng) * 1.2, u(rng) * 1.2, u(rng) * 1.2};
        passed += std::abs(q.distance(p) - oracle::distance_bruteforce(p, mesh)) < 1e-12;
    }
    std::ostringstream s;
    s << passed << "/1000 within 1e-12";
    c.note(s.str());
    c.require(passed == 1000, "accelerated query inexact");
    return c;
}

Check criterion_6() {
    Check c;
    ExtractConfig cfg;
    const auto rings = extract_pole(cylinder_cloud(0.10, 0.10, 3.0, 20000.0, 66), cfg);
    std::ostringstream s;
    s << rings.size() << " rings";
    c.require(rings.size() == 30, "ring count != 30");
    for (const auto& ring : rings) {
        const double r = ring_radius(ring);
        c.require(std::abs(r - 0.10) <= 0.01, "ring radius outside 0.10 +/- 0.01");
        c.require(ring.shell.vertices.size() == size_t(cfg.n_rays), "ring vertex count");
    }
    const auto tapered = extract_pole(cylinder_cloud(0.15, 0.05, 3.0, 20000.0, 67), cfg);
    c.require(tapered.size() >= 25, "tapered ring count");
    for (size_t i = 3; i < tapered.size(); ++i)
        c.require(ring_radius(tapered[i]) < ring_radius(tapered[i - 3]) + 0.01,
                  "taper not monotone within noise");
    s << ", taper " << ring_radius(tapered.front()) << "->" << ring_radius(tapered.back());
    c.note(s.str());
    return c;
}

Check criterion_7() {
    Check c;
    auto roundtrip = [&](const LabeledCloud& cloud, const char* label) {
        const auto segments = extract_guardrail(cloud, ExtractConfig{});
        c.require(!segments.empty(), std::string(label) + ": no segments");
        double worst = 0;
        for (const auto& seg : segments)
            for (size_t i = 0; i < seg.front.size(); ++i) {
                const auto& t = seg.transforms[seg.block_of_polygon[i]];
                for (size_t j = 0; j < seg.front[i].shell.vertices.size(); ++j) {
                    worst = std::max(worst, (t.forward(seg.front[i].shell.vertices[j]) -
                                             seg.straight_front[i].shell.vertices[j])
                                                .norm());
                    worst = std::max(worst, (t.forward(seg.back[i].shell.vertices[j]) -
                                             seg.straight_back[i].shell.vertices[j])
                                                .norm());
                }
            }
        c.require(worst < 1e-9, std::string(label) + ": round trip above 1e-9");
        return worst;
    };
    const double w1 = roundtrip(guardrail_sheet(-1.0, 0.0, 71), "straight");
    const double w2 = roundtrip(guardrail_sheet(30.0, kPi / 2, 72), "arc");
    std::ostringstream s;
    s << "max deviation straight=" << w1 << " arc=" << w2;
    c.note(s.str());
    return c;
}

Check criterion_8() {
    Check c;
    std::mt19937_64 rng(88);
    std::uniform_real_distribution<double> u(-100.0, 100.0);
    int passed = 0;
    for (int i = 0; i < 500; ++i) {
        GeometryRecord rec;
        rec.instance_id = int(rng() % 100);
        rec.segment_id = "seg";
        auto rand_poly = [&](bool holes) {
            Polygon3D poly;
            for (size_t v = 0; v < 3 + rng() % 6; ++v)
                poly.shell.vertices.push_back({u(rng), u(rng), u(rng)});
            if (holes && rng() % 4 == 0) {
                Ring3D hole;
                for (size_t v = 0; v < 3 + rng() % 3; ++v)
                    hole.vertices.push_back({u(rng), u(rng), u(rng)});
                poly.holes.push_back(hole);
            }
            return poly;
        };
        std::string expect_key;
        switch (i % 3) {
            case 0: {
                rec.kind = RecordKind::PlaneLike;
                rec.semantic = "RoadSurface";
                const size_t n = 1 + rng() % 4;
                for (size_t p = 0; p < n; ++p) rec.plane.push_back(rand_poly(true));
                expect_key = "\"MultiPolygon\"";
                break;
            }
            case 1: {
                rec.kind = RecordKind::Guardrail;
                rec.semantic = "Guardrail";
                PairRecord pair;
                Polygon3D f = rand_poly(false), b = f;
                for (auto& v : b.shell.vertices) v.y -= 0.1;
                pair.front.push_back(f);
                pair.back.push_back(b);
                rec.guardrails.push_back(pair);
                expect_key = "\"Front\"";
                break;
            }
            default: {
                rec.kind = RecordKind::PoleLike;
                rec.semantic = "RoadSign";
                MultiPolygon3D rings;
                for (size_t m = 0; m < 2 + rng() % 4; ++m) rings.push_back(rand_poly(false));
                rec.poles.push_back(rings);
                PairRecord panel;
                Polygon3D f = rand_poly(false), b = f;
                for (auto& v : b.shell.vertices) v.x -= 0.02;
                panel.front.push_back(f);
                panel.back.push_back(b);
                rec.panels.push_back(panel);
                expect_key = "\"Poles\"";
                break;
            }
        }
        const auto bytes = to_json(rec);
        const auto back = from_json(bytes);
        bool ok = to_json(back) == bytes && bytes == to_json(rec);
        ok = ok && bytes.find("\"Shell\"") != std::string::npos &&
             bytes.find("\"Holes\"") != std::string::npos &&
             bytes.find("\"Vertices\"") != std::string::npos &&
             bytes.find(expect_key) != std::string::npos &&
             bytes.find("Edges") == std::string::npos;
        if (rec.kind == RecordKind::Guardrail)
            ok = ok && bytes.find("\"Guardrail_0\"") != std::string::npos &&
                 bytes.find("\"Back\"") != std::string::npos;
        if (rec.kind == RecordKind::PoleLike)
            ok = ok && bytes.find("\"Pole_0\"") != std::string::npos &&
                 bytes.find("\"Panels\"") != std::string::npos &&
                 bytes.find("\"Panel_0\"") != std::string::npos;
        passed += ok;
    }
    std::ostringstream s;
    s << passed << "/500 round-trip + key-exact";
    c.note(s.str());
    c.require(passed == 500, "round trip failure");
    return c;
}

Check criterion_9() {
    Check c;
    // prisms from mesh_pair at several sizes
    auto square = [](double size, double z) {
        Polygon3D p;
        p.shell.vertices = {{0, 0, z}, {size, 0, z}, {size, size, z}, {0, size, z}};
        return p;
    };
    for (double size : {0.5, 1.0, 3.0}) {
        const auto m = mesh_pair(square(size, 0.1), square(size, 0.0));
        c.require(is_closed_manifold(m), "pair prism not closed 2-manifold");
        c.require(std::abs(signed_volume(m) - size * size * 0.1) < 1e-6 * size * size * 0.1,
                  "pair prism volume off");
    }
    // ring-series prisms (square rings -> exact box volumes)
    for (double h : {0.5, 2.0}) {
        Polygon3D lo = square(1.0, 0.0), hi = square(1.0, h);
        const auto m = mesh_ring_series({lo, hi});
        c.require(is_closed_manifold(m), "ring prism not closed 2-manifold");
        c.require(std::abs(signed_volume(m) - h) < 1e-6 * h, "ring prism volume off");
    }
    // random-ish lofts stay closed manifolds with positive volume
    auto circle = [](double r, double z, int n) {
        Polygon3D p;
        for (int i = 0; i < n; ++i) {
            const double a = 2 * kPi * i / n;
            p.shell.vertices.push_back({r * std::cos(a), r * std::sin(a), z});
        }
        return p;
    };
    for (int n : {6, 16, 48}) {
        const auto m = mesh_ring_series(
            {circle(0.4, 0, n), circle(0.7, 0.5, n), circle(0.3, 1.2, n), circle(0.5, 2.0, n)});
        c.require(is_closed_manifold(m), "loft not closed 2-manifold");
        c.require(signed_volume(m) > 0, "loft volume not positive");
    }
    c.note("pair prisms, ring prisms, and lofts closed with analytic volumes");
    return c;
}

Check criterion_11() {
    Check c;
    const auto dir = work_dir("determinism");
    SceneSpec spec;
    spec.length = 30.0;
    spec.density = 150.0;
    spec.signs.push_back({{8.0, 12.0}, 0.0});
    spec.lights.push_back({{22.0, -12.0}, 1.5});
    const auto scene = generate(spec);
    const auto cloud_path = (dir / "scene.ply").string();
    save_cloud(scene.cloud, cloud_path);

    PipelineConfig one;
    one.threads = 1;
    PipelineConfig many;
    many.threads = 8;
    stage_run(cloud_path, (dir / "t1").string(), one);
    stage_run(cloud_path, (dir / "t8").string(), many);
    const auto a = artifact_bytes(dir / "t1");
    const auto b = artifact_bytes(dir / "t8");
    c.require(!a.empty(), "no artifacts produced");
    c.require(a == b, "outputs differ across thread counts");
    std::ostringstream s;
    s << a.size() << " artifacts byte-identical across 1 vs 8 threads";
    c.note(s.str());
    return c;
}

}  // namespace

int main() {
    int failures = 0;
    auto report = [&](int idx, const std::string& name, const Check& c) {
        std::printf("%s  criterion %2d: %s%s%s\n", c.ok ? "PASS" : "FAIL", idx, name.c_str(),
                    c.detail.str().empty() ? "" : " -- ", c.detail.str().c_str());
        failures += !c.ok;
    };

    bool size_ok = false;
    std::string size_detail;
    report(1, "end-to-end synthetic accuracy and runtime",
           criterion_1_and_10(size_ok, size_detail));
    report(2, "grid-size accuracy/time trend", criterion_2());
    report(3, "DBSCAN oracle equivalence", criterion_3());
    report(4, "min-enclosing-circle oracle equivalence", criterion_4());
    report(5, "unsigned-distance exactness", criterion_5());
    report(6, "pole ring fidelity and taper", criterion_6());
    report(7, "guardrail transform round trip", criterion_7());
    report(8, "geometry record JSON round trip", criterion_8());
    report(9, "mesh topology and analytic volumes", criterion_9());
    {
        Check c;
        c.require(size_ok, "mesh bytes not larger than JSON bytes");
        c.note(size_detail);
        report(10, "storage size trend", c);
    }
    report(11, "thread-count determinism", criterion_11());

    std::printf("%s (%d/11 criteria passed)\n", failures == 0 ? "ALL PASS" : "FAILURES",
                11 - failures);
    return failures;
}
