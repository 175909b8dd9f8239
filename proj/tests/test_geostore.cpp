#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <random>

#include "roadtwin/geostore.hpp"

using namespace roadtwin;
namespace fs = std::filesystem;

namespace {

Ring3D ring(std::initializer_list<Vec3> vs) {
    Ring3D r;
    r.vertices = vs;
    return r;
}

Ring3D random_ring(std::mt19937_64& rng, size_t n) {
    std::uniform_real_distribution<double> u(-100.0, 100.0);
    Ring3D r;
    for (size_t i = 0; i < n; ++i) r.vertices.push_back({u(rng), u(rng), u(rng)});
    return r;
}

Polygon3D random_polygon(std::mt19937_64& rng, bool allow_holes = true) {
    Polygon3D p;
    p.shell = random_ring(rng, 3 + rng() % 8);
    if (allow_holes && rng() % 3 == 0) p.holes.push_back(random_ring(rng, 3 + rng() % 4));
    return p;
}

GeometryRecord random_record(std::mt19937_64& rng) {
    GeometryRecord rec;
    rec.instance_id = int(rng() % 1000);
    rec.segment_id = "seg" + std::to_string(rng() % 10);
    switch (rng() % 3) {
        case 0: {
            rec.kind = RecordKind::PlaneLike;
            rec.semantic = "RoadSurface";
            const size_t n = 1 + rng() % 5;
            for (size_t i = 0; i < n; ++i) rec.plane.push_back(random_polygon(rng));
            break;
        }
        case 1: {
            rec.kind = RecordKind::Guardrail;
            rec.semantic = "Guardrail";
            const size_t segs = 1 + rng() % 3;
            for (size_t s = 0; s < segs; ++s) {
                PairRecord pair;
                const size_t n = 1 + rng() % 4;
                for (size_t i = 0; i < n; ++i) {
                    Polygon3D front = random_polygon(rng, false);
                    Polygon3D back = front;
                    for (auto& v : back.shell.vertices) v.y -= 0.1;
                    pair.front.push_back(front);
                    pair.back.push_back(back);
                }
                rec.guardrails.push_back(pair);
            }
            break;
        }
        default: {
            rec.kind = RecordKind::PoleLike;
            rec.semantic = rng() % 2 ? "RoadSign" : "RoadLight";
            const size_t poles = 1 + rng() % 2;
            for (size_t i = 0; i < poles; ++i) {
                MultiPolygon3D rings;
                const size_t m = 2 + rng() % 5;
                for (size_t j = 0; j < m; ++j) {
                    Polygon3D ringpoly;
                    ringpoly.shell = random_ring(rng, 6);
                    rings.push_back(ringpoly);
                }
                rec.poles.push_back(rings);
            }
            if (rng() % 2) {
                PairRecord pair;
                Polygon3D front = random_polygon(rng, false);
                Polygon3D back = front;
                for (auto& v : back.shell.vertices) v.x -= 0.02;
                pair.front.push_back(front);
                pair.back.push_back(back);
                rec.panels.push_back(pair);
            }
            break;
        }
    }
    return rec;
}

bool rings_equal(const Ring3D& a, const Ring3D& b) {
    if (a.vertices.size() != b.vertices.size()) return false;
    for (size_t i = 0; i < a.vertices.size(); ++i)
        if (!(a.vertices[i] == b.vertices[i])) return false;
    return true;
}

bool polys_equal(const MultiPolygon3D& a, const MultiPolygon3D& b) {
    if (a.size() != b.size()) return false;
    for (size_t i = 0; i < a.size(); ++i) {
        if (!rings_equal(a[i].shell, b[i].shell)) return false;
        if (a[i].holes.size() != b[i].holes.size()) return false;
        for (size_t j = 0; j < a[i].holes.size(); ++j)
            if (!rings_equal(a[i].holes[j], b[i].holes[j])) return false;
    }
    return true;
}

bool records_equal(const GeometryRecord& a, const GeometryRecord& b) {
    if (a.kind != b.kind || a.semantic != b.semantic || a.instance_id != b.instance_id ||
        a.segment_id != b.segment_id)
        return false;
    if (!polys_equal(a.plane, b.plane)) return false;
    if (a.guardrails.size() != b.guardrails.size() || a.panels.size() != b.panels.size() ||
        a.poles.size() != b.poles.size() || a.lights.size() != b.lights.size())
        return false;
    for (size_t i = 0; i < a.guardrails.size(); ++i)
        if (!polys_equal(a.guardrails[i].front, b.guardrails[i].front) ||
            !polys_equal(a.guardrails[i].back, b.guardrails[i].back))
            return false;
    for (size_t i = 0; i < a.panels.size(); ++i)
        if (!polys_equal(a.panels[i].front, b.panels[i].front) ||
            !polys_equal(a.panels[i].back, b.panels[i].back))
            return false;
    for (size_t i = 0; i < a.poles.size(); ++i)
        if (!polys_equal(a.poles[i], b.poles[i])) return false;
    for (size_t i = 0; i < a.lights.size(); ++i)
        if (!polys_equal(a.lights[i], b.lights[i])) return false;
    return true;
}

}  // namespace

TEST_CASE("to_json: smallest plane-like record has the canonical nesting") {
    GeometryRecord rec;
    rec.kind = RecordKind::PlaneLike;
    rec.semantic = "RoadLane";
    Polygon3D tri;
    tri.shell = ring({{0, 0, 0}, {1, 0, 0}, {0, 1, 0}});
    rec.plane.push_back(tri);

    const auto j = Json::parse(to_json(rec));
    REQUIRE(j.contains("Data"));
    REQUIRE(j["Data"].contains("MultiPolygon"));
    const auto& poly = j["Data"]["MultiPolygon"]["Polygon_0"];
    REQUIRE(poly.contains("Shell"));
    REQUIRE(poly.contains("Holes"));
    CHECK(poly["Shell"]["Vertices"] == Json::parse("[[0,0,0],[1,0,0],[0,1,0]]"));
    CHECK(poly["Holes"]["Vertices"] == Json::parse("[]"));
    CHECK(j["Meta"].contains("Semantic"));
}

TEST_CASE("validate: front/back mismatch flagged at the guardrail path") {
    GeometryRecord rec;
    rec.kind = RecordKind::Guardrail;
    rec.semantic = "Guardrail";
    PairRecord pair;
    Polygon3D p;
    p.shell = ring({{0, 0, 0}, {1, 0, 0}, {0, 1, 0}});
    pair.front.push_back(p);
    pair.front.push_back(p);
    pair.back.push_back(p);
    rec.guardrails.push_back(pair);
    try {
        rec.validate();
        FAIL("expected validation error");
    } catch (const DataError& e) {
        CHECK(std::string(e.what()).find("Guardrail_0") != std::string::npos);
    }
}

TEST_CASE("validate: two-vertex shell rejected, pole-like needs a pole") {
    GeometryRecord rec;
    rec.kind = RecordKind::PlaneLike;
    rec.semantic = "RoadSurface";
    Polygon3D bad;
    bad.shell = ring({{0, 0, 0}, {1, 0, 0}});
    rec.plane.push_back(bad);
    CHECK_THROWS_AS(rec.validate(), DataError);

    GeometryRecord nopole;
    nopole.kind = RecordKind::PoleLike;
    nopole.semantic = "RoadSign";
    CHECK_THROWS_AS(nopole.validate(), DataError);
}

TEST_CASE("round trip: 500 randomized records, bytes deterministic") {
    std::mt19937_64 rng(2025);
    for (int i = 0; i < 500; ++i) {
        const auto rec = random_record(rng);
        const auto bytes = to_json(rec);
        CAPTURE(i);
        REQUIRE(to_json(rec) == bytes);  // byte-deterministic
        const auto back = from_json(bytes);
        REQUIRE(records_equal(rec, back));
        REQUIRE(to_json(back) == bytes);
        REQUIRE(bytes.find("Edges") == std::string::npos);
    }
}

TEST_CASE("from_json: schema violations carry path diagnostics") {
    GeometryRecord rec;
    rec.kind = RecordKind::PlaneLike;
    rec.semantic = "RoadSurface";
    Polygon3D tri;
    tri.shell = ring({{0, 0, 0}, {1, 0, 0}, {0, 1, 0}});
    rec.plane.push_back(tri);
    auto j = Json::parse(to_json(rec));
    j["Data"]["MultiPolygon"]["Polygon_0"]["Shell"]["Vertices"] = Json::parse("[[0,0,0],[1,0,0]]");
    try {
        from_json(j.dump());
        FAIL("expected schema error");
    } catch (const DataError& e) {
        CHECK(std::string(e.what()).find("Shell") != std::string::npos);
    }
}

TEST_CASE("from_json: unknown keys preserved for forward compatibility") {
    GeometryRecord rec;
    rec.kind = RecordKind::PlaneLike;
    rec.semantic = "RoadLane";
    Polygon3D tri;
    tri.shell = ring({{0, 0, 0}, {1, 0, 0}, {0, 1, 0}});
    rec.plane.push_back(tri);
    auto j = Json::parse(to_json(rec));
    j["Meta"]["Material"] = "steel";
    const auto back = from_json(j.dump());
    CHECK(back.extras.contains("Material"));
    CHECK(Json::parse(to_json(back))["Meta"]["Material"] == "steel");
}

TEST_CASE("numeric precision: 17 significant digits survive the round trip") {
    GeometryRecord rec;
    rec.kind = RecordKind::PlaneLike;
    rec.semantic = "RoadSurface";
    Polygon3D tri;
    tri.shell = ring({{0.1234567890123456, -9876.543210987654, 1e-15},
                      {1.0000000000000002, 0, 0},
                      {0, 3.141592653589793, 0}});
    rec.plane.push_back(tri);
    const auto back = from_json(to_json(rec));
    for (size_t i = 0; i < 3; ++i)
        CHECK(back.plane[0].shell.vertices[i] == tri.shell.vertices[i]);
}

TEST_CASE("size_report: sizes, ratio, and empty input") {
    auto dir = fs::temp_directory_path() / "roadtwin_test_geostore";
    fs::create_directories(dir);
    const auto jp = dir / "seg_RoadLane_000.json";
    const auto mp = dir / "seg_RoadLane_000.obj";
    std::ofstream(jp) << std::string(100, 'j');
    std::ofstream(mp) << std::string(250, 'm');
    const auto report = size_report({jp.string()}, {mp.string()});
    REQUIRE(report.rows.size() == 1);
    CHECK(report.json_total == 100);
    CHECK(report.mesh_total == 250);
    CHECK(report.ratio() == doctest::Approx(2.5));

    const auto empty = size_report({}, {});
    CHECK(empty.rows.empty());
    CHECK(empty.json_total == 0);
}
