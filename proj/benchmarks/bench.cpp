#include <benchmark/benchmark.h>

#include <random>

#include "roadtwin/cluster.hpp"
#include "roadtwin/geom2d.hpp"
#include "roadtwin/metrics.hpp"

using namespace roadtwin;

namespace {

std::vector<Vec3> random_points3(size_t n, uint64_t seed, double extent) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(0.0, extent);
    std::vector<Vec3> pts;
    pts.reserve(n);
    for (size_t i = 0; i < n; ++i) pts.push_back({u(rng), u(rng), u(rng) * 0.1});
    return pts;
}

std::vector<Vec2> random_points2(size_t n, uint64_t seed, double extent) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(0.0, extent);
    std::vector<Vec2> pts;
    pts.reserve(n);
    for (size_t i = 0; i < n; ++i) pts.push_back({u(rng), u(rng)});
    return pts;
}

Mesh random_mesh(size_t triangles, uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(-10.0, 10.0);
    Mesh m;
    for (size_t i = 0; i < triangles; ++i) {
        const uint32_t base = uint32_t(m.vertices.size());
        const Vec3 a{u(rng), u(rng), u(rng)};
        m.vertices.push_back(a);
        m.vertices.push_back(a + Vec3{u(rng) * 0.2, u(rng) * 0.2, u(rng) * 0.2});
        m.vertices.push_back(a + Vec3{u(rng) * 0.2, u(rng) * 0.2, u(rng) * 0.2});
        m.faces.push_back({base, base + 1, base + 2});
    }
    return m;
}

void bm_dbscan(benchmark::State& state) {
    const auto pts = random_points3(size_t(state.range(0)), 1, 30.0);
    const ClusterParams params{0.5, 8};
    for (auto _ : state) benchmark::DoNotOptimize(dbscan(pts, params));
    state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(bm_dbscan)->Arg(1000)->Arg(10000)->Arg(50000);

void bm_alphashape(benchmark::State& state) {
    const auto pts = random_points2(size_t(state.range(0)), 2, 20.0);
    for (auto _ : state) benchmark::DoNotOptimize(alphashape(pts, 2.0));
    state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(bm_alphashape)->Arg(1000)->Arg(10000)->Arg(50000);

void bm_min_enclosing_circle(benchmark::State& state) {
    const auto pts = random_points2(size_t(state.range(0)), 3, 5.0);
    for (auto _ : state) benchmark::DoNotOptimize(min_enclosing_circle(pts));
    state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(bm_min_enclosing_circle)->Arg(100)->Arg(10000);

void bm_distance_query_build(benchmark::State& state) {
    const auto mesh = random_mesh(size_t(state.range(0)), 4);
    for (auto _ : state) benchmark::DoNotOptimize(DistanceQuery(mesh));
}
BENCHMARK(bm_distance_query_build)->Arg(1000)->Arg(20000);

void bm_distance_query(benchmark::State& state) {
    const auto mesh = random_mesh(size_t(state.range(0)), 5);
    const DistanceQuery q(mesh);
    std::mt19937_64 rng(6);
    std::uniform_real_distribution<double> u(-12.0, 12.0);
    for (auto _ : state) benchmark::DoNotOptimize(q.distance({u(rng), u(rng), u(rng)}));
    state.SetItemsProcessed(state.iterations());
}
BENCHMARK(bm_distance_query)->Arg(1000)->Arg(20000);

}  // namespace

BENCHMARK_MAIN();
