#include <doctest.h>

#include <random>

#include "oracles.hpp"
#include "roadtwin/cluster.hpp"

using namespace roadtwin;

namespace {

std::vector<Vec3> blob(Vec3 center, int n, double spread, std::mt19937_64& rng) {
    std::normal_distribution<double> g(0.0, spread);
    std::vector<Vec3> pts;
    for (int i = 0; i < n; ++i) pts.push_back(center + Vec3{g(rng), g(rng), g(rng)});
    return pts;
}

}  // namespace

TEST_CASE("dbscan: two well-separated blobs form two clusters, no noise") {
    std::mt19937_64 rng(3);
    auto pts = blob({0, 0, 0}, 10, 0.1, rng);
    const auto b = blob({10, 0, 0}, 10, 0.1, rng);
    pts.insert(pts.end(), b.begin(), b.end());
    const auto c = dbscan(pts, {0.5, 4});
    CHECK(c.cluster_count == 2);
    for (auto a : c.assignments) CHECK(a != kNoise);
    CHECK(oracle::same_clustering(c, oracle::dbscan_bruteforce(pts, {0.5, 4})));
}

TEST_CASE("dbscan: isolated point is noise") {
    const auto c = dbscan({{0, 0, 0}}, {0.5, 2});
    CHECK(c.cluster_count == 0);
    CHECK(c.assignments[0] == kNoise);
}

TEST_CASE("dbscan: mutually close points form one cluster") {
    std::vector<Vec3> pts;
    for (int i = 0; i < 8; ++i) pts.push_back({0.01 * i, 0, 0});
    const auto c = dbscan(pts, {0.5, 8});
    CHECK(c.cluster_count == 1);
    for (auto a : c.assignments) CHECK(a == 0);
}

TEST_CASE("dbscan: matches brute-force closure oracle on 100 random sets") {
    std::mt19937_64 rng(2024);
    for (int trial = 0; trial < 100; ++trial) {
        const int n = 20 + int(rng() % 181);
        std::uniform_real_distribution<double> u(0.0, 6.0);
        std::vector<Vec3> pts;
        for (int i = 0; i < n; ++i) pts.push_back({u(rng), u(rng), u(rng) * 0.2});
        ClusterParams params;
        params.eps = 0.2 + 0.8 * std::uniform_real_distribution<double>()(rng);
        params.min_pts = 2 + int(rng() % 8);
        CAPTURE(trial);
        REQUIRE(oracle::same_clustering(dbscan(pts, params),
                                        oracle::dbscan_bruteforce(pts, params)));
    }
}

TEST_CASE("dbscan: result independent of input permutation") {
    std::mt19937_64 rng(17);
    auto pts = blob({0, 0, 0}, 40, 0.3, rng);
    const auto b = blob({3, 0, 0}, 40, 0.3, rng);
    pts.insert(pts.end(), b.begin(), b.end());
    const ClusterParams params{0.4, 5};
    const auto base = dbscan(pts, params);

    std::vector<size_t> perm(pts.size());
    std::iota(perm.begin(), perm.end(), 0);
    std::shuffle(perm.begin(), perm.end(), rng);
    std::vector<Vec3> shuffled(pts.size());
    for (size_t i = 0; i < perm.size(); ++i) shuffled[i] = pts[perm[i]];
    const auto after = dbscan(shuffled, params);

    Clustering unshuffled;
    unshuffled.cluster_count = after.cluster_count;
    unshuffled.assignments.resize(pts.size());
    for (size_t i = 0; i < perm.size(); ++i) unshuffled.assignments[perm[i]] = after.assignments[i];
    CHECK(oracle::same_clustering(base, unshuffled));
}

TEST_CASE("dbscan: every cluster member is core or near a core of its cluster") {
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> u(0.0, 4.0);
    std::vector<Vec3> pts;
    for (int i = 0; i < 150; ++i) pts.push_back({u(rng), u(rng), 0});
    const ClusterParams params{0.35, 6};
    const auto c = dbscan(pts, params);
    for (size_t i = 0; i < pts.size(); ++i) {
        if (c.assignments[i] == kNoise) continue;
        size_t nbrs = 0;
        bool near_core = false;
        for (size_t j = 0; j < pts.size(); ++j) {
            if ((pts[i] - pts[j]).norm() > params.eps) continue;
            ++nbrs;
            size_t jn = 0;
            for (size_t k = 0; k < pts.size(); ++k)
                jn += (pts[j] - pts[k]).norm() <= params.eps;
            if (int(jn) >= params.min_pts && c.assignments[j] == c.assignments[i])
                near_core = true;
        }
        CHECK((int(nbrs) >= params.min_pts || near_core));
    }
}

TEST_CASE("split_instances: two lane dashes and one sign pole") {
    std::mt19937_64 rng(8);
    LabeledCloud cloud;
    auto add = [&](Vec3 c, int n, Semantic s, Part p) {
        for (const auto& q : blob(c, n, 0.05, rng)) cloud.push_back(q, s, p);
    };
    add({0, 0, 0}, 30, Semantic::RoadLane, Part::None);
    add({8, 0, 0}, 30, Semantic::RoadLane, Part::None);
    add({4, 5, 1}, 40, Semantic::RoadSign, Part::Pole);

    const auto instances = split_instances(cloud, default_cluster_params());
    REQUIRE(instances.size() == 3);
    CHECK(instances[0].semantic == Semantic::RoadLane);
    CHECK(instances[1].semantic == Semantic::RoadLane);
    CHECK(instances[2].semantic == Semantic::RoadSign);
    CHECK(instances[0].cloud.points[0].x < instances[1].cloud.points[0].x);
}

TEST_CASE("split_instances: empty semantic class yields no instances, tiny eps all noise") {
    LabeledCloud cloud;
    cloud.push_back({0, 0, 0}, Semantic::RoadLane);
    cloud.push_back({5, 0, 0}, Semantic::RoadLane);
    auto params = default_cluster_params();
    params[Semantic::RoadLane] = {1e-6, 2};
    CHECK(split_instances(cloud, params).empty());
}

TEST_CASE("split_parts: pole plus two panel blobs") {
    std::mt19937_64 rng(9);
    LabeledCloud inst;
    auto add = [&](Vec3 c, int n, Part p) {
        for (const auto& q : blob(c, n, 0.03, rng)) inst.push_back(q, Semantic::RoadSign, p);
    };
    add({0, 0, 1}, 50, Part::Pole);
    add({0.5, 0, 2.5}, 30, Part::Panel);
    add({-0.5, 0, 2.5}, 30, Part::Panel);

    const auto parts = split_parts(inst, default_part_params());
    REQUIRE(parts.count(Part::Pole) == 1);
    REQUIRE(parts.count(Part::Panel) == 1);
    CHECK(parts.at(Part::Pole).size() == 1);
    CHECK(parts.at(Part::Panel).size() == 2);
}

TEST_CASE("split_parts: light head and pole") {
    std::mt19937_64 rng(10);
    LabeledCloud inst;
    for (const auto& q : blob({0, 0, 2}, 40, 0.04, rng))
        inst.push_back(q, Semantic::RoadLight, Part::Pole);
    for (const auto& q : blob({1, 0, 5}, 25, 0.04, rng))
        inst.push_back(q, Semantic::RoadLight, Part::Light);
    const auto parts = split_parts(inst, default_part_params());
    CHECK(parts.at(Part::Pole).size() == 1);
    CHECK(parts.at(Part::Light).size() == 1);
}

TEST_CASE("split_parts: missing part labels is an error") {
    std::mt19937_64 rng(12);
    LabeledCloud inst;
    for (const auto& q : blob({0, 0, 1}, 30, 0.05, rng))
        inst.push_back(q, Semantic::RoadSign, Part::None);
    CHECK_THROWS_AS(split_parts(inst, default_part_params()), DataError);
}
