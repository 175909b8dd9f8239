// Independent reference implementations used to check the optimized library
// code. Everything here is deliberately brute force.
#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>
#include <vector>

#include "roadtwin/cluster.hpp"
#include "roadtwin/geom2d.hpp"
#include "roadtwin/mesh.hpp"
#include "roadtwin/types.hpp"

namespace oracle {

using roadtwin::Vec2;
using roadtwin::Vec3;

// O(n^2) DBSCAN: full neighborhood matrix, core points, connected components
// of the direct-density-reachability graph, then border point attachment to
// the nearest core (ties: lowest cluster id).
inline roadtwin::Clustering dbscan_bruteforce(const std::vector<Vec3>& pts,
                                              const roadtwin::ClusterParams& params) {
    const size_t n = pts.size();
    std::vector<std::vector<uint32_t>> nbr(n);
    for (size_t i = 0; i < n; ++i)
        for (size_t j = 0; j < n; ++j)
            if ((pts[i] - pts[j]).norm() <= params.eps) nbr[i].push_back(uint32_t(j));
    std::vector<bool> core(n);
    for (size_t i = 0; i < n; ++i) core[i] = int(nbr[i].size()) >= params.min_pts;

    roadtwin::Clustering out;
    out.assignments.assign(n, roadtwin::kNoise);
    // components over cores first (core-core edges where within eps)
    int32_t next = 0;
    for (size_t s = 0; s < n; ++s) {
        if (!core[s] || out.assignments[s] != roadtwin::kNoise) continue;
        const int32_t id = next++;
        std::vector<uint32_t> stack{uint32_t(s)};
        out.assignments[s] = id;
        while (!stack.empty()) {
            const uint32_t u = stack.back();
            stack.pop_back();
            for (uint32_t v : nbr[u]) {
                if (!core[v] || out.assignments[v] != roadtwin::kNoise) continue;
                out.assignments[v] = id;
                stack.push_back(v);
            }
        }
    }
    out.cluster_count = next;
    // border points: nearest core, ties lowest cluster id
    for (size_t i = 0; i < n; ++i) {
        if (core[i] || out.assignments[i] != roadtwin::kNoise) continue;
        double best = std::numeric_limits<double>::infinity();
        int32_t best_id = roadtwin::kNoise;
        for (uint32_t v : nbr[i]) {
            if (!core[v]) continue;
            const double d = (pts[i] - pts[v]).norm();
            const int32_t id = out.assignments[v];
            if (d < best - 1e-15 || (std::abs(d - best) <= 1e-15 && id < best_id)) {
                best = d;
                best_id = id;
            }
        }
        out.assignments[i] = best_id;
    }
    return out;
}

// Clusterings equal up to relabeling?
inline bool same_clustering(const roadtwin::Clustering& a, const roadtwin::Clustering& b) {
    if (a.assignments.size() != b.assignments.size()) return false;
    if (a.cluster_count != b.cluster_count) return false;
    std::vector<int32_t> map_ab(size_t(a.cluster_count), -2);
    for (size_t i = 0; i < a.assignments.size(); ++i) {
        const int32_t x = a.assignments[i], y = b.assignments[i];
        if ((x == roadtwin::kNoise) != (y == roadtwin::kNoise)) return false;
        if (x == roadtwin::kNoise) continue;
        if (map_ab[size_t(x)] == -2)
            map_ab[size_t(x)] = y;
        else if (map_ab[size_t(x)] != y)
            return false;
    }
    std::sort(map_ab.begin(), map_ab.end());
    return std::adjacent_find(map_ab.begin(), map_ab.end()) == map_ab.end();
}

// O(n^3) minimum enclosing circle over all pairs and triples.
inline roadtwin::Circle2D mec_bruteforce(const std::vector<Vec2>& pts) {
    auto contains_all = [&](const Vec2& c, double r) {
        for (const Vec2& p : pts)
            if ((p - c).norm() > r + 1e-9) return false;
        return true;
    };
    roadtwin::Circle2D best{{pts[0].x, pts[0].y}, std::numeric_limits<double>::infinity()};
    if (pts.size() == 1) return {pts[0], 0.0};
    for (size_t i = 0; i < pts.size(); ++i)
        for (size_t j = i + 1; j < pts.size(); ++j) {
            const Vec2 c = (pts[i] + pts[j]) * 0.5;
            const double r = (pts[i] - c).norm();
            if (r < best.radius && contains_all(c, r)) best = {c, r};
        }
    for (size_t i = 0; i < pts.size(); ++i)
        for (size_t j = i + 1; j < pts.size(); ++j)
            for (size_t k = j + 1; k < pts.size(); ++k) {
                const Vec2 a = pts[i], b = pts[j], c = pts[k];
                const double d = 2.0 * (a.x * (b.y - c.y) + b.x * (c.y - a.y) + c.x * (a.y - b.y));
                if (std::abs(d) < 1e-12) continue;
                const double a2 = a.dot(a), b2 = b.dot(b), c2 = c.dot(c);
                const Vec2 o{(a2 * (b.y - c.y) + b2 * (c.y - a.y) + c2 * (a.y - b.y)) / d,
                             (a2 * (c.x - b.x) + b2 * (a.x - c.x) + c2 * (b.x - a.x)) / d};
                const double r = (a - o).norm();
                if (r < best.radius && contains_all(o, r)) best = {o, r};
            }
    return best;
}

inline double point_triangle_distance(const Vec3& p, const Vec3& a, const Vec3& b, const Vec3& c) {
    const Vec3 ab = b - a, ac = c - a, ap = p - a;
    const double d1 = ab.dot(ap), d2 = ac.dot(ap);
    if (d1 <= 0 && d2 <= 0) return (p - a).norm();
    const Vec3 bp = p - b;
    const double d3 = ab.dot(bp), d4 = ac.dot(bp);
    if (d3 >= 0 && d4 <= d3) return (p - b).norm();
    const double vc = d1 * d4 - d3 * d2;
    if (vc <= 0 && d1 >= 0 && d3 <= 0) {
        const double v = d1 / (d1 - d3);
        return (p - (a + ab * v)).norm();
    }
    const Vec3 cp = p - c;
    const double d5 = ab.dot(cp), d6 = ac.dot(cp);
    if (d6 >= 0 && d5 <= d6) return (p - c).norm();
    const double vb = d5 * d2 - d1 * d6;
    if (vb <= 0 && d2 >= 0 && d6 <= 0) {
        const double w = d2 / (d2 - d6);
        return (p - (a + ac * w)).norm();
    }
    const double va = d3 * d6 - d5 * d4;
    if (va <= 0 && (d4 - d3) >= 0 && (d5 - d6) >= 0) {
        const double w = (d4 - d3) / ((d4 - d3) + (d5 - d6));
        return (p - (b + (c - b) * w)).norm();
    }
    const double denom = 1.0 / (va + vb + vc);
    const double v = vb * denom, w = vc * denom;
    return (p - (a + ab * v + ac * w)).norm();
}

// Exhaustive per-triangle minimum distance.
inline double distance_bruteforce(const Vec3& p, const roadtwin::Mesh& mesh) {
    double best = std::numeric_limits<double>::infinity();
    for (const auto& f : mesh.faces)
        best = std::min(best, point_triangle_distance(p, mesh.vertices[f[0]],
                                                      mesh.vertices[f[1]], mesh.vertices[f[2]]));
    return best;
}

}  // namespace oracle
