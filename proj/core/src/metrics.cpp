#include "roadtwin/metrics.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <future>
#include <limits>
#include <map>
#include <numeric>
#include <sstream>
#include <thread>

namespace roadtwin {

namespace {

Vec3 cross(const Vec3& a, const Vec3& b) {
    return {a.y * b.z - a.z * b.y, a.z * b.x - a.x * b.z, a.x * b.y - a.y * b.x};
}

// Closest point on triangle abc to p (Ericson, Real-Time Collision Detection).
Vec3 closest_on_triangle(const Vec3& p, const Vec3& a, const Vec3& b, const Vec3& c) {
    const Vec3 ab = b - a, ac = c - a, ap = p - a;
    const double d1 = ab.dot(ap), d2 = ac.dot(ap);
    if (d1 <= 0 && d2 <= 0) return a;

    const Vec3 bp = p - b;
    const double d3 = ab.dot(bp), d4 = ac.dot(bp);
    if (d3 >= 0 && d4 <= d3) return b;

    const double vc = d1 * d4 - d3 * d2;
    if (vc <= 0 && d1 >= 0 && d3 <= 0) return a + ab * (d1 / (d1 - d3));

    const Vec3 cp = p - c;
    const double d5 = ab.dot(cp), d6 = ac.dot(cp);
    if (d6 >= 0 && d5 <= d6) return c;

    const double vb = d5 * d2 - d1 * d6;
    if (vb <= 0 && d2 >= 0 && d6 <= 0) return a + ac * (d2 / (d2 - d6));

    const double va = d3 * d6 - d5 * d4;
    if (va <= 0 && d4 - d3 >= 0 && d5 - d6 >= 0) {
        const double w = (d4 - d3) / ((d4 - d3) + (d5 - d6));
        return b + (c - b) * w;
    }

    const double denom = 1.0 / (va + vb + vc);
    return a + ab * (vb * denom) + ac * (vc * denom);
}

double aabb_dist2(const Vec3& p, const Vec3& lo, const Vec3& hi) {
    auto axis = [](double v, double l, double h) {
        return v < l ? l - v : (v > h ? v - h : 0.0);
    };
    const double dx = axis(p.x, lo.x, hi.x);
    const double dy = axis(p.y, lo.y, hi.y);
    const double dz = axis(p.z, lo.z, hi.z);
    return dx * dx + dy * dy + dz * dz;
}

constexpr uint32_t kLeafSize = 4;

}  // namespace

DistanceQuery::DistanceQuery(const Mesh& mesh) : DistanceQuery(std::vector<Mesh>{mesh}) {}

DistanceQuery::DistanceQuery(const std::vector<Mesh>& meshes) {
    for (const Mesh& mesh : meshes)
        for (const auto& f : mesh.faces)
            tris_.push_back({mesh.vertices[f[0]], mesh.vertices[f[1]], mesh.vertices[f[2]]});
    if (tris_.empty()) throw DataError("distance query: no faces");
    nodes_.reserve(tris_.size() * 2);
    nodes_.emplace_back();
    build(0, 0, static_cast<uint32_t>(tris_.size()));
}

void DistanceQuery::build(uint32_t node, uint32_t first, uint32_t count) {
    Vec3 lo{1e300, 1e300, 1e300}, hi{-1e300, -1e300, -1e300};
    for (uint32_t i = first; i < first + count; ++i) {
        for (const Vec3* v : {&tris_[i].a, &tris_[i].b, &tris_[i].c}) {
            lo = {std::min(lo.x, v->x), std::min(lo.y, v->y), std::min(lo.z, v->z)};
            hi = {std::max(hi.x, v->x), std::max(hi.y, v->y), std::max(hi.z, v->z)};
        }
    }
    nodes_[node].lo = lo;
    nodes_[node].hi = hi;
    if (count <= kLeafSize) {
        nodes_[node].first = first;
        nodes_[node].count = count;
        return;
    }
    const Vec3 extent = hi - lo;
    const int axis = extent.x >= extent.y ? (extent.x >= extent.z ? 0 : 2)
                                          : (extent.y >= extent.z ? 1 : 2);
    auto key = [axis](const Tri& t) {
        const double v = axis == 0 ? t.a.x + t.b.x + t.c.x
                       : axis == 1 ? t.a.y + t.b.y + t.c.y
                                   : t.a.z + t.b.z + t.c.z;
        return v;
    };
    const uint32_t mid = first + count / 2;
    std::nth_element(tris_.begin() + first, tris_.begin() + mid, tris_.begin() + first + count,
                     [&](const Tri& x, const Tri& y) { return key(x) < key(y); });
    const uint32_t left = static_cast<uint32_t>(nodes_.size());
    nodes_.emplace_back();
    nodes_.emplace_back();
    nodes_[node].left = left;
    nodes_[node].right = left + 1;
    nodes_[node].count = 0;
    build(left, first, count / 2);
    build(left + 1, mid, count - count / 2);
}

double DistanceQuery::distance(const Vec3& p) const {
    double best2 = std::numeric_limits<double>::max();
    uint32_t stack[64];
    int top = 0;
    stack[top++] = 0;
    while (top > 0) {
        const Node& node = nodes_[stack[--top]];
        if (aabb_dist2(p, node.lo, node.hi) >= best2) continue;
        if (node.count > 0) {
            for (uint32_t i = node.first; i < node.first + node.count; ++i) {
                const Vec3 q = closest_on_triangle(p, tris_[i].a, tris_[i].b, tris_[i].c);
                const Vec3 d = p - q;
                best2 = std::min(best2, d.dot(d));
            }
        } else {
            // visit the nearer child first for tighter pruning
            const double dl = aabb_dist2(p, nodes_[node.left].lo, nodes_[node.left].hi);
            const double dr = aabb_dist2(p, nodes_[node.right].lo, nodes_[node.right].hi);
            if (dl < dr) {
                stack[top++] = node.right;
                stack[top++] = node.left;
            } else {
                stack[top++] = node.left;
                stack[top++] = node.right;
            }
        }
    }
    return std::sqrt(best2);
}

double unsigned_distance(const Vec3& point, const Mesh& mesh) {
    return DistanceQuery(mesh).distance(point);
}

// --- reports -------------------------------------------------------------------

namespace {

struct Accum {
    double sum = 0, sum2 = 0;
    size_t n = 0;
    void add(double v) {
        sum += v;
        sum2 += v * v;
        ++n;
    }
    void merge(const Accum& o) {
        sum += o.sum;
        sum2 += o.sum2;
        n += o.n;
    }
    AssetStats stats(const std::string& name) const {
        AssetStats s;
        s.asset = name;
        s.count = n;
        if (n > 0) {
            s.avg = sum / static_cast<double>(n);
            s.stddev = std::sqrt(std::max(0.0, sum2 / static_cast<double>(n) - s.avg * s.avg));
        }
        return s;
    }
};

}  // namespace

DistanceReport evaluate(const LabeledCloud& gt_cloud, const std::vector<int32_t>& point_instance,
                        const std::vector<InstanceMeshes>& instances, int threads) {
    if (point_instance.size() != gt_cloud.size())
        throw DataError("evaluate: point/instance assignment size mismatch");

    // Group point indices per instance.
    std::vector<std::vector<uint32_t>> members(instances.size());
    size_t excluded = 0;
    for (size_t i = 0; i < point_instance.size(); ++i) {
        const int32_t inst = point_instance[i];
        if (inst < 0 || static_cast<size_t>(inst) >= instances.size()) continue;
        members[static_cast<size_t>(inst)].push_back(static_cast<uint32_t>(i));
    }

    const int n_threads = threads > 0 ? threads
                                      : std::max(1u, std::thread::hardware_concurrency());
    std::vector<Accum> per_instance(instances.size());
    std::vector<bool> skipped(instances.size(), false);

    auto work = [&](size_t inst) {
        size_t faces = 0;
        for (const Mesh& m : instances[inst].meshes) faces += m.faces.size();
        if (faces == 0 || members[inst].empty()) {
            skipped[inst] = faces == 0;
            return;
        }
        const DistanceQuery query(instances[inst].meshes);
        for (uint32_t pi : members[inst]) per_instance[inst].add(query.distance(gt_cloud.points[pi]));
    };
    std::atomic<size_t> next{0};
    std::vector<std::future<void>> pool;
    for (int t = 0; t < n_threads; ++t)
        pool.push_back(std::async(std::launch::async, [&] {
            for (size_t i = next.fetch_add(1); i < instances.size(); i = next.fetch_add(1)) work(i);
        }));
    for (auto& f : pool) f.get();

    DistanceReport report;
    std::map<std::string, Accum> by_asset;
    Accum overall;
    for (size_t inst = 0; inst < instances.size(); ++inst) {
        const std::string asset = to_string(instances[inst].semantic);
        if (skipped[inst]) {
            excluded += members[inst].size();
            continue;
        }
        if (per_instance[inst].n == 0) continue;
        report.per_instance.push_back(
            per_instance[inst].stats(asset + "#" + std::to_string(inst)));
        by_asset[asset].merge(per_instance[inst]);
        overall.merge(per_instance[inst]);
    }
    // Fixed asset order matching the storage semantic codes.
    for (Semantic sem : {Semantic::RoadSurface, Semantic::RoadSide, Semantic::RoadLane,
                         Semantic::RoadSign, Semantic::RoadLight, Semantic::Guardrail}) {
        auto it = by_asset.find(to_string(sem));
        if (it != by_asset.end()) report.per_asset.push_back(it->second.stats(it->first));
    }
    report.overall = overall.stats("Mean");
    report.excluded_points = excluded;
    return report;
}

namespace {

std::string fmt_cm(double meters) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.2f", meters * 100.0);
    return buf;
}

}  // namespace

std::string DistanceReport::to_text() const {
    std::ostringstream out;
    out << "Unsigned distance (cm)\n";
    out << "          ";
    for (const AssetStats& s : per_asset) out << "  " << s.asset;
    out << "  " << overall.asset << "\n";
    out << "Avg       ";
    for (const AssetStats& s : per_asset) out << "  " << fmt_cm(s.avg);
    out << "  " << fmt_cm(overall.avg) << "\n";
    out << "Std       ";
    for (const AssetStats& s : per_asset) out << "  " << fmt_cm(s.stddev);
    out << "  " << fmt_cm(overall.stddev) << "\n";
    out << "Samples   ";
    for (const AssetStats& s : per_asset) out << "  " << s.count;
    out << "  " << overall.count << "\n";
    if (excluded_points > 0) out << "Excluded points (no mesh): " << excluded_points << "\n";
    return out.str();
}

Json DistanceReport::to_json() const {
    Json root;
    auto stats_json = [](const AssetStats& s) {
        Json j;
        j["Asset"] = s.asset;
        j["AvgMeters"] = s.avg;
        j["StdMeters"] = s.stddev;
        j["Count"] = s.count;
        return j;
    };
    root["PerAsset"] = Json::array();
    for (const AssetStats& s : per_asset) root["PerAsset"].push_back(stats_json(s));
    root["Overall"] = stats_json(overall);
    root["PerInstance"] = Json::array();
    for (const AssetStats& s : per_instance) root["PerInstance"].push_back(stats_json(s));
    root["ExcludedPoints"] = excluded_points;
    return root;
}

std::string TimingReport::to_text() const {
    std::ostringstream out;
    out << "Timing (s)\n";
    char buf[128];
    for (const Row& r : rows) {
        std::snprintf(buf, sizeof(buf), "%-12s extract %8.3f  mesh %8.3f\n", r.asset.c_str(),
                      r.extract_s, r.mesh_s);
        out << buf;
    }
    std::snprintf(buf, sizeof(buf), "%-12s extract %8.3f  mesh %8.3f  pipeline %8.3f\n", "total",
                  extract_total, mesh_total, pipeline_total);
    out << buf;
    return out.str();
}

Json TimingReport::to_json() const {
    Json root;
    root["Rows"] = Json::array();
    for (const Row& r : rows) {
        Json j;
        j["Asset"] = r.asset;
        j["ExtractSeconds"] = r.extract_s;
        j["MeshSeconds"] = r.mesh_s;
        root["Rows"].push_back(j);
    }
    root["ExtractTotal"] = extract_total;
    root["MeshTotal"] = mesh_total;
    root["PipelineTotal"] = pipeline_total;
    return root;
}

}  // namespace roadtwin
