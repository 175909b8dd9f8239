#include "roadtwin/cluster.hpp"

#include <algorithm>
#include <deque>
#include <limits>

#include "roadtwin/spatial.hpp"

namespace roadtwin {

Clustering dbscan(const std::vector<Vec3>& points, const ClusterParams& params) {
    if (points.empty()) throw DataError("dbscan: empty input");
    if (params.eps <= 0 || params.min_pts < 1) throw ConfigError("dbscan: invalid parameters");
    const size_t n = points.size();
    GridIndex3 index(points, params.eps);

    std::vector<bool> core(n, false);
    {
        std::vector<uint32_t> nn;
        for (size_t i = 0; i < n; ++i) {
            index.radius_query(points[i], params.eps, nn);
            core[i] = nn.size() >= static_cast<size_t>(params.min_pts);
        }
    }

    Clustering result;
    result.assignments.assign(n, kNoise);

    // Connected components of core points under the eps relation; component
    // ids follow lowest member index, so relabeling is input-order stable.
    std::vector<uint32_t> nn;
    for (size_t seed = 0; seed < n; ++seed) {
        if (!core[seed] || result.assignments[seed] != kNoise) continue;
        const int32_t cid = result.cluster_count++;
        std::deque<uint32_t> queue{static_cast<uint32_t>(seed)};
        result.assignments[seed] = cid;
        while (!queue.empty()) {
            const uint32_t p = queue.front();
            queue.pop_front();
            index.radius_query(points[p], params.eps, nn);
            for (uint32_t q : nn) {
                if (!core[q] || result.assignments[q] != kNoise) continue;
                result.assignments[q] = cid;
                queue.push_back(q);
            }
        }
    }

    // Border points: nearest core neighbor wins; ties go to the lowest cluster id.
    for (size_t i = 0; i < n; ++i) {
        if (core[i]) continue;
        index.radius_query(points[i], params.eps, nn);
        double best_d2 = std::numeric_limits<double>::max();
        int32_t best_cid = kNoise;
        for (uint32_t q : nn) {
            if (!core[q]) continue;
            const Vec3 d = points[q] - points[i];
            const double d2 = d.dot(d);
            const int32_t cid = result.assignments[q];
            if (d2 < best_d2 || (d2 == best_d2 && cid < best_cid)) {
                best_d2 = d2;
                best_cid = cid;
            }
        }
        result.assignments[i] = best_cid;
    }
    return result;
}

std::map<Semantic, ClusterParams> default_cluster_params() {
    return {
        {Semantic::RoadSurface, {1.0, 10}}, {Semantic::RoadSide, {1.0, 10}},
        {Semantic::RoadLane, {0.3, 6}},     {Semantic::RoadSign, {0.5, 10}},
        {Semantic::RoadLight, {0.5, 10}},   {Semantic::Guardrail, {0.5, 10}},
    };
}

ClusterParams default_part_params() { return {0.15, 5}; }

std::vector<Instance> split_instances(const LabeledCloud& cloud,
                                      const std::map<Semantic, ClusterParams>& params) {
    if (cloud.empty()) throw DataError("split_instances: empty cloud");
    std::vector<Instance> out;
    for (auto& [sem, sub] : partition_by_semantic(cloud)) {
        auto it = params.find(sem);
        if (it == params.end())
            throw ConfigError("no cluster parameters for semantic " + to_string(sem));
        const Clustering clustering = dbscan(sub.points, it->second);
        std::vector<std::vector<uint32_t>> members(clustering.cluster_count);
        for (size_t i = 0; i < sub.size(); ++i)
            if (clustering.assignments[i] != kNoise)
                members[clustering.assignments[i]].push_back(static_cast<uint32_t>(i));

        struct Keyed {
            double min_x, min_y;
            LabeledCloud cloud;
        };
        std::vector<Keyed> keyed;
        for (auto& m : members) {
            if (m.empty()) continue;
            Keyed k{std::numeric_limits<double>::max(), std::numeric_limits<double>::max(),
                    sub.select(m)};
            for (const Vec3& p : k.cloud.points) {
                k.min_x = std::min(k.min_x, p.x);
                k.min_y = std::min(k.min_y, p.y);
            }
            keyed.push_back(std::move(k));
        }
        std::sort(keyed.begin(), keyed.end(), [](const Keyed& a, const Keyed& b) {
            return a.min_x != b.min_x ? a.min_x < b.min_x : a.min_y < b.min_y;
        });
        for (auto& k : keyed) out.push_back({sem, std::move(k.cloud)});
    }
    return out;
}

std::map<Part, std::vector<LabeledCloud>> split_parts(const LabeledCloud& instance,
                                                      const ClusterParams& params) {
    if (instance.empty()) throw DataError("split_parts: empty instance");
    if (!pole_like(instance.semantic.front()))
        throw DataError("split_parts: instance is not pole-like");
    std::map<Part, std::vector<uint32_t>> by_part;
    for (size_t i = 0; i < instance.size(); ++i) {
        if (instance.part[i] == Part::None)
            throw DataError("split_parts: unlabeled part point at index " + std::to_string(i));
        by_part[instance.part[i]].push_back(static_cast<uint32_t>(i));
    }
    std::map<Part, std::vector<LabeledCloud>> out;
    for (auto& [part, idx] : by_part) {
        LabeledCloud sub = instance.select(idx);
        const Clustering clustering = dbscan(sub.points, params);
        std::vector<std::vector<uint32_t>> members(clustering.cluster_count);
        for (size_t i = 0; i < sub.size(); ++i)
            if (clustering.assignments[i] != kNoise)
                members[clustering.assignments[i]].push_back(static_cast<uint32_t>(i));
        struct Keyed {
            double min_x, min_y;
            LabeledCloud cloud;
        };
        std::vector<Keyed> keyed;
        for (auto& m : members) {
            if (m.empty()) continue;
            Keyed k{std::numeric_limits<double>::max(), std::numeric_limits<double>::max(),
                    sub.select(m)};
            for (const Vec3& p : k.cloud.points) {
                k.min_x = std::min(k.min_x, p.x);
                k.min_y = std::min(k.min_y, p.y);
            }
            keyed.push_back(std::move(k));
        }
        std::sort(keyed.begin(), keyed.end(), [](const Keyed& a, const Keyed& b) {
            return a.min_x != b.min_x ? a.min_x < b.min_x : a.min_y < b.min_y;
        });
        auto& list = out[part];
        for (auto& k : keyed) list.push_back(std::move(k.cloud));
    }
    if (out.find(Part::Pole) == out.end() || out[Part::Pole].empty())
        throw DataError("split_parts: pole-like instance has no Pole part");
    return out;
}

}  // namespace roadtwin
