#pragma once

#include <map>
#include <vector>

#include "roadtwin/ingest.hpp"

namespace roadtwin {

struct ClusterParams {
    double eps = 0.5;  // neighborhood radius (closed ball)
    int min_pts = 10;  // minimum neighborhood size for a core point
};

constexpr int32_t kNoise = -1;

struct Clustering {
    std::vector<int32_t> assignments;  // cluster id per point, kNoise for noise
    int32_t cluster_count = 0;
};

/// DBSCAN over 3D points. Border points reachable from several clusters join
/// the cluster of their nearest core point (ties: lowest cluster id), so the
/// result is independent of input order up to relabeling.
Clustering dbscan(const std::vector<Vec3>& points, const ClusterParams& params);

/// Per-semantic default clustering parameters, config-overridable.
std::map<Semantic, ClusterParams> default_cluster_params();
ClusterParams default_part_params();

struct Instance {
    Semantic semantic;
    LabeledCloud cloud;
};

/// Split each semantic class into spatially independent instances. Noise is
/// discarded; instances are ordered by (semantic code, min x, min y).
std::vector<Instance> split_instances(const LabeledCloud& cloud,
                                      const std::map<Semantic, ClusterParams>& params);

/// Split a pole-like instance into individual parts per part label.
std::map<Part, std::vector<LabeledCloud>> split_parts(const LabeledCloud& instance,
                                                      const ClusterParams& params);

}  // namespace roadtwin
