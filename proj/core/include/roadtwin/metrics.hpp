#pragma once

#include <string>
#include <vector>

#include "roadtwin/ingest.hpp"
#include "roadtwin/mesh.hpp"

namespace roadtwin {

/// Exact nearest-distance queries against a triangle set, accelerated by a
/// bounding-volume hierarchy pruned with lower bounds only.
class DistanceQuery {
  public:
    explicit DistanceQuery(const Mesh& mesh);
    explicit DistanceQuery(const std::vector<Mesh>& meshes);

    double distance(const Vec3& p) const;
    size_t triangle_count() const { return tris_.size(); }

  private:
    struct Tri {
        Vec3 a, b, c;
    };
    struct Node {
        Vec3 lo, hi;
        uint32_t left = 0, right = 0;    // children when internal
        uint32_t first = 0, count = 0;   // triangle range when leaf
    };
    void build(uint32_t node, uint32_t first, uint32_t count);

    std::vector<Tri> tris_;
    std::vector<Node> nodes_;
};

/// f(x) = min over the mesh surface of |x - x'|.
double unsigned_distance(const Vec3& point, const Mesh& mesh);

struct AssetStats {
    std::string asset;
    double avg = 0;
    double stddev = 0;
    size_t count = 0;
};

struct DistanceReport {
    std::vector<AssetStats> per_asset;   // one row per asset type present
    AssetStats overall;                  // asset = "Mean"
    std::vector<AssetStats> per_instance;  // asset = "<type>#<index>"
    size_t excluded_points = 0;          // points of instances with no mesh

    std::string to_text() const;  // Table-3 layout, centimeters, 2 decimals
    Json to_json() const;
};

struct InstanceMeshes {
    Semantic semantic = Semantic::RoadSurface;
    std::vector<Mesh> meshes;
};

/// Distances of each ground-truth point against its own instance's mesh set.
/// point_instance holds each point's instance index (< 0 = unassigned, skipped);
/// instances with no faces are excluded and their points counted.
DistanceReport evaluate(const LabeledCloud& gt_cloud, const std::vector<int32_t>& point_instance,
                        const std::vector<InstanceMeshes>& instances, int threads = 0);

struct TimingReport {
    struct Row {
        std::string asset;
        double extract_s = 0;
        double mesh_s = 0;
    };
    std::vector<Row> rows;
    double extract_total = 0;
    double mesh_total = 0;
    double pipeline_total = 0;

    std::string to_text() const;
    Json to_json() const;
};

}  // namespace roadtwin
