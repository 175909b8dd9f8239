#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "roadtwin/types.hpp"

namespace roadtwin {

enum class Semantic : uint8_t {
    RoadSurface = 0,
    RoadSide = 1,
    RoadLane = 2,
    RoadSign = 3,
    RoadLight = 4,
    Guardrail = 5,
};

enum class Part : uint8_t {
    Pole = 0,
    Panel = 1,
    Light = 2,
    None = 255,
};

std::string to_string(Semantic s);
std::string to_string(Part p);
std::optional<Semantic> semantic_from_string(const std::string& name);

inline bool pole_like(Semantic s) { return s == Semantic::RoadSign || s == Semantic::RoadLight; }
inline bool plane_like(Semantic s) {
    return s == Semantic::RoadSurface || s == Semantic::RoadSide || s == Semantic::RoadLane;
}

/// A labeled point cloud: per-point semantic label and optional part label
/// (part only meaningful for pole-like semantics).
struct LabeledCloud {
    std::vector<Vec3> points;
    std::vector<Semantic> semantic;
    std::vector<Part> part;  // Part::None when absent

    size_t size() const { return points.size(); }
    bool empty() const { return points.empty(); }
    void push_back(const Vec3& p, Semantic s, Part pt = Part::None) {
        points.push_back(p);
        semantic.push_back(s);
        part.push_back(pt);
    }
    void append(const LabeledCloud& other);
    LabeledCloud select(const std::vector<uint32_t>& indices) const;
    void validate() const;  // throws DataError on invariant breach
};

struct PreprocessParams {
    double voxel_size = 0.02;     // 0 disables downsampling
    int outlier_neighbors = 16;   // kNN count for outlier statistics
    double outlier_std_ratio = 2.0;  // 0 disables outlier removal
};

enum class CloudFormat { PLY, CSV };

LabeledCloud load_cloud(const std::string& path, CloudFormat format);
void save_cloud(const LabeledCloud& cloud, const std::string& path, CloudFormat format);

/// Infer format from extension (.ply / .csv).
LabeledCloud load_cloud(const std::string& path);
void save_cloud(const LabeledCloud& cloud, const std::string& path);

/// Voxel downsampling (representative = real input point nearest the voxel
/// centroid) followed by statistical outlier removal. Deterministic.
LabeledCloud preprocess(const LabeledCloud& cloud, const PreprocessParams& params);

/// Partition by semantic label; the union of the sub-clouds equals the input.
std::map<Semantic, LabeledCloud> partition_by_semantic(const LabeledCloud& cloud);

}  // namespace roadtwin
