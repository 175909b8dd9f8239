#pragma once

#include <vector>

#include "roadtwin/geom2d.hpp"
#include "roadtwin/spatial.hpp"
#include "roadtwin/types.hpp"

namespace roadtwin {

/// Closed 3D vertex ring.
struct Ring3D {
    std::vector<Vec3> vertices;
};

/// 3D polygon: shell ring plus hole rings.
struct Polygon3D {
    Ring3D shell;
    std::vector<Ring3D> holes;
};

using MultiPolygon3D = std::vector<Polygon3D>;

/// Front/back polygons in one-to-one vertex correspondence.
struct PolygonPair3D {
    Polygon3D front;
    Polygon3D back;
};

struct LiftParams {
    double radius = 0.15;  // neighborhood radius in the projection plane
    int k_nearest = 8;     // fallback when no point lies within the radius
    int pair_k = 0;        // 0 = auto: max(1, floor(N/5)) clamped so 2k <= N
};

/// Reference point set with a 2D index over one projection plane. Build once,
/// then lift many vertices.
class LiftContext {
public:
    LiftContext(const std::vector<Vec3>& refs, Plane plane, const LiftParams& params);

    /// V1: missing-axis value = mean over the neighborhood.
    Vec3 lift_v1(const Vec2& point2d) const;

    /// V2: (high, low) pair from top-k / bottom-k means over the neighborhood.
    std::pair<Vec3, Vec3> lift_v2(const Vec2& point2d) const;

    Polygon3D lift_polygon_v1(const Polygon2D& poly) const;
    PolygonPair3D lift_polygon_v2(const Polygon2D& poly) const;

private:
    std::vector<double> neighborhood_values(const Vec2& q) const;

    Plane plane_;
    LiftParams params_;
    std::vector<Vec2> projected_;
    std::vector<double> missing_;
    GridIndex2 index_;
};

}  // namespace roadtwin
