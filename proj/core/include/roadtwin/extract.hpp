#pragma once

#include <vector>

#include "roadtwin/cluster.hpp"
#include "roadtwin/geostore.hpp"
#include "roadtwin/lift.hpp"

namespace roadtwin {

struct ExtractConfig {
    double alpha_fine = 10.0;
    double alpha_coarse = 0.1;
    double alpha_guardrail_xy = 1.0;
    double alpha_guardrail_xz = 10.0;
    double alpha_section = 5.0;  // pole/light cross-section contour
    double grid_w = 1.0;
    double grid_l = 1.0;
    double dh = 0.1;   // pole slab height
    double dl = 0.1;   // light chunk length
    int n_rays = 30;
    LiftParams lift;

    double split_spacing = 5.0;   // plane-like centerline split spacing
    double block_len = 2.0;       // guardrail block length along the centerline
    double min_branch_len_plane = 2.0;
    double min_branch_len_guardrail = 1.0;
    double min_branch_len_light = 0.3;
    double densify_step = 0.25;       // boundary densification for Voronoi seeding
    double densify_step_thin = 0.05;  // guardrail footprint / light arm contours

    ClusterParams part_params = default_part_params();
};

/// Rigid motion applied to one guardrail point block during straightening:
/// p' = rotate_z(p, -theta, center) + offset. arc_start is the block's start
/// position along the straightened axis.
struct BlockTransform {
    double theta = 0.0;
    Vec2 center;
    Vec3 offset;
    double arc_start = 0.0;
    double arc_end = 0.0;

    Vec3 forward(const Vec3& p) const { return rotate_z(p, -theta, center) + offset; }
    Vec3 inverse(const Vec3& p) const { return rotate_z(p - offset, theta, center); }
};

/// One guardrail centerline's worth of output. front/back polygons are in
/// one-to-one correspondence; block_of_polygon maps each polygon to the
/// transform that straightened it. The straightened-frame pair is retained
/// so the transform round trip is checkable.
struct GuardrailSegment {
    MultiPolygon3D front;
    MultiPolygon3D back;
    std::vector<BlockTransform> transforms;
    std::vector<size_t> block_of_polygon;
    MultiPolygon3D straight_front;
    MultiPolygon3D straight_back;
};

MultiPolygon3D extract_plane_like(const LabeledCloud& instance, const ExtractConfig& cfg);
std::vector<GuardrailSegment> extract_guardrail(const LabeledCloud& instance,
                                                const ExtractConfig& cfg);
MultiPolygon3D extract_pole(const LabeledCloud& part, const ExtractConfig& cfg);
PairRecord extract_panel(const LabeledCloud& part, const ExtractConfig& cfg);
MultiPolygon3D extract_light(const LabeledCloud& part, const ExtractConfig& cfg);

/// Dispatch on the instance semantic and assemble the storage record.
GeometryRecord extract_instance(const LabeledCloud& instance, const ExtractConfig& cfg);

/// Longest weighted path through the pruned centerline graph (the dominant
/// medial axis); empty when the polygon yields no interior Voronoi edge.
std::vector<Polyline2D> main_centerlines(const Polygon2D& polygon, double min_branch_len,
                                         double densify_step);

}  // namespace roadtwin
