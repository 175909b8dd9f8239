#pragma once

#include <optional>
#include <vector>

#include "roadtwin/types.hpp"

namespace roadtwin {

/// Ordered vertex chain. Closed polylines do not repeat the first vertex.
struct Polyline2D {
    std::vector<Vec2> vertices;
    bool closed = false;

    double length() const;
};

/// Simple polygon with zero or more holes. Shell CCW, holes CW after normalize().
struct Polygon2D {
    Polyline2D shell;                // closed
    std::vector<Polyline2D> holes;   // closed

    double area() const;             // shell area minus hole areas
    Vec2 centroid() const;           // area centroid (holes subtracted)
    bool contains(const Vec2& p) const;  // closure containment
    void normalize();                // orient CCW shell / CW holes, drop dup vertices
};

struct Circle2D {
    Vec2 center;
    double radius = 0.0;
};

double signed_area(const std::vector<Vec2>& ring);

/// Axis-aligned rectangle helper.
Polygon2D make_rect(double x0, double y0, double x1, double y1);

/// Alpha shape of a 2D point set: Delaunay triangles with circumradius < 1/alpha,
/// boundary of their union. Every input point ends up inside or on the result
/// (each point additionally keeps its smallest incident triangle).
std::vector<Polygon2D> alphashape(const std::vector<Vec2>& points, double alpha);

/// Voronoi-based centerline: boundary densified at `densify_step`, interior
/// Voronoi edges kept, spur branches shorter than min_branch_len pruned,
/// degree-2 chains merged.
std::vector<Polyline2D> extract_centerlines(const Polygon2D& polygon, double min_branch_len,
                                            double densify_step = 0.25);

/// Equidistant resampling along arc length; endpoints preserved, the last gap
/// may be shorter. spacing >= length collapses to the two endpoints.
Polyline2D resample_polyline(const Polyline2D& line, double spacing);

struct SubPolygon {
    Polygon2D polygon;
    double theta = 0.0;  // generating centerline segment angle vs +X
    Vec2 center;         // sub-polygon centroid
};

/// Split by perpendicular bisectors of the resampled centerline segments.
/// Sequential half-plane clipping: pieces partition the polygon exactly.
std::vector<SubPolygon> split_polygon_by_centerline(const Polygon2D& polygon,
                                                    const Polyline2D& centerline, double spacing);

/// Axis-aligned grid over the -theta-rotated sub-polygon's bbox; cells that
/// intersect the sub-polygon are rotated back and returned as full rectangles.
std::vector<Polygon2D> grid_partition(const Polygon2D& sub_polygon, double theta,
                                      const Vec2& center, double grid_w, double grid_l);

/// Polygon boolean intersection (with holes). Empty list when disjoint.
std::vector<Polygon2D> intersect(const Polygon2D& a, const Polygon2D& b);

/// Smallest circle containing all points (Welzl, deterministic).
Circle2D min_enclosing_circle(const std::vector<Vec2>& points);

/// Closed N-gon: vertex i is the farthest boundary intersection of the ray at
/// angle 2*pi*i/n from the min-enclosing-circle center (fallback: interior point).
Polyline2D ray_sample_polygon(const Polygon2D& shape, int n_rays);

/// N points on the circle at equally spaced angles starting from +X.
Polyline2D ray_sample_circle(const Circle2D& circle, int n_rays);

/// Total-least-squares principal direction angle in (-pi/2, pi/2].
double fit_line_angle(const std::vector<Vec2>& points);

/// Chaikin corner cutting, optional post-step (default unused in the pipeline).
Polyline2D chaikin_smooth(const Polyline2D& line, int iterations = 1);

}  // namespace roadtwin
