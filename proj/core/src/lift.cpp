#include "roadtwin/lift.hpp"

#include <algorithm>
#include <numeric>

namespace roadtwin {

LiftContext::LiftContext(const std::vector<Vec3>& refs, Plane plane, const LiftParams& params)
    : plane_(plane), params_(params) {
    if (refs.empty()) throw DataError("LiftContext: empty reference set");
    if (params.radius <= 0 || params.k_nearest < 1) throw ConfigError("LiftContext: invalid params");
    projected_.reserve(refs.size());
    missing_.reserve(refs.size());
    for (const Vec3& p : refs) {
        projected_.push_back(project(p, plane));
        missing_.push_back(missing_axis(p, plane));
    }
    index_ = GridIndex2(projected_, params.radius);
}

std::vector<double> LiftContext::neighborhood_values(const Vec2& q) const {
    std::vector<uint32_t> idx;
    index_.radius_query(q, params_.radius, idx);
    if (idx.empty()) idx = index_.knn(q, static_cast<size_t>(params_.k_nearest));
    std::sort(idx.begin(), idx.end());  // order-independence of the reference set
    std::vector<double> vals;
    vals.reserve(idx.size());
    for (uint32_t i : idx) vals.push_back(missing_[i]);
    return vals;
}

Vec3 LiftContext::lift_v1(const Vec2& point2d) const {
    const std::vector<double> vals = neighborhood_values(point2d);
    const double mean =
        std::accumulate(vals.begin(), vals.end(), 0.0) / static_cast<double>(vals.size());
    return unproject(point2d, mean, plane_);
}

std::pair<Vec3, Vec3> LiftContext::lift_v2(const Vec2& point2d) const {
    std::vector<double> vals = neighborhood_values(point2d);
    const size_t n = vals.size();
    size_t k = params_.pair_k > 0 ? static_cast<size_t>(params_.pair_k)
                                  : std::max<size_t>(1, n / 5);
    k = std::min(k, std::max<size_t>(1, n / 2));  // clamp so 2k <= n (minimum 1)
    std::sort(vals.begin(), vals.end());          // stable by value then input index
    double lo = 0, hi = 0;
    for (size_t i = 0; i < k; ++i) {
        lo += vals[i];
        hi += vals[n - 1 - i];
    }
    lo /= static_cast<double>(k);
    hi /= static_cast<double>(k);
    return {unproject(point2d, hi, plane_), unproject(point2d, lo, plane_)};
}

Polygon3D LiftContext::lift_polygon_v1(const Polygon2D& poly) const {
    Polygon3D out;
    out.shell.vertices.reserve(poly.shell.vertices.size());
    for (const Vec2& v : poly.shell.vertices) out.shell.vertices.push_back(lift_v1(v));
    for (const auto& hole : poly.holes) {
        Ring3D h;
        h.vertices.reserve(hole.vertices.size());
        for (const Vec2& v : hole.vertices) h.vertices.push_back(lift_v1(v));
        out.holes.push_back(std::move(h));
    }
    return out;
}

PolygonPair3D LiftContext::lift_polygon_v2(const Polygon2D& poly) const {
    PolygonPair3D out;
    for (const Vec2& v : poly.shell.vertices) {
        auto [hi, lo] = lift_v2(v);
        out.front.shell.vertices.push_back(hi);
        out.back.shell.vertices.push_back(lo);
    }
    for (const auto& hole : poly.holes) {
        Ring3D hf, hb;
        for (const Vec2& v : hole.vertices) {
            auto [hi, lo] = lift_v2(v);
            hf.vertices.push_back(hi);
            hb.vertices.push_back(lo);
        }
        out.front.holes.push_back(std::move(hf));
        out.back.holes.push_back(std::move(hb));
    }
    return out;
}

}  // namespace roadtwin
