#include "roadtwin/geom2d.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <random>
#include <unordered_map>

#include <boost/geometry.hpp>
#include <boost/geometry/geometries/register/point.hpp>
#include <boost/polygon/voronoi.hpp>

BOOST_GEOMETRY_REGISTER_POINT_2D(roadtwin::Vec2, double, boost::geometry::cs::cartesian, x, y)

namespace roadtwin {

namespace bg = boost::geometry;
namespace bp = boost::polygon;

using BgPolygon = bg::model::polygon<Vec2, false, true>;  // CCW, closed
using BgMultiPolygon = bg::model::multi_polygon<BgPolygon>;

namespace {

constexpr double kScale = 1e6;  // meters -> integer micro-meters for Voronoi input

// --- ring / polygon helpers -------------------------------------------------

// 0 = outside, 1 = on boundary, 2 = strictly inside.
int point_in_ring(const std::vector<Vec2>& ring, const Vec2& p) {
    bool inside = false;
    const size_t n = ring.size();
    for (size_t i = 0, j = n - 1; i < n; j = i++) {
        const Vec2& a = ring[j];
        const Vec2& b = ring[i];
        const Vec2 ab = b - a;
        const Vec2 ap = p - a;
        const double cross = ab.cross(ap);
        if (cross == 0.0 && ap.dot(p - b) <= 0.0) return 1;  // on segment
        if ((a.y > p.y) != (b.y > p.y)) {
            const double t = (p.y - a.y) / (b.y - a.y);
            const double xi = a.x + t * ab.x;
            if (p.x < xi) inside = !inside;
            else if (p.x == xi) return 1;
        }
    }
    return inside ? 2 : 0;
}

std::vector<Vec2> closed_ring(const Polyline2D& line) {
    std::vector<Vec2> ring = line.vertices;
    if (!ring.empty()) ring.push_back(ring.front());
    return ring;
}

BgPolygon to_bg(const Polygon2D& poly) {
    BgPolygon out;
    out.outer().assign(poly.shell.vertices.begin(), poly.shell.vertices.end());
    if (!out.outer().empty()) out.outer().push_back(out.outer().front());
    for (const auto& hole : poly.holes) {
        out.inners().emplace_back(hole.vertices.begin(), hole.vertices.end());
        if (!out.inners().back().empty()) out.inners().back().push_back(out.inners().back().front());
    }
    bg::correct(out);
    return out;
}

Polygon2D from_bg(const BgPolygon& poly) {
    Polygon2D out;
    out.shell.closed = true;
    out.shell.vertices.assign(poly.outer().begin(), poly.outer().end());
    if (!out.shell.vertices.empty()) out.shell.vertices.pop_back();  // drop closing repeat
    for (const auto& inner : poly.inners()) {
        Polyline2D hole;
        hole.closed = true;
        hole.vertices.assign(inner.begin(), inner.end());
        if (!hole.vertices.empty()) hole.vertices.pop_back();
        // Boolean ops on a marginally invalid input (e.g. a pinched hole ring
        // from a sparse alpha shape) can emit holes poking past the clipped
        // shell; drop those instead of propagating an inconsistent polygon.
        bool contained = true;
        for (const Vec2& v : hole.vertices)
            if (point_in_ring(out.shell.vertices, v) == 0) {
                contained = false;
                break;
            }
        if (contained) out.holes.push_back(std::move(hole));
    }
    out.normalize();
    return out;
}

std::vector<Polygon2D> from_bg_multi(const BgMultiPolygon& mp, double min_area = 1e-12) {
    std::vector<Polygon2D> out;
    for (const auto& p : mp) {
        if (p.outer().size() < 4) continue;
        if (std::abs(bg::area(p)) < min_area) continue;
        out.push_back(from_bg(p));
    }
    return out;
}

}  // namespace

double Polyline2D::length() const {
    double len = 0;
    for (size_t i = 1; i < vertices.size(); ++i) len += (vertices[i] - vertices[i - 1]).norm();
    if (closed && vertices.size() > 2) len += (vertices.front() - vertices.back()).norm();
    return len;
}

double signed_area(const std::vector<Vec2>& ring) {
    double a = 0;
    const size_t n = ring.size();
    for (size_t i = 0, j = n - 1; i < n; j = i++) a += ring[j].cross(ring[i]);
    return 0.5 * a;
}

double Polygon2D::area() const {
    double a = std::abs(signed_area(shell.vertices));
    for (const auto& h : holes) a -= std::abs(signed_area(h.vertices));
    return a;
}

Vec2 Polygon2D::centroid() const {
    auto ring_accum = [](const std::vector<Vec2>& ring, double& area, Vec2& c) {
        const size_t n = ring.size();
        for (size_t i = 0, j = n - 1; i < n; j = i++) {
            const double w = ring[j].cross(ring[i]);
            area += w;
            c.x += (ring[j].x + ring[i].x) * w;
            c.y += (ring[j].y + ring[i].y) * w;
        }
    };
    double a = 0;
    Vec2 c;
    ring_accum(shell.vertices, a, c);
    // After normalize() the holes are CW, so they subtract automatically.
    for (const auto& h : holes) ring_accum(h.vertices, a, c);
    if (std::abs(a) < 1e-300) return shell.vertices.empty() ? Vec2{} : shell.vertices.front();
    return {c.x / (3.0 * a), c.y / (3.0 * a)};
}

bool Polygon2D::contains(const Vec2& p) const {
    const int s = point_in_ring(shell.vertices, p);
    if (s == 0) return false;
    if (s == 1) return true;
    for (const auto& h : holes)
        if (point_in_ring(h.vertices, p) == 2) return false;
    return true;
}

void Polygon2D::normalize() {
    auto dedup = [](std::vector<Vec2>& v) {
        std::vector<Vec2> out;
        for (const Vec2& p : v)
            if (out.empty() || !(out.back() == p)) out.push_back(p);
        if (out.size() > 1 && out.front() == out.back()) out.pop_back();
        v = std::move(out);
    };
    dedup(shell.vertices);
    shell.closed = true;
    if (signed_area(shell.vertices) < 0)
        std::reverse(shell.vertices.begin(), shell.vertices.end());
    for (auto& h : holes) {
        dedup(h.vertices);
        h.closed = true;
        if (signed_area(h.vertices) > 0) std::reverse(h.vertices.begin(), h.vertices.end());
    }
    std::erase_if(holes, [](const Polyline2D& h) { return h.vertices.size() < 3; });
}

Polygon2D make_rect(double x0, double y0, double x1, double y1) {
    Polygon2D p;
    p.shell.closed = true;
    p.shell.vertices = {{x0, y0}, {x1, y0}, {x1, y1}, {x0, y1}};
    return p;
}

// --- alpha shape -------------------------------------------------------------

namespace {

struct IntPoint {
    int32_t x, y;
};

// Quantize and dedupe; returns unique sites (original coordinates of the first
// occurrence in each micro-meter cell).
std::vector<Vec2> quantize_sites(const std::vector<Vec2>& points, std::vector<IntPoint>& ipts) {
    std::unordered_map<int64_t, uint32_t> seen;
    std::vector<Vec2> sites;
    for (const Vec2& p : points) {
        const auto ix = static_cast<int32_t>(std::llround(p.x * kScale));
        const auto iy = static_cast<int32_t>(std::llround(p.y * kScale));
        const int64_t key = (static_cast<int64_t>(ix) << 32) ^ static_cast<uint32_t>(iy);
        if (seen.emplace(key, static_cast<uint32_t>(sites.size())).second) {
            sites.push_back(p);
            ipts.push_back({ix, iy});
        }
    }
    return sites;
}

struct Tri {
    uint32_t a, b, c;
    double circumradius;
};

// Delaunay triangles as the dual of the Voronoi diagram: each Voronoi vertex
// is a circumcenter; its incident cells give the cocircular site fan.
std::vector<Tri> delaunay_triangles(const std::vector<Vec2>& sites,
                                    const std::vector<IntPoint>& ipts) {
    bp::voronoi_diagram<double> vd;
    std::vector<bp::point_data<int32_t>> input;
    input.reserve(ipts.size());
    for (const auto& p : ipts) input.emplace_back(p.x, p.y);
    bp::construct_voronoi(input.begin(), input.end(), &vd);

    std::vector<Tri> tris;
    for (const auto& vertex : vd.vertices()) {
        std::vector<uint32_t> fan;
        const auto* start = vertex.incident_edge();
        const auto* edge = start;
        do {
            fan.push_back(static_cast<uint32_t>(edge->cell()->source_index()));
            edge = edge->rot_next();
        } while (edge != start);
        if (fan.size() < 3) continue;
        const Vec2 center{vertex.x() / kScale, vertex.y() / kScale};
        const double r = (sites[fan[0]] - center).norm();
        for (size_t i = 1; i + 1 < fan.size(); ++i) {
            Tri t{fan[0], fan[i], fan[i + 1], r};
            const Vec2& pa = sites[t.a];
            const Vec2& pb = sites[t.b];
            const Vec2& pc = sites[t.c];
            if ((pb - pa).cross(pc - pa) < 0) std::swap(t.b, t.c);
            if ((sites[t.b] - sites[t.a]).cross(sites[t.c] - sites[t.a]) <= 0) continue;
            tris.push_back(t);
        }
    }
    return tris;
}

// Assemble boundary loops from directed boundary edges (interior on the left).
// At pinch vertices, take the smallest counter-clockwise turn.
std::vector<std::vector<Vec2>> trace_loops(
    const std::vector<Vec2>& sites,
    const std::unordered_map<uint64_t, int>& directed_count) {
    auto key = [](uint32_t a, uint32_t b) {
        return (static_cast<uint64_t>(a) << 32) | b;
    };
    std::unordered_map<uint32_t, std::vector<uint32_t>> out_edges;
    std::vector<std::pair<uint32_t, uint32_t>> boundary;
    for (auto& [k, cnt] : directed_count) {
        const uint32_t a = static_cast<uint32_t>(k >> 32);
        const uint32_t b = static_cast<uint32_t>(k & 0xFFFFFFFF);
        auto rit = directed_count.find(key(b, a));
        if (cnt == 1 && (rit == directed_count.end() || rit->second == 0))
            boundary.emplace_back(a, b);
    }
    std::sort(boundary.begin(), boundary.end());
    std::map<std::pair<uint32_t, uint32_t>, bool> used;
    for (auto& e : boundary) {
        out_edges[e.first].push_back(e.second);
        used[e] = false;
    }
    std::vector<std::vector<Vec2>> loops;
    for (auto& e0 : boundary) {
        if (used[e0]) continue;
        std::vector<uint32_t> loop;
        uint32_t prev = e0.first, cur = e0.second;
        used[e0] = true;
        loop.push_back(prev);
        while (cur != e0.first) {
            loop.push_back(cur);
            const auto& cands = out_edges[cur];
            uint32_t next = UINT32_MAX;
            double best_turn = std::numeric_limits<double>::max();
            const Vec2 din = sites[cur] - sites[prev];
            const double ain = std::atan2(din.y, din.x);
            for (uint32_t c : cands) {
                if (used[{cur, c}]) continue;
                const Vec2 dout = sites[c] - sites[cur];
                double turn = std::atan2(dout.y, dout.x) - ain;
                while (turn <= -M_PI) turn += 2 * M_PI;
                while (turn > M_PI) turn -= 2 * M_PI;
                // smallest CCW rotation: map turn into [0, 2pi)
                double ccw = turn < 0 ? turn + 2 * M_PI : turn;
                if (ccw < best_turn) {
                    best_turn = ccw;
                    next = c;
                }
            }
            if (next == UINT32_MAX) break;  // open chain; degenerate, drop below
            used[{cur, next}] = true;
            prev = cur;
            cur = next;
        }
        if (cur == e0.first && loop.size() >= 3) {
            std::vector<Vec2> pts;
            pts.reserve(loop.size());
            for (uint32_t idx : loop) pts.push_back(sites[idx]);
            loops.push_back(std::move(pts));
        }
    }
    return loops;
}

}  // namespace

std::vector<Polygon2D> alphashape(const std::vector<Vec2>& points, double alpha) {
    if (points.size() < 3) throw DataError("alphashape: fewer than 3 points");
    if (alpha <= 0) throw ConfigError("alphashape: alpha must be positive");
    std::vector<IntPoint> ipts;
    const std::vector<Vec2> sites = quantize_sites(points, ipts);
    if (sites.size() < 3) throw DataError("alphashape: fewer than 3 distinct points");
    const std::vector<Tri> tris = delaunay_triangles(sites, ipts);
    if (tris.empty()) throw DataError("alphashape: degenerate (collinear) input");

    const double max_r = 1.0 / alpha;
    std::vector<char> keep(tris.size(), 0);
    std::vector<int32_t> best_tri(sites.size(), -1);
    for (size_t i = 0; i < tris.size(); ++i) {
        if (tris[i].circumradius < max_r) keep[i] = 1;
        for (uint32_t v : {tris[i].a, tris[i].b, tris[i].c}) {
            if (best_tri[v] < 0 || tris[i].circumradius < tris[best_tri[v]].circumradius)
                best_tri[v] = static_cast<int32_t>(i);
        }
    }
    // Containment guarantee: every site keeps its smallest incident triangle.
    std::vector<char> covered(sites.size(), 0);
    for (size_t i = 0; i < tris.size(); ++i)
        if (keep[i]) covered[tris[i].a] = covered[tris[i].b] = covered[tris[i].c] = 1;
    for (size_t v = 0; v < sites.size(); ++v)
        if (!covered[v] && best_tri[v] >= 0) keep[best_tri[v]] = 1;

    auto key = [](uint32_t a, uint32_t b) { return (static_cast<uint64_t>(a) << 32) | b; };
    std::unordered_map<uint64_t, int> directed;
    for (size_t i = 0; i < tris.size(); ++i) {
        if (!keep[i]) continue;
        const Tri& t = tris[i];
        ++directed[key(t.a, t.b)];
        ++directed[key(t.b, t.c)];
        ++directed[key(t.c, t.a)];
    }
    if (directed.empty()) throw DataError("alphashape: no triangles kept");

    std::vector<std::vector<Vec2>> loops = trace_loops(sites, directed);
    std::vector<Polygon2D> shells;
    std::vector<std::vector<Vec2>> holes;
    for (auto& loop : loops) {
        if (signed_area(loop) > 0) {
            Polygon2D p;
            p.shell.closed = true;
            p.shell.vertices = std::move(loop);
            shells.push_back(std::move(p));
        } else {
            holes.push_back(std::move(loop));
        }
    }
    if (shells.empty()) throw DataError("alphashape: fragmented result with no valid component");
    for (auto& hole : holes) {
        double best_area = std::numeric_limits<double>::max();
        Polygon2D* best = nullptr;
        for (auto& s : shells) {
            if (point_in_ring(s.shell.vertices, hole.front()) != 2) continue;
            const double a = std::abs(signed_area(s.shell.vertices));
            if (a < best_area) {
                best_area = a;
                best = &s;
            }
        }
        if (best) {
            Polyline2D h;
            h.closed = true;
            h.vertices = std::move(hole);
            best->holes.push_back(std::move(h));
        }
    }
    for (auto& s : shells) s.normalize();
    std::sort(shells.begin(), shells.end(), [](const Polygon2D& a, const Polygon2D& b) {
        return a.area() > b.area();
    });
    return shells;
}

// --- centerline --------------------------------------------------------------

namespace {

std::vector<Vec2> densify_ring(const std::vector<Vec2>& ring, double step) {
    std::vector<Vec2> out;
    const size_t n = ring.size();
    for (size_t i = 0; i < n; ++i) {
        const Vec2& a = ring[i];
        const Vec2& b = ring[(i + 1) % n];
        out.push_back(a);
        const double len = (b - a).norm();
        const int k = static_cast<int>(std::floor(len / step));
        for (int j = 1; j <= k; ++j) {
            const double t = j * step / len;
            if (t >= 1.0 - 1e-12) break;
            out.push_back(a + (b - a) * t);
        }
    }
    return out;
}

}  // namespace

std::vector<Polyline2D> extract_centerlines(const Polygon2D& polygon, double min_branch_len,
                                            double densify_step) {
    std::vector<Vec2> boundary = densify_ring(polygon.shell.vertices, densify_step);
    for (const auto& h : polygon.holes) {
        auto hb = densify_ring(h.vertices, densify_step);
        boundary.insert(boundary.end(), hb.begin(), hb.end());
    }
    std::vector<IntPoint> ipts;
    const std::vector<Vec2> sites = quantize_sites(boundary, ipts);
    if (sites.size() < 3) return {};

    bp::voronoi_diagram<double> vd;
    std::vector<bp::point_data<int32_t>> input;
    input.reserve(ipts.size());
    for (const auto& p : ipts) input.emplace_back(p.x, p.y);
    bp::construct_voronoi(input.begin(), input.end(), &vd);

    const BgPolygon bgpoly = to_bg(polygon);

    // Node graph over interior Voronoi vertices.
    std::map<std::pair<int64_t, int64_t>, uint32_t> node_ids;
    std::vector<Vec2> nodes;
    std::vector<std::map<uint32_t, double>> adj;
    auto node_of = [&](double x, double y) {
        const auto qx = static_cast<int64_t>(std::llround(x * 1e7));
        const auto qy = static_cast<int64_t>(std::llround(y * 1e7));
        auto [it, inserted] = node_ids.try_emplace({qx, qy}, static_cast<uint32_t>(nodes.size()));
        if (inserted) {
            nodes.push_back({x, y});
            adj.emplace_back();
        }
        return it->second;
    };

    for (const auto& edge : vd.edges()) {
        if (!edge.is_primary() || !edge.is_finite()) continue;
        if (edge.cell()->source_index() > edge.twin()->cell()->source_index()) continue;
        const Vec2 a{edge.vertex0()->x() / kScale, edge.vertex0()->y() / kScale};
        const Vec2 b{edge.vertex1()->x() / kScale, edge.vertex1()->y() / kScale};
        if (!bg::within(a, bgpoly) || !bg::within(b, bgpoly)) continue;
        const uint32_t na = node_of(a.x, a.y);
        const uint32_t nb = node_of(b.x, b.y);
        if (na == nb) continue;
        const double len = (b - a).norm();
        adj[na][nb] = len;
        adj[nb][na] = len;
    }

    auto degree = [&](uint32_t v) { return adj[v].size(); };

    // Prune spur branches: leaf chains that end at a junction and are not
    // significantly longer than the junction's clearance (every medial spoke
    // of a blob is about as long as the local inradius, while a genuine arm
    // keeps growing past it). Standalone short chains survive (they are the
    // centerline).
    auto clearance = [&](const Vec2& p) {
        double best = std::numeric_limits<double>::infinity();
        for (const Vec2& s : boundary) best = std::min(best, (p - s).norm());
        return best;
    };
    // Each pass collects every prunable leaf chain before deleting any, so two
    // spurs meeting at the same junction go together instead of fusing into a
    // single through-path once the first one disappears.
    bool changed = true;
    while (changed) {
        changed = false;
        std::vector<std::vector<uint32_t>> doomed;
        for (uint32_t v = 0; v < nodes.size(); ++v) {
            if (degree(v) != 1) continue;
            std::vector<uint32_t> chain{v};
            double len = 0;
            uint32_t prev = v, cur = adj[v].begin()->first;
            len += adj[v].begin()->second;
            while (degree(cur) == 2) {
                uint32_t next = UINT32_MAX;
                for (auto& [n, l] : adj[cur])
                    if (n != prev) {
                        next = n;
                        len += l;
                        break;
                    }
                chain.push_back(cur);
                prev = cur;
                cur = next;
            }
            if (degree(cur) >= 3 && len < min_branch_len + clearance(nodes[cur])) {
                chain.push_back(cur);
                doomed.push_back(std::move(chain));
            }
        }
        for (const auto& chain : doomed)
            for (size_t i = 0; i + 1 < chain.size(); ++i) {
                adj[chain[i]].erase(chain[i + 1]);
                adj[chain[i + 1]].erase(chain[i]);
                changed = true;
            }
    }

    // Merge degree-2 runs into polylines.
    std::map<std::pair<uint32_t, uint32_t>, bool> visited;
    for (uint32_t v = 0; v < nodes.size(); ++v)
        for (auto& [n, l] : adj[v]) visited[{std::min(v, n), std::max(v, n)}] = false;

    std::vector<Polyline2D> out;
    auto walk = [&](uint32_t start, uint32_t next) {
        Polyline2D line;
        line.vertices.push_back(nodes[start]);
        uint32_t prev = start, cur = next;
        visited[{std::min(prev, cur), std::max(prev, cur)}] = true;
        line.vertices.push_back(nodes[cur]);
        while (degree(cur) == 2) {
            uint32_t nxt = UINT32_MAX;
            for (auto& [n, l] : adj[cur])
                if (n != prev) nxt = n;
            if (nxt == UINT32_MAX) break;
            auto ekey = std::make_pair(std::min(cur, nxt), std::max(cur, nxt));
            if (visited[ekey]) break;  // cycle closure
            visited[ekey] = true;
            line.vertices.push_back(nodes[nxt]);
            prev = cur;
            cur = nxt;
        }
        out.push_back(std::move(line));
    };

    for (uint32_t v = 0; v < nodes.size(); ++v) {
        if (degree(v) == 2) continue;
        for (auto& [n, l] : adj[v]) {
            if (!visited[{std::min(v, n), std::max(v, n)}]) walk(v, n);
        }
    }
    // Pure cycles (no junction/leaf node).
    for (uint32_t v = 0; v < nodes.size(); ++v)
        for (auto& [n, l] : adj[v])
            if (!visited[{std::min(v, n), std::max(v, n)}]) walk(v, n);

    std::sort(out.begin(), out.end(), [](const Polyline2D& a, const Polyline2D& b) {
        if (a.vertices.front().x != b.vertices.front().x)
            return a.vertices.front().x < b.vertices.front().x;
        return a.vertices.front().y < b.vertices.front().y;
    });
    return out;
}

// --- resample ----------------------------------------------------------------

Polyline2D resample_polyline(const Polyline2D& line, double spacing) {
    if (spacing <= 0) throw ConfigError("resample_polyline: spacing must be positive");
    if (line.vertices.size() < 2) throw DataError("resample_polyline: need >= 2 vertices");
    const double total = line.length();
    Polyline2D out;
    if (spacing >= total) {
        out.vertices = {line.vertices.front(), line.vertices.back()};
        return out;
    }
    out.vertices.push_back(line.vertices.front());
    double next_s = spacing;
    double walked = 0;
    for (size_t i = 1; i < line.vertices.size(); ++i) {
        const Vec2 a = line.vertices[i - 1];
        const Vec2 b = line.vertices[i];
        const double seg = (b - a).norm();
        while (next_s <= walked + seg + 1e-15 && next_s < total - 1e-12) {
            const double t = (next_s - walked) / seg;
            out.vertices.push_back(a + (b - a) * t);
            next_s += spacing;
        }
        walked += seg;
    }
    out.vertices.push_back(line.vertices.back());
    return out;
}

// --- centerline split --------------------------------------------------------

namespace {

// Half-plane {p : (p - origin) . dir <= 0} as a large rectangle.
BgPolygon halfplane_rect(const Vec2& origin, const Vec2& dir, double extent) {
    const double n = dir.norm();
    const Vec2 d{dir.x / n, dir.y / n};
    const Vec2 t{-d.y, d.x};
    Polygon2D rect;
    rect.shell.closed = true;
    rect.shell.vertices = {
        origin + t * extent,
        origin + t * extent - d * extent,
        origin - t * extent - d * extent,
        origin - t * extent,
    };
    rect.normalize();
    return to_bg(rect);
}

}  // namespace

std::vector<SubPolygon> split_polygon_by_centerline(const Polygon2D& polygon,
                                                    const Polyline2D& centerline, double spacing) {
    if (centerline.vertices.size() < 2)
        throw DataError("split_polygon_by_centerline: degenerate centerline");
    const BgPolygon bgpoly = to_bg(polygon);
    for (const Vec2& v : centerline.vertices)
        if (!bg::covered_by(v, bgpoly))
            throw DataError("split_polygon_by_centerline: centerline outside polygon");

    const Polyline2D rs = resample_polyline(centerline, spacing);
    const size_t m = rs.vertices.size() - 1;  // segment count

    std::vector<double> seg_angle(m);
    for (size_t i = 0; i < m; ++i) {
        const Vec2 d = rs.vertices[i + 1] - rs.vertices[i];
        seg_angle[i] = std::atan2(d.y, d.x);
    }

    if (m == 1) {
        SubPolygon sp;
        sp.polygon = polygon;
        sp.polygon.normalize();
        sp.theta = seg_angle[0];
        sp.center = sp.polygon.centroid();
        return {sp};
    }

    double minx = 1e300, miny = 1e300, maxx = -1e300, maxy = -1e300;
    for (const Vec2& v : polygon.shell.vertices) {
        minx = std::min(minx, v.x);
        maxx = std::max(maxx, v.x);
        miny = std::min(miny, v.y);
        maxy = std::max(maxy, v.y);
    }
    const double extent = 2.0 * std::hypot(maxx - minx, maxy - miny) + 10.0;

    std::vector<SubPolygon> out;
    BgMultiPolygon remaining{bgpoly};
    auto emit = [&](const BgMultiPolygon& piece, double theta) {
        for (Polygon2D& p : from_bg_multi(piece)) {
            SubPolygon sp;
            sp.theta = theta;
            sp.center = p.centroid();
            sp.polygon = std::move(p);
            out.push_back(std::move(sp));
        }
    };

    for (size_t k = 0; k + 1 < m; ++k) {
        // Cut at the shared vertex of segments k and k+1, perpendicular to
        // their average direction.
        const Vec2 d0 = rs.vertices[k + 1] - rs.vertices[k];
        const Vec2 d1 = rs.vertices[k + 2] - rs.vertices[k + 1];
        Vec2 d = d0 * (1.0 / std::max(d0.norm(), 1e-300)) + d1 * (1.0 / std::max(d1.norm(), 1e-300));
        if (d.norm() < 1e-12) d = d0;
        const BgPolygon behind = halfplane_rect(rs.vertices[k + 1], d, extent);
        BgMultiPolygon piece, rest;
        bg::intersection(remaining, behind, piece);
        const BgPolygon front = halfplane_rect(rs.vertices[k + 1], d * -1.0, extent);
        bg::intersection(remaining, front, rest);
        emit(piece, seg_angle[k]);
        remaining = std::move(rest);
    }
    emit(remaining, seg_angle[m - 1]);
    return out;
}

// --- grid partition ----------------------------------------------------------

std::vector<Polygon2D> grid_partition(const Polygon2D& sub_polygon, double theta,
                                      const Vec2& center, double grid_w, double grid_l) {
    if (grid_w <= 0 || grid_l <= 0) throw ConfigError("grid_partition: invalid grid size");
    if (sub_polygon.area() < 1e-12) throw DataError("grid_partition: degenerate sub-polygon");

    Polygon2D rotated = sub_polygon;
    for (Vec2& v : rotated.shell.vertices) v = rotate2(v, -theta, center);
    for (auto& h : rotated.holes)
        for (Vec2& v : h.vertices) v = rotate2(v, -theta, center);
    rotated.normalize();
    const BgPolygon bgrot = to_bg(rotated);

    double minx = 1e300, miny = 1e300, maxx = -1e300, maxy = -1e300;
    for (const Vec2& v : rotated.shell.vertices) {
        minx = std::min(minx, v.x);
        maxx = std::max(maxx, v.x);
        miny = std::min(miny, v.y);
        maxy = std::max(maxy, v.y);
    }
    const int nx = std::max(1, static_cast<int>(std::ceil((maxx - minx) / grid_w - 1e-9)));
    const int ny = std::max(1, static_cast<int>(std::ceil((maxy - miny) / grid_l - 1e-9)));

    std::vector<Polygon2D> cells;
    for (int i = 0; i < nx; ++i) {
        for (int j = 0; j < ny; ++j) {
            Polygon2D cell = make_rect(minx + i * grid_w, miny + j * grid_l,
                                       minx + (i + 1) * grid_w, miny + (j + 1) * grid_l);
            BgMultiPolygon clipped;
            bg::intersection(to_bg(cell), bgrot, clipped);
            double a = 0;
            for (auto& p : clipped) a += std::abs(bg::area(p));
            if (a < 1e-12) continue;
            for (Vec2& v : cell.shell.vertices) v = rotate2(v, theta, center);
            cell.normalize();
            cells.push_back(std::move(cell));
        }
    }
    return cells;
}

// --- boolean intersection ------------------------------------------------------

std::vector<Polygon2D> intersect(const Polygon2D& a, const Polygon2D& b) {
    BgMultiPolygon out;
    bg::intersection(to_bg(a), to_bg(b), out);
    return from_bg_multi(out);
}

// --- minimum enclosing circle --------------------------------------------------

namespace {

Circle2D circle_two(const Vec2& a, const Vec2& b) {
    const Vec2 c = (a + b) * 0.5;
    return {c, (a - c).norm()};
}

std::optional<Circle2D> circumcircle(const Vec2& a, const Vec2& b, const Vec2& c) {
    const double d = 2.0 * ((b - a).cross(c - a));
    if (std::abs(d) < 1e-14) return std::nullopt;
    const double a2 = a.dot(a), b2 = b.dot(b), c2 = c.dot(c);
    const Vec2 center{(a2 * (b.y - c.y) + b2 * (c.y - a.y) + c2 * (a.y - b.y)) / d,
                      (a2 * (c.x - b.x) + b2 * (a.x - c.x) + c2 * (b.x - a.x)) / d};
    return Circle2D{center, (a - center).norm()};
}

bool in_circle(const Circle2D& c, const Vec2& p, double eps = 1e-10) {
    return (p - c.center).norm() <= c.radius + eps;
}

}  // namespace

Circle2D min_enclosing_circle(const std::vector<Vec2>& points) {
    if (points.empty()) throw DataError("min_enclosing_circle: no points");
    std::vector<Vec2> pts = points;
    std::mt19937 rng(0x5eed);  // fixed seed keeps results deterministic
    std::shuffle(pts.begin(), pts.end(), rng);

    Circle2D c{pts[0], 0.0};
    for (size_t i = 1; i < pts.size(); ++i) {
        if (in_circle(c, pts[i])) continue;
        c = {pts[i], 0.0};
        for (size_t j = 0; j < i; ++j) {
            if (in_circle(c, pts[j])) continue;
            c = circle_two(pts[i], pts[j]);
            for (size_t k = 0; k < j; ++k) {
                if (in_circle(c, pts[k])) continue;
                auto cc = circumcircle(pts[i], pts[j], pts[k]);
                if (cc) {
                    c = *cc;
                } else {
                    // collinear triple: widest two-point circle covering all three
                    Circle2D best = circle_two(pts[i], pts[j]);
                    for (auto& cand : {circle_two(pts[i], pts[k]), circle_two(pts[j], pts[k])})
                        if (cand.radius > best.radius) best = cand;
                    c = best;
                }
            }
        }
    }
    return c;
}

// --- ray sampling ----------------------------------------------------------------

namespace {

Vec2 interior_point(const Polygon2D& poly) {
    const Vec2 c = poly.centroid();
    if (poly.contains(c)) return c;
    // Horizontal scanline through the bbox middle; midpoint of the first span.
    double miny = 1e300, maxy = -1e300;
    for (const Vec2& v : poly.shell.vertices) {
        miny = std::min(miny, v.y);
        maxy = std::max(maxy, v.y);
    }
    const double yc = 0.5 * (miny + maxy);
    std::vector<double> xs;
    const auto& ring = poly.shell.vertices;
    const size_t n = ring.size();
    for (size_t i = 0, j = n - 1; i < n; j = i++) {
        const Vec2& a = ring[j];
        const Vec2& b = ring[i];
        if ((a.y > yc) != (b.y > yc)) xs.push_back(a.x + (yc - a.y) / (b.y - a.y) * (b.x - a.x));
    }
    std::sort(xs.begin(), xs.end());
    for (size_t i = 0; i + 1 < xs.size(); i += 2) {
        const Vec2 mid{0.5 * (xs[i] + xs[i + 1]), yc};
        if (poly.contains(mid)) return mid;
    }
    return c;
}

double farthest_ray_hit(const Polygon2D& poly, const Vec2& origin, const Vec2& dir) {
    double tmax = -1;
    auto scan_ring = [&](const std::vector<Vec2>& ring) {
        const size_t n = ring.size();
        for (size_t i = 0, j = n - 1; i < n; j = i++) {
            const Vec2& a = ring[j];
            const Vec2& b = ring[i];
            const Vec2 e = b - a;
            const double denom = dir.cross(e);
            if (std::abs(denom) < 1e-15) continue;
            const Vec2 ao = a - origin;
            const double t = ao.cross(e) / denom;       // along the ray
            const double u = ao.cross(dir) / denom;     // along the edge
            if (t >= 0 && u >= -1e-12 && u <= 1.0 + 1e-12) tmax = std::max(tmax, t);
        }
    };
    scan_ring(poly.shell.vertices);
    for (const auto& h : poly.holes) scan_ring(h.vertices);
    return tmax;
}

}  // namespace

Polyline2D ray_sample_polygon(const Polygon2D& shape, int n_rays) {
    if (n_rays < 3) throw ConfigError("ray_sample_polygon: need >= 3 rays");
    const Circle2D mec = min_enclosing_circle(shape.shell.vertices);
    Vec2 origin = mec.center;
    if (!shape.contains(origin)) origin = interior_point(shape);
    Polyline2D out;
    out.closed = true;
    out.vertices.reserve(n_rays);
    for (int i = 0; i < n_rays; ++i) {
        const double angle = 2.0 * M_PI * i / n_rays;
        const Vec2 dir{std::cos(angle), std::sin(angle)};
        const double t = farthest_ray_hit(shape, origin, dir);
        if (t < 0) throw DataError("ray_sample_polygon: ray missed the boundary");
        out.vertices.push_back(origin + dir * t);
    }
    return out;
}

Polyline2D ray_sample_circle(const Circle2D& circle, int n_rays) {
    if (n_rays < 3) throw ConfigError("ray_sample_circle: need >= 3 rays");
    Polyline2D out;
    out.closed = true;
    out.vertices.reserve(n_rays);
    for (int i = 0; i < n_rays; ++i) {
        const double angle = 2.0 * M_PI * i / n_rays;
        out.vertices.push_back({circle.center.x + circle.radius * std::cos(angle),
                                circle.center.y + circle.radius * std::sin(angle)});
    }
    return out;
}

// --- line fit -------------------------------------------------------------------

double fit_line_angle(const std::vector<Vec2>& points) {
    if (points.size() < 2) throw DataError("fit_line_angle: need >= 2 points");
    Vec2 mean;
    for (const Vec2& p : points) mean = mean + p;
    mean = mean * (1.0 / static_cast<double>(points.size()));
    double sxx = 0, syy = 0, sxy = 0;
    for (const Vec2& p : points) {
        const Vec2 d = p - mean;
        sxx += d.x * d.x;
        syy += d.y * d.y;
        sxy += d.x * d.y;
    }
    if (sxx + syy < 1e-24) throw DataError("fit_line_angle: all points coincident");
    double theta = 0.5 * std::atan2(2.0 * sxy, sxx - syy);
    if (theta <= -M_PI / 2) theta += M_PI;
    if (theta > M_PI / 2) theta -= M_PI;
    // map -pi/2 (same line as +pi/2) onto the (+] end of the interval
    if (theta <= -M_PI / 2 + 1e-15) theta = M_PI / 2;
    return theta;
}

Polyline2D chaikin_smooth(const Polyline2D& line, int iterations) {
    Polyline2D out = line;
    for (int it = 0; it < iterations; ++it) {
        const auto& v = out.vertices;
        if (v.size() < 3) break;
        Polyline2D next;
        next.closed = out.closed;
        const size_t n = v.size();
        const size_t segs = out.closed ? n : n - 1;
        if (!out.closed) next.vertices.push_back(v.front());
        for (size_t i = 0; i < segs; ++i) {
            const Vec2& a = v[i];
            const Vec2& b = v[(i + 1) % n];
            next.vertices.push_back(a * 0.75 + b * 0.25);
            next.vertices.push_back(a * 0.25 + b * 0.75);
        }
        if (!out.closed) next.vertices.push_back(v.back());
        out = std::move(next);
    }
    return out;
}

}  // namespace roadtwin
