#include "roadtwin/extract.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>

namespace roadtwin {

namespace {

std::vector<Vec2> project_all(const std::vector<Vec3>& pts, Plane plane) {
    std::vector<Vec2> out;
    out.reserve(pts.size());
    for (const Vec3& p : pts) out.push_back(project(p, plane));
    return out;
}

}  // namespace

// --- main centerline ---------------------------------------------------------

std::vector<Polyline2D> main_centerlines(const Polygon2D& polygon, double min_branch_len,
                                         double densify_step) {
    const std::vector<Polyline2D> chains = extract_centerlines(polygon, min_branch_len, densify_step);
    if (chains.size() <= 1) return chains;

    // Graph over chain endpoints; longest weighted path via two Dijkstra passes.
    auto qkey = [](const Vec2& v) {
        return std::make_pair(static_cast<int64_t>(std::llround(v.x * 1e7)),
                              static_cast<int64_t>(std::llround(v.y * 1e7)));
    };
    std::map<std::pair<int64_t, int64_t>, uint32_t> ids;
    std::vector<std::vector<std::pair<uint32_t, uint32_t>>> adj;  // (neighbor, chain idx)
    auto node_of = [&](const Vec2& v) {
        auto [it, inserted] = ids.try_emplace(qkey(v), static_cast<uint32_t>(adj.size()));
        if (inserted) adj.emplace_back();
        return it->second;
    };
    std::vector<double> chain_len(chains.size());
    for (size_t c = 0; c < chains.size(); ++c) {
        chain_len[c] = chains[c].length();
        const uint32_t a = node_of(chains[c].vertices.front());
        const uint32_t b = node_of(chains[c].vertices.back());
        adj[a].push_back({b, static_cast<uint32_t>(c)});
        adj[b].push_back({a, static_cast<uint32_t>(c)});
    }

    // Shortest-path tree from src; on the (near-)tree skeleton the farthest
    // node by shortest path is the far end of the longest simple path.
    auto farthest = [&](uint32_t src) {
        std::vector<double> dist(adj.size(), -1);
        std::vector<std::pair<uint32_t, uint32_t>> from(adj.size(), {UINT32_MAX, UINT32_MAX});
        dist[src] = 0;
        std::vector<std::pair<double, uint32_t>> heap{{0, src}};
        while (!heap.empty()) {
            std::pop_heap(heap.begin(), heap.end(), std::greater<>{});
            auto [d, v] = heap.back();
            heap.pop_back();
            if (d > dist[v]) continue;
            for (auto [n, c] : adj[v]) {
                const double nd = d + chain_len[c];
                if (dist[n] < 0 || nd < dist[n]) {
                    dist[n] = nd;
                    from[n] = {v, c};
                    heap.push_back({nd, n});
                    std::push_heap(heap.begin(), heap.end(), std::greater<>{});
                }
            }
        }
        uint32_t best = src;
        for (uint32_t v = 0; v < adj.size(); ++v)
            if (dist[v] > dist[best]) best = v;
        return std::make_tuple(best, dist, from);
    };

    auto [u, du, fu] = farthest(0);
    auto [v, dv, fv] = farthest(u);

    // Reconstruct u -> v.
    std::vector<uint32_t> chain_path;
    std::vector<uint32_t> node_path{v};
    uint32_t cur = v;
    while (cur != u) {
        auto [p, c] = fv[cur];
        if (p == UINT32_MAX) break;
        chain_path.push_back(c);
        node_path.push_back(p);
        cur = p;
    }
    std::reverse(chain_path.begin(), chain_path.end());
    std::reverse(node_path.begin(), node_path.end());

    Polyline2D out;
    for (size_t i = 0; i < chain_path.size(); ++i) {
        std::vector<Vec2> seg = chains[chain_path[i]].vertices;
        if (out.vertices.empty()) {
            // orient the first chain so it does not start at the next node
            if (chain_path.size() > 1) {
                const auto& nxt = chains[chain_path[1]];
                auto near = [&](const Vec2& a, const Vec2& b) { return (a - b).norm() < 1e-6; };
                if (near(seg.front(), nxt.vertices.front()) || near(seg.front(), nxt.vertices.back()))
                    std::reverse(seg.begin(), seg.end());
            }
            out.vertices = std::move(seg);
        } else {
            const Vec2 tail = out.vertices.back();
            if ((seg.back() - tail).norm() < (seg.front() - tail).norm())
                std::reverse(seg.begin(), seg.end());
            out.vertices.insert(out.vertices.end(), seg.begin() + 1, seg.end());
        }
    }
    if (out.vertices.size() < 2) return {chains.front()};
    return {out};
}

// --- plane-like ---------------------------------------------------------------

MultiPolygon3D extract_plane_like(const LabeledCloud& instance, const ExtractConfig& cfg) {
    const Semantic sem = instance.semantic.front();
    if (!plane_like(sem)) throw DataError("extract_plane_like: not a plane-like instance");
    const std::vector<Vec2> xy = project_all(instance.points, Plane::XY);
    const LiftContext lift(instance.points, Plane::XY, cfg.lift);

    const std::vector<Polygon2D> fine = alphashape(xy, cfg.alpha_fine);

    MultiPolygon3D out;
    if (sem == Semantic::RoadLane) {
        // Lanes are small: fine contour only, no grid partition.
        for (const Polygon2D& f : fine) out.push_back(lift.lift_polygon_v1(f));
        return out;
    }

    const std::vector<Polygon2D> coarse = alphashape(xy, cfg.alpha_coarse);
    for (const Polygon2D& cp : coarse) {
        std::vector<SubPolygon> blocks;
        const auto centerlines =
            main_centerlines(cp, cfg.min_branch_len_plane, cfg.densify_step);
        if (!centerlines.empty() && centerlines.front().length() > cfg.split_spacing * 0.5) {
            blocks = split_polygon_by_centerline(cp, centerlines.front(), cfg.split_spacing);
        } else {
            // No usable centerline: one block along the principal axis.
            SubPolygon sp;
            sp.polygon = cp;
            sp.theta = fit_line_angle(cp.shell.vertices);
            sp.center = cp.centroid();
            blocks.push_back(std::move(sp));
        }
        for (const SubPolygon& block : blocks) {
            if (block.polygon.area() < 1e-9) continue;
            // Localize the fine polygon to this block so per-cell clipping is
            // cheap and cells never overlap across blocks.
            std::vector<Polygon2D> fine_local;
            for (const Polygon2D& f : fine)
                for (Polygon2D& piece : intersect(f, block.polygon))
                    fine_local.push_back(std::move(piece));
            if (fine_local.empty()) continue;
            const auto cells =
                grid_partition(block.polygon, block.theta, block.center, cfg.grid_w, cfg.grid_l);
            for (const Polygon2D& cell : cells) {
                for (const Polygon2D& f : fine_local) {
                    for (const Polygon2D& piece : intersect(f, cell)) {
                        if (piece.area() < 1e-10) continue;
                        out.push_back(lift.lift_polygon_v1(piece));
                    }
                }
            }
        }
    }
    if (out.empty()) throw DataError("extract_plane_like: no output polygons");
    return out;
}

// --- guardrail ----------------------------------------------------------------

namespace {

// A lifted polygon pair in the straightened frame, kept as parallel rings over
// the same (x, z) projection.
struct StraightPair {
    Polygon3D front;
    Polygon3D back;
};

struct RingRef {
    const std::vector<Vec3>* front;
    const std::vector<Vec3>* back;
};

// Recover the front/back y values of an (x, z) point lying on one of the
// original rings (vertex hit or edge interpolation).
std::pair<double, double> recover_y(const std::vector<RingRef>& rings, const Vec2& q) {
    double best_d = std::numeric_limits<double>::max();
    std::pair<double, double> best{0, 0};
    for (const RingRef& ring : rings) {
        const auto& fr = *ring.front;
        const auto& bk = *ring.back;
        const size_t n = fr.size();
        for (size_t i = 0, j = n - 1; i < n; j = i++) {
            const Vec2 a{fr[j].x, fr[j].z};
            const Vec2 b{fr[i].x, fr[i].z};
            const Vec2 ab = b - a;
            const double len2 = ab.dot(ab);
            double t = len2 > 0 ? std::clamp((q - a).dot(ab) / len2, 0.0, 1.0) : 0.0;
            const Vec2 proj = a + ab * t;
            const double d = (q - proj).norm();
            if (d < best_d) {
                best_d = d;
                best = {fr[j].y + t * (fr[i].y - fr[j].y), bk[j].y + t * (bk[i].y - bk[j].y)};
            }
        }
    }
    return best;
}

// Cut a straight-frame pair by the vertical strip x in [x0, x1].
std::vector<StraightPair> cut_pair_by_strip(const StraightPair& pair, double x0, double x1) {
    Polygon2D proj;
    proj.shell.closed = true;
    for (const Vec3& v : pair.front.shell.vertices) proj.shell.vertices.push_back({v.x, v.z});
    for (const auto& h : pair.front.holes) {
        Polyline2D hole;
        hole.closed = true;
        for (const Vec3& v : h.vertices) hole.vertices.push_back({v.x, v.z});
        proj.holes.push_back(std::move(hole));
    }
    proj.normalize();

    double zmin = 1e300, zmax = -1e300;
    for (const Vec3& v : pair.front.shell.vertices) {
        zmin = std::min(zmin, v.z);
        zmax = std::max(zmax, v.z);
    }
    const Polygon2D strip = make_rect(x0, zmin - 1.0, x1, zmax + 1.0);
    const std::vector<Polygon2D> pieces = intersect(proj, strip);

    std::vector<RingRef> rings;
    rings.push_back({&pair.front.shell.vertices, &pair.back.shell.vertices});
    for (size_t h = 0; h < pair.front.holes.size(); ++h)
        rings.push_back({&pair.front.holes[h].vertices, &pair.back.holes[h].vertices});

    std::vector<StraightPair> out;
    for (const Polygon2D& piece : pieces) {
        StraightPair sp;
        auto lift_ring = [&](const std::vector<Vec2>& ring2d, Ring3D& fr, Ring3D& bk) {
            for (const Vec2& q : ring2d) {
                auto [yf, yb] = recover_y(rings, q);
                fr.vertices.push_back({q.x, yf, q.y});
                bk.vertices.push_back({q.x, yb, q.y});
            }
        };
        lift_ring(piece.shell.vertices, sp.front.shell, sp.back.shell);
        for (const auto& hole : piece.holes) {
            Ring3D hf, hb;
            lift_ring(hole.vertices, hf, hb);
            sp.front.holes.push_back(std::move(hf));
            sp.back.holes.push_back(std::move(hb));
        }
        out.push_back(std::move(sp));
    }
    return out;
}

}  // namespace

std::vector<GuardrailSegment> extract_guardrail(const LabeledCloud& instance,
                                                const ExtractConfig& cfg) {
    if (instance.semantic.front() != Semantic::Guardrail)
        throw DataError("extract_guardrail: not a guardrail instance");
    if (instance.size() < 3) throw DataError("extract_guardrail: too few points");
    const std::vector<Vec2> xy = project_all(instance.points, Plane::XY);

    std::vector<GuardrailSegment> segments;
    for (const Polygon2D& footprint : alphashape(xy, cfg.alpha_guardrail_xy)) {
        const auto centerlines =
            main_centerlines(footprint, cfg.min_branch_len_guardrail, cfg.densify_step_thin);
        if (centerlines.empty()) continue;
        const Polyline2D& centerline = centerlines.front();
        if (centerline.length() < cfg.block_len * 0.25) continue;

        const std::vector<SubPolygon> blocks =
            split_polygon_by_centerline(footprint, centerline, cfg.block_len);

        GuardrailSegment seg;
        std::vector<Vec3> straight;
        double arc_cursor = 0.0;
        for (const SubPolygon& block : blocks) {
            std::vector<Vec3> members;
            for (size_t i = 0; i < instance.points.size(); ++i)
                if (block.polygon.contains(xy[i])) members.push_back(instance.points[i]);
            if (members.size() < 3) continue;

            double min_x = 1e300;
            double sum_y = 0;
            std::vector<Vec3> rotated;
            rotated.reserve(members.size());
            for (const Vec3& p : members) {
                const Vec3 r = rotate_z(p, -block.theta, block.center);
                min_x = std::min(min_x, r.x);
                sum_y += r.y;
                rotated.push_back(r);
            }
            const double mean_y = sum_y / static_cast<double>(rotated.size());

            BlockTransform tf;
            tf.theta = block.theta;
            tf.center = block.center;
            tf.offset = {arc_cursor - min_x, -mean_y, 0.0};
            tf.arc_start = arc_cursor;
            double max_x = -1e300;
            for (Vec3& r : rotated) {
                r = r + tf.offset;
                max_x = std::max(max_x, r.x);
            }
            tf.arc_end = max_x;
            arc_cursor = max_x;
            seg.transforms.push_back(tf);
            straight.insert(straight.end(), rotated.begin(), rotated.end());
        }
        if (seg.transforms.empty() || straight.size() < 3) continue;

        // Straightened profile: contour in XZ, lifted into front/back pairs.
        const std::vector<Vec2> xz = project_all(straight, Plane::XZ);
        const LiftContext lift(straight, Plane::XZ, cfg.lift);
        std::vector<StraightPair> pairs;
        for (const Polygon2D& profile : alphashape(xz, cfg.alpha_guardrail_xz)) {
            PolygonPair3D lifted = lift.lift_polygon_v2(profile);
            pairs.push_back({std::move(lifted.front), std::move(lifted.back)});
        }

        // Cut at block boundaries and invert each block's motion.
        for (size_t b = 0; b < seg.transforms.size(); ++b) {
            const BlockTransform& tf = seg.transforms[b];
            const double x0 = tf.arc_start - (b == 0 ? 1.0 : 0.0);
            const double x1 = tf.arc_end + (b + 1 == seg.transforms.size() ? 1.0 : 0.0);
            for (const StraightPair& pair : pairs) {
                for (StraightPair& piece : cut_pair_by_strip(pair, x0, x1)) {
                    if (piece.front.shell.vertices.size() < 3) continue;
                    Polygon3D ff = piece.front, bb = piece.back;
                    auto invert = [&](Polygon3D& poly) {
                        for (Vec3& v : poly.shell.vertices) v = tf.inverse(v);
                        for (auto& h : poly.holes)
                            for (Vec3& v : h.vertices) v = tf.inverse(v);
                    };
                    invert(ff);
                    invert(bb);
                    seg.front.push_back(std::move(ff));
                    seg.back.push_back(std::move(bb));
                    seg.straight_front.push_back(std::move(piece.front));
                    seg.straight_back.push_back(std::move(piece.back));
                    seg.block_of_polygon.push_back(b);
                }
            }
        }
        if (!seg.front.empty()) segments.push_back(std::move(seg));
    }
    if (segments.empty()) throw DataError("extract_guardrail: no centerline found");
    return segments;
}

// --- pole ----------------------------------------------------------------------

MultiPolygon3D extract_pole(const LabeledCloud& part, const ExtractConfig& cfg) {
    if (part.size() < 3) throw DataError("extract_pole: too few points");
    double zmin = 1e300, zmax = -1e300;
    for (const Vec3& p : part.points) {
        zmin = std::min(zmin, p.z);
        zmax = std::max(zmax, p.z);
    }
    if (zmax - zmin < cfg.dh) throw DataError("extract_pole: vertical extent below dh");
    const int n_slabs = std::max(1, static_cast<int>(std::floor((zmax - zmin) / cfg.dh)));

    MultiPolygon3D rings;
    for (int s = 0; s < n_slabs; ++s) {
        const double z0 = zmin + s * cfg.dh;
        // final slab absorbs the sub-dh remainder at the top
        const double z1 = (s + 1 == n_slabs) ? zmax + 1e-12 : z0 + cfg.dh;
        std::vector<Vec2> slab_xy;
        double zsum = 0;
        for (const Vec3& p : part.points) {
            if (p.z >= z0 && p.z < z1) {
                slab_xy.push_back({p.x, p.y});
                zsum += p.z;
            }
        }
        if (slab_xy.size() < 3) continue;
        const Circle2D circle = min_enclosing_circle(slab_xy);
        const Polyline2D ring2d = ray_sample_circle(circle, cfg.n_rays);
        const double z = zsum / static_cast<double>(slab_xy.size());
        Polygon3D ring;
        ring.shell.vertices.reserve(ring2d.vertices.size());
        for (const Vec2& v : ring2d.vertices) ring.shell.vertices.push_back({v.x, v.y, z});
        rings.push_back(std::move(ring));
    }
    if (rings.empty()) throw DataError("extract_pole: all slabs degenerate");
    return rings;
}

// --- panel -----------------------------------------------------------------------

PairRecord extract_panel(const LabeledCloud& part, const ExtractConfig& cfg) {
    if (part.size() < 3) throw DataError("extract_panel: too few points");
    const std::vector<Vec2> xy = project_all(part.points, Plane::XY);
    const double theta = fit_line_angle(xy);

    std::vector<Vec3> rotated;
    rotated.reserve(part.size());
    for (const Vec3& p : part.points) rotated.push_back(rotate_z(p, -theta));

    const std::vector<Vec2> xz = project_all(rotated, Plane::XZ);
    const std::vector<Polygon2D> faces = alphashape(xz, cfg.alpha_fine);
    const LiftContext lift(rotated, Plane::XZ, cfg.lift);

    PairRecord out;
    for (const Polygon2D& face : faces) {
        PolygonPair3D pair = lift.lift_polygon_v2(face);
        auto unrotate = [&](Polygon3D& poly) {
            for (Vec3& v : poly.shell.vertices) v = rotate_z(v, theta);
            for (auto& h : poly.holes)
                for (Vec3& v : h.vertices) v = rotate_z(v, theta);
        };
        unrotate(pair.front);
        unrotate(pair.back);
        out.front.push_back(std::move(pair.front));
        out.back.push_back(std::move(pair.back));
    }
    return out;
}

// --- light -----------------------------------------------------------------------

MultiPolygon3D extract_light(const LabeledCloud& part, const ExtractConfig& cfg) {
    if (part.size() < 3) throw DataError("extract_light: too few points");
    const std::vector<Vec2> xy = project_all(part.points, Plane::XY);
    const double theta = fit_line_angle(xy);

    std::vector<Vec3> rotated;
    rotated.reserve(part.size());
    for (const Vec3& p : part.points) rotated.push_back(rotate_z(p, -theta));
    const std::vector<Vec2> xz = project_all(rotated, Plane::XZ);

    MultiPolygon3D rings;
    for (const Polygon2D& contour : alphashape(xz, cfg.alpha_fine)) {
        const auto centerlines =
            main_centerlines(contour, cfg.min_branch_len_light, cfg.densify_step_thin);
        if (centerlines.empty()) continue;
        const std::vector<SubPolygon> chunks =
            split_polygon_by_centerline(contour, centerlines.front(), cfg.dl);
        for (const SubPolygon& chunk : chunks) {
            const double gamma = chunk.theta;  // centerline slope in the X-Z plane
            std::vector<Vec3> members;
            for (size_t i = 0; i < rotated.size(); ++i)
                if (chunk.polygon.contains(xz[i])) members.push_back(rotated[i]);
            if (members.size() < 3) continue;

            std::vector<Vec3> straight;
            straight.reserve(members.size());
            double xsum = 0;
            for (const Vec3& p : members) {
                const Vec3 r = rotate_y(p, -gamma);
                xsum += r.x;
                straight.push_back(r);
            }
            const double x_mean = xsum / static_cast<double>(straight.size());

            const std::vector<Vec2> yz = project_all(straight, Plane::YZ);
            Polyline2D ring2d;
            try {
                const std::vector<Polygon2D> sections = alphashape(yz, cfg.alpha_section);
                ring2d = ray_sample_polygon(sections.front(), cfg.n_rays);
            } catch (const DataError&) {
                continue;  // degenerate section
            }
            Polygon3D ring;
            ring.shell.vertices.reserve(ring2d.vertices.size());
            for (const Vec2& v : ring2d.vertices) {
                Vec3 p{x_mean, v.x, v.y};
                p = rotate_y(p, gamma);
                ring.shell.vertices.push_back(rotate_z(p, theta));
            }
            rings.push_back(std::move(ring));
        }
    }
    if (rings.empty()) throw DataError("extract_light: no centerline found");
    return rings;
}

// --- instance dispatch --------------------------------------------------------------

GeometryRecord extract_instance(const LabeledCloud& instance, const ExtractConfig& cfg) {
    if (instance.empty()) throw DataError("extract_instance: empty instance");
    const Semantic sem = instance.semantic.front();
    GeometryRecord record;
    record.semantic = to_string(sem);

    if (plane_like(sem)) {
        record.kind = RecordKind::PlaneLike;
        record.plane = extract_plane_like(instance, cfg);
    } else if (sem == Semantic::Guardrail) {
        record.kind = RecordKind::Guardrail;
        for (GuardrailSegment& seg : extract_guardrail(instance, cfg))
            record.guardrails.push_back({std::move(seg.front), std::move(seg.back)});
    } else {
        record.kind = RecordKind::PoleLike;
        auto parts = split_parts(instance, cfg.part_params);
        for (const LabeledCloud& pole : parts[Part::Pole]) {
            try {
                record.poles.push_back(extract_pole(pole, cfg));
            } catch (const DataError&) {
                // failed part: omitted, instance still valid if another pole exists
            }
        }
        if (record.poles.empty()) throw DataError("extract_instance: no extractable pole part");
        if (parts.count(Part::Panel))
            for (const LabeledCloud& panel : parts[Part::Panel]) {
                try {
                    record.panels.push_back(extract_panel(panel, cfg));
                } catch (const DataError&) {
                }
            }
        if (parts.count(Part::Light))
            for (const LabeledCloud& light : parts[Part::Light]) {
                try {
                    record.lights.push_back(extract_light(light, cfg));
                } catch (const DataError&) {
                }
            }
    }
    return record;
}

}  // namespace roadtwin
