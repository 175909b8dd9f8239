#include "roadtwin/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <limits>
#include <map>
#include <sstream>

namespace roadtwin {

void Mesh::append(const Mesh& other) {
    const uint32_t base = static_cast<uint32_t>(vertices.size());
    vertices.insert(vertices.end(), other.vertices.begin(), other.vertices.end());
    faces.reserve(faces.size() + other.faces.size());
    for (const auto& f : other.faces) faces.push_back({f[0] + base, f[1] + base, f[2] + base});
}

void Mesh::flip() {
    for (auto& f : faces) std::swap(f[1], f[2]);
}

namespace {

double cross2(const Vec2& o, const Vec2& a, const Vec2& b) {
    return (a.x - o.x) * (b.y - o.y) - (a.y - o.y) * (b.x - o.x);
}

struct RingVertex {
    uint32_t index;  // into the polygon's storage order
    Vec2 p;
};

// Pick the projection plane from the Newell normal and return the polygon's
// rings as 2D working copies carrying original indices.
std::vector<std::vector<RingVertex>> project_rings(const Polygon3D& polygon) {
    Vec3 normal{0, 0, 0};
    const auto& sv = polygon.shell.vertices;
    for (size_t i = 0, j = sv.size() - 1; i < sv.size(); j = i++) {
        const Vec3& a = sv[j];
        const Vec3& b = sv[i];
        normal.x += (a.y - b.y) * (a.z + b.z);
        normal.y += (a.z - b.z) * (a.x + b.x);
        normal.z += (a.x - b.x) * (a.y + b.y);
    }
    const double ax = std::abs(normal.x), ay = std::abs(normal.y), az = std::abs(normal.z);
    Plane plane = Plane::XY;
    if (ax >= ay && ax >= az) plane = Plane::YZ;
    else if (ay >= az) plane = Plane::XZ;

    std::vector<std::vector<RingVertex>> rings;
    uint32_t idx = 0;
    auto add_ring = [&](const std::vector<Vec3>& verts) {
        std::vector<RingVertex> ring;
        ring.reserve(verts.size());
        for (const Vec3& v : verts) ring.push_back({idx++, project(v, plane)});
        rings.push_back(std::move(ring));
    };
    add_ring(sv);
    for (const auto& hole : polygon.holes) add_ring(hole.vertices);
    return rings;
}

double ring_area2(const std::vector<RingVertex>& ring) {
    double a = 0;
    for (size_t i = 0, j = ring.size() - 1; i < ring.size(); j = i++)
        a += ring[j].p.x * ring[i].p.y - ring[i].p.x * ring[j].p.y;
    return a;
}

// Splice a hole into the outer ring via a bridge from the hole's max-x vertex
// to a visible outer vertex (Eberly's method). Returns false when no bridge
// exists (the hole is degenerate or not inside the shell); such holes are
// skipped rather than failing the whole polygon.
bool splice_hole(std::vector<RingVertex>& outer, std::vector<RingVertex> hole) {
    size_t m = 0;
    for (size_t i = 1; i < hole.size(); ++i)
        if (hole[i].p.x > hole[m].p.x) m = i;
    const Vec2 M = hole[m].p;

    // Closest +X intersection of the ray from M with the outer boundary.
    double best_x = std::numeric_limits<double>::max();
    size_t edge_i = SIZE_MAX;
    Vec2 I;
    for (size_t i = 0, j = outer.size() - 1; i < outer.size(); j = i++) {
        const Vec2& a = outer[j].p;
        const Vec2& b = outer[i].p;
        if ((a.y > M.y) == (b.y > M.y)) continue;
        const double t = (M.y - a.y) / (b.y - a.y);
        const double x = a.x + t * (b.x - a.x);
        if (x >= M.x - 1e-12 && x < best_x) {
            best_x = x;
            edge_i = i;
            I = {x, M.y};
        }
    }
    if (edge_i == SIZE_MAX) return false;

    // Candidate bridge endpoint: the edge endpoint with larger x; replace it
    // with any reflex outer vertex inside triangle (M, I, P) closest in angle.
    const size_t j = (edge_i + outer.size() - 1) % outer.size();
    size_t p = outer[edge_i].p.x > outer[j].p.x ? edge_i : j;
    const Vec2 P0 = outer[p].p;
    const double orient = cross2(M, I, P0) >= 0 ? 1.0 : -1.0;
    double best_metric = std::numeric_limits<double>::max();
    for (size_t k = 0; k < outer.size(); ++k) {
        if (k == p) continue;
        const Vec2& r = outer[k].p;
        const size_t kp = (k + outer.size() - 1) % outer.size();
        const size_t kn = (k + 1) % outer.size();
        if (cross2(outer[kp].p, outer[k].p, outer[kn].p) >= 0) continue;  // convex
        if (orient * cross2(M, I, r) < -1e-12 || orient * cross2(I, P0, r) < -1e-12 ||
            orient * cross2(P0, M, r) < -1e-12)
            continue;  // outside the candidate triangle
        const double dx = r.x - M.x;
        const double metric = dx <= 0 ? std::numeric_limits<double>::max()
                                      : std::abs(r.y - M.y) / dx;  // tan of the angle
        if (metric < best_metric || (metric == best_metric && r.x < outer[p].p.x)) {
            best_metric = metric;
            p = k;
        }
    }

    std::vector<RingVertex> merged;
    merged.reserve(outer.size() + hole.size() + 2);
    merged.insert(merged.end(), outer.begin(), outer.begin() + static_cast<long>(p) + 1);
    for (size_t k = 0; k <= hole.size(); ++k) merged.push_back(hole[(m + k) % hole.size()]);
    merged.push_back(outer[p]);
    merged.insert(merged.end(), outer.begin() + static_cast<long>(p) + 1, outer.end());
    outer = std::move(merged);
    return true;
}

std::vector<std::array<uint32_t, 3>> ear_clip(std::vector<RingVertex> ring) {
    std::vector<std::array<uint32_t, 3>> tris;
    if (ring.size() < 3) return tris;
    tris.reserve(ring.size() - 2);

    double scale = 0;
    for (const RingVertex& v : ring) scale = std::max({scale, std::abs(v.p.x), std::abs(v.p.y)});
    const double eps = std::max(1e-12, scale * scale * 1e-14);

    while (ring.size() > 3) {
        const size_t n = ring.size();
        size_t ear = SIZE_MAX;
        double fallback_area = std::numeric_limits<double>::max();
        size_t fallback = SIZE_MAX;
        for (size_t i = 0; i < n; ++i) {
            const Vec2& a = ring[(i + n - 1) % n].p;
            const Vec2& b = ring[i].p;
            const Vec2& c = ring[(i + 1) % n].p;
            const double area2 = cross2(a, b, c);
            if (area2 < -eps) continue;  // reflex
            bool blocked = false;
            for (size_t k = 0; k < n && !blocked; ++k) {
                if (k == i || k == (i + n - 1) % n || k == (i + 1) % n) continue;
                const Vec2& q = ring[k].p;
                if (cross2(a, b, q) > eps && cross2(b, c, q) > eps && cross2(c, a, q) > eps)
                    blocked = true;
            }
            if (blocked) continue;
            if (area2 > eps) {
                ear = i;
                break;
            }
            if (area2 < fallback_area) {
                fallback_area = area2;
                fallback = i;
            }
        }
        if (ear == SIZE_MAX) ear = fallback;
        if (ear == SIZE_MAX) {
            // No clean ear: the ring pinches through shared bridge vertices.
            // Clip the flattest convex corner anyway; this keeps every ring
            // edge in the triangulation (closed meshes stay closed) at the
            // cost of local face overlap.
            double best = std::numeric_limits<double>::max();
            for (size_t i = 0; i < n; ++i) {
                const double area2 = cross2(ring[(i + n - 1) % n].p, ring[i].p,
                                            ring[(i + 1) % n].p);
                if (area2 >= -eps && area2 < best) {
                    best = area2;
                    ear = i;
                }
            }
        }
        if (ear == SIZE_MAX) {
            // Fully inverted remnant; clip the least-negative corner so the
            // remaining ring edges still get consumed.
            double best = -std::numeric_limits<double>::max();
            for (size_t i = 0; i < n; ++i) {
                const double area2 = cross2(ring[(i + n - 1) % n].p, ring[i].p,
                                            ring[(i + 1) % n].p);
                if (area2 > best) {
                    best = area2;
                    ear = i;
                }
            }
        }
        const size_t prev = (ear + ring.size() - 1) % ring.size();
        const size_t next = (ear + 1) % ring.size();
        const std::array<uint32_t, 3> t{ring[prev].index, ring[ear].index, ring[next].index};
        // skip zero-width spikes where a bridge vertex meets its own copy
        if (t[0] != t[1] && t[1] != t[2] && t[0] != t[2]) tris.push_back(t);
        ring.erase(ring.begin() + static_cast<long>(ear));
    }
    const std::array<uint32_t, 3> last{ring[0].index, ring[1].index, ring[2].index};
    if (last[0] != last[1] && last[1] != last[2] && last[0] != last[2]) tris.push_back(last);
    return tris;
}

std::vector<Vec3> flatten_vertices(const Polygon3D& polygon) {
    std::vector<Vec3> out = polygon.shell.vertices;
    for (const auto& hole : polygon.holes)
        out.insert(out.end(), hole.vertices.begin(), hole.vertices.end());
    return out;
}

// Directed boundary edges of a triangulation (those whose reverse is absent).
std::vector<std::array<uint32_t, 2>> boundary_edges(
    const std::vector<std::array<uint32_t, 3>>& tris) {
    std::map<std::pair<uint32_t, uint32_t>, int> count;
    for (const auto& t : tris)
        for (int e = 0; e < 3; ++e) count[{t[e], t[(e + 1) % 3]}]++;
    std::vector<std::array<uint32_t, 2>> out;
    for (const auto& [edge, c] : count) {
        auto rev = count.find({edge.second, edge.first});
        const int rc = rev == count.end() ? 0 : rev->second;
        if (c - rc == 1) out.push_back({edge.first, edge.second});
        else if (c - rc > 1)
            throw DataError("triangulation: non-manifold cap boundary");
    }
    return out;
}

void orient_outward(Mesh& mesh) {
    if (signed_volume(mesh) < 0) mesh.flip();
}

}  // namespace

std::vector<std::array<uint32_t, 3>> triangulate_polygon(const Polygon3D& polygon) {
    if (polygon.shell.vertices.size() < 3) throw DataError("triangulation: shell has < 3 vertices");
    auto rings = project_rings(polygon);
    // Work in a frame where the shell is CCW; mirroring (not reversing) keeps
    // the triangles' boundary edges traversing each ring in storage order.
    const bool mirror = ring_area2(rings[0]) < 0;
    if (mirror)
        for (auto& ring : rings)
            for (RingVertex& v : ring) v.p.y = -v.p.y;
    std::vector<RingVertex> outer = std::move(rings[0]);
    // Merge holes right-to-left so earlier bridges cannot block later ones.
    std::vector<size_t> order;
    for (size_t h = 1; h < rings.size(); ++h) order.push_back(h);
    std::sort(order.begin(), order.end(), [&](size_t a, size_t b) {
        auto max_x = [&](size_t h) {
            double m = -std::numeric_limits<double>::max();
            for (const RingVertex& v : rings[h]) m = std::max(m, v.p.x);
            return m;
        };
        return max_x(a) > max_x(b);
    });
    for (size_t h : order) {
        auto hole = rings[h];
        if (ring_area2(hole) > 0) std::reverse(hole.begin(), hole.end());
        splice_hole(outer, std::move(hole));
    }
    auto tris = ear_clip(std::move(outer));
    if (mirror)
        for (auto& t : tris) std::swap(t[1], t[2]);
    return tris;
}

Mesh mesh_plane_like(const MultiPolygon3D& polygons, double thickness) {
    Mesh out;
    for (const Polygon3D& poly : polygons) {
        if (thickness > 0) {
            Polygon3D back = poly;
            for (Vec3& v : back.shell.vertices) v.z -= thickness;
            for (auto& h : back.holes)
                for (Vec3& v : h.vertices) v.z -= thickness;
            out.append(mesh_pair(poly, back));
            continue;
        }
        Mesh cap;
        cap.vertices = flatten_vertices(poly);
        for (const auto& t : triangulate_polygon(poly)) {
            const Vec3 ab = cap.vertices[t[1]] - cap.vertices[t[0]];
            const Vec3 ac = cap.vertices[t[2]] - cap.vertices[t[0]];
            const double nz = ab.x * ac.y - ab.y * ac.x;
            if (std::abs(nz) < 1e-12) continue;  // open cap: slivers are droppable
            cap.faces.push_back(nz > 0 ? t : std::array<uint32_t, 3>{t[0], t[2], t[1]});
        }
        out.append(cap);
    }
    return out;
}

Mesh mesh_pair(const Polygon3D& front, const Polygon3D& back) {
    auto check = [](const Ring3D& a, const Ring3D& b) {
        if (a.vertices.size() != b.vertices.size())
            throw DataError("mesh_pair: front/back vertex counts differ");
    };
    check(front.shell, back.shell);
    if (front.holes.size() != back.holes.size())
        throw DataError("mesh_pair: front/back hole counts differ");
    for (size_t h = 0; h < front.holes.size(); ++h) check(front.holes[h], back.holes[h]);

    const auto tris = triangulate_polygon(front);
    Mesh mesh;
    mesh.vertices = flatten_vertices(front);
    const uint32_t n = static_cast<uint32_t>(mesh.vertices.size());
    const std::vector<Vec3> back_verts = flatten_vertices(back);
    mesh.vertices.insert(mesh.vertices.end(), back_verts.begin(), back_verts.end());

    for (const auto& t : tris) mesh.faces.push_back(t);
    for (const auto& t : tris) mesh.faces.push_back({t[0] + n, t[2] + n, t[1] + n});
    for (const auto& [a, b] : boundary_edges(tris)) {
        mesh.faces.push_back({b, a, a + n});
        mesh.faces.push_back({b, a + n, b + n});
    }
    orient_outward(mesh);
    return mesh;
}

Mesh mesh_ring_series(const std::vector<Polygon3D>& rings) {
    if (rings.size() < 2) throw DataError("mesh_ring_series: fewer than 2 rings");
    const uint32_t n = static_cast<uint32_t>(rings[0].shell.vertices.size());
    if (n < 3) throw DataError("mesh_ring_series: ring has < 3 vertices");
    for (const Polygon3D& r : rings)
        if (r.shell.vertices.size() != n || !r.holes.empty())
            throw DataError("mesh_ring_series: rings must share one vertex count, no holes");

    Mesh mesh;
    for (const Polygon3D& r : rings)
        mesh.vertices.insert(mesh.vertices.end(), r.shell.vertices.begin(),
                             r.shell.vertices.end());

    const uint32_t m = static_cast<uint32_t>(rings.size());
    for (uint32_t k = 0; k + 1 < m; ++k) {
        const uint32_t base = k * n;
        for (uint32_t i = 0; i < n; ++i) {
            const uint32_t a = base + i, b = base + (i + 1) % n;
            const uint32_t c = a + n, d = b + n;
            mesh.faces.push_back({a, c, d});
            mesh.faces.push_back({a, d, b});
        }
    }
    // Caps: the side bands consume (b, a) at the bottom and (c, d) at the top,
    // so the bottom cap must run each ring edge forward and the top backward.
    auto add_cap = [&](uint32_t ring_index, bool forward) {
        auto tris = triangulate_polygon(rings[ring_index]);
        bool runs_forward = true;
        for (const auto& [a, b] : boundary_edges(tris)) {
            runs_forward = (b == (a + 1) % n);
            break;
        }
        const uint32_t base = ring_index * n;
        for (auto t : tris) {
            if (runs_forward != forward) std::swap(t[1], t[2]);
            mesh.faces.push_back({t[0] + base, t[1] + base, t[2] + base});
        }
    };
    add_cap(0, true);
    add_cap(m - 1, false);
    orient_outward(mesh);
    return mesh;
}

std::vector<NamedMesh> build_record_mesh(const GeometryRecord& record,
                                         const MeshOptions& options) {
    std::vector<NamedMesh> out;
    auto guarded = [](const std::string& key, auto&& fn) {
        try {
            return fn();
        } catch (const DataError& e) {
            throw DataError(key + ": " + e.what());
        }
    };
    auto pair_mesh = [&](const PairRecord& pair, const std::string& key) {
        Mesh m;
        for (size_t i = 0; i < pair.front.size(); ++i)
            m.append(guarded(key, [&] { return mesh_pair(pair.front[i], pair.back[i]); }));
        return m;
    };

    switch (record.kind) {
        case RecordKind::PlaneLike:
            out.push_back({"MultiPolygon", guarded("MultiPolygon", [&] {
                               return mesh_plane_like(record.plane, options.thickness);
                           })});
            break;
        case RecordKind::Guardrail:
            for (size_t i = 0; i < record.guardrails.size(); ++i) {
                const std::string key = "Guardrail_" + std::to_string(i);
                out.push_back({key, pair_mesh(record.guardrails[i], key)});
            }
            break;
        case RecordKind::PoleLike:
            for (size_t i = 0; i < record.poles.size(); ++i) {
                const std::string key = "Poles/Pole_" + std::to_string(i);
                out.push_back({key, guarded(key, [&] { return mesh_ring_series(record.poles[i]); })});
            }
            for (size_t i = 0; i < record.panels.size(); ++i) {
                const std::string key = "Panels/Panel_" + std::to_string(i);
                out.push_back({key, pair_mesh(record.panels[i], key)});
            }
            for (size_t i = 0; i < record.lights.size(); ++i) {
                const std::string key = "Lights/Light_" + std::to_string(i);
                out.push_back({key, guarded(key, [&] { return mesh_ring_series(record.lights[i]); })});
            }
            break;
    }
    return out;
}

double surface_area(const Mesh& mesh) {
    double area = 0;
    for (const auto& f : mesh.faces) {
        const Vec3 ab = mesh.vertices[f[1]] - mesh.vertices[f[0]];
        const Vec3 ac = mesh.vertices[f[2]] - mesh.vertices[f[0]];
        const Vec3 cr{ab.y * ac.z - ab.z * ac.y, ab.z * ac.x - ab.x * ac.z,
                      ab.x * ac.y - ab.y * ac.x};
        area += 0.5 * cr.norm();
    }
    return area;
}

double signed_volume(const Mesh& mesh) {
    double vol = 0;
    for (const auto& f : mesh.faces) {
        const Vec3& a = mesh.vertices[f[0]];
        const Vec3& b = mesh.vertices[f[1]];
        const Vec3& c = mesh.vertices[f[2]];
        vol += a.x * (b.y * c.z - b.z * c.y) - a.y * (b.x * c.z - b.z * c.x) +
               a.z * (b.x * c.y - b.y * c.x);
    }
    return vol / 6.0;
}

bool is_closed_manifold(const Mesh& mesh) {
    if (mesh.faces.empty()) return false;
    std::map<std::pair<uint32_t, uint32_t>, int> directed;
    for (const auto& f : mesh.faces) {
        if (f[0] == f[1] || f[1] == f[2] || f[0] == f[2]) return false;
        for (int e = 0; e < 3; ++e) {
            if (f[e] >= mesh.vertices.size()) return false;
            if (++directed[{f[e], f[(e + 1) % 3]}] > 1) return false;
        }
    }
    for (const auto& [edge, c] : directed) {
        auto rev = directed.find({edge.second, edge.first});
        if (rev == directed.end() || rev->second != c) return false;
    }
    return true;
}

// --- I/O -------------------------------------------------------------------------

namespace {

std::string fmt_coord(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

}  // namespace

void export_meshes(const std::vector<NamedMesh>& meshes, const std::string& path,
                   MeshFormat format) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot open for writing: " + path);

    if (format == MeshFormat::OBJ) {
        uint32_t offset = 1;
        for (const NamedMesh& nm : meshes) {
            out << "o " << nm.name << "\n";
            for (const Vec3& v : nm.mesh.vertices)
                out << "v " << fmt_coord(v.x) << " " << fmt_coord(v.y) << " " << fmt_coord(v.z)
                    << "\n";
            for (const auto& f : nm.mesh.faces)
                out << "f " << f[0] + offset << " " << f[1] + offset << " " << f[2] + offset
                    << "\n";
            offset += static_cast<uint32_t>(nm.mesh.vertices.size());
        }
    } else {
        Mesh all;
        for (const NamedMesh& nm : meshes) all.append(nm.mesh);
        out << "ply\nformat binary_little_endian 1.0\n"
            << "element vertex " << all.vertices.size() << "\n"
            << "property double x\nproperty double y\nproperty double z\n"
            << "element face " << all.faces.size() << "\n"
            << "property list uchar int vertex_indices\nend_header\n";
        for (const Vec3& v : all.vertices) {
            const double xyz[3] = {v.x, v.y, v.z};
            out.write(reinterpret_cast<const char*>(xyz), sizeof(xyz));
        }
        for (const auto& f : all.faces) {
            const uint8_t count = 3;
            const int32_t idx[3] = {static_cast<int32_t>(f[0]), static_cast<int32_t>(f[1]),
                                    static_cast<int32_t>(f[2])};
            out.write(reinterpret_cast<const char*>(&count), 1);
            out.write(reinterpret_cast<const char*>(idx), sizeof(idx));
        }
    }
    if (!out) throw DataError("write failed: " + path);
}

std::vector<NamedMesh> import_obj(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open: " + path);
    std::vector<NamedMesh> meshes;
    std::vector<Vec3> all_vertices;
    size_t group_base = 0;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#') continue;
        std::istringstream ss(line);
        std::string tag;
        ss >> tag;
        if (tag == "o") {
            std::string name;
            std::getline(ss >> std::ws, name);
            meshes.push_back({name, {}});
            group_base = all_vertices.size();
        } else if (tag == "v") {
            Vec3 v;
            if (!(ss >> v.x >> v.y >> v.z)) throw DataError("bad vertex line: " + line);
            if (meshes.empty()) meshes.push_back({"default", {}});
            all_vertices.push_back(v);
            meshes.back().mesh.vertices.push_back(v);
        } else if (tag == "f") {
            long a, b, c;
            if (!(ss >> a >> b >> c)) throw DataError("bad face line: " + line);
            if (meshes.empty()) throw DataError("face before any vertex: " + line);
            auto local = [&](long i) {
                const long global = i > 0 ? i - 1 : static_cast<long>(all_vertices.size()) + i;
                const long rel = global - static_cast<long>(group_base);
                if (rel < 0 || rel >= static_cast<long>(meshes.back().mesh.vertices.size()))
                    throw DataError("face index crosses groups: " + line);
                return static_cast<uint32_t>(rel);
            };
            meshes.back().mesh.faces.push_back({local(a), local(b), local(c)});
        }
    }
    return meshes;
}

}  // namespace roadtwin
