#pragma once

#include <array>
#include <string>
#include <vector>

#include "roadtwin/geostore.hpp"

namespace roadtwin {

struct Mesh {
    std::vector<Vec3> vertices;
    std::vector<std::array<uint32_t, 3>> faces;

    bool empty() const { return faces.empty(); }
    void append(const Mesh& other);
    void flip();  // reverse every face winding
};

struct NamedMesh {
    std::string name;
    Mesh mesh;
};

struct MeshOptions {
    double thickness = 0.0;  // plane-like extrusion depth; 0 = top faces only
};

/// Ear-clipping triangulation (holes bridged into the shell). Indices address
/// the polygon's vertices in storage order: shell first, then holes in order.
std::vector<std::array<uint32_t, 3>> triangulate_polygon(const Polygon3D& polygon);

/// Upward-facing triangulated caps over every polygon; thickness > 0 extrudes
/// each polygon downward into a closed prism instead.
Mesh mesh_plane_like(const MultiPolygon3D& polygons, double thickness = 0.0);

/// Closed solid between two polygons in vertex correspondence: both caps plus
/// the tri-face side wall (ACD / ADB per adjacent pair), oriented outward.
Mesh mesh_pair(const Polygon3D& front, const Polygon3D& back);

/// Closed loft over >= 2 rings with equal vertex counts: tri-face side bands
/// between adjacent rings plus triangulated end caps, oriented outward.
Mesh mesh_ring_series(const std::vector<Polygon3D>& rings);

/// One mesh per Table-1 leaf group, named by its key path.
std::vector<NamedMesh> build_record_mesh(const GeometryRecord& record,
                                         const MeshOptions& options = {});

double surface_area(const Mesh& mesh);
double signed_volume(const Mesh& mesh);

/// Every directed edge used exactly once (so each undirected edge borders
/// exactly two faces with opposite orientation).
bool is_closed_manifold(const Mesh& mesh);

enum class MeshFormat { OBJ, PLY };

void export_meshes(const std::vector<NamedMesh>& meshes, const std::string& path,
                   MeshFormat format);
std::vector<NamedMesh> import_obj(const std::string& path);

}  // namespace roadtwin
