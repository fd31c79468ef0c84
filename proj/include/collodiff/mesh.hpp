#pragma once

#include <array>
#include <string>
#include <vector>

#include "collodiff/vec.hpp"

namespace collodiff {

// Indexed triangle mesh with per-vertex positions and UVs. Undirected edge
// adjacency is built explicitly (build_adjacency) and must be refreshed after
// any connectivity change; pure vertex moves keep it valid.
struct Mesh {
    std::vector<Vec3> positions;
    std::vector<Vec2> uvs;  // empty or one per vertex
    std::vector<std::array<int, 3>> triangles;

    struct Edge {
        int v0, v1;  // v0 < v1
        int f0, f1;  // f1 == -1 for boundary edges
    };
    std::vector<Edge> edges;
    bool has_adjacency = false;
    bool manifold = false;

    int vertex_count() const { return int(positions.size()); }
    int triangle_count() const { return int(triangles.size()); }

    Vec3 face_normal_unnormalized(int f) const {
        const auto& t = triangles[f];
        return cross(positions[t[1]] - positions[t[0]], positions[t[2]] - positions[t[0]]);
    }
    double face_area(int f) const { return 0.5 * length(face_normal_unnormalized(f)); }

    Vec3 bbox_min() const;
    Vec3 bbox_max() const;
    double bbox_diagonal() const { return length(bbox_max() - bbox_min()); }
};

// Validates triangle indices, fills mesh.edges, and sets the manifold flag.
// Throws NonManifoldEdge if any edge has more than two incident faces.
void build_adjacency(Mesh& mesh);

enum class NormalMode { AreaWeighted, FaceFlat };

// Per-vertex normals as the normalized area-weighted sum of incident face
// normals. A vertex whose weighted sum nearly cancels falls back to one of
// its incident face normals.
std::vector<Vec3> vertex_normals(const Mesh& mesh);

// Mean over `points` of the exact Euclidean distance to the nearest triangle.
double point_to_mesh_distance(const std::vector<Vec3>& points, const Mesh& mesh);

// Exact closest point on a single triangle.
Vec3 closest_point_on_triangle(const Vec3& p, const Vec3& a, const Vec3& b, const Vec3& c);
double point_triangle_distance(const Vec3& p, const Vec3& a, const Vec3& b, const Vec3& c);

// Exact triangle-triangle overlap via separating axes; `tol` treats
// near-touching configurations as disjoint.
bool triangles_intersect(const Vec3& a0, const Vec3& a1, const Vec3& a2,
                         const Vec3& b0, const Vec3& b1, const Vec3& b2,
                         double tol = 1e-10);

// True iff any two non-adjacent (no shared vertex) triangles overlap.
// BVH-accelerated; `pairs`, when given, receives the offending pairs.
bool self_intersects(const Mesh& mesh, std::vector<std::pair<int, int>>* pairs = nullptr);

// Samples `count` points uniformly by area on the mesh surface.
std::vector<Vec3> sample_surface_points(const Mesh& mesh, int count, uint64_t seed);

// Average point-to-mesh distance from samples on `from` to `to`, divided by
// the longest bounding-box side of `to` (unit-bounding-box normalization).
double normalized_point_to_mesh(const Mesh& from, const Mesh& to, int samples, uint64_t seed);

// Procedural shapes (unit bounding box unless noted).
Mesh make_icosphere(int subdivisions, double radius = 0.5);
Mesh make_ellipsoid(int subdivisions, const Vec3& semi_axes);
Mesh make_blob(int subdivisions, uint64_t seed, double amplitude = 0.15);
Mesh make_quad(const Vec3& center, const Vec3& span_u, const Vec3& span_v);
Mesh make_tetrahedron(double scale = 0.5);

// Projects each position onto [0,1]^2 via spherical coordinates around the
// centroid; adequate UVs for the genus-0 shapes above.
void assign_spherical_uvs(Mesh& mesh);

// Wavefront OBJ (v / vt / f, indices as v or v/vt). Positions written with
// nine significant digits.
Mesh load_obj(const std::string& path);
void save_obj(const Mesh& mesh, const std::string& path);

}  // namespace collodiff
