#pragma once

#include <optional>
#include <vector>

#include "collodiff/mesh.hpp"
#include "collodiff/vec.hpp"

namespace collodiff {

// Ray hit against a mesh. Barycentrics satisfy b0+b1+b2 == 1; `point` is the
// barycentric combination of the triangle vertices; `normal` is the
// interpolated unit shading normal (or the face normal in FaceFlat mode).
struct HitRecord {
    int tri = -1;
    double b0 = 0, b1 = 0, b2 = 0;
    Vec3 point;
    double t = 0;
    Vec2 uv;
    Vec3 normal;
};

struct ClosestPoint {
    int tri = -1;
    Vec3 point;
    double distance = 0;
    double b0 = 0, b1 = 0, b2 = 0;
};

// Watertight-enough ray intersection for closed double-precision meshes at
// desk scale: Moller-Trumbore per triangle, SAH-built tree. Immutable after
// construction; all queries are const and thread-safe.
class Bvh {
public:
    explicit Bvh(const Mesh& mesh);

    // Nearest hit with t > t_min. t_min < 0 uses the default 1e-4 x bbox
    // diagonal. The caller supplies vertex normals for shading interpolation;
    // pass nullptr to get the geometric face normal.
    std::optional<HitRecord> intersect(const Mesh& mesh, const Vec3& origin, const Vec3& dir,
                                       const std::vector<Vec3>* normals = nullptr,
                                       double t_min = -1.0) const;

    ClosestPoint closest_point(const Mesh& mesh, const Vec3& query) const;

    // Indices of triangles whose bounding box overlaps [lo, hi].
    void collect_aabb_overlaps(const Vec3& lo, const Vec3& hi, std::vector<int>& out) const;

    double default_t_min() const { return default_t_min_; }

private:
    struct Node {
        Vec3 lo, hi;
        int left = -1;        // internal: children at left, left+1
        int first = 0, count = 0;  // leaf: range into tri_order_
        bool is_leaf() const { return count > 0; }
    };

    void build(const Mesh& mesh);

    std::vector<Node> nodes_;
    std::vector<int> tri_order_;
    double default_t_min_ = 1e-8;
};

// Shared by Bvh and the brute-force test oracles so both paths agree bit for
// bit on individual triangles.
bool ray_triangle(const Vec3& origin, const Vec3& dir, const Vec3& p0, const Vec3& p1,
                  const Vec3& p2, double& t, double& b1, double& b2);

HitRecord make_hit_record(const Mesh& mesh, const std::vector<Vec3>* normals, int tri,
                          double t, double b1, double b2, const Vec3& origin, const Vec3& dir);

}  // namespace collodiff
