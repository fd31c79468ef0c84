#pragma once

#include <optional>
#include <vector>

#include "collodiff/vec.hpp"

namespace collodiff {

// Pinhole camera. Pixel coordinates are continuous, origin at the top-left
// corner, x right and y down; pixel (i, j) covers [i, i+1] x [j, j+1].
struct Camera {
    Vec3 origin;
    Vec3 right, up, forward;  // orthonormal
    double fov_deg = 45.0;    // vertical field of view
    int width = 64, height = 64;

    static Camera look_at(const Vec3& origin, const Vec3& target, const Vec3& up_hint,
                          double fov_deg, int width, int height);

    double tan_half_fov() const;
    double aspect() const { return double(width) / double(height); }
};

struct Ray {
    Vec3 origin;
    Vec3 dir;  // unit
};

Ray primary_ray(const Camera& cam, const Vec2& pixel);

// Pixel coordinates of a 3D point; empty when the point is at or behind the
// camera plane. `depth` receives the forward distance when non-null.
std::optional<Vec2> project(const Camera& cam, const Vec3& p, double* depth = nullptr);

// Jacobian d(pixel)/d(point) as two gradient rows.
struct ProjectionJacobian {
    Vec3 d_px;  // d pixel.x / d point
    Vec3 d_py;  // d pixel.y / d point
};
ProjectionJacobian projection_jacobian(const Camera& cam, const Vec3& p);

// `count` cameras on a radius-`radius` sphere looking at the origin, placed
// on a Fibonacci lattice rotated deterministically by `seed`.
std::vector<Camera> sample_views_on_sphere(int count, double radius, uint64_t seed,
                                           double fov_deg = 45.0, int width = 64,
                                           int height = 64);

}  // namespace collodiff
