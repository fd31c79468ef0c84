#pragma once

// Shared fixtures and independent brute-force oracles for the test suite.
// Oracles deliberately avoid the library's accelerated code paths.

#include <cmath>
#include <functional>
#include <optional>
#include <vector>

#include "collodiff/bvh.hpp"
#include "collodiff/mesh.hpp"
#include "collodiff/render.hpp"
#include "collodiff/rng.hpp"
#include "collodiff/scene.hpp"

namespace collodiff::testing {

// Nearest hit by scanning every triangle with the shared ray-triangle test.
inline std::optional<HitRecord> brute_force_intersect(const Mesh& mesh, const Vec3& origin,
                                                      const Vec3& dir, double t_min) {
    double best_t = 1e300;
    int best_tri = -1;
    double best_b1 = 0, best_b2 = 0;
    for (int f = 0; f < mesh.triangle_count(); ++f) {
        const auto& tv = mesh.triangles[f];
        double t, b1, b2;
        if (ray_triangle(origin, dir, mesh.positions[tv[0]], mesh.positions[tv[1]],
                         mesh.positions[tv[2]], t, b1, b2) &&
            t > t_min && t < best_t) {
            best_t = t;
            best_tri = f;
            best_b1 = b1;
            best_b2 = b2;
        }
    }
    if (best_tri < 0) return std::nullopt;
    return make_hit_record(mesh, nullptr, best_tri, best_t, best_b1, best_b2, origin, dir);
}

inline double brute_force_point_mesh(const Vec3& p, const Mesh& mesh) {
    double best = 1e300;
    for (int f = 0; f < mesh.triangle_count(); ++f) {
        const auto& t = mesh.triangles[f];
        best = std::min(best, point_triangle_distance(p, mesh.positions[t[0]],
                                                      mesh.positions[t[1]],
                                                      mesh.positions[t[2]]));
    }
    return best;
}

inline bool brute_force_self_intersects(const Mesh& mesh) {
    for (int f = 0; f < mesh.triangle_count(); ++f)
        for (int g = f + 1; g < mesh.triangle_count(); ++g) {
            const auto& a = mesh.triangles[f];
            const auto& b = mesh.triangles[g];
            bool share = false;
            for (int i = 0; i < 3; ++i)
                for (int j = 0; j < 3; ++j)
                    if (a[i] == b[j]) share = true;
            if (share) continue;
            if (triangles_intersect(mesh.positions[a[0]], mesh.positions[a[1]],
                                    mesh.positions[a[2]], mesh.positions[b[0]],
                                    mesh.positions[b[1]], mesh.positions[b[2]]))
                return true;
        }
    return false;
}

// Square Lambertian plane at distance `dist`, normal facing the camera at
// the origin (camera looks along +z).
inline Scene lambertian_plane_scene(double dist, const Vec3& albedo, const Vec3& light,
                                    double span = 10.0, int image = 16, double fov = 45.0) {
    Scene scene;
    scene.mesh = make_quad(Vec3(0, 0, dist), Vec3(0, span, 0), Vec3(span, 0, 0));
    scene.maps = make_constant_maps(4, albedo, Vec3(0, 0, 0), 0.5);
    scene.light.intensity = light;
    scene.views = {Camera::look_at(Vec3(0, 0, 0), Vec3(0, 0, dist), Vec3(0, 1, 0), fov, image,
                                   image)};
    return scene;
}

// Analytic radiance of that plane for a camera ray with unit direction d:
// hit at t = dist/dz, mu = dz, I = I_e a_d dz^3 / (pi dist^2).
inline Vec3 plane_radiance(const Vec3& albedo, const Vec3& light, double dist, const Vec3& dir) {
    double dz = dir.z;
    if (dz <= 0) return Vec3();
    constexpr double kPi = 3.14159265358979323846;
    return light * albedo * (dz * dz * dz / (kPi * dist * dist));
}

inline Scene sphere_scene(int subdiv, int views, int image, double fov = 40.0,
                          double radius = 2.5, const Vec3& diffuse = Vec3(0.55, 0.4, 0.3),
                          const Vec3& specular = Vec3(0.05, 0.05, 0.05),
                          double roughness = 0.4, int tex_res = 8) {
    Scene scene;
    scene.mesh = make_icosphere(subdiv, 0.5);
    scene.maps = make_constant_maps(tex_res, diffuse, specular, roughness);
    scene.light.intensity = Vec3(20, 20, 20);
    scene.views = sample_views_on_sphere(views, radius, 11, fov, image, image);
    return scene;
}

// Central finite difference of a scalar function.
inline double central_fd(const std::function<double(double)>& f, double x, double h) {
    return (f(x + h) - f(x - h)) / (2.0 * h);
}

inline double rel_err(double a, double b, double floor = 1e-12) {
    return std::abs(a - b) / std::max({std::abs(a), std::abs(b), floor});
}

}  // namespace collodiff::testing
