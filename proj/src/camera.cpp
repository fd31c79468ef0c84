#include "collodiff/camera.hpp"

#include <cmath>

#include "collodiff/errors.hpp"
#include "collodiff/rng.hpp"

namespace collodiff {

Camera Camera::look_at(const Vec3& origin, const Vec3& target, const Vec3& up_hint,
                       double fov_deg, int width, int height) {
    Camera cam;
    cam.origin = origin;
    cam.forward = normalize(target - origin);
    Vec3 hint = up_hint;
    if (length(cross(cam.forward, hint)) < 1e-6) hint = Vec3(1, 0, 0);
    cam.right = normalize(cross(cam.forward, hint));
    cam.up = cross(cam.right, cam.forward);
    cam.fov_deg = fov_deg;
    cam.width = width;
    cam.height = height;
    return cam;
}

double Camera::tan_half_fov() const {
    return std::tan(fov_deg * 3.14159265358979323846 / 360.0);
}

Ray primary_ray(const Camera& cam, const Vec2& pixel) {
    const double th = cam.tan_half_fov();
    double sx = (2.0 * pixel.x / cam.width - 1.0) * th * cam.aspect();
    double sy = (1.0 - 2.0 * pixel.y / cam.height) * th;
    return {cam.origin, normalize(cam.forward + cam.right * sx + cam.up * sy)};
}

std::optional<Vec2> project(const Camera& cam, const Vec3& p, double* depth) {
    Vec3 v = p - cam.origin;
    double z = dot(v, cam.forward);
    if (depth) *depth = z;
    if (z <= 1e-12) return std::nullopt;
    const double th = cam.tan_half_fov();
    double nx = dot(v, cam.right) / (z * th * cam.aspect());
    double ny = dot(v, cam.up) / (z * th);
    return Vec2{(nx + 1.0) * 0.5 * cam.width, (1.0 - ny) * 0.5 * cam.height};
}

ProjectionJacobian projection_jacobian(const Camera& cam, const Vec3& p) {
    Vec3 v = p - cam.origin;
    double z = dot(v, cam.forward);
    const double th = cam.tan_half_fov();
    double r_dot = dot(v, cam.right), u_dot = dot(v, cam.up);
    // pixel.x = W/2 * (1 + (v.r)/(z*th*aspect)); d/dp with v = p - origin
    double cx = cam.width / (2.0 * th * cam.aspect());
    double cy = cam.height / (2.0 * th);
    ProjectionJacobian j;
    j.d_px = (cam.right * (1.0 / z) - cam.forward * (r_dot / (z * z))) * cx;
    j.d_py = (cam.up * (1.0 / z) - cam.forward * (u_dot / (z * z))) * (-cy);
    return j;
}

std::vector<Camera> sample_views_on_sphere(int count, double radius, uint64_t seed,
                                           double fov_deg, int width, int height) {
    if (count < 1) throw Error("view count must be >= 1");
    std::vector<Camera> cams;
    cams.reserve(count);
    Rng rng(seed, 0xf1b0);
    const double phase = rng.next_double() * 6.283185307179586;
    const double golden_angle = 2.399963229728653;  // pi * (3 - sqrt(5))
    for (int i = 0; i < count; ++i) {
        double z = count == 1 ? 0.3 : 1.0 - 2.0 * (i + 0.5) / count;
        double r = std::sqrt(std::max(0.0, 1.0 - z * z));
        double phi = golden_angle * i + phase;
        Vec3 pos(radius * r * std::cos(phi), radius * r * std::sin(phi), radius * z);
        cams.push_back(Camera::look_at(pos, Vec3(0, 0, 0), Vec3(0, 0, 1), fov_deg, width, height));
    }
    return cams;
}

}  // namespace collodiff
