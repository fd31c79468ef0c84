#include <cstdio>

#include "collodiff/errors.hpp"
#include "collodiff/optimize.hpp"
#include "collodiff/parallel.hpp"

namespace collodiff {

namespace {

double min_triangle_area(const Mesh& mesh) {
    double best = 1e300;
    for (int f = 0; f < mesh.triangle_count(); ++f) best = std::min(best, mesh.face_area(f));
    return best;
}

}  // namespace

Mesh robust_evolve(const Mesh& mesh, const std::vector<Vec3>& displacement,
                   double* applied_scale) {
    if (displacement.size() != size_t(mesh.vertex_count()))
        throw SizeMismatch("displacement count does not match vertices");
    if (self_intersects(mesh)) throw InputSelfIntersecting();
    if (applied_scale) *applied_scale = 0.0;

    bool any = false;
    for (const auto& d : displacement)
        if (d.x != 0 || d.y != 0 || d.z != 0) {
            any = true;
            break;
        }
    if (!any) {
        if (applied_scale) *applied_scale = 1.0;
        return mesh;
    }

    Mesh candidate = mesh;
    double s = 1.0;
    for (int attempt = 0; attempt <= 8; ++attempt, s *= 0.5) {
        for (int v = 0; v < mesh.vertex_count(); ++v)
            candidate.positions[v] = mesh.positions[v] + displacement[v] * s;
        if (min_triangle_area(candidate) <= 1e-12) continue;
        if (!self_intersects(candidate)) {
            if (applied_scale) *applied_scale = s;
            return candidate;
        }
    }
    if (log_level() >= 1)
        std::fprintf(stderr, "robust_evolve: displacement rejected at every scale, mesh kept\n");
    return mesh;
}

}  // namespace collodiff
