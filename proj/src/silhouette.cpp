#include "collodiff/silhouette.hpp"

#include <cmath>

#include "collodiff/errors.hpp"

namespace collodiff {

namespace {

int sign_of(double v) { return (v > 0) - (v < 0); }

// Liang-Barsky: clip s-range of q(s) = q0 + s*(q1-q0) to [0,w]x[0,h].
bool clip_to_rect(const Vec2& q0, const Vec2& q1, double w, double h, double& s0, double& s1) {
    s0 = 0;
    s1 = 1;
    Vec2 d = q1 - q0;
    const double p[4] = {-d.x, d.x, -d.y, d.y};
    const double q[4] = {q0.x - 0.0, w - q0.x, q0.y - 0.0, h - q0.y};
    for (int i = 0; i < 4; ++i) {
        if (std::abs(p[i]) < 1e-300) {
            if (q[i] < 0) return false;  // parallel and outside
            continue;
        }
        double r = q[i] / p[i];
        if (p[i] < 0) {
            if (r > s1) return false;
            if (r > s0) s0 = r;
        } else {
            if (r < s0) return false;
            if (r < s1) s1 = r;
        }
    }
    return s1 > s0;
}

}  // namespace

bool is_silhouette_edge(const Mesh& mesh, const Mesh::Edge& edge, const Camera& view) {
    if (edge.f1 < 0) return true;  // boundary edge
    Vec3 mid = (mesh.positions[edge.v0] + mesh.positions[edge.v1]) * 0.5;
    Vec3 d = mid - view.origin;
    double a = dot(mesh.face_normal_unnormalized(edge.f0), d);
    double b = dot(mesh.face_normal_unnormalized(edge.f1), d);
    return sign_of(a) != sign_of(b);
}

double segment_param_2d_to_3d(const SilhouetteSegment& seg, double s) {
    // t/z interpolates linearly along the projected segment
    double w0 = (1.0 - s) / seg.z0;
    double w1 = s / seg.z1;
    return (w0 * seg.t0 + w1 * seg.t1) / (w0 + w1);
}

SilhouetteSet extract_silhouettes(const Mesh& mesh, const Camera& view) {
    if (!mesh.has_adjacency) throw Error("extract_silhouettes requires adjacency");
    SilhouetteSet set;
    const double znear = 1e-6;

    for (const auto& edge : mesh.edges) {
        if (!is_silhouette_edge(mesh, edge, view)) continue;

        Vec3 a = mesh.positions[edge.v0];
        Vec3 b = mesh.positions[edge.v1];
        double za = dot(a - view.origin, view.forward);
        double zb = dot(b - view.origin, view.forward);
        if (za <= znear && zb <= znear) continue;  // fully behind the camera

        // near-plane clip in the 3D edge parameter (depth is linear in t)
        double t0 = 0, t1 = 1;
        if (za <= znear) t0 = (znear - za) / (zb - za);
        if (zb <= znear) t1 = (znear - za) / (zb - za);
        Vec3 pa = a + (b - a) * t0;
        Vec3 pb = a + (b - a) * t1;
        double z0, z1;
        auto qa = project(view, pa, &z0);
        auto qb = project(view, pb, &z1);
        if (!qa || !qb) continue;

        double s0, s1;
        if (!clip_to_rect(*qa, *qb, view.width, view.height, s0, s1)) continue;

        SilhouetteSegment seg;
        seg.v0 = edge.v0;
        seg.v1 = edge.v1;
        seg.p0 = a;
        seg.p1 = b;
        seg.q0 = *qa + (*qb - *qa) * s0;
        seg.q1 = *qa + (*qb - *qa) * s1;
        seg.length_px = length(seg.q1 - seg.q0);
        if (seg.length_px <= 0) continue;

        // convert the 2D clip range back to 3D edge parameters and depths
        double u0 = ((1 - s0) / z0 * t0 + s0 / z1 * t1) / ((1 - s0) / z0 + s0 / z1);
        double u1 = ((1 - s1) / z0 * t0 + s1 / z1 * t1) / ((1 - s1) / z0 + s1 / z1);
        double zc0 = dot(a + (b - a) * u0 - view.origin, view.forward);
        double zc1 = dot(a + (b - a) * u1 - view.origin, view.forward);
        seg.t0 = u0;
        seg.t1 = u1;
        seg.z0 = zc0;
        seg.z1 = zc1;
        set.segments.push_back(seg);
        set.total_length += seg.length_px;
    }
    return set;
}

}  // namespace collodiff
