#include "collodiff/laplacian.hpp"

#include <cmath>
#include <vector>

namespace collodiff {

namespace {

// cotangent of the angle at `apex` in triangle (apex, a, b)
double cot_at(const Vec3& apex, const Vec3& a, const Vec3& b) {
    Vec3 u = a - apex, v = b - apex;
    double cos_part = dot(u, v);
    double sin_part = length(cross(u, v));
    if (sin_part < 1e-300) return std::numeric_limits<double>::infinity();
    return cos_part / sin_part;
}

}  // namespace

Eigen::SparseMatrix<double> cotangent_laplacian(const Mesh& mesh, LaplacianMode mode) {
    const int n = mesh.vertex_count();
    std::vector<Eigen::Triplet<double>> triplets;
    triplets.reserve(mesh.edges.size() * 4);
    std::vector<double> diag(n, 0.0);

    for (const auto& e : mesh.edges) {
        double w = 1.0;
        if (mode == LaplacianMode::Cotangent) {
            w = 0.0;
            for (int f : {e.f0, e.f1}) {
                if (f < 0) continue;
                const auto& t = mesh.triangles[f];
                int opposite = t[0];
                for (int k = 0; k < 3; ++k)
                    if (t[k] != e.v0 && t[k] != e.v1) opposite = t[k];
                double c = cot_at(mesh.positions[opposite], mesh.positions[e.v0],
                                  mesh.positions[e.v1]);
                // degenerate triangles give non-finite cotangents; clamp
                if (!std::isfinite(c)) c = 1e4;
                w += 0.5 * c;
            }
            w = std::clamp(w, 0.0, 1e4);
        }
        triplets.emplace_back(e.v0, e.v1, w);
        triplets.emplace_back(e.v1, e.v0, w);
        diag[e.v0] -= w;
        diag[e.v1] -= w;
    }
    for (int i = 0; i < n; ++i) triplets.emplace_back(i, i, diag[i]);

    Eigen::SparseMatrix<double> L(n, n);
    L.setFromTriplets(triplets.begin(), triplets.end());
    return L;
}

Eigen::MatrixX3d position_matrix(const Mesh& mesh) {
    Eigen::MatrixX3d V(mesh.vertex_count(), 3);
    for (int i = 0; i < mesh.vertex_count(); ++i) {
        V(i, 0) = mesh.positions[i].x;
        V(i, 1) = mesh.positions[i].y;
        V(i, 2) = mesh.positions[i].z;
    }
    return V;
}

}  // namespace collodiff
