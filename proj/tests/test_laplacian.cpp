#include <doctest.h>

#include "collodiff/laplacian.hpp"
#include "collodiff/mesh.hpp"

using namespace collodiff;

namespace {

// regular triangulated patch in the plane: rows x cols grid of equilateral
// triangles
Mesh equilateral_patch(int rows, int cols) {
    Mesh m;
    const double h = std::sqrt(3.0) / 2.0;
    for (int r = 0; r <= rows; ++r)
        for (int c = 0; c <= cols; ++c)
            m.positions.push_back(Vec3(c + 0.5 * (r % 2), r * h, 0));
    auto idx = [&](int r, int c) { return r * (cols + 1) + c; };
    for (int r = 0; r < rows; ++r)
        for (int c = 0; c < cols; ++c) {
            if (r % 2 == 0) {
                m.triangles.push_back({idx(r, c), idx(r, c + 1), idx(r + 1, c)});
                m.triangles.push_back({idx(r, c + 1), idx(r + 1, c + 1), idx(r + 1, c)});
            } else {
                m.triangles.push_back({idx(r, c), idx(r + 1, c + 1), idx(r + 1, c)});
                m.triangles.push_back({idx(r, c), idx(r, c + 1), idx(r + 1, c + 1)});
            }
        }
    build_adjacency(m);
    return m;
}

bool is_interior(const Mesh& m, int v) {
    for (const auto& e : m.edges)
        if ((e.v0 == v || e.v1 == v) && e.f1 < 0) return false;
    return true;
}

}  // namespace

TEST_CASE("laplacian: rows sum to zero and symmetric") {
    for (auto mode : {LaplacianMode::Cotangent, LaplacianMode::Uniform}) {
        Mesh m = make_icosphere(2);
        auto L = cotangent_laplacian(m, mode);
        Eigen::VectorXd ones = Eigen::VectorXd::Ones(m.vertex_count());
        CHECK((L * ones).cwiseAbs().maxCoeff() < 1e-9);
        Eigen::SparseMatrix<double> diff = Eigen::SparseMatrix<double>(L.transpose()) - L;
        CHECK(diff.coeffs().cwiseAbs().maxCoeff() < 1e-12);
    }
}

TEST_CASE("laplacian: planar coordinates are harmonic on interior vertices") {
    Mesh m = equilateral_patch(6, 6);
    for (auto mode : {LaplacianMode::Cotangent, LaplacianMode::Uniform}) {
        auto L = cotangent_laplacian(m, mode);
        Eigen::MatrixX3d LV = L * position_matrix(m);
        for (int v = 0; v < m.vertex_count(); ++v)
            if (is_interior(m, v)) CHECK(LV.row(v).cwiseAbs().maxCoeff() < 1e-6);
    }
}

TEST_CASE("laplacian: uniform weights on tetrahedron computed by hand") {
    Mesh m = make_tetrahedron(1.0);
    auto L = cotangent_laplacian(m, LaplacianMode::Uniform);
    Eigen::MatrixX3d LV = L * position_matrix(m);
    // every vertex connects to the other three: row i = sum_j (v_j - v_i)
    for (int i = 0; i < 4; ++i) {
        Vec3 expected;
        for (int j = 0; j < 4; ++j)
            if (j != i) expected += m.positions[j] - m.positions[i];
        CHECK(LV(i, 0) == doctest::Approx(expected.x).epsilon(1e-12));
        CHECK(LV(i, 1) == doctest::Approx(expected.y).epsilon(1e-12));
        CHECK(LV(i, 2) == doctest::Approx(expected.z).epsilon(1e-12));
    }
}

TEST_CASE("laplacian: degenerate triangle weight clamped, stays finite") {
    Mesh m;
    m.positions = {{0, 0, 0}, {1, 0, 0}, {0.5, 1e-13, 0}, {0.5, -1, 0}};
    m.triangles = {{0, 1, 2}, {1, 0, 3}};
    build_adjacency(m);
    auto L = cotangent_laplacian(m, LaplacianMode::Cotangent);
    for (int k = 0; k < L.outerSize(); ++k)
        for (Eigen::SparseMatrix<double>::InnerIterator it(L, k); it; ++it) {
            CHECK(std::isfinite(it.value()));
            CHECK(std::abs(it.value()) <= 4e4 + 1);
        }
}
