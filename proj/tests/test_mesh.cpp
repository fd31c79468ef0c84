#include <doctest.h>

#include <filesystem>

#include "collodiff/errors.hpp"
#include "collodiff/mesh.hpp"
#include "collodiff/rng.hpp"
#include "support/test_scenes.hpp"

using namespace collodiff;
using namespace collodiff::testing;

TEST_CASE("adjacency: single triangle") {
    Mesh m;
    m.positions = {{0, 0, 0}, {1, 0, 0}, {0, 1, 0}};
    m.triangles = {{0, 1, 2}};
    build_adjacency(m);
    CHECK(m.edges.size() == 3);
    for (const auto& e : m.edges) CHECK(e.f1 == -1);
    CHECK_FALSE(m.manifold);  // open boundary
}

TEST_CASE("adjacency: two triangles sharing an edge") {
    Mesh m;
    m.positions = {{0, 0, 0}, {1, 0, 0}, {1, 1, 0}, {0, 1, 0}};
    m.triangles = {{0, 1, 2}, {0, 2, 3}};
    build_adjacency(m);
    CHECK(m.edges.size() == 5);
    int shared = 0, boundary = 0;
    for (const auto& e : m.edges) (e.f1 >= 0 ? shared : boundary)++;
    CHECK(shared == 1);
    CHECK(boundary == 4);
}

TEST_CASE("adjacency: tetrahedron is closed and manifold") {
    Mesh m = make_tetrahedron();
    CHECK(m.edges.size() == 6);
    for (const auto& e : m.edges) CHECK(e.f1 >= 0);
    CHECK(m.manifold);
}

TEST_CASE("adjacency: non-manifold edge reported") {
    Mesh m;
    m.positions = {{0, 0, 0}, {1, 0, 0}, {0, 1, 0}, {0, 0, 1}, {0, -1, 0}};
    m.triangles = {{0, 1, 2}, {0, 1, 3}, {0, 1, 4}};
    CHECK_THROWS_AS(build_adjacency(m), NonManifoldEdge);
}

TEST_CASE("vertex normals: flat square all +z") {
    Mesh m = make_quad(Vec3(0, 0, 0), Vec3(1, 0, 0), Vec3(0, 1, 0));
    auto normals = vertex_normals(m);
    for (const auto& n : normals) {
        CHECK(n.z == doctest::Approx(1.0).epsilon(1e-12));
        CHECK(length(n) == doctest::Approx(1.0).epsilon(1e-12));
    }
}

TEST_CASE("vertex normals: regular tetrahedron points away from centroid") {
    // centered at origin; each vertex normal must be the radial direction
    Mesh m = make_tetrahedron(1.0);
    auto normals = vertex_normals(m);
    for (int v = 0; v < 4; ++v) {
        Vec3 radial = normalize(m.positions[v]);
        CHECK(dot(normals[v], radial) == doctest::Approx(1.0).epsilon(1e-9));
    }
}

TEST_CASE("vertex normals: icosphere within 2 degrees of radial") {
    Mesh m = make_icosphere(2);
    auto normals = vertex_normals(m);
    double min_dot = 1.0;
    for (int v = 0; v < m.vertex_count(); ++v)
        min_dot = std::min(min_dot, dot(normals[v], normalize(m.positions[v])));
    CHECK(min_dot > std::cos(2.0 * 3.14159265 / 180.0));
}

TEST_CASE("point_to_mesh_distance: exact cases") {
    Mesh m = make_icosphere(2);
    CHECK(point_to_mesh_distance({m.positions[5]}, m) == doctest::Approx(0.0).epsilon(1e-12));

    Mesh tri;
    tri.positions = {{-5, -5, 0}, {5, -5, 0}, {0, 5, 0}};
    tri.triangles = {{0, 1, 2}};
    build_adjacency(tri);
    CHECK(point_to_mesh_distance({Vec3(0, 0, 1)}, tri) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("point_to_mesh_distance: matches brute force on random points") {
    Mesh m = make_icosphere(2);
    Rng rng(42);
    std::vector<Vec3> pts;
    double brute_sum = 0;
    for (int i = 0; i < 100; ++i) {
        Vec3 p(2 * rng.next_double() - 1, 2 * rng.next_double() - 1, 2 * rng.next_double() - 1);
        pts.push_back(p);
        brute_sum += brute_force_point_mesh(p, m);
    }
    CHECK(point_to_mesh_distance(pts, m) == doctest::Approx(brute_sum / 100).epsilon(1e-9));
}

TEST_CASE("point_to_mesh_distance: zero on surface samples") {
    Mesh m = make_icosphere(2);
    auto pts = sample_surface_points(m, 200, 9);
    CHECK(point_to_mesh_distance(pts, m) < 1e-12);
}

TEST_CASE("point_to_mesh_distance: empty mesh") {
    Mesh empty;
    CHECK_THROWS_AS(point_to_mesh_distance({Vec3(0, 0, 0)}, empty), EmptyMesh);
}

TEST_CASE("self_intersects: clean and broken meshes") {
    CHECK_FALSE(self_intersects(make_tetrahedron()));
    CHECK_FALSE(self_intersects(make_icosphere(2)));

    Mesh m;
    m.positions = {{0, 0, 0}, {1, 0, 0}, {0, 1, 0}, {0.3, 0.3, -1}, {0.5, 0.1, 1}, {0.1, 0.5, 1}};
    m.triangles = {{0, 1, 2}, {3, 4, 5}};
    build_adjacency(m);
    std::vector<std::pair<int, int>> pairs;
    CHECK(self_intersects(m, &pairs));
    REQUIRE(pairs.size() == 1);
    CHECK(pairs[0] == std::pair<int, int>(0, 1));
}

TEST_CASE("self_intersects: icosphere with a vertex pushed through the wall") {
    Mesh m = make_icosphere(2);
    m.positions[0] = -m.positions[0] * 1.2;  // punch through the far side
    CHECK(self_intersects(m));
    CHECK(brute_force_self_intersects(m));
}

TEST_CASE("self_intersects: invariant under reorder and rigid transform") {
    Mesh m = make_icosphere(1);
    m.positions[3] = -m.positions[3] * 1.3;
    bool base = self_intersects(m);
    CHECK(base == brute_force_self_intersects(m));

    Mesh shuffled = m;
    std::reverse(shuffled.triangles.begin(), shuffled.triangles.end());
    build_adjacency(shuffled);
    CHECK(self_intersects(shuffled) == base);

    Mesh moved = m;
    double c = std::cos(0.7), s = std::sin(0.7);
    for (auto& p : moved.positions) {
        Vec3 q(c * p.x - s * p.y, s * p.x + c * p.y, p.z);
        p = q + Vec3(5, -2, 3);
    }
    CHECK(self_intersects(moved) == base);
}

TEST_CASE("normalized point-to-mesh: concentric icospheres") {
    Mesh a = make_icosphere(3, 1.0);
    Mesh b = make_icosphere(3, 1.1);
    double d = normalized_point_to_mesh(a, b, 20000, 5);
    CHECK(d == doctest::Approx(0.1 / 2.2).epsilon(0.02));
}

TEST_CASE("obj round trip") {
    Mesh m = make_icosphere(1);
    auto path = std::filesystem::temp_directory_path() / "collodiff_test_sphere.obj";
    save_obj(m, path.string());
    Mesh r = load_obj(path.string());
    REQUIRE(r.vertex_count() == m.vertex_count());
    REQUIRE(r.triangle_count() == m.triangle_count());
    for (int v = 0; v < m.vertex_count(); ++v) {
        CHECK(length(r.positions[v] - m.positions[v]) < 1e-7);
        CHECK(length(r.uvs[v] - m.uvs[v]) < 1e-7);
    }
    CHECK(r.triangles == m.triangles);
    std::filesystem::remove(path);
}
