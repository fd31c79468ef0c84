#include <doctest.h>

#include "collodiff/bvh.hpp"
#include "collodiff/rng.hpp"
#include "support/test_scenes.hpp"

using namespace collodiff;
using namespace collodiff::testing;

TEST_CASE("intersect: axis ray through unit triangle centroid") {
    Mesh m;
    m.positions = {{0, 0, 1}, {1, 0, 1}, {0, 1, 1}};
    m.triangles = {{0, 1, 2}};
    build_adjacency(m);
    Bvh bvh(m);
    Vec3 centroid = (m.positions[0] + m.positions[1] + m.positions[2]) / 3.0;
    auto hit = bvh.intersect(m, Vec3(centroid.x, centroid.y, 0), Vec3(0, 0, 1));
    REQUIRE(hit);
    CHECK(hit->t == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(hit->b0 == doctest::Approx(1.0 / 3).epsilon(1e-9));
    CHECK(hit->b1 == doctest::Approx(1.0 / 3).epsilon(1e-9));
    CHECK(hit->b2 == doctest::Approx(1.0 / 3).epsilon(1e-9));
}

TEST_CASE("intersect: miss returns empty") {
    Mesh m = make_icosphere(1);
    Bvh bvh(m);
    CHECK_FALSE(bvh.intersect(m, Vec3(5, 5, 5), normalize(Vec3(1, 0, 0))));
}

TEST_CASE("intersect: equals brute force on 10^4 random rays") {
    Mesh m = make_icosphere(3);
    Bvh bvh(m);
    auto normals = vertex_normals(m);
    Rng rng(1234);
    int hits = 0;
    for (int i = 0; i < 10000; ++i) {
        Vec3 origin(3 * (2 * rng.next_double() - 1), 3 * (2 * rng.next_double() - 1),
                    3 * (2 * rng.next_double() - 1));
        Vec3 dir = normalize(Vec3(rng.next_gaussian(), rng.next_gaussian(), rng.next_gaussian()));
        auto a = bvh.intersect(m, origin, dir, &normals);
        auto b = brute_force_intersect(m, origin, dir, bvh.default_t_min());
        REQUIRE(bool(a) == bool(b));
        if (a) {
            ++hits;
            CHECK(a->tri == b->tri);
            CHECK(a->t == doctest::Approx(b->t).epsilon(1e-12));
            // HitRecord invariants
            CHECK(a->b0 + a->b1 + a->b2 == doctest::Approx(1.0).epsilon(1e-6));
            const auto& tv = m.triangles[a->tri];
            Vec3 recon = m.positions[tv[0]] * a->b0 + m.positions[tv[1]] * a->b1 +
                         m.positions[tv[2]] * a->b2;
            CHECK(length(recon - a->point) < 1e-6);
            CHECK(length(a->normal) == doctest::Approx(1.0).epsilon(1e-6));
        }
    }
    CHECK(hits > 500);  // scene geometry sanity
}

TEST_CASE("closest_point: matches brute force") {
    Mesh m = make_icosphere(2);
    Bvh bvh(m);
    Rng rng(77);
    for (int i = 0; i < 200; ++i) {
        Vec3 p(2 * rng.next_double() - 1, 2 * rng.next_double() - 1, 2 * rng.next_double() - 1);
        CHECK(bvh.closest_point(m, p).distance ==
              doctest::Approx(brute_force_point_mesh(p, m)).epsilon(1e-10));
    }
}

TEST_CASE("triangles_intersect: shared-plane and disjoint cases") {
    Vec3 a0(0, 0, 0), a1(1, 0, 0), a2(0, 1, 0);
    CHECK(triangles_intersect(a0, a1, a2, Vec3(0.2, 0.2, -0.5), Vec3(0.4, 0.2, 0.5),
                              Vec3(0.2, 0.4, 0.5)));
    CHECK_FALSE(triangles_intersect(a0, a1, a2, Vec3(0.2, 0.2, 0.5), Vec3(0.4, 0.2, 1.5),
                                    Vec3(0.2, 0.4, 1.5)));
    // coplanar overlap
    CHECK(triangles_intersect(a0, a1, a2, Vec3(0.1, 0.1, 0), Vec3(0.9, 0.1, 0),
                              Vec3(0.1, 0.9, 0)));
    // coplanar disjoint
    CHECK_FALSE(triangles_intersect(a0, a1, a2, Vec3(2, 2, 0), Vec3(3, 2, 0), Vec3(2, 3, 0)));
}
