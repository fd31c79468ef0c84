#include <doctest.h>

#include "collodiff/camera.hpp"
#include "collodiff/rng.hpp"

using namespace collodiff;

TEST_CASE("primary_ray: image center points forward") {
    Camera cam = Camera::look_at(Vec3(1, 2, 3), Vec3(1, 2, 8), Vec3(0, 1, 0), 60, 32, 32);
    Ray r = primary_ray(cam, Vec2(16, 16));
    CHECK(length(r.dir - cam.forward) < 1e-12);
    CHECK(length(r.origin - cam.origin) < 1e-12);
}

TEST_CASE("primary_ray: corner at fov 90 sits on the diagonal cone") {
    Camera cam = Camera::look_at(Vec3(0, 0, 0), Vec3(0, 0, 1), Vec3(0, 1, 0), 90, 64, 64);
    Ray r = primary_ray(cam, Vec2(0, 0));
    // tan(45 deg) = 1: screen offsets are exactly (-1, +1)
    double sx = dot(r.dir, cam.right) / dot(r.dir, cam.forward);
    double sy = dot(r.dir, cam.up) / dot(r.dir, cam.forward);
    CHECK(sx == doctest::Approx(-1.0).epsilon(1e-12));
    CHECK(sy == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(length(r.dir) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("project is the inverse of primary_ray") {
    Camera cam = Camera::look_at(Vec3(2, -1, 4), Vec3(0, 0, 0), Vec3(0, 0, 1), 50, 48, 36);
    Rng rng(4);
    for (int i = 0; i < 100; ++i) {
        Vec2 px(rng.next_double() * cam.width, rng.next_double() * cam.height);
        Ray r = primary_ray(cam, px);
        double t = 0.5 + 4 * rng.next_double();
        auto back = project(cam, r.origin + r.dir * t);
        REQUIRE(back);
        CHECK(length(*back - px) < 1e-9);
    }
}

TEST_CASE("project: behind camera is empty") {
    Camera cam = Camera::look_at(Vec3(0, 0, 0), Vec3(0, 0, 1), Vec3(0, 1, 0), 45, 32, 32);
    CHECK_FALSE(project(cam, Vec3(0, 0, -1)));
}

TEST_CASE("projection_jacobian matches finite differences") {
    Camera cam = Camera::look_at(Vec3(1, 0.5, -3), Vec3(0, 0, 0), Vec3(0, 1, 0), 40, 64, 48);
    Rng rng(6);
    for (int i = 0; i < 50; ++i) {
        Vec3 p(rng.next_double() - 0.5, rng.next_double() - 0.5, rng.next_double() - 0.5);
        ProjectionJacobian J = projection_jacobian(cam, p);
        const double h = 1e-6;
        for (int axis = 0; axis < 3; ++axis) {
            Vec3 dp;
            dp[axis] = h;
            auto plus = project(cam, p + dp);
            auto minus = project(cam, p - dp);
            REQUIRE(plus);
            REQUIRE(minus);
            CHECK(J.d_px[axis] == doctest::Approx((plus->x - minus->x) / (2 * h)).epsilon(1e-5));
            CHECK(J.d_py[axis] == doctest::Approx((plus->y - minus->y) / (2 * h)).epsilon(1e-5));
        }
    }
}

TEST_CASE("camera frame is orthonormal") {
    auto cams = sample_views_on_sphere(50, 2.5, 3);
    for (const auto& cam : cams) {
        CHECK(std::abs(dot(cam.right, cam.up)) < 1e-9);
        CHECK(std::abs(dot(cam.right, cam.forward)) < 1e-9);
        CHECK(std::abs(dot(cam.up, cam.forward)) < 1e-9);
        CHECK(length(cam.right) == doctest::Approx(1.0).epsilon(1e-9));
        CHECK(length(cam.up) == doctest::Approx(1.0).epsilon(1e-9));
        CHECK(length(cam.forward) == doctest::Approx(1.0).epsilon(1e-9));
    }
}

TEST_CASE("sample_views_on_sphere: single camera and determinism") {
    auto one = sample_views_on_sphere(1, 3.0, 9);
    REQUIRE(one.size() == 1);
    CHECK(length(one[0].origin) == doctest::Approx(3.0).epsilon(1e-12));
    CHECK(dot(one[0].forward, normalize(-one[0].origin)) == doctest::Approx(1.0).epsilon(1e-12));

    auto a = sample_views_on_sphere(20, 2.0, 123);
    auto b = sample_views_on_sphere(20, 2.0, 123);
    for (size_t i = 0; i < a.size(); ++i) {
        CHECK(a[i].origin == b[i].origin);
        CHECK(a[i].forward == b[i].forward);
    }
}

TEST_CASE("sample_views_on_sphere: 50 views keep pairwise separation above 10 degrees") {
    auto cams = sample_views_on_sphere(50, 2.5, 7);
    double min_angle = 1e9;
    for (size_t i = 0; i < cams.size(); ++i)
        for (size_t j = i + 1; j < cams.size(); ++j) {
            double c = dot(normalize(cams[i].origin), normalize(cams[j].origin));
            min_angle = std::min(min_angle, std::acos(std::clamp(c, -1.0, 1.0)) * 180 / 3.14159265);
        }
    CHECK(min_angle > 10.0);
}
