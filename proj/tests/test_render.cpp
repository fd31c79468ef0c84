#include <doctest.h>

#include "collodiff/render.hpp"
#include "support/test_scenes.hpp"

using namespace collodiff;
using namespace collodiff::testing;

namespace {
constexpr double kPi = 3.14159265358979323846;
}

TEST_CASE("radiance_at: lambertian plane analytic value and inverse square") {
    // plane facing the camera: mu = 1 at the center, radiance = I_e a_d / (pi r^2)
    for (double dist : {1.0, 2.0}) {
        Scene scene = lambertian_plane_scene(dist, Vec3(1, 1, 1), Vec3(kPi, kPi, kPi));
        SceneContext ctx(scene);
        Vec3 rad = radiance_at(scene, ctx, 0, Vec2(8, 8));
        double expected = 1.0 / (dist * dist);
        CHECK(rad.x == doctest::Approx(expected).epsilon(1e-9));
        CHECK(rad.y == doctest::Approx(expected).epsilon(1e-9));
    }
}

TEST_CASE("radiance_at: miss returns background") {
    Scene scene = lambertian_plane_scene(1.0, Vec3(1, 1, 1), Vec3(1, 1, 1), /*span=*/0.01);
    scene.background = Vec3(0.1, 0.2, 0.3);
    SceneContext ctx(scene);
    Vec3 rad = radiance_at(scene, ctx, 0, Vec2(1, 1));  // well off the tiny quad
    CHECK(rad.x == doctest::Approx(0.1));
    CHECK(rad.z == doctest::Approx(0.3));
}

TEST_CASE("render: fully covered plane matches quadrature reference within 3 sigma") {
    const Vec3 albedo(0.8, 0.8, 0.8);
    const Vec3 light(kPi, kPi, kPi);
    Scene scene = lambertian_plane_scene(1.0, albedo, light);
    SceneContext ctx(scene);
    RenderSettings settings;
    settings.spp = 64;
    settings.seed = 5;
    Image img = render(scene, ctx, 0, settings);
    CHECK(img.has_mask());

    // per-pixel footprint integral by midpoint quadrature on the analytic
    // radiance, plus the in-pixel variance for the 3-sigma band
    const int q = 16;
    for (int y = 0; y < img.height; ++y)
        for (int x = 0; x < img.width; ++x) {
            double mean = 0, mean2 = 0;
            for (int j = 0; j < q; ++j)
                for (int i = 0; i < q; ++i) {
                    Vec2 pos(x + (i + 0.5) / q, y + (j + 0.5) / q);
                    Ray r = primary_ray(scene.views[0], pos);
                    double v = plane_radiance(albedo, light, 1.0, r.dir).x;
                    mean += v;
                    mean2 += v * v;
                }
            mean /= q * q;
            mean2 /= q * q;
            double sigma = std::sqrt(std::max(0.0, mean2 - mean * mean) / settings.spp);
            CHECK(std::abs(img.at(x, y).x - mean) <= 3 * sigma + 1e-6);
            CHECK(img.mask[y * img.width + x] == 1.0);
        }
}

TEST_CASE("render: empty scene gives zero image and mask") {
    Scene scene = lambertian_plane_scene(1.0, Vec3(1, 1, 1), Vec3(1, 1, 1));
    scene.mesh = Mesh();
    SceneContext ctx(scene);
    RenderSettings settings;
    settings.spp = 4;
    Image img = render(scene, ctx, 0, settings);
    for (const auto& p : img.pixels) CHECK(length(p) == 0.0);
    for (double m : img.mask) CHECK(m == 0.0);
}

TEST_CASE("render: doubling spp roughly halves the variance of the mean") {
    Scene scene = sphere_scene(2, 1, 16);
    SceneContext ctx(scene);
    auto pixel_estimates = [&](int spp, uint64_t seed) {
        RenderSettings s;
        s.spp = spp;
        s.seed = seed;
        return render(scene, ctx, 0, s);
    };
    // variance across seeds of a boundary pixel's estimate
    auto variance_at = [&](int spp, int px, int py) {
        double sum = 0, sum2 = 0;
        const int k = 48;
        for (int i = 0; i < k; ++i) {
            double v = pixel_estimates(spp, 1000 + i).at(px, py).x;
            sum += v;
            sum2 += v * v;
        }
        return sum2 / k - (sum / k) * (sum / k);
    };
    // pick a pixel with partial coverage (has real variance)
    RenderSettings probe;
    probe.spp = 16;
    Image img = render(scene, ctx, 0, probe);
    int px = -1, py = -1;
    for (int y = 0; y < 16 && px < 0; ++y)
        for (int x = 0; x < 16; ++x)
            if (img.mask[y * 16 + x] > 0.2 && img.mask[y * 16 + x] < 0.8) {
                px = x;
                py = y;
                break;
            }
    REQUIRE(px >= 0);
    double v1 = variance_at(8, px, py);
    double v2 = variance_at(16, px, py);
    REQUIRE(v1 > 0);
    CHECK(v2 / v1 == doctest::Approx(0.5).epsilon(0.45));  // 1/2 within sampling slop
}

TEST_CASE("render: deterministic for fixed seed") {
    Scene scene = sphere_scene(2, 1, 24);
    SceneContext ctx(scene);
    RenderSettings settings;
    settings.spp = 8;
    settings.seed = 42;
    Image a = render(scene, ctx, 0, settings);
    Image b = render(scene, ctx, 0, settings);
    REQUIRE(a.pixels.size() == b.pixels.size());
    for (size_t i = 0; i < a.pixels.size(); ++i) CHECK(a.pixels[i] == b.pixels[i]);
}

TEST_CASE("tone_map: fixed points, reference value, masking") {
    CHECK(tone_map_scalar(0.0) == 0.0);
    CHECK(tone_map_scalar(1.0) == 1.0);
    CHECK(tone_map_scalar(0.5) == doctest::Approx(0.72974).epsilon(1e-4));
    CHECK(tone_map_scalar(2.5) == 1.0);  // clamp

    Image img(2, 1);
    img.pixels[0] = Vec3(0.5, 0.5, 0.5);
    img.pixels[1] = Vec3(0.9, 0.9, 0.9);
    std::vector<double> mask = {0.0, 1.0};
    Image toned = tone_map(img, &mask);
    CHECK(toned.pixels[0].x == 0.0);  // masked out regardless of radiance
    CHECK(toned.pixels[1].x == doctest::Approx(std::pow(0.9, 1 / 2.2)).epsilon(1e-9));
}

TEST_CASE("tone_map derivative: zero in clamped regions, monotone inside") {
    CHECK(tone_map_derivative(-0.1) == 0.0);
    CHECK(tone_map_derivative(0.0) == 0.0);
    CHECK(tone_map_derivative(1.0) == 0.0);
    CHECK(tone_map_derivative(1.5) == 0.0);
    const double h = 1e-7;
    for (double v : {0.1, 0.4, 0.9}) {
        double fd = (tone_map_scalar(v + h) - tone_map_scalar(v - h)) / (2 * h);
        CHECK(tone_map_derivative(v) == doctest::Approx(fd).epsilon(1e-5));
    }
}
