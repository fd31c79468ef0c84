#include <doctest.h>

#include "collodiff/material.hpp"
#include "collodiff/rng.hpp"
#include "support/test_scenes.hpp"

using namespace collodiff;
using namespace collodiff::testing;

namespace {
constexpr double kPi = 3.14159265358979323846;
}

TEST_CASE("brdf: pure lambertian at normal incidence") {
    BrdfEval e = eval_brdf(Vec3(1, 1, 1), Vec3(0, 0, 0), 0.5, 1.0);
    CHECK(e.value.x == doctest::Approx(1.0 / kPi).epsilon(1e-12));
    CHECK(e.value.y == doctest::Approx(1.0 / kPi).epsilon(1e-12));
    CHECK(e.d_diffuse == doctest::Approx(1.0 / kPi).epsilon(1e-12));
}

TEST_CASE("brdf: grazing and backfacing give zero value and partials") {
    for (double mu : {0.0, -0.3, -1.0}) {
        BrdfEval e = eval_brdf(Vec3(0.5, 0.5, 0.5), Vec3(0.3, 0.3, 0.3), 0.3, mu);
        CHECK(e.value.x == 0.0);
        CHECK(e.d_diffuse == 0.0);
        CHECK(e.d_specular == 0.0);
        CHECK(e.d_roughness.x == 0.0);
        CHECK(e.d_mu.x == 0.0);
    }
}

TEST_CASE("brdf: continuous in mu at zero") {
    BrdfEval e = eval_brdf(Vec3(0.8, 0.8, 0.8), Vec3(0.9, 0.9, 0.9), kAlphaMin, 1e-9);
    CHECK(std::abs(e.value.x) < 1e-6);
}

TEST_CASE("brdf: analytic partials match finite differences") {
    Rng rng(31337);
    int checked = 0;
    for (int i = 0; i < 1000; ++i) {
        Vec3 ad(rng.next_double(), rng.next_double(), rng.next_double());
        Vec3 as(rng.next_double(), rng.next_double(), rng.next_double());
        double alpha = kAlphaMin + (1 - kAlphaMin) * rng.next_double();
        double mu = 0.02 + 0.98 * rng.next_double();
        const double h = 1e-5;

        BrdfEval e = eval_brdf(ad, as, alpha, mu);

        double fd_diff = (eval_brdf(ad + Vec3(h, 0, 0), as, alpha, mu).value.x -
                          eval_brdf(ad - Vec3(h, 0, 0), as, alpha, mu).value.x) /
                         (2 * h);
        CHECK(rel_err(e.d_diffuse, fd_diff, 1e-8) < 1e-4);

        double fd_spec = (eval_brdf(ad, as + Vec3(h, 0, 0), alpha, mu).value.x -
                          eval_brdf(ad, as - Vec3(h, 0, 0), alpha, mu).value.x) /
                         (2 * h);
        CHECK(rel_err(e.d_specular, fd_spec, 1e-8) < 1e-4);

        if (alpha > kAlphaMin + h && alpha < 1 - h) {
            double fd_alpha = (eval_brdf(ad, as, alpha + h, mu).value.x -
                               eval_brdf(ad, as, alpha - h, mu).value.x) /
                              (2 * h);
            CHECK(rel_err(e.d_roughness.x, fd_alpha, 1e-6) < 1e-4);
        }
        if (mu > h) {
            double fd_mu = (eval_brdf(ad, as, alpha, mu + h).value.x -
                            eval_brdf(ad, as, alpha, mu - h).value.x) /
                           (2 * h);
            CHECK(rel_err(e.d_mu.x, fd_mu, 1e-6) < 2e-4);
        }
        ++checked;
    }
    CHECK(checked == 1000);
}

TEST_CASE("brdf: hemispherical reflectance stays near or below one") {
    // Monte Carlo integral of f_r(mu)*... over the hemisphere for the
    // collocated slice is not the full albedo integral, but a loose cap on
    // the directional-hemispherical sum catches normalization bugs.
    Rng rng(99);
    for (int trial = 0; trial < 5; ++trial) {
        double ad = 0.6 * rng.next_double();
        double as = std::min(1.0 - ad, rng.next_double());
        double alpha = 0.1 + 0.9 * rng.next_double();
        double sum = 0;
        const int n = 20000;
        for (int i = 0; i < n; ++i) {
            double mu = rng.next_double();  // cosine of polar angle, uniform
            BrdfEval e = eval_brdf(Vec3(ad, ad, ad), Vec3(as, as, as), alpha, mu);
            sum += e.value.x * 2 * kPi;  // hemisphere solid angle, value has cosine
        }
        CHECK(sum / n <= 1.05);
    }
}

TEST_CASE("eval_collocated wires texture lookups into the brdf") {
    MaterialMaps maps = make_constant_maps(4, Vec3(0.5, 0.4, 0.3), Vec3(0.1, 0.1, 0.1), 0.4);
    CollocatedSample s = eval_collocated(maps, Vec2(0.3, 0.8), 0.7);
    BrdfEval direct = eval_brdf(Vec3(0.5, 0.4, 0.3), Vec3(0.1, 0.1, 0.1), 0.4, 0.7);
    CHECK(s.brdf.value.x == doctest::Approx(direct.value.x).epsilon(1e-12));
    CHECK(s.brdf.d_mu.y == doctest::Approx(direct.d_mu.y).epsilon(1e-12));
}

TEST_CASE("upsample doubles every map") {
    MaterialMaps maps = make_constant_maps(8, Vec3(0.5, 0.5, 0.5), Vec3(0.1, 0.1, 0.1), 0.4);
    MaterialMaps up = upsample(maps);
    CHECK(up.diffuse.width == 16);
    CHECK(up.specular.height == 16);
    CHECK(up.roughness.width == 16);
    CHECK(up.roughness.data[0] == doctest::Approx(0.4).epsilon(1e-12));
}
