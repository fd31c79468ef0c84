#include <doctest.h>

#include <filesystem>

#include "collodiff/rng.hpp"
#include "collodiff/texture.hpp"

using namespace collodiff;

namespace {

// direct bilinear formula with repeat wrap, written independently
double oracle_bilinear(const Texture& tex, double u, double v, int c) {
    double fu = u - std::floor(u), fv = v - std::floor(v);
    double x = fu * tex.width - 0.5, y = fv * tex.height - 0.5;
    int x0 = int(std::floor(x)), y0 = int(std::floor(y));
    double tx = x - x0, ty = y - y0;
    auto wrap = [](int i, int n) { return ((i % n) + n) % n; };
    auto at = [&](int xi, int yi) {
        return tex.texel(wrap(xi, tex.width), wrap(yi, tex.height))[c];
    };
    return at(x0, y0) * (1 - tx) * (1 - ty) + at(x0 + 1, y0) * tx * (1 - ty) +
           at(x0, y0 + 1) * (1 - tx) * ty + at(x0 + 1, y0 + 1) * tx * ty;
}

Texture random_texture(int w, int h, int ch, uint64_t seed) {
    Texture t;
    t.width = w;
    t.height = h;
    t.channels = ch;
    t.data.resize(size_t(w) * h * ch);
    Rng rng(seed);
    for (auto& v : t.data) v = rng.next_double();
    return t;
}

}  // namespace

TEST_CASE("sample_texture: constant map and weight partition") {
    Texture t = Texture::constant(4, 4, 3, Vec3(0.25, 0.5, 0.75));
    Rng rng(3);
    for (int i = 0; i < 20; ++i) {
        auto s = sample_texture(t, Vec2(rng.next_double() * 3 - 1, rng.next_double() * 3 - 1));
        CHECK(s.value.x == doctest::Approx(0.25).epsilon(1e-12));
        CHECK(s.value.z == doctest::Approx(0.75).epsilon(1e-12));
        CHECK(s.weight[0] + s.weight[1] + s.weight[2] + s.weight[3] ==
              doctest::Approx(1.0).epsilon(1e-12));
    }
}

TEST_CASE("sample_texture: exact texel center hits one texel") {
    Texture t = random_texture(2, 2, 1, 5);
    // center of texel (1,0): u = 1.5/2, v = 0.5/2
    auto s = sample_texture(t, Vec2(0.75, 0.25));
    int ones = 0;
    for (int k = 0; k < 4; ++k)
        if (std::abs(s.weight[k] - 1.0) < 1e-12) {
            ++ones;
            CHECK(s.texel[k] == 1);
        }
    CHECK(ones == 1);
    CHECK(s.value.x == doctest::Approx(t.data[1]).epsilon(1e-12));
}

TEST_CASE("sample_texture: random lookups match the direct formula") {
    Texture t = random_texture(8, 8, 3, 7);
    Rng rng(8);
    for (int i = 0; i < 300; ++i) {
        Vec2 uv(rng.next_double() * 4 - 2, rng.next_double() * 4 - 2);
        auto s = sample_texture(t, uv);
        for (int c = 0; c < 3; ++c)
            CHECK(s.value[c] == doctest::Approx(oracle_bilinear(t, uv.x, uv.y, c)).epsilon(1e-12));
    }
}

TEST_CASE("sample_texture: uv derivative matches finite differences") {
    Texture t = random_texture(8, 8, 3, 9);
    Rng rng(10);
    for (int i = 0; i < 100; ++i) {
        Vec2 uv(rng.next_double(), rng.next_double());
        auto s = sample_texture(t, uv);
        const double h = 1e-7;
        for (int c = 0; c < 3; ++c) {
            double du = (oracle_bilinear(t, uv.x + h, uv.y, c) -
                         oracle_bilinear(t, uv.x - h, uv.y, c)) /
                        (2 * h);
            double dv = (oracle_bilinear(t, uv.x, uv.y + h, c) -
                         oracle_bilinear(t, uv.x, uv.y - h, c)) /
                        (2 * h);
            // skip texel-boundary kinks where one-sided slopes differ
            if (std::abs(du - s.du[c]) > 1e-3 || std::abs(dv - s.dv[c]) > 1e-3) continue;
            CHECK(s.du[c] == doctest::Approx(du).epsilon(1e-4));
            CHECK(s.dv[c] == doctest::Approx(dv).epsilon(1e-4));
        }
    }
}

TEST_CASE("upsample2: constant stays constant, corners preserved") {
    Texture t = Texture::constant(4, 4, 1, Vec3(0.5, 0, 0));
    Texture up = upsample2(t);
    CHECK(up.width == 8);
    for (double v : up.data) CHECK(v == doctest::Approx(0.5).epsilon(1e-12));

    Texture checker;
    checker.width = checker.height = 2;
    checker.channels = 1;
    checker.data = {0, 1, 1, 0};
    Texture c4 = upsample2(checker);
    CHECK(c4.texel(0, 0)[0] == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(c4.texel(3, 0)[0] == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(c4.texel(0, 3)[0] == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(c4.texel(3, 3)[0] == doctest::Approx(0.0).epsilon(1e-12));
    for (double v : c4.data) {
        CHECK(v >= 0.0);
        CHECK(v <= 1.0);
    }
}

TEST_CASE("upsample2 then downsample2 stays within the smoothing bound") {
    Texture t = random_texture(8, 8, 1, 12);
    Texture back = downsample2(upsample2(t));
    for (size_t i = 0; i < t.data.size(); ++i) CHECK(std::abs(back.data[i] - t.data[i]) <= 0.25);
}

TEST_CASE("pfm round trip is bit exact") {
    auto dir = std::filesystem::temp_directory_path();
    for (int ch : {1, 3}) {
        Texture t = random_texture(7, 5, ch, 13 + ch);
        // float32 storage: quantize once, then the file round trip is exact
        for (auto& v : t.data) v = double(float(v));
        auto path = (dir / ("collodiff_test_" + std::to_string(ch) + ".pfm")).string();
        save_pfm(t, path);
        Texture r = load_pfm(path);
        REQUIRE(r.width == t.width);
        REQUIRE(r.channels == t.channels);
        for (size_t i = 0; i < t.data.size(); ++i) CHECK(r.data[i] == t.data[i]);
        std::filesystem::remove(path);
    }
}

TEST_CASE("png round trip within 8-bit quantization") {
    auto dir = std::filesystem::temp_directory_path();
    Texture t = random_texture(6, 6, 3, 21);
    auto path = (dir / "collodiff_test.png").string();
    save_png(t, path, 1.0);
    Texture r = load_png(path, 1.0);
    REQUIRE(r.width == 6);
    for (size_t i = 0; i < t.data.size(); ++i) CHECK(std::abs(r.data[i] - t.data[i]) < 1.0 / 255);
    std::filesystem::remove(path);
}
