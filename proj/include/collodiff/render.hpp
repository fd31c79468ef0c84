#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "collodiff/bvh.hpp"
#include "collodiff/scene.hpp"

namespace collodiff {

// HDR radiance raster. `mask` (when tracked) is the per-pixel hit fraction.
struct Image {
    int width = 0, height = 0;
    std::vector<Vec3> pixels;
    std::vector<double> mask;

    Image() = default;
    Image(int w, int h, bool with_mask = false)
        : width(w), height(h), pixels(size_t(w) * h), mask(with_mask ? size_t(w) * h : 0) {}

    bool has_mask() const { return !mask.empty(); }
    Vec3& at(int x, int y) { return pixels[size_t(y) * width + x]; }
    const Vec3& at(int x, int y) const { return pixels[size_t(y) * width + x]; }
};

struct RenderSettings {
    int spp = 4;
    uint64_t seed = 0;
    double gamma = 2.2;
    double clamp_max = 1.0;
    int threads = 1;
    bool boundary_term = true;  // edge-sampled silhouette gradients on/off
    int boundary_samples = 0;   // 0 -> one sample per image pixel
};

// Internal contrast mode reproducing biased interior-only gradients.
inline RenderSettings biased_mode_toggle(RenderSettings s) {
    s.boundary_term = !s.boundary_term;
    return s;
}

// Immutable per-pass acceleration data; rebuild after any mesh change.
struct SceneContext {
    Bvh bvh;
    std::vector<Vec3> normals;

    explicit SceneContext(const Scene& scene)
        : bvh(scene.mesh), normals(vertex_normals(scene.mesh)) {}
};

// Deterministic stratified sample position inside pixel (px, py); streams are
// keyed by (seed, view, pixel, sample) so worker partitioning cannot change
// results.
Vec2 pixel_sample_position(uint64_t seed, int view, int px, int py, int width, int sample,
                           int spp);

// Radiance I(x) = I_e * f_r(o->y->o) / |y-o|^2 for the primary ray through
// continuous pixel point x, or the background on miss. No shadow ray: under
// the collocated light every visible point is lit.
Vec3 radiance_at(const Scene& scene, const SceneContext& ctx, int view, const Vec2& x,
                 std::optional<HitRecord>* hit_out = nullptr);

// N-sample stratified estimate per pixel; mask = hit fraction. `hit_cache`,
// when given, receives the hit triangle index (-1 = miss) per sample in
// pixel-major order for gradient replay.
Image render(const Scene& scene, const SceneContext& ctx, int view,
             const RenderSettings& settings, std::vector<int>* hit_cache = nullptr);

// Phi(v) = clamp(v, 0, 1)^(1/gamma) per channel, then multiplied by `mask`
// when given. Matching derivative helper below (0 in the clamped regions).
Image tone_map(const Image& img, const std::vector<double>* mask = nullptr, double gamma = 2.2);

double tone_map_scalar(double v, double gamma = 2.2);
double tone_map_derivative(double v, double gamma = 2.2);

}  // namespace collodiff
