#include "collodiff/render.hpp"

#include <cmath>

#include "collodiff/parallel.hpp"
#include "collodiff/rng.hpp"

namespace collodiff {

Vec2 pixel_sample_position(uint64_t seed, int view, int px, int py, int width, int sample,
                           int spp) {
    Rng rng(seed, uint64_t(view) + 0x9e01, uint64_t(py) * uint64_t(width) + uint64_t(px),
            uint64_t(sample));
    double u = rng.next_double(), v = rng.next_double();
    int k = int(std::lround(std::sqrt(double(spp))));
    if (k * k == spp && k > 1) {
        // jittered stratification on a k x k grid
        u = ((sample % k) + u) / k;
        v = ((sample / k) + v) / k;
    }
    return Vec2(px + u, py + v);
}

Vec3 radiance_at(const Scene& scene, const SceneContext& ctx, int view, const Vec2& x,
                 std::optional<HitRecord>* hit_out) {
    Ray ray = primary_ray(scene.views[view], x);
    auto hit = ctx.bvh.intersect(scene.mesh, ray.origin, ray.dir, &ctx.normals);
    if (hit_out) *hit_out = hit;
    if (!hit) return scene.background;
    double mu = dot(hit->normal, -ray.dir);
    CollocatedSample mat = eval_collocated(scene.maps, hit->uv, mu);
    return scene.light.intensity * mat.brdf.value / (hit->t * hit->t);
}

Image render(const Scene& scene, const SceneContext& ctx, int view,
             const RenderSettings& settings, std::vector<int>* hit_cache) {
    const Camera& cam = scene.views[view];
    Image img(cam.width, cam.height, /*with_mask=*/true);
    const int spp = std::max(1, settings.spp);
    if (hit_cache) hit_cache->assign(size_t(cam.width) * cam.height * spp, -1);

    parallel_chunks(int64_t(cam.height), settings.threads, [&](int, int64_t y0, int64_t y1) {
        for (int64_t y = y0; y < y1; ++y) {
            for (int x = 0; x < cam.width; ++x) {
                Vec3 sum;
                int hits = 0;
                for (int s = 0; s < spp; ++s) {
                    Vec2 pos = pixel_sample_position(settings.seed, view, x, int(y), cam.width,
                                                     s, spp);
                    std::optional<HitRecord> hit;
                    sum += radiance_at(scene, ctx, view, pos, &hit);
                    if (hit) {
                        ++hits;
                        if (hit_cache)
                            (*hit_cache)[(size_t(y) * cam.width + x) * spp + s] = hit->tri;
                    }
                }
                img.at(x, int(y)) = sum / double(spp);
                img.mask[size_t(y) * cam.width + x] = double(hits) / double(spp);
            }
        }
    });
    return img;
}

double tone_map_scalar(double v, double gamma) {
    return std::pow(std::clamp(v, 0.0, 1.0), 1.0 / gamma);
}

double tone_map_derivative(double v, double gamma) {
    if (v <= 0.0 || v >= 1.0) return 0.0;  // clamped regions and boundaries
    return std::pow(v, 1.0 / gamma - 1.0) / gamma;
}

Image tone_map(const Image& img, const std::vector<double>* mask, double gamma) {
    Image out = img;
    for (size_t i = 0; i < out.pixels.size(); ++i) {
        Vec3& p = out.pixels[i];
        p = Vec3(tone_map_scalar(p.x, gamma), tone_map_scalar(p.y, gamma),
                 tone_map_scalar(p.z, gamma));
        if (mask) p *= (*mask)[i];
    }
    return out;
}

}  // namespace collodiff
