#pragma once

#include <string>
#include <vector>

#include "collodiff/vec.hpp"

namespace collodiff {

// Row-major float texture, 1 or 3 channels, top-left origin.
struct Texture {
    int width = 0, height = 0, channels = 1;
    std::vector<double> data;

    static Texture constant(int w, int h, int ch, const Vec3& value);

    int texel_count() const { return width * height; }
    double* texel(int x, int y) { return data.data() + (size_t(y) * width + x) * channels; }
    const double* texel(int x, int y) const {
        return data.data() + (size_t(y) * width + x) * channels;
    }
    Vec3 texel_rgb(int idx) const {
        const double* p = data.data() + size_t(idx) * channels;
        return channels == 3 ? Vec3(p[0], p[1], p[2]) : Vec3(p[0], p[0], p[0]);
    }
    Vec3 mean() const;
    void clamp_values(double lo, double hi);
};

// One bilinear lookup. `texel[i]` are flat texel indices (y*width+x) and
// `weight[i]` the matching bilinear weights; the gradient engine scatters
// adjoints through them, and `du`/`dv` give the value derivative w.r.t. uv.
struct TexSample {
    Vec3 value;
    int texel[4];
    double weight[4];
    Vec3 du, dv;  // d(value)/d(u), d(value)/d(v)
};

// Bilinear sample with repeat wrapping; texel centers at (i + 0.5) / size.
TexSample sample_texture(const Texture& tex, const Vec2& uv);

// Doubles the resolution with bilinear interpolation (clamp alignment, so
// corner texels are preserved and constant maps stay constant).
Texture upsample2(const Texture& tex);

// Box-filter downsample by 2 (used by tests and coarse-to-fine inits).
Texture downsample2(const Texture& tex);

// PFM: 'PF' (RGB) or 'Pf' (gray), little-endian float32, bottom-up rows.
Texture load_pfm(const std::string& path);
void save_pfm(const Texture& tex, const std::string& path);

// PNG, 8-bit. `gamma` = 2.2 decodes sRGB-ish albedo stores; 1.0 is linear.
Texture load_png(const std::string& path, double gamma);
void save_png(const Texture& tex, const std::string& path, double gamma);

}  // namespace collodiff
