#include <algorithm>
#include <cmath>

#include "collodiff/experiment.hpp"
#include "collodiff/texture.hpp"

namespace collodiff {

namespace {

void put_pixel(Texture& canvas, int x, int y, const Vec3& color) {
    if (x < 0 || x >= canvas.width || y < 0 || y >= canvas.height) return;
    double* p = canvas.texel(x, y);
    p[0] = color.x;
    p[1] = color.y;
    p[2] = color.z;
}

void draw_line(Texture& canvas, double x0, double y0, double x1, double y1, const Vec3& color) {
    double dx = x1 - x0, dy = y1 - y0;
    int steps = int(std::max(std::abs(dx), std::abs(dy))) + 1;
    for (int i = 0; i <= steps; ++i) {
        double t = double(i) / steps;
        put_pixel(canvas, int(std::lround(x0 + t * dx)), int(std::lround(y0 + t * dy)), color);
    }
}

}  // namespace

void write_line_chart(const std::string& path, const std::vector<std::vector<double>>& series,
                      const std::vector<std::string>& labels, bool log_y) {
    (void)labels;  // color swatches stand in for a legend (no font rasterizer)
    const int W = 640, H = 360, margin = 32;
    Texture canvas = Texture::constant(W, H, 3, Vec3(1, 1, 1));

    const Vec3 palette[6] = {{0.85, 0.25, 0.2}, {0.2, 0.4, 0.85}, {0.2, 0.65, 0.3},
                             {0.8, 0.6, 0.1},   {0.6, 0.3, 0.7},  {0.3, 0.3, 0.3}};

    double lo = 1e300, hi = -1e300;
    size_t max_len = 1;
    for (const auto& s : series)
        for (double v : s) {
            double y = log_y ? (v > 0 ? std::log10(v) : NAN) : v;
            if (!std::isfinite(y)) continue;
            lo = std::min(lo, y);
            hi = std::max(hi, y);
        }
    for (const auto& s : series) max_len = std::max(max_len, s.size());
    if (lo > hi) {
        lo = 0;
        hi = 1;
    }
    if (hi - lo < 1e-12) hi = lo + 1;

    auto map_x = [&](size_t i) {
        return margin + double(i) / std::max<size_t>(1, max_len - 1) * (W - 2 * margin);
    };
    auto map_y = [&](double v) {
        double y = log_y ? (v > 0 ? std::log10(v) : lo) : v;
        if (!std::isfinite(y)) y = lo;
        return H - margin - (y - lo) / (hi - lo) * (H - 2 * margin);
    };

    // frame
    Vec3 gray(0.7, 0.7, 0.7);
    draw_line(canvas, margin, margin, W - margin, margin, gray);
    draw_line(canvas, margin, H - margin, W - margin, H - margin, gray);
    draw_line(canvas, margin, margin, margin, H - margin, gray);
    draw_line(canvas, W - margin, margin, W - margin, H - margin, gray);

    for (size_t si = 0; si < series.size(); ++si) {
        const auto& s = series[si];
        const Vec3& color = palette[si % 6];
        for (size_t i = 1; i < s.size(); ++i)
            draw_line(canvas, map_x(i - 1), map_y(s[i - 1]), map_x(i), map_y(s[i]), color);
        // legend swatch
        for (int dy = 0; dy < 8; ++dy)
            for (int dx = 0; dx < 16; ++dx)
                put_pixel(canvas, margin + 8 + dx, margin + 8 + int(si) * 12 + dy, color);
    }
    save_png(canvas, path, 1.0);
}

}  // namespace collodiff
