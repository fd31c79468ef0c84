#include "collodiff/texture.hpp"

#include <png.h>

#include <cmath>
#include <cstdio>
#include <cstring>

#include "collodiff/errors.hpp"

namespace collodiff {

Texture Texture::constant(int w, int h, int ch, const Vec3& value) {
    Texture t;
    t.width = w;
    t.height = h;
    t.channels = ch;
    t.data.resize(size_t(w) * h * ch);
    for (int i = 0; i < w * h; ++i)
        for (int c = 0; c < ch; ++c) t.data[size_t(i) * ch + c] = value[ch == 1 ? 0 : c];
    return t;
}

Vec3 Texture::mean() const {
    Vec3 sum;
    for (int i = 0; i < texel_count(); ++i) sum += texel_rgb(i);
    return texel_count() ? sum / double(texel_count()) : sum;
}

void Texture::clamp_values(double lo, double hi) {
    for (auto& v : data) v = std::clamp(v, lo, hi);
}

TexSample sample_texture(const Texture& tex, const Vec2& uv) {
    const int w = tex.width, h = tex.height;
    // repeat wrap, texel centers at (i+0.5)/size
    double fu = uv.x - std::floor(uv.x);
    double fv = uv.y - std::floor(uv.y);
    double x = fu * w - 0.5;
    double y = fv * h - 0.5;
    int x0 = int(std::floor(x)), y0 = int(std::floor(y));
    double tx = x - x0, ty = y - y0;
    auto wrap = [](int i, int n) {
        i %= n;
        return i < 0 ? i + n : i;
    };
    int xs[2] = {wrap(x0, w), wrap(x0 + 1, w)};
    int ys[2] = {wrap(y0, h), wrap(y0 + 1, h)};

    TexSample s{};
    s.texel[0] = ys[0] * w + xs[0];
    s.texel[1] = ys[0] * w + xs[1];
    s.texel[2] = ys[1] * w + xs[0];
    s.texel[3] = ys[1] * w + xs[1];
    s.weight[0] = (1 - tx) * (1 - ty);
    s.weight[1] = tx * (1 - ty);
    s.weight[2] = (1 - tx) * ty;
    s.weight[3] = tx * ty;

    Vec3 v00 = tex.texel_rgb(s.texel[0]), v10 = tex.texel_rgb(s.texel[1]);
    Vec3 v01 = tex.texel_rgb(s.texel[2]), v11 = tex.texel_rgb(s.texel[3]);
    s.value = v00 * s.weight[0] + v10 * s.weight[1] + v01 * s.weight[2] + v11 * s.weight[3];
    // d/dx of the bilinear form, then x = u*w - 0.5
    Vec3 dvx = (v10 - v00) * (1 - ty) + (v11 - v01) * ty;
    Vec3 dvy = (v01 - v00) * (1 - tx) + (v11 - v10) * tx;
    s.du = dvx * double(w);
    s.dv = dvy * double(h);
    return s;
}

namespace {

double sample_clamped(const Texture& tex, double x, double y, int c) {
    // clamp alignment used by resampling
    int x0 = int(std::floor(x)), y0 = int(std::floor(y));
    double tx = x - x0, ty = y - y0;
    auto cl = [](int i, int n) { return std::clamp(i, 0, n - 1); };
    double v00 = tex.texel(cl(x0, tex.width), cl(y0, tex.height))[c];
    double v10 = tex.texel(cl(x0 + 1, tex.width), cl(y0, tex.height))[c];
    double v01 = tex.texel(cl(x0, tex.width), cl(y0 + 1, tex.height))[c];
    double v11 = tex.texel(cl(x0 + 1, tex.width), cl(y0 + 1, tex.height))[c];
    return v00 * (1 - tx) * (1 - ty) + v10 * tx * (1 - ty) + v01 * (1 - tx) * ty + v11 * tx * ty;
}

}  // namespace

Texture upsample2(const Texture& tex) {
    Texture out;
    out.width = tex.width * 2;
    out.height = tex.height * 2;
    out.channels = tex.channels;
    out.data.resize(size_t(out.width) * out.height * out.channels);
    for (int y = 0; y < out.height; ++y)
        for (int x = 0; x < out.width; ++x) {
            double sx = (x + 0.5) / 2.0 - 0.5;
            double sy = (y + 0.5) / 2.0 - 0.5;
            for (int c = 0; c < out.channels; ++c)
                out.texel(x, y)[c] = sample_clamped(tex, sx, sy, c);
        }
    return out;
}

Texture downsample2(const Texture& tex) {
    Texture out;
    out.width = std::max(1, tex.width / 2);
    out.height = std::max(1, tex.height / 2);
    out.channels = tex.channels;
    out.data.resize(size_t(out.width) * out.height * out.channels);
    for (int y = 0; y < out.height; ++y)
        for (int x = 0; x < out.width; ++x)
            for (int c = 0; c < out.channels; ++c) {
                double sum = tex.texel(2 * x, 2 * y)[c] + tex.texel(2 * x + 1, 2 * y)[c] +
                             tex.texel(2 * x, 2 * y + 1)[c] + tex.texel(2 * x + 1, 2 * y + 1)[c];
                out.texel(x, y)[c] = sum * 0.25;
            }
    return out;
}

Texture load_pfm(const std::string& path) {
    std::FILE* f = std::fopen(path.c_str(), "rb");
    if (!f) throw IoError("cannot open PFM file: " + path);
    char magic[3] = {};
    int w = 0, h = 0;
    double scale = 0;
    if (std::fscanf(f, "%2s %d %d %lf", magic, &w, &h, &scale) != 4 || w <= 0 || h <= 0) {
        std::fclose(f);
        throw IoError("bad PFM header: " + path);
    }
    std::fgetc(f);  // single whitespace after header
    bool rgb = std::strcmp(magic, "PF") == 0;
    if (!rgb && std::strcmp(magic, "Pf") != 0) {
        std::fclose(f);
        throw IoError("bad PFM magic: " + path);
    }
    if (scale > 0) {
        std::fclose(f);
        throw IoError("big-endian PFM not supported: " + path);
    }
    Texture t;
    t.width = w;
    t.height = h;
    t.channels = rgb ? 3 : 1;
    t.data.resize(size_t(w) * h * t.channels);
    std::vector<float> row(size_t(w) * t.channels);
    for (int y = h - 1; y >= 0; --y) {  // PFM rows are bottom-up
        if (std::fread(row.data(), sizeof(float), row.size(), f) != row.size()) {
            std::fclose(f);
            throw IoError("truncated PFM: " + path);
        }
        for (size_t i = 0; i < row.size(); ++i)
            t.data[size_t(y) * w * t.channels + i] = double(row[i]);
    }
    std::fclose(f);
    return t;
}

void save_pfm(const Texture& tex, const std::string& path) {
    std::FILE* f = std::fopen(path.c_str(), "wb");
    if (!f) throw IoError("cannot write PFM file: " + path);
    std::fprintf(f, "%s\n%d %d\n-1.0\n", tex.channels == 3 ? "PF" : "Pf", tex.width, tex.height);
    std::vector<float> row(size_t(tex.width) * tex.channels);
    for (int y = tex.height - 1; y >= 0; --y) {
        for (size_t i = 0; i < row.size(); ++i)
            row[i] = float(tex.data[size_t(y) * tex.width * tex.channels + i]);
        std::fwrite(row.data(), sizeof(float), row.size(), f);
    }
    std::fclose(f);
}

Texture load_png(const std::string& path, double gamma) {
    std::FILE* f = std::fopen(path.c_str(), "rb");
    if (!f) throw IoError("cannot open PNG file: " + path);
    png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    png_infop info = png_create_info_struct(png);
    if (setjmp(png_jmpbuf(png))) {
        png_destroy_read_struct(&png, &info, nullptr);
        std::fclose(f);
        throw IoError("PNG decode failed: " + path);
    }
    png_init_io(png, f);
    png_read_info(png, info);
    png_uint_32 w = png_get_image_width(png, info);
    png_uint_32 h = png_get_image_height(png, info);
    png_byte color = png_get_color_type(png, info);
    png_byte depth = png_get_bit_depth(png, info);
    if (depth == 16) png_set_strip_16(png);
    if (color == PNG_COLOR_TYPE_PALETTE) png_set_palette_to_rgb(png);
    if (color == PNG_COLOR_TYPE_GRAY && depth < 8) png_set_expand_gray_1_2_4_to_8(png);
    if (png_get_valid(png, info, PNG_INFO_tRNS)) png_set_tRNS_to_alpha(png);
    if (color & PNG_COLOR_MASK_ALPHA) png_set_strip_alpha(png);
    png_read_update_info(png, info);
    int ch = png_get_channels(png, info);

    std::vector<png_byte> raw(size_t(w) * h * ch);
    std::vector<png_bytep> rows(h);
    for (png_uint_32 y = 0; y < h; ++y) rows[y] = raw.data() + size_t(y) * w * ch;
    png_read_image(png, rows.data());
    png_destroy_read_struct(&png, &info, nullptr);
    std::fclose(f);

    Texture t;
    t.width = int(w);
    t.height = int(h);
    t.channels = ch >= 3 ? 3 : 1;
    t.data.resize(size_t(w) * h * t.channels);
    for (size_t i = 0; i < size_t(w) * h; ++i)
        for (int c = 0; c < t.channels; ++c) {
            double v = raw[i * ch + (ch >= 3 ? c : 0)] / 255.0;
            t.data[i * t.channels + c] = gamma == 1.0 ? v : std::pow(v, gamma);
        }
    return t;
}

void save_png(const Texture& tex, const std::string& path, double gamma) {
    std::FILE* f = std::fopen(path.c_str(), "wb");
    if (!f) throw IoError("cannot write PNG file: " + path);
    png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    png_infop info = png_create_info_struct(png);
    if (setjmp(png_jmpbuf(png))) {
        png_destroy_write_struct(&png, &info);
        std::fclose(f);
        throw IoError("PNG encode failed: " + path);
    }
    png_init_io(png, f);
    int color = tex.channels == 3 ? PNG_COLOR_TYPE_RGB : PNG_COLOR_TYPE_GRAY;
    png_set_IHDR(png, info, tex.width, tex.height, 8, color, PNG_INTERLACE_NONE,
                 PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
    png_write_info(png, info);
    std::vector<png_byte> row(size_t(tex.width) * tex.channels);
    for (int y = 0; y < tex.height; ++y) {
        for (int x = 0; x < tex.width; ++x)
            for (int c = 0; c < tex.channels; ++c) {
                double v = tex.texel(x, y)[c];
                if (gamma != 1.0) v = std::pow(std::clamp(v, 0.0, 1.0), 1.0 / gamma);
                row[size_t(x) * tex.channels + c] =
                    png_byte(std::lround(std::clamp(v, 0.0, 1.0) * 255.0));
            }
        png_write_row(png, row.data());
    }
    png_write_end(png, nullptr);
    png_destroy_write_struct(&png, &info);
    std::fclose(f);
}

}  // namespace collodiff
