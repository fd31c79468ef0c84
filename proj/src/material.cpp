#include "collodiff/material.hpp"

namespace collodiff {

MaterialMaps make_constant_maps(int resolution, const Vec3& diffuse, const Vec3& specular,
                                double roughness) {
    MaterialMaps maps;
    maps.diffuse = Texture::constant(resolution, resolution, 3, diffuse);
    maps.specular = Texture::constant(resolution, resolution, 3, specular);
    maps.roughness = Texture::constant(resolution, resolution, 1, Vec3(roughness, 0, 0));
    return maps;
}

MaterialMaps upsample(const MaterialMaps& maps) {
    MaterialMaps out;
    out.diffuse = upsample2(maps.diffuse);
    out.specular = upsample2(maps.specular);
    out.roughness = upsample2(maps.roughness);
    return out;
}

BrdfEval eval_brdf(const Vec3& diffuse_albedo, const Vec3& specular_albedo, double alpha,
                   double n_dot_v) {
    BrdfEval e;
    const double mu = n_dot_v;
    if (mu <= 0) return e;  // backfacing: zero value, zero partials

    constexpr double kPi = 3.14159265358979323846;
    const double a2 = alpha * alpha;
    const double A = a2 * a2;  // GGX alpha^2 with the perceptual squaring
    const double B = mu * mu * (A - 1.0) + 1.0;
    const double k = (alpha + 1.0) * (alpha + 1.0) / 8.0;
    const double g = mu * (1.0 - k) + k;

    // specular scale S so that value = mu*a_d/pi + a_s*S
    const double inv_B2g2 = 1.0 / (B * B * g * g);
    const double S = (A * mu / (4.0 * kPi)) * inv_B2g2;

    e.value = diffuse_albedo * (mu / kPi) + specular_albedo * S;
    e.d_diffuse = mu / kPi;
    e.d_specular = S;

    const double dA = 4.0 * a2 * alpha;
    const double dB_dalpha = mu * mu * dA;
    const double dk = (alpha + 1.0) / 4.0;
    const double dg_dalpha = dk * (1.0 - mu);
    const double dS_dalpha = S * (dA / A - 2.0 * dB_dalpha / B - 2.0 * dg_dalpha / g);
    e.d_roughness = specular_albedo * dS_dalpha;

    // expanded so there is no 1/mu at grazing angles
    const double dB_dmu = 2.0 * mu * (A - 1.0);
    const double dg_dmu = 1.0 - k;
    const double dS_dmu =
        (A / (4.0 * kPi)) * (1.0 - mu * (2.0 * dB_dmu / B + 2.0 * dg_dmu / g)) * inv_B2g2;
    e.d_mu = diffuse_albedo * (1.0 / kPi) + specular_albedo * dS_dmu;
    return e;
}

CollocatedSample eval_collocated(const MaterialMaps& maps, const Vec2& uv, double n_dot_v) {
    CollocatedSample s;
    s.diffuse = sample_texture(maps.diffuse, uv);
    s.specular = sample_texture(maps.specular, uv);
    s.roughness = sample_texture(maps.roughness, uv);
    s.brdf = eval_brdf(s.diffuse.value, s.specular.value, s.roughness.value.x, n_dot_v);
    return s;
}

}  // namespace collodiff
