#pragma once

#include "collodiff/texture.hpp"
#include "collodiff/vec.hpp"

namespace collodiff {

// Roughness floor keeping the microfacet distribution and its derivatives
// finite.
inline constexpr double kAlphaMin = 0.01;

// Diffuse albedo (RGB), specular albedo (RGB), perceptual roughness (scalar),
// each a power-of-two texture in [0,1] (roughness in [kAlphaMin, 1]).
struct MaterialMaps {
    Texture diffuse;
    Texture specular;
    Texture roughness;
};

MaterialMaps make_constant_maps(int resolution, const Vec3& diffuse, const Vec3& specular,
                                double roughness);
MaterialMaps upsample(const MaterialMaps& maps);

// Cosine-weighted collocated BRDF f_r(o -> y -> o) and its partials. With the
// light at the camera, the half vector equals the view vector, Fresnel reduces
// to the specular albedo, and both G1 factors share mu = n.v:
//   value = mu * a_d / pi + a_s * D(mu, alpha) * mu / (4 * (mu*(1-k) + k)^2),
//   D = alpha^4 / (pi * (mu^2 (alpha^4 - 1) + 1)^2),  k = (alpha + 1)^2 / 8.
// mu <= 0 gives zero value and zero partials.
struct BrdfEval {
    Vec3 value;
    double d_diffuse = 0;   // d value[c] / d a_d[c]
    double d_specular = 0;  // d value[c] / d a_s[c]
    Vec3 d_roughness;       // d value / d alpha
    Vec3 d_mu;              // d value / d (n.v)
};

BrdfEval eval_brdf(const Vec3& diffuse_albedo, const Vec3& specular_albedo, double alpha,
                   double n_dot_v);

// BRDF evaluated through the three texture lookups; the TexSamples carry the
// bilinear weights and indices the gradient passes scatter into.
struct CollocatedSample {
    TexSample diffuse, specular, roughness;
    BrdfEval brdf;
};

CollocatedSample eval_collocated(const MaterialMaps& maps, const Vec2& uv, double n_dot_v);

}  // namespace collodiff
