#pragma once

#include <Eigen/Sparse>
#include <vector>

#include "collodiff/laplacian.hpp"
#include "collodiff/material.hpp"
#include "collodiff/mesh.hpp"
#include "collodiff/params.hpp"
#include "collodiff/render.hpp"

namespace collodiff {

struct LossWeights {
    double rend = 1.0;
    double lap = 0.1;
    double normal = 0.01;
    double edge = 1.0;
    double spec = 0.01;
    double roug = 0.001;
    double sigma1 = 2.0;  // bilateral spatial sigma, texels
    double sigma2 = 0.1;  // bilateral albedo sigma (luminance)
};

struct LossBreakdown {
    double total = 0;
    double rend = 0, lap = 0, normal = 0, edge = 0, spec = 0, roug = 0;
};

// L1 between tone-mapped (optionally target-masked) images, normalized by the
// view's valid-pixel count. The adjoint carries dL/d(linear radiance),
// including the tone-map chain and the L1 subgradient (sign(0) = 0).
struct ViewLossResult {
    double value = 0;
    Image adjoint;
};
ViewLossResult view_rendering_loss(const Image& rendered, const Image& target,
                                   double lambda_rend, double gamma, bool use_target_mask);

struct RenderingLossResult {
    double value = 0;
    std::vector<Image> adjoints;
};
RenderingLossResult rendering_loss(const std::vector<Image>& rendered,
                                   const std::vector<Image>& targets, const LossWeights& weights,
                                   double gamma = 2.2, bool use_target_masks = false);

// lambda * ||L V||_F^2 with gradient 2 lambda L^T L V.
struct MeshLossResult {
    double value = 0;
    std::vector<Vec3> grad;  // per vertex
};
MeshLossResult laplacian_loss(const Mesh& mesh, const Eigen::SparseMatrix<double>& L,
                              double lambda);

// lambda * sum over interior edges of (1 - n_i . n_j)^2.
MeshLossResult normal_consistency_loss(const Mesh& mesh, double lambda);

// lambda * sqrt(sum of squared edge lengths).
MeshLossResult edge_length_loss(const Mesh& mesh, double lambda);

// Bilateral specular-diffuse correlation over a 7x7 texel window:
// lambda * sum_p |a_s[p] - weighted_avg(a_s)| with weights
// mu_pq = exp(-|p-q|^2/(2 s1^2) - (lum(a_d[p])-lum(a_d[q]))^2/(2 s2^2)).
struct SpecularLossResult {
    double value = 0;
    Texture grad_specular;
    Texture grad_diffuse;
};
SpecularLossResult specular_correlation_loss(const MaterialMaps& maps,
                                             const LossWeights& weights);

// Anisotropic total variation of the roughness map, non-wrapping borders.
struct RoughnessLossResult {
    double value = 0;
    Texture grad;
};
RoughnessLossResult roughness_tv_loss(const MaterialMaps& maps, double lambda);

struct LossOptions {
    RenderSettings render;
    bool use_target_masks = false;
    LaplacianMode laplacian_mode = LaplacianMode::Cotangent;
};

// Full objective: rendering loss over all views (gradients via the interior +
// boundary passes) plus the mesh and material regularizers with analytic
// gradients. The Laplacian is rebuilt from current positions on every call.
struct TotalLossResult {
    LossBreakdown breakdown;
    GradVector grad;
    std::vector<Image> rendered;
};
TotalLossResult total_loss(const Scene& scene, const std::vector<Image>& targets,
                           const LossWeights& weights, const LossOptions& options,
                           std::shared_ptr<const ParamLayout> layout);

}  // namespace collodiff
