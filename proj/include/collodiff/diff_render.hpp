#pragma once

#include <vector>

#include "collodiff/params.hpp"
#include "collodiff/render.hpp"
#include "collodiff/silhouette.hpp"

namespace collodiff {

// Per-pixel loss-to-radiance weights dL/dI for one view.
using AdjointImage = Image;

// dN_v/dp_w for every vertex v and every vertex w in its one-ring (including
// v itself), where N_v is the normalized area-weighted vertex normal. CSR
// over v; rebuilt whenever positions change.
struct NormalJacobians {
    std::vector<int> start;                     // size V+1
    std::vector<std::pair<int, Mat3>> entries;  // (w, dN_v/dp_w)
};

NormalJacobians build_normal_jacobians(const Mesh& mesh);

// Everything a gradient pass needs that is fixed for the current mesh.
struct GradContext {
    SceneContext geom;
    NormalJacobians normal_jac;

    explicit GradContext(const Scene& scene)
        : geom(scene), normal_jac(build_normal_jacobians(scene.mesh)) {}
};

// Boundary probes either return radiance (default) or plain hit coverage;
// coverage mode lets tests compare against area derivatives directly.
enum class BoundaryProbe { Radiance, Coverage };

struct BoundaryStats {
    int degenerate_skipped = 0;
};

// Interior term of the pixel-intensity derivative: for every sample with its
// image-plane position held fixed, differentiates I = I_e f_r / |y-o|^2
// through the ray-triangle intersection (distance, barycentric uv shift, and
// the interpolated-normal chain including one-ring normal dependence), the
// bilinear texels of the three maps, and the light intensity. Accumulates
// adjoint-weighted derivatives into `grad`. `hit_cache` must come from
// render() with the same settings.
void interior_pass(const Scene& scene, const GradContext& ctx, int view,
                   const AdjointImage& adjoint, const RenderSettings& settings,
                   const std::vector<int>& hit_cache, GradVector& grad);

// Edge-sampled boundary term: draws `samples` points over the silhouette set
// proportionally to projected length, probes the radiance difference across
// each point, and deposits (n . dx'/dp) * dI into the vertex segment of
// `grad` weighted by the adjoint of the containing pixel.
BoundaryStats boundary_pass(const Scene& scene, const GradContext& ctx, int view,
                            const AdjointImage& adjoint, const SilhouetteSet& silhouettes,
                            int samples, uint64_t seed, GradVector& grad,
                            BoundaryProbe probe = BoundaryProbe::Radiance);

// Renders view `view`, evaluates the per-view rendering-loss term against
// `target` (lambda_rend and tone mapping included), then runs the interior
// pass and - unless settings.boundary_term is off - the boundary pass.
// Returns the loss term; the gradient lands in `grad`.
double grad_image_loss(const Scene& scene, const GradContext& ctx, int view,
                       const Image& target, const RenderSettings& settings, double lambda_rend,
                       bool use_target_mask, GradVector& grad);

}  // namespace collodiff
