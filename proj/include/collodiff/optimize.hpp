#pragma once

#include <functional>
#include <string>
#include <vector>

#include "collodiff/losses.hpp"
#include "collodiff/params.hpp"
#include "collodiff/scene.hpp"

namespace collodiff {

struct AdamConfig {
    double beta1 = 0.9, beta2 = 0.999, epsilon = 1e-8;
    double lr_positions = 1e-3;  // scaled by scene diagonal at plan build time
    double lr_textures = 1e-2;
    double lr_light = 1e-2;
};

struct AdamState {
    std::shared_ptr<const ParamLayout> layout;
    std::vector<double> m, v;
    int64_t step = 0;
    AdamConfig config;

    AdamState(std::shared_ptr<const ParamLayout> l, const AdamConfig& cfg)
        : layout(std::move(l)), m(layout->total, 0.0), v(layout->total, 0.0), config(cfg) {}
};

struct AdamStepResult {
    ParamVector params;              // texture/light segments updated and clamped;
                                     // position values left at their inputs
    std::vector<Vec3> displacement;  // proposed per-vertex move, pending robust_evolve
};

// Bias-corrected Adam with per-segment learning rates. Texture segments are
// applied immediately and clamped to their valid ranges; the position segment
// only proposes a displacement so the surface-evolution guard can scale it.
AdamStepResult adam_step(AdamState& state, const ParamVector& params, const GradVector& grad);

// Moves vertices by the largest power-of-two fraction of `displacement`
// (1, 1/2, ..., 2^-8, else 0) that keeps the mesh self-intersection free and
// every triangle non-degenerate. Connectivity never changes.
Mesh robust_evolve(const Mesh& mesh, const std::vector<Vec3>& displacement,
                   double* applied_scale = nullptr);

// Incremental isotropic remeshing (split long / collapse short / flip for
// valence / tangential smoothing with projection onto the input surface).
// Output is manifold and self-intersection free; reverts to a split-only
// refinement if the full pipeline would introduce intersections. UVs are
// transferred from the input mesh.
Mesh remesh(const Mesh& mesh, double target_edge_length, int max_sweeps = 10);

// Closest-point UV pull-back from `old_mesh` onto the vertices of `mesh`.
// Throws ProjectionTooFar when a vertex strays more than `max_distance`.
void uv_transfer(const Mesh& old_mesh, Mesh& mesh, double max_distance);

struct Stage {
    int iterations = 200;
    double edge_length = 0.04;      // fraction of the unit bounding box
    int texture_resolution = 128;
    double lr_positions = 1e-3;
    double lr_textures = 1e-2;
};

struct StagePlan {
    std::vector<Stage> stages;
};

// 3 stages, halving edge length and doubling textures, 500 iterations total.
StagePlan default_stage_plan(double scene_diagonal);

struct IterationRecord {
    int stage = 0;
    int iteration = 0;  // global index
    LossBreakdown loss;
    double evolve_scale = 1.0;    // fraction of the proposed step applied
    double point_to_mesh = -1.0;  // vs ground truth when available
    bool safety_ok = true;
};

struct CoarseToFineConfig {
    bool freeze_geometry = false;
    bool freeze_material = false;
    bool optimize_light = false;
    bool verify_safety = false;  // re-check manifoldness + intersection per iteration
    const Mesh* ground_truth = nullptr;
    int metric_samples = 10000;
    uint64_t metric_seed = 7;
    std::string checkpoint_dir;  // empty disables checkpoints
    std::function<void(const IterationRecord&)> on_iteration;
};

struct CoarseToFineResult {
    Scene scene;
    std::vector<IterationRecord> log;
    std::vector<double> stage_point_to_mesh;
};

// Per stage: iterate {total_loss -> adam_step -> robust_evolve}; between
// stages: remesh to the next edge length (with UV transfer), upsample the
// texture maps, carry texel Adam moments along, and reset position moments.
CoarseToFineResult run_coarse_to_fine(Scene scene, const std::vector<Image>& targets,
                                      const StagePlan& plan, const LossWeights& weights,
                                      LossOptions options, const CoarseToFineConfig& config);

}  // namespace collodiff
