#pragma once

#include <optional>
#include <string>
#include <vector>

#include "collodiff/optimize.hpp"
#include "collodiff/scene.hpp"

namespace collodiff {

// A fully self-describing synthetic experiment: ground-truth recipe, capture
// setup, initial-guess recipe, and optimization settings. A fixed seed makes
// every derived artifact deterministic.
struct ExperimentSpec {
    std::string name = "experiment";
    uint64_t seed = 1;
    std::string out_dir = "out";

    // ground truth
    std::string gt_shape = "ellipsoid";  // sphere | ellipsoid | blob
    Vec3 gt_axes{1.0, 0.8, 0.6};         // bounding-box extents
    int gt_subdiv = 4;
    Vec3 gt_diffuse{0.55, 0.40, 0.30};
    Vec3 gt_specular{0.05, 0.05, 0.05};
    double gt_roughness = 0.4;
    int gt_texture_res = 64;
    Vec3 light_intensity{20, 20, 20};

    // capture
    int view_count = 16;
    int holdout_count = 4;
    double view_radius = 2.5;
    double fov_deg = 40.0;
    int image_size = 64;
    int target_spp = 64;

    // initial guess
    std::string init_shape = "sphere";  // sphere | ellipsoid | blob | ground_truth
    double init_edge_length = 0.04;
    double init_noise_sigma = 0.02;
    double init_specular = 0.1;
    double init_roughness = 0.5;
    int init_texture_res = 128;

    // optimization
    int spp = 4;
    int boundary_samples = 0;  // 0 -> one per pixel
    int threads = 1;
    StagePlan plan;  // empty -> default plan
    LossWeights weights;
    bool freeze_geometry = false;
    bool freeze_material = false;
    bool optimize_light = false;
    bool biased_gradients = false;
    bool use_target_masks = false;

    // optional acceptance thresholds checked by reconstruct (exit code 2)
    double accept_max_point_to_mesh = -1.0;
};

ExperimentSpec load_experiment(const std::string& path);

struct MetricsReport {
    double point_to_mesh = -1.0;
    double point_to_mesh_symmetric = -1.0;
    double train_rmse = -1.0;  // tone-mapped, training views
    double novel_rmse = -1.0;  // tone-mapped, held-out views
    double final_loss = -1.0;
};

// CLI entry points. All return process exit codes: 0 pass, 2 acceptance
// failure, 1 error (thrown upward as exceptions and mapped by the CLI).
int cmd_render(const std::string& scene_path, int view_index, int spp, uint64_t seed,
               int threads, const std::string& out_dir);

struct GradCheckOptions {
    int components = 40;
    uint64_t seed = 3;
    int spp = 128;
    int boundary_samples = 100000;
    bool biased = false;
    int threads = 1;
    double rel_tol = 0.02;
    double abs_tol = 1e-3;
    double pass_fraction = 0.95;
};
int cmd_gradcheck(const std::string& scene_path, const GradCheckOptions& options,
                  const std::string& out_dir);

int cmd_make_synthetic(const ExperimentSpec& spec);

struct ReconstructOverrides {
    std::optional<bool> biased_gradients;
    std::optional<bool> freeze_geometry;
    std::optional<bool> freeze_material;
    std::optional<int> threads;
    std::optional<int> spp;
    std::optional<uint64_t> seed;
    std::optional<std::string> out_dir;
};
int cmd_reconstruct(const ExperimentSpec& spec, const ReconstructOverrides& overrides,
                    MetricsReport* report_out = nullptr);

int cmd_metrics(const std::string& mesh_a, const std::string& mesh_b, int samples,
                uint64_t seed, const std::string& out_json);

// Helpers shared with tests.
Mesh build_shape(const std::string& shape, const Vec3& axes, int subdiv, uint64_t seed);
Scene build_ground_truth_scene(const ExperimentSpec& spec);
Mesh build_initial_mesh(const ExperimentSpec& spec, const Mesh& ground_truth);
double image_rmse(const Image& a, const Image& b, double gamma);

uint64_t hash_file(const std::string& path);

// Minimal PNG line chart for convergence curves.
void write_line_chart(const std::string& path, const std::vector<std::vector<double>>& series,
                      const std::vector<std::string>& labels, bool log_y);

}  // namespace collodiff
