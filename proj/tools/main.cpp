#include <cstdio>
#include <exception>
#include <string>

#include <CLI11.hpp>

#include "collodiff/errors.hpp"
#include "collodiff/experiment.hpp"

using namespace collodiff;

int main(int argc, char** argv) {
    CLI::App app{"collodiff: collocated differentiable renderer and shape/SVBRDF optimizer"};
    app.require_subcommand(1);

    std::string scene_path, experiment_path, out_dir, mesh_a, mesh_b, out_json;
    int view_index = 0, spp = 4, threads = 1, components = 40, samples = 100000;
    uint64_t seed = 1;
    bool biased = false, freeze_geometry = false, freeze_material = false;

    auto* render_cmd = app.add_subcommand("render", "render one view of a scene");
    render_cmd->add_option("--scene", scene_path, "scene JSON")->required();
    render_cmd->add_option("--view", view_index, "view index");
    render_cmd->add_option("--spp", spp, "samples per pixel");
    render_cmd->add_option("--seed", seed, "RNG seed");
    render_cmd->add_option("--threads", threads, "worker threads (1 = bit-exact)");
    render_cmd->add_option("--out", out_dir, "output directory")->required();

    auto* grad_cmd = app.add_subcommand("gradcheck", "finite-difference gradient audit");
    grad_cmd->add_option("--scene", scene_path, "scene JSON (<=200 vertices, <=32x32 views)")
        ->required();
    grad_cmd->add_option("--components", components, "number of parameters to check");
    grad_cmd->add_option("--seed", seed, "RNG seed");
    grad_cmd->add_option("--spp", spp, "samples per pixel for both sides")->default_val(128);
    grad_cmd->add_option("--threads", threads, "worker threads");
    grad_cmd->add_flag("--biased-gradients", biased, "disable the boundary term");
    grad_cmd->add_option("--out", out_dir, "output directory for gradcheck.csv")->required();

    auto* make_cmd = app.add_subcommand("make-synthetic", "generate targets + initial guess");
    make_cmd->add_option("--experiment", experiment_path, "experiment JSON")->required();
    make_cmd->add_option("--out", out_dir, "override output directory");
    make_cmd->add_option("--seed", seed, "override seed");
    make_cmd->add_option("--threads", threads, "worker threads");

    auto* recon_cmd = app.add_subcommand("reconstruct", "run the analysis-by-synthesis loop");
    recon_cmd->add_option("--experiment", experiment_path, "experiment JSON")->required();
    recon_cmd->add_option("--out", out_dir, "override bundle directory");
    recon_cmd->add_option("--spp", spp, "override samples per pixel");
    recon_cmd->add_option("--seed", seed, "override seed");
    recon_cmd->add_option("--threads", threads, "worker threads");
    recon_cmd->add_flag("--biased-gradients", biased, "interior-only gradients");
    recon_cmd->add_flag("--freeze-geometry", freeze_geometry, "keep the mesh fixed");
    recon_cmd->add_flag("--freeze-material", freeze_material, "keep the maps fixed");

    auto* metrics_cmd = app.add_subcommand("metrics", "point-to-mesh distance between meshes");
    metrics_cmd->add_option("--mesh-a", mesh_a, "OBJ mesh (sampled)")->required();
    metrics_cmd->add_option("--mesh-b", mesh_b, "OBJ mesh (reference)")->required();
    metrics_cmd->add_option("--samples", samples, "surface samples");
    metrics_cmd->add_option("--seed", seed, "RNG seed");
    metrics_cmd->add_option("--out", out_json, "optional JSON output path");

    CLI11_PARSE(app, argc, argv);

    try {
        if (render_cmd->parsed())
            return cmd_render(scene_path, view_index, spp, seed, threads, out_dir);
        if (grad_cmd->parsed()) {
            GradCheckOptions opt;
            opt.components = components;
            opt.seed = seed;
            opt.spp = spp;
            opt.biased = biased;
            opt.threads = threads;
            return cmd_gradcheck(scene_path, opt, out_dir);
        }
        if (make_cmd->parsed()) {
            ExperimentSpec spec = load_experiment(experiment_path);
            if (!out_dir.empty()) spec.out_dir = out_dir;
            if (make_cmd->count("--seed")) spec.seed = seed;
            if (make_cmd->count("--threads")) spec.threads = threads;
            return cmd_make_synthetic(spec);
        }
        if (recon_cmd->parsed()) {
            ExperimentSpec spec = load_experiment(experiment_path);
            ReconstructOverrides ov;
            if (recon_cmd->count("--biased-gradients")) ov.biased_gradients = biased;
            if (recon_cmd->count("--freeze-geometry")) ov.freeze_geometry = freeze_geometry;
            if (recon_cmd->count("--freeze-material")) ov.freeze_material = freeze_material;
            if (recon_cmd->count("--threads")) ov.threads = threads;
            if (recon_cmd->count("--spp")) ov.spp = spp;
            if (recon_cmd->count("--seed")) ov.seed = seed;
            if (!out_dir.empty()) ov.out_dir = out_dir;
            return cmd_reconstruct(spec, ov);
        }
        if (metrics_cmd->parsed())
            return cmd_metrics(mesh_a, mesh_b, samples, seed, out_json);
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
    return 1;
}
