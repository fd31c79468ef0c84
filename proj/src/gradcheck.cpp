#include <cstdio>
#include <filesystem>
#include <fstream>
#include <set>

#include "collodiff/diff_render.hpp"
#include "collodiff/errors.hpp"
#include "collodiff/experiment.hpp"
#include "collodiff/rng.hpp"

namespace collodiff {

namespace {

// Loss value only (no gradient passes); must mirror total_loss term for term.
double loss_value(const Scene& scene, const std::vector<Image>& targets,
                  const LossWeights& weights, const LossOptions& options) {
    SceneContext ctx(scene);
    double total = 0;
    for (size_t k = 0; k < scene.views.size(); ++k) {
        Image img = render(scene, ctx, int(k), options.render);
        total += view_rendering_loss(img, targets[k], weights.rend, options.render.gamma,
                                     options.use_target_masks)
                     .value;
    }
    Eigen::SparseMatrix<double> L = cotangent_laplacian(scene.mesh, options.laplacian_mode);
    total += laplacian_loss(scene.mesh, L, weights.lap).value;
    total += normal_consistency_loss(scene.mesh, weights.normal).value;
    total += edge_length_loss(scene.mesh, weights.edge).value;
    total += specular_correlation_loss(scene.maps, weights).value;
    total += roughness_tv_loss(scene.maps, weights.roug).value;
    return total;
}

}  // namespace

int cmd_gradcheck(const std::string& scene_path, const GradCheckOptions& options,
                  const std::string& out_dir) {
    Scene scene = load_scene(scene_path);
    if (scene.mesh.vertex_count() > 200)
        throw Error("gradcheck budget: scene has " + std::to_string(scene.mesh.vertex_count()) +
                    " vertices (max 200)");
    for (const auto& cam : scene.views)
        if (cam.width > 32 || cam.height > 32)
            throw Error("gradcheck budget: views above 32x32");

    // target = render of a perturbed copy, so adjoints are well away from the
    // L1 kink at zero
    Scene target_scene = scene;
    Vec3 centroid;
    for (const auto& p : target_scene.mesh.positions) centroid += p;
    centroid = centroid / double(target_scene.mesh.vertex_count());
    for (auto& p : target_scene.mesh.positions) p = centroid + (p - centroid) * 1.05;
    for (size_t i = 0; i < target_scene.maps.diffuse.data.size(); ++i)
        target_scene.maps.diffuse.data[i] =
            std::clamp(target_scene.maps.diffuse.data[i] + 0.08, 0.0, 1.0);

    LossWeights weights;
    LossOptions lopt;
    lopt.render.spp = options.spp;
    lopt.render.seed = options.seed;
    lopt.render.threads = options.threads;
    lopt.render.boundary_term = !options.biased;
    lopt.render.boundary_samples = options.boundary_samples;

    std::vector<Image> targets;
    {
        RenderSettings ts = lopt.render;
        ts.seed = options.seed + 0x7a9;
        SceneContext tctx(target_scene);
        for (size_t k = 0; k < scene.views.size(); ++k)
            targets.push_back(render(target_scene, tctx, int(k), ts));
    }

    auto layout = ParamLayout::for_scene(scene, /*optimize_light=*/true);
    TotalLossResult analytic = total_loss(scene, targets, weights, lopt, layout);

    // stratified component choice across segments
    Rng rng(options.seed, 0x6c4ec);
    struct Pick {
        SegmentId id;
        size_t local;
        size_t global;
    };
    std::vector<Pick> picks;
    auto pick_from = [&](SegmentId id, int count) {
        const Segment& seg = layout->get(id);
        std::set<size_t> chosen;
        for (int i = 0; i < count && chosen.size() < seg.size; ++i) {
            size_t idx = rng.next_below(seg.size);
            for (int tries = 0; chosen.count(idx) && tries < 64; ++tries)
                idx = rng.next_below(seg.size);
            if (chosen.insert(idx).second) picks.push_back({id, idx, seg.offset + idx});
        }
    };
    const int n = options.components;
    int n_light = std::max(1, n / 8);
    int n_rough = std::max(1, n * 3 / 20);
    int n_spec = std::max(1, n * 3 / 20);
    int n_diff = std::max(1, n * 3 / 20);
    int n_pos = n - n_light - n_rough - n_spec - n_diff;
    pick_from(SegmentId::Positions, n_pos);
    pick_from(SegmentId::Diffuse, n_diff);
    pick_from(SegmentId::Specular, n_spec);
    pick_from(SegmentId::Roughness, n_rough);
    pick_from(SegmentId::Light, n_light);

    // finite-difference step sizes: positions move a fraction of a pixel
    // footprint; everything else steps in value space
    const Camera& cam0 = scene.views[0];
    double dist = length(cam0.origin - centroid);
    double footprint = 2.0 * cam0.tan_half_fov() * dist / cam0.height;
    double h_pos = 0.4 * footprint;
    double h_tex = 5e-3;
    double h_light = 0.01 * std::max(1.0, max_component(scene.light.intensity));

    ParamVector base = pack(scene, layout);

    std::filesystem::create_directories(out_dir);
    std::ofstream csv(std::filesystem::path(out_dir) / "gradcheck.csv");
    csv << "index,analytic,finite_difference,relative_error\n";

    int passed = 0;
    const double denom_floor = options.abs_tol / options.rel_tol;
    for (const auto& pick : picks) {
        double h = h_tex;
        if (pick.id == SegmentId::Positions) h = h_pos;
        if (pick.id == SegmentId::Light) h = h_light;

        double fd = 0;
        {
            Scene plus = scene;
            ParamVector pv = base;
            pv.values[pick.global] += h;
            apply(pv, plus);
            double lp = loss_value(plus, targets, weights, lopt);
            pv.values[pick.global] -= 2 * h;
            apply(pv, plus);
            double lm = loss_value(plus, targets, weights, lopt);
            fd = (lp - lm) / (2 * h);
        }
        double a = analytic.grad.values[pick.global];
        double rel = std::abs(a - fd) / std::max(std::abs(fd), denom_floor);
        bool ok = rel <= options.rel_tol;
        if (ok) ++passed;
        csv << pick.global << "," << a << "," << fd << "," << rel << "\n";
        std::printf("  [%s] %-9s idx %-6zu analytic % .6e fd % .6e rel %.4f\n",
                    ok ? "ok" : "XX", segment_name(pick.id), pick.local, a, fd, rel);
    }
    csv.close();

    double fraction = picks.empty() ? 0.0 : double(passed) / double(picks.size());
    bool pass = fraction >= options.pass_fraction;
    std::printf("gradcheck: %d/%zu components within tolerance (%.1f%%) -> %s\n", passed,
                picks.size(), 100.0 * fraction, pass ? "PASS" : "FAIL");
    return pass ? 0 : 2;
}

}  // namespace collodiff
