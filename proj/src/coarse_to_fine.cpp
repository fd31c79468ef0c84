#include <cstdio>
#include <filesystem>
#include <fstream>

#include <json.hpp>

#include "collodiff/errors.hpp"
#include "collodiff/optimize.hpp"
#include "collodiff/parallel.hpp"

namespace collodiff {

StagePlan default_stage_plan(double scene_diagonal) {
    StagePlan plan;
    const double pos_lr = 1e-3 * scene_diagonal;
    plan.stages = {
        {200, 0.04, 128, pos_lr, 1e-2},
        {200, 0.02, 256, pos_lr, 1e-2},
        {100, 0.01, 512, pos_lr, 1e-2},
    };
    return plan;
}

namespace {

std::vector<double> upsample_moment(const std::vector<double>& src, int w, int h, int ch,
                                    int doublings) {
    Texture t;
    t.width = w;
    t.height = h;
    t.channels = ch;
    t.data = src;
    for (int i = 0; i < doublings; ++i) t = upsample2(t);
    return t.data;
}

void carry_texture_moments(const AdamState& old_state, const MaterialMaps& old_maps,
                           int doublings, AdamState& new_state) {
    struct MapRef {
        SegmentId id;
        int w, h, ch;
    };
    const MapRef refs[] = {
        {SegmentId::Diffuse, old_maps.diffuse.width, old_maps.diffuse.height, 3},
        {SegmentId::Specular, old_maps.specular.width, old_maps.specular.height, 3},
        {SegmentId::Roughness, old_maps.roughness.width, old_maps.roughness.height, 1},
    };
    for (const auto& ref : refs) {
        const Segment& src = old_state.layout->get(ref.id);
        const Segment& dst = new_state.layout->get(ref.id);
        for (auto [from, to] : {std::pair{&old_state.m, &new_state.m},
                                std::pair{&old_state.v, &new_state.v}}) {
            std::vector<double> seg(from->begin() + src.offset,
                                    from->begin() + src.offset + src.size);
            std::vector<double> up = upsample_moment(seg, ref.w, ref.h, ref.ch, doublings);
            if (up.size() != dst.size) throw SizeMismatch("moment upsample size mismatch");
            std::copy(up.begin(), up.end(), to->begin() + dst.offset);
        }
    }
    if (old_state.layout->has(SegmentId::Light) && new_state.layout->has(SegmentId::Light)) {
        const Segment& src = old_state.layout->get(SegmentId::Light);
        const Segment& dst = new_state.layout->get(SegmentId::Light);
        for (int i = 0; i < 3; ++i) {
            new_state.m[dst.offset + i] = old_state.m[src.offset + i];
            new_state.v[dst.offset + i] = old_state.v[src.offset + i];
        }
    }
}

void write_checkpoint(const Scene& scene, const AdamState& adam, int stage,
                      const std::string& dir) {
    namespace fs = std::filesystem;
    fs::path stage_dir = fs::path(dir) / ("stage_" + std::to_string(stage));
    fs::create_directories(stage_dir);
    auto atomic_write = [&](const std::string& name, auto&& writer) {
        fs::path tmp = stage_dir / (name + ".tmp");
        writer(tmp.string());
        fs::rename(tmp, stage_dir / name);
    };
    atomic_write("mesh.obj", [&](const std::string& p) { save_obj(scene.mesh, p); });
    atomic_write("diffuse.pfm", [&](const std::string& p) { save_pfm(scene.maps.diffuse, p); });
    atomic_write("specular.pfm",
                 [&](const std::string& p) { save_pfm(scene.maps.specular, p); });
    atomic_write("roughness.pfm",
                 [&](const std::string& p) { save_pfm(scene.maps.roughness, p); });
    atomic_write("optimizer.json", [&](const std::string& p) {
        nlohmann::json j;
        j["step"] = adam.step;
        j["beta1"] = adam.config.beta1;
        j["beta2"] = adam.config.beta2;
        j["epsilon"] = adam.config.epsilon;
        j["lr_positions"] = adam.config.lr_positions;
        j["lr_textures"] = adam.config.lr_textures;
        j["light_intensity"] = {scene.light.intensity.x, scene.light.intensity.y,
                                scene.light.intensity.z};
        std::ofstream out(p);
        out << j.dump(2) << "\n";
    });
}

int doublings_to(int from, int to) {
    int n = 0;
    while (from < to) {
        from *= 2;
        ++n;
    }
    return n;
}

}  // namespace

CoarseToFineResult run_coarse_to_fine(Scene scene, const std::vector<Image>& targets,
                                      const StagePlan& plan, const LossWeights& weights,
                                      LossOptions options, const CoarseToFineConfig& config) {
    if (!scene.mesh.has_adjacency) build_adjacency(scene.mesh);
    if (!scene.mesh.manifold) throw Error("initial mesh is not 2-manifold");
    if (self_intersects(scene.mesh)) throw InputSelfIntersecting();

    CoarseToFineResult result{std::move(scene), {}, {}};
    Scene& state = result.scene;

    std::unique_ptr<AdamState> adam;
    int global_iter = 0;

    for (size_t si = 0; si < plan.stages.size(); ++si) {
        const Stage& stage = plan.stages[si];

        if (si > 0) {
            const Stage& prev = plan.stages[si - 1];
            if (!config.freeze_geometry && stage.edge_length != prev.edge_length) {
                Mesh refined = remesh(state.mesh, stage.edge_length);
                state.mesh = std::move(refined);
            }
            int doublings = 0;
            if (!config.freeze_material) {
                doublings = doublings_to(state.maps.diffuse.width, stage.texture_resolution);
                for (int i = 0; i < doublings; ++i) state.maps = upsample(state.maps);
            }
            auto layout = ParamLayout::for_scene(state, config.optimize_light);
            AdamConfig cfg = adam->config;
            cfg.lr_positions = config.freeze_geometry ? 0.0 : stage.lr_positions;
            cfg.lr_textures = config.freeze_material ? 0.0 : stage.lr_textures;
            auto next = std::make_unique<AdamState>(layout, cfg);
            // position moments reset with the new vertex set; texel moments ride
            // along with the upsampled maps
            carry_texture_moments(*adam, state.maps, doublings, *next);
            adam = std::move(next);
        } else {
            auto layout = ParamLayout::for_scene(state, config.optimize_light);
            AdamConfig cfg;
            cfg.lr_positions = config.freeze_geometry ? 0.0 : stage.lr_positions;
            cfg.lr_textures = config.freeze_material ? 0.0 : stage.lr_textures;
            adam = std::make_unique<AdamState>(layout, cfg);
        }

        for (int it = 0; it < stage.iterations; ++it, ++global_iter) {
            TotalLossResult loss =
                total_loss(state, targets, weights, options, adam->layout);
            ParamVector params = pack(state, adam->layout);
            AdamStepResult step = adam_step(*adam, params, loss.grad);
            apply(step.params, state);

            IterationRecord rec;
            rec.stage = int(si);
            rec.iteration = global_iter;
            rec.loss = loss.breakdown;
            if (!config.freeze_geometry) {
                state.mesh = robust_evolve(state.mesh, step.displacement, &rec.evolve_scale);
            }
            if (config.verify_safety) {
                Mesh check = state.mesh;
                build_adjacency(check);
                rec.safety_ok = check.manifold && !self_intersects(check);
            }
            if (config.ground_truth)
                rec.point_to_mesh = normalized_point_to_mesh(
                    state.mesh, *config.ground_truth, config.metric_samples, config.metric_seed);
            if (config.on_iteration) config.on_iteration(rec);
            if (log_level() >= 1 && global_iter % 20 == 0)
                std::fprintf(stderr, "iter %4d stage %zu loss %.6g rend %.6g p2m %.5g\n",
                             global_iter, si, rec.loss.total, rec.loss.rend, rec.point_to_mesh);
            result.log.push_back(rec);
        }

        if (config.ground_truth)
            result.stage_point_to_mesh.push_back(normalized_point_to_mesh(
                state.mesh, *config.ground_truth, config.metric_samples * 4, config.metric_seed));
        if (!config.checkpoint_dir.empty())
            write_checkpoint(state, *adam, int(si), config.checkpoint_dir);
    }
    return result;
}

}  // namespace collodiff
