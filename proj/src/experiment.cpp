#include "collodiff/experiment.hpp"

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>

#include <json.hpp>

#include "collodiff/diff_render.hpp"
#include "collodiff/errors.hpp"
#include "collodiff/parallel.hpp"
#include "collodiff/rng.hpp"

namespace collodiff {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

Vec3 vec3_of(const json& j, const Vec3& fallback) {
    if (j.is_null()) return fallback;
    if (j.is_number()) return Vec3(j.get<double>());
    return Vec3(j.at(0).get<double>(), j.at(1).get<double>(), j.at(2).get<double>());
}

Texture texture_from_image(const Image& img) {
    Texture t;
    t.width = img.width;
    t.height = img.height;
    t.channels = 3;
    t.data.resize(size_t(img.width) * img.height * 3);
    for (size_t i = 0; i < img.pixels.size(); ++i)
        for (int c = 0; c < 3; ++c) t.data[i * 3 + c] = img.pixels[i][c];
    return t;
}

Image image_from_texture(const Texture& t) {
    Image img(t.width, t.height);
    for (int i = 0; i < t.texel_count(); ++i) img.pixels[i] = t.texel_rgb(i);
    return img;
}

Texture mask_texture(const Image& img) {
    Texture t;
    t.width = img.width;
    t.height = img.height;
    t.channels = 1;
    t.data = img.mask;
    return t;
}

}  // namespace

ExperimentSpec load_experiment(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open experiment file: " + path);
    json j;
    try {
        j = json::parse(in);
    } catch (const json::parse_error& e) {
        throw IoError("experiment parse error in " + path + ": " + e.what());
    }

    ExperimentSpec s;
    s.name = j.value("name", s.name);
    s.seed = j.value("seed", s.seed);
    s.out_dir = j.value("out_dir", s.out_dir);
    if (!fs::path(s.out_dir).is_absolute())
        s.out_dir = (fs::path(path).parent_path() / s.out_dir).string();

    if (j.contains("ground_truth")) {
        const auto& g = j["ground_truth"];
        s.gt_shape = g.value("shape", s.gt_shape);
        s.gt_axes = vec3_of(g.value("axes", json()), s.gt_axes);
        s.gt_subdiv = g.value("subdiv", s.gt_subdiv);
        s.gt_diffuse = vec3_of(g.value("diffuse", json()), s.gt_diffuse);
        s.gt_specular = vec3_of(g.value("specular", json()), s.gt_specular);
        s.gt_roughness = g.value("roughness", s.gt_roughness);
        s.gt_texture_res = g.value("texture_res", s.gt_texture_res);
        s.light_intensity = vec3_of(g.value("light_intensity", json()), s.light_intensity);
    }
    if (j.contains("views")) {
        const auto& v = j["views"];
        s.view_count = v.value("count", s.view_count);
        s.holdout_count = v.value("holdout_count", s.holdout_count);
        s.view_radius = v.value("radius", s.view_radius);
        s.fov_deg = v.value("fov_deg", s.fov_deg);
        s.image_size = v.value("size", s.image_size);
        s.target_spp = v.value("target_spp", s.target_spp);
    }
    if (j.contains("initial")) {
        const auto& i = j["initial"];
        s.init_shape = i.value("shape", s.init_shape);
        s.init_edge_length = i.value("edge_length", s.init_edge_length);
        s.init_noise_sigma = i.value("noise_sigma", s.init_noise_sigma);
        s.init_specular = i.value("specular", s.init_specular);
        s.init_roughness = i.value("roughness", s.init_roughness);
        s.init_texture_res = i.value("texture_res", s.init_texture_res);
    }
    if (j.contains("optimize")) {
        const auto& o = j["optimize"];
        s.spp = o.value("spp", s.spp);
        s.boundary_samples = o.value("boundary_samples", s.boundary_samples);
        s.threads = o.value("threads", s.threads);
        s.freeze_geometry = o.value("freeze_geometry", s.freeze_geometry);
        s.freeze_material = o.value("freeze_material", s.freeze_material);
        s.optimize_light = o.value("optimize_light", s.optimize_light);
        s.biased_gradients = o.value("biased_gradients", s.biased_gradients);
        s.use_target_masks = o.value("use_target_masks", s.use_target_masks);
        if (o.contains("stages")) {
            for (const auto& st : o["stages"]) {
                Stage stage;
                stage.iterations = st.value("iterations", stage.iterations);
                stage.edge_length = st.value("edge_length", stage.edge_length);
                stage.texture_resolution = st.value("texture_res", stage.texture_resolution);
                stage.lr_positions = st.value("lr_positions", stage.lr_positions);
                stage.lr_textures = st.value("lr_textures", stage.lr_textures);
                s.plan.stages.push_back(stage);
            }
        }
        if (o.contains("weights")) {
            const auto& w = o["weights"];
            s.weights.rend = w.value("rend", s.weights.rend);
            s.weights.lap = w.value("lap", s.weights.lap);
            s.weights.normal = w.value("normal", s.weights.normal);
            s.weights.edge = w.value("edge", s.weights.edge);
            s.weights.spec = w.value("spec", s.weights.spec);
            s.weights.roug = w.value("roug", s.weights.roug);
            s.weights.sigma1 = w.value("sigma1", s.weights.sigma1);
            s.weights.sigma2 = w.value("sigma2", s.weights.sigma2);
        }
    }
    if (j.contains("acceptance")) {
        s.accept_max_point_to_mesh =
            j["acceptance"].value("max_point_to_mesh", s.accept_max_point_to_mesh);
    }
    return s;
}

Mesh build_shape(const std::string& shape, const Vec3& axes, int subdiv, uint64_t seed) {
    if (shape == "sphere") return make_icosphere(subdiv, 0.5);
    if (shape == "ellipsoid") return make_ellipsoid(subdiv, axes * 0.5);
    if (shape == "blob") return make_blob(subdiv, seed);
    throw Error("unknown shape: " + shape);
}

Scene build_ground_truth_scene(const ExperimentSpec& spec) {
    Scene scene;
    scene.mesh = build_shape(spec.gt_shape, spec.gt_axes, spec.gt_subdiv, spec.seed);
    build_adjacency(scene.mesh);
    scene.maps = make_constant_maps(spec.gt_texture_res, spec.gt_diffuse, spec.gt_specular,
                                    spec.gt_roughness);
    scene.light.intensity = spec.light_intensity;
    scene.views = sample_views_on_sphere(spec.view_count + spec.holdout_count, spec.view_radius,
                                         spec.seed, spec.fov_deg, spec.image_size,
                                         spec.image_size);
    return scene;
}

Mesh build_initial_mesh(const ExperimentSpec& spec, const Mesh& ground_truth) {
    Mesh base;
    if (spec.init_shape == "ground_truth")
        base = ground_truth;
    else
        base = build_shape(spec.init_shape, spec.gt_axes, spec.gt_subdiv, spec.seed + 1);
    if (!base.has_adjacency) build_adjacency(base);

    Mesh coarse = remesh(base, spec.init_edge_length);

    double sigma = spec.init_noise_sigma;
    for (int attempt = 0; attempt < 8 && sigma > 0; ++attempt) {
        Mesh noisy = coarse;
        std::vector<Vec3> normals = vertex_normals(noisy);
        Rng rng(spec.seed, 0x9015e, uint64_t(attempt));
        for (int v = 0; v < noisy.vertex_count(); ++v)
            noisy.positions[v] += normals[v] * (sigma * rng.next_gaussian());
        if (!self_intersects(noisy)) return noisy;
        sigma *= 0.7;  // too violent for this resolution, back off
        if (log_level() >= 1)
            std::fprintf(stderr, "initial mesh noise caused intersections, sigma -> %.4g\n",
                         sigma);
    }
    return coarse;
}

double image_rmse(const Image& a, const Image& b, double gamma) {
    if (a.width != b.width || a.height != b.height) throw SizeMismatch("rmse size mismatch");
    double sum = 0;
    for (size_t i = 0; i < a.pixels.size(); ++i)
        for (int c = 0; c < 3; ++c) {
            double d = tone_map_scalar(a.pixels[i][c], gamma) -
                       tone_map_scalar(b.pixels[i][c], gamma);
            sum += d * d;
        }
    return std::sqrt(sum / (3.0 * double(a.pixels.size())));
}

uint64_t hash_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot hash missing file: " + path);
    uint64_t h = 1469598103934665603ULL;  // FNV-1a
    char buf[65536];
    while (in) {
        in.read(buf, sizeof(buf));
        for (std::streamsize i = 0; i < in.gcount(); ++i) {
            h ^= uint8_t(buf[i]);
            h *= 1099511628211ULL;
        }
    }
    return h;
}

int cmd_render(const std::string& scene_path, int view_index, int spp, uint64_t seed,
               int threads, const std::string& out_dir) {
    Scene scene = load_scene(scene_path);
    if (view_index < 0 || view_index >= int(scene.views.size()))
        throw Error("view index " + std::to_string(view_index) + " out of range [0," +
                    std::to_string(scene.views.size()) + ")");
    RenderSettings settings;
    settings.spp = spp;
    settings.seed = seed;
    settings.threads = threads;

    SceneContext ctx(scene);
    Image img = render(scene, ctx, view_index, settings);

    fs::create_directories(out_dir);
    fs::path base(out_dir);
    save_pfm(texture_from_image(img), (base / "render.pfm").string());
    Image toned = tone_map(img, nullptr, settings.gamma);
    save_png(texture_from_image(toned), (base / "render.png").string(), 1.0);
    save_png(mask_texture(img), (base / "mask.png").string(), 1.0);

    std::printf("render: view %d spp %d seed %llu -> %s (hash %016llx)\n", view_index, spp,
                (unsigned long long)seed, out_dir.c_str(),
                (unsigned long long)hash_file((base / "render.pfm").string()));
    return 0;
}

int cmd_make_synthetic(const ExperimentSpec& spec) {
    fs::path out(spec.out_dir);
    fs::create_directories(out / "targets");
    fs::create_directories(out / "gt");
    fs::create_directories(out / "init");

    Scene gt = build_ground_truth_scene(spec);
    RenderSettings settings;
    settings.spp = spec.target_spp;
    settings.seed = spec.seed + 0x7a9;
    settings.threads = spec.threads;

    SceneContext ctx(gt);
    char name[64];
    for (int k = 0; k < int(gt.views.size()); ++k) {
        Image img = render(gt, ctx, k, settings);
        bool holdout = k >= spec.view_count;
        std::snprintf(name, sizeof(name), holdout ? "novel_%03d.pfm" : "target_%03d.pfm",
                      holdout ? k - spec.view_count : k);
        save_pfm(texture_from_image(img), (out / "targets" / name).string());
        if (!holdout) {
            std::snprintf(name, sizeof(name), "mask_%03d.png", k);
            save_png(mask_texture(img), (out / "targets" / name).string(), 1.0);
            std::snprintf(name, sizeof(name), "preview_%03d.png", k);
            save_png(texture_from_image(tone_map(img)), (out / "targets" / name).string(), 1.0);
        }
    }

    // ground-truth bundle (full view list so novel views can be re-rendered)
    save_obj(gt.mesh, (out / "gt" / "mesh.obj").string());
    save_pfm(gt.maps.diffuse, (out / "gt" / "diffuse.pfm").string());
    save_pfm(gt.maps.specular, (out / "gt" / "specular.pfm").string());
    save_pfm(gt.maps.roughness, (out / "gt" / "roughness.pfm").string());

    // initial guess: decimated + noised mesh, constant maps seeded from the
    // mean target color
    Mesh init_mesh = build_initial_mesh(spec, gt.mesh);
    save_obj(init_mesh, (out / "init" / "mesh.obj").string());

    Vec3 mean_color;
    double mean_n = 0;
    for (int k = 0; k < spec.view_count; ++k) {
        std::snprintf(name, sizeof(name), "target_%03d.pfm", k);
        Image img = image_from_texture(load_pfm((out / "targets" / name).string()));
        std::snprintf(name, sizeof(name), "mask_%03d.png", k);
        Texture mask = load_png((out / "targets" / name).string(), 1.0);
        for (int i = 0; i < mask.texel_count(); ++i)
            if (mask.data[i] > 0.5) {
                mean_color += img.pixels[i];
                mean_n += 1;
            }
    }
    if (mean_n > 0) mean_color = mean_color / mean_n;
    for (int c = 0; c < 3; ++c) mean_color[c] = std::clamp(mean_color[c], 0.05, 0.95);

    MaterialMaps init_maps =
        make_constant_maps(spec.init_texture_res, mean_color, Vec3(spec.init_specular),
                           spec.init_roughness);
    save_pfm(init_maps.diffuse, (out / "init" / "diffuse.pfm").string());
    save_pfm(init_maps.specular, (out / "init" / "specular.pfm").string());
    save_pfm(init_maps.roughness, (out / "init" / "roughness.pfm").string());

    // scene files: optimization scene (training views, initial assets) and
    // ground-truth scene (all views)
    auto view_json = [](const Camera& cam) {
        json vj;
        vj["origin"] = {cam.origin.x, cam.origin.y, cam.origin.z};
        Vec3 t = cam.origin + cam.forward;
        vj["look_at"] = {t.x, t.y, t.z};
        vj["up"] = {cam.up.x, cam.up.y, cam.up.z};
        vj["fov_deg"] = cam.fov_deg;
        vj["width"] = cam.width;
        vj["height"] = cam.height;
        return vj;
    };
    json train;
    train["mesh"] = "init/mesh.obj";
    train["textures"] = {{"diffuse", "init/diffuse.pfm"},
                         {"specular", "init/specular.pfm"},
                         {"roughness", "init/roughness.pfm"}};
    train["light_intensity"] = {spec.light_intensity.x, spec.light_intensity.y,
                                spec.light_intensity.z};
    train["background"] = {0, 0, 0};
    train["views"] = json::array();
    for (int k = 0; k < spec.view_count; ++k) train["views"].push_back(view_json(gt.views[k]));
    std::ofstream(out / "scene.json") << train.dump(2) << "\n";

    json gtj = train;
    gtj["mesh"] = "gt/mesh.obj";
    gtj["textures"] = {{"diffuse", "gt/diffuse.pfm"},
                       {"specular", "gt/specular.pfm"},
                       {"roughness", "gt/roughness.pfm"}};
    gtj["views"] = json::array();
    for (const auto& cam : gt.views) gtj["views"].push_back(view_json(cam));
    std::ofstream(out / "gt" / "scene.json") << gtj.dump(2) << "\n";

    // manifest with per-file hashes, for determinism checks
    json manifest;
    manifest["name"] = spec.name;
    manifest["seed"] = spec.seed;
    manifest["view_count"] = spec.view_count;
    manifest["holdout_count"] = spec.holdout_count;
    json files = json::object();
    std::vector<std::string> paths;
    for (auto& entry : fs::recursive_directory_iterator(out))
        if (entry.is_regular_file() && entry.path().filename() != "manifest.json")
            paths.push_back(fs::relative(entry.path(), out).string());
    std::sort(paths.begin(), paths.end());
    char hex[32];
    for (const auto& p : paths) {
        std::snprintf(hex, sizeof(hex), "%016llx",
                      (unsigned long long)hash_file((out / p).string()));
        files[p] = hex;
    }
    manifest["files"] = files;
    std::ofstream(out / "manifest.json") << manifest.dump(2) << "\n";

    std::printf("make-synthetic: %d train + %d novel views -> %s\n", spec.view_count,
                spec.holdout_count, spec.out_dir.c_str());
    return 0;
}

namespace {

std::vector<Image> load_targets(const fs::path& dir, int count, bool novel) {
    std::vector<Image> targets;
    char name[64];
    for (int k = 0; k < count; ++k) {
        std::snprintf(name, sizeof(name), novel ? "novel_%03d.pfm" : "target_%03d.pfm", k);
        Image img = image_from_texture(load_pfm((dir / name).string()));
        if (!novel) {
            std::snprintf(name, sizeof(name), "mask_%03d.png", k);
            fs::path mask_path = dir / name;
            if (fs::exists(mask_path)) {
                Texture mask = load_png(mask_path.string(), 1.0);
                img.mask = mask.data;
            }
        }
        targets.push_back(std::move(img));
    }
    return targets;
}

}  // namespace

int cmd_reconstruct(const ExperimentSpec& spec_in, const ReconstructOverrides& overrides,
                    MetricsReport* report_out) {
    ExperimentSpec spec = spec_in;
    if (overrides.biased_gradients) spec.biased_gradients = *overrides.biased_gradients;
    if (overrides.freeze_geometry) spec.freeze_geometry = *overrides.freeze_geometry;
    if (overrides.freeze_material) spec.freeze_material = *overrides.freeze_material;
    if (overrides.threads) spec.threads = *overrides.threads;
    if (overrides.spp) spec.spp = *overrides.spp;
    if (overrides.seed) spec.seed = *overrides.seed;
    if (overrides.out_dir) spec.out_dir = *overrides.out_dir;

    fs::path out(spec.out_dir);
    if (!fs::exists(out / "scene.json"))
        throw IoError("no synthetic bundle at " + spec.out_dir + " (run make-synthetic first)");

    auto t_start = std::chrono::steady_clock::now();

    Scene scene = load_scene((out / "scene.json").string());
    std::vector<Image> targets = load_targets(out / "targets", spec.view_count, false);

    Mesh gt_mesh;
    bool have_gt = fs::exists(out / "gt" / "mesh.obj");
    if (have_gt) gt_mesh = load_obj((out / "gt" / "mesh.obj").string());

    StagePlan plan = spec.plan;
    if (plan.stages.empty()) plan = default_stage_plan(scene.mesh.bbox_diagonal());

    LossOptions options;
    options.render.spp = spec.spp;
    options.render.seed = spec.seed;
    options.render.threads = spec.threads;
    options.render.boundary_term = !spec.biased_gradients;
    options.render.boundary_samples = spec.boundary_samples;
    options.use_target_masks = spec.use_target_masks;

    fs::path recon = out / "recon";
    fs::create_directories(recon);
    std::ofstream csv(recon / "convergence.csv");
    csv << "iteration,rend,lap,normal,edge,spec,roug,total,evolve_scale,point_to_mesh\n";

    CoarseToFineConfig config;
    config.freeze_geometry = spec.freeze_geometry;
    config.freeze_material = spec.freeze_material;
    config.optimize_light = spec.optimize_light;
    config.verify_safety = true;
    config.ground_truth = have_gt ? &gt_mesh : nullptr;
    config.checkpoint_dir = (recon / "checkpoints").string();
    int safety_failures = 0;
    config.on_iteration = [&](const IterationRecord& rec) {
        csv << rec.iteration << "," << rec.loss.rend << "," << rec.loss.lap << ","
            << rec.loss.normal << "," << rec.loss.edge << "," << rec.loss.spec << ","
            << rec.loss.roug << "," << rec.loss.total << "," << rec.evolve_scale << ","
            << rec.point_to_mesh << "\n";
        if (!rec.safety_ok) ++safety_failures;
    };

    CoarseToFineResult result =
        run_coarse_to_fine(std::move(scene), targets, plan, spec.weights, options, config);
    csv.close();

    // final artifacts
    fs::create_directories(recon / "final");
    save_obj(result.scene.mesh, (recon / "final" / "mesh.obj").string());
    save_pfm(result.scene.maps.diffuse, (recon / "final" / "diffuse.pfm").string());
    save_pfm(result.scene.maps.specular, (recon / "final" / "specular.pfm").string());
    save_pfm(result.scene.maps.roughness, (recon / "final" / "roughness.pfm").string());
    save_png(result.scene.maps.diffuse, (recon / "final" / "diffuse.png").string(), 2.2);
    save_png(result.scene.maps.specular, (recon / "final" / "specular.png").string(), 2.2);
    save_png(result.scene.maps.roughness, (recon / "final" / "roughness.png").string(), 1.0);

    MetricsReport report;
    if (!result.log.empty()) report.final_loss = result.log.back().loss.total;
    if (have_gt)
        report.point_to_mesh =
            normalized_point_to_mesh(result.scene.mesh, gt_mesh, 100000, spec.seed);
    if (have_gt) {
        double back = normalized_point_to_mesh(gt_mesh, result.scene.mesh, 100000, spec.seed);
        report.point_to_mesh_symmetric = 0.5 * (report.point_to_mesh + back);
    }

    // image errors on training and held-out views
    {
        Scene eval = result.scene;
        Scene gt_scene = load_scene((out / "gt" / "scene.json").string());
        eval.views = gt_scene.views;
        SceneContext ctx(eval);
        RenderSettings rs;
        rs.spp = spec.target_spp;
        rs.seed = spec.seed + 0x5ee;
        rs.threads = spec.threads;
        double train_sum = 0;
        for (int k = 0; k < spec.view_count; ++k) {
            Image img = render(eval, ctx, k, rs);
            train_sum += image_rmse(img, targets[k], rs.gamma);
        }
        report.train_rmse = train_sum / std::max(1, spec.view_count);
        if (spec.holdout_count > 0) {
            std::vector<Image> novels = load_targets(out / "targets", spec.holdout_count, true);
            double novel_sum = 0;
            for (int k = 0; k < spec.holdout_count; ++k) {
                Image img = render(eval, ctx, spec.view_count + k, rs);
                novel_sum += image_rmse(img, novels[k], rs.gamma);
                if (k == 0)
                    save_png(texture_from_image(tone_map(img)),
                             (recon / "novel_preview.png").string(), 1.0);
            }
            report.novel_rmse = novel_sum / spec.holdout_count;
        }
    }

    json mj;
    mj["point_to_mesh"] = report.point_to_mesh;
    mj["point_to_mesh_symmetric"] = report.point_to_mesh_symmetric;
    mj["train_rmse"] = report.train_rmse;
    mj["novel_rmse"] = report.novel_rmse;
    mj["final_loss"] = report.final_loss;
    mj["safety_failures"] = safety_failures;
    json stage_p2m = json::array();
    for (double d : result.stage_point_to_mesh) stage_p2m.push_back(d);
    mj["stage_point_to_mesh"] = stage_p2m;
    std::ofstream(recon / "metrics.json") << mj.dump(2) << "\n";

    // wall-clock diagnostics live apart from the deterministic outputs
    double seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start).count();
    json tj;
    tj["runtime_seconds"] = seconds;
    std::ofstream(recon / "timings.json") << tj.dump(2) << "\n";

    // convergence plots
    {
        std::vector<double> total, rend, p2m;
        for (const auto& rec : result.log) {
            total.push_back(rec.loss.total);
            rend.push_back(rec.loss.rend);
            if (rec.point_to_mesh >= 0) p2m.push_back(rec.point_to_mesh);
        }
        write_line_chart((recon / "loss_curve.png").string(), {total, rend},
                         {"total", "rend"}, true);
        if (!p2m.empty())
            write_line_chart((recon / "p2m_curve.png").string(), {p2m}, {"point_to_mesh"}, true);
    }

    if (report_out) *report_out = report;
    std::printf("reconstruct: %s p2m %.6g train_rmse %.5g novel_rmse %.5g (%.1fs)\n",
                spec.name.c_str(), report.point_to_mesh, report.train_rmse, report.novel_rmse,
                seconds);

    if (safety_failures > 0) {
        std::fprintf(stderr, "reconstruct: %d safety violations\n", safety_failures);
        return 2;
    }
    if (spec.accept_max_point_to_mesh > 0 && have_gt &&
        report.point_to_mesh > spec.accept_max_point_to_mesh) {
        std::fprintf(stderr, "reconstruct: point_to_mesh %.6g exceeds threshold %.6g\n",
                     report.point_to_mesh, spec.accept_max_point_to_mesh);
        return 2;
    }
    return 0;
}

int cmd_metrics(const std::string& mesh_a, const std::string& mesh_b, int samples,
                uint64_t seed, const std::string& out_json) {
    Mesh a = load_obj(mesh_a);
    Mesh b = load_obj(mesh_b);
    double ab = normalized_point_to_mesh(a, b, samples, seed);
    double ba = normalized_point_to_mesh(b, a, samples, seed);
    std::printf("point_to_mesh: %.8g (A->B), %.8g (B->A), symmetric %.8g\n", ab, ba,
                0.5 * (ab + ba));
    if (!out_json.empty()) {
        json j;
        j["a_to_b"] = ab;
        j["b_to_a"] = ba;
        j["symmetric"] = 0.5 * (ab + ba);
        j["samples"] = samples;
        std::ofstream(out_json) << j.dump(2) << "\n";
    }
    return 0;
}

}  // namespace collodiff
