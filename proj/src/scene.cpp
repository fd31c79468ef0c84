#include "collodiff/scene.hpp"

#include <filesystem>
#include <fstream>

#include <json.hpp>

#include "collodiff/errors.hpp"

namespace collodiff {

namespace {

using nlohmann::json;

Vec3 vec3_of(const json& j, const Vec3& fallback = Vec3()) {
    if (j.is_null()) return fallback;
    if (j.is_number()) return Vec3(j.get<double>());
    return Vec3(j.at(0).get<double>(), j.at(1).get<double>(), j.at(2).get<double>());
}

json to_json(const Vec3& v) { return json::array({v.x, v.y, v.z}); }

Texture load_texture_any(const std::string& path, bool albedo) {
    auto ext = std::filesystem::path(path).extension().string();
    if (ext == ".pfm" || ext == ".PFM") return load_pfm(path);
    return load_png(path, albedo ? 2.2 : 1.0);
}

}  // namespace

Scene load_scene(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open scene file: " + path);
    json j;
    try {
        j = json::parse(in);
    } catch (const json::parse_error& e) {
        throw IoError("scene parse error in " + path + ": " + e.what());
    }

    auto dir = std::filesystem::path(path).parent_path();
    auto resolve = [&](const std::string& p) {
        std::filesystem::path fp(p);
        return fp.is_absolute() ? fp.string() : (dir / fp).string();
    };

    Scene scene;
    scene.mesh = load_obj(resolve(j.at("mesh").get<std::string>()));
    const auto& tex = j.at("textures");
    scene.maps.diffuse = load_texture_any(resolve(tex.at("diffuse").get<std::string>()), true);
    scene.maps.specular = load_texture_any(resolve(tex.at("specular").get<std::string>()), true);
    scene.maps.roughness =
        load_texture_any(resolve(tex.at("roughness").get<std::string>()), false);
    scene.light.intensity = vec3_of(j.value("light_intensity", json()), Vec3(1, 1, 1));
    scene.background = vec3_of(j.value("background", json()), Vec3(0, 0, 0));

    for (const auto& vj : j.at("views")) {
        Vec3 origin = vec3_of(vj.at("origin"));
        Vec3 target = vec3_of(vj.value("look_at", json()), Vec3(0, 0, 0));
        Vec3 up = vec3_of(vj.value("up", json()), Vec3(0, 0, 1));
        scene.views.push_back(Camera::look_at(origin, target, up, vj.value("fov_deg", 45.0),
                                              vj.value("width", 64), vj.value("height", 64)));
    }
    if (scene.views.empty()) throw IoError("scene has no views: " + path);
    return scene;
}

void save_scene(const Scene& scene, const std::string& json_path, const std::string& asset_dir,
                const std::string& asset_prefix) {
    std::filesystem::create_directories(asset_dir);
    auto rel = [&](const std::string& name) { return asset_prefix + name; };
    auto abs = [&](const std::string& name) {
        return (std::filesystem::path(asset_dir) / (asset_prefix + name)).string();
    };

    save_obj(scene.mesh, abs("mesh.obj"));
    save_pfm(scene.maps.diffuse, abs("diffuse.pfm"));
    save_pfm(scene.maps.specular, abs("specular.pfm"));
    save_pfm(scene.maps.roughness, abs("roughness.pfm"));

    json j;
    j["mesh"] = rel("mesh.obj");
    j["textures"] = {{"diffuse", rel("diffuse.pfm")},
                     {"specular", rel("specular.pfm")},
                     {"roughness", rel("roughness.pfm")}};
    j["light_intensity"] = to_json(scene.light.intensity);
    j["background"] = to_json(scene.background);
    j["views"] = json::array();
    for (const auto& cam : scene.views) {
        json vj;
        vj["origin"] = to_json(cam.origin);
        vj["look_at"] = to_json(cam.origin + cam.forward);
        vj["up"] = to_json(cam.up);
        vj["fov_deg"] = cam.fov_deg;
        vj["width"] = cam.width;
        vj["height"] = cam.height;
        j["views"].push_back(vj);
    }
    std::ofstream out(json_path);
    if (!out) throw IoError("cannot write scene file: " + json_path);
    out << j.dump(2) << "\n";
}

}  // namespace collodiff
