#pragma once

#include <string>
#include <vector>

#include "collodiff/camera.hpp"
#include "collodiff/material.hpp"
#include "collodiff/mesh.hpp"

namespace collodiff {

// Point light riding on the camera origin; only the intensity is free.
struct CollocatedLight {
    Vec3 intensity{1, 1, 1};
};

struct Scene {
    Mesh mesh;
    MaterialMaps maps;
    CollocatedLight light;
    std::vector<Camera> views;
    Vec3 background{0, 0, 0};
};

// JSON scene description:
// { "mesh": path, "textures": {"diffuse","specular","roughness"},
//   "light_intensity": [r,g,b], "background": [r,g,b],
//   "views": [{"origin","look_at","up","fov_deg","width","height"}] }
// Texture paths may be .pfm (linear) or .png (albedos decoded at gamma 2.2).
Scene load_scene(const std::string& path);
void save_scene(const Scene& scene, const std::string& json_path, const std::string& asset_dir,
                const std::string& asset_prefix);

}  // namespace collodiff
