#include <doctest.h>

#include "collodiff/errors.hpp"
#include "collodiff/params.hpp"
#include "support/test_scenes.hpp"

using namespace collodiff;
using namespace collodiff::testing;

TEST_CASE("layout: segments are disjoint and cover the vector") {
    Scene scene = sphere_scene(1, 2, 8);
    for (bool light : {false, true}) {
        auto layout = ParamLayout::for_scene(scene, light);
        size_t cursor = 0;
        for (const auto& seg : layout->segments) {
            CHECK(seg.offset == cursor);
            cursor += seg.size;
        }
        CHECK(cursor == layout->total);
        CHECK(layout->has(SegmentId::Light) == light);
    }
}

TEST_CASE("pack/apply round trip is the identity") {
    Scene scene = sphere_scene(1, 2, 8);
    auto layout = ParamLayout::for_scene(scene, true);
    ParamVector p = pack(scene, layout);

    Scene other = scene;
    for (auto& v : other.mesh.positions) v = Vec3(0, 0, 0);
    other.maps.diffuse.data.assign(other.maps.diffuse.data.size(), 0.0);
    other.light.intensity = Vec3(0, 0, 0);
    apply(p, other);

    for (int v = 0; v < scene.mesh.vertex_count(); ++v)
        CHECK(other.mesh.positions[v] == scene.mesh.positions[v]);
    CHECK(other.maps.diffuse.data == scene.maps.diffuse.data);
    CHECK(other.light.intensity == scene.light.intensity);

    ParamVector p2 = pack(other, layout);
    CHECK(p2.values == p.values);
}

TEST_CASE("grad deposits are segment-checked") {
    Scene scene = sphere_scene(0, 1, 8);
    auto layout = ParamLayout::for_scene(scene, false);
    GradVector g(layout);
    g.add_position(0, Vec3(1, 2, 3));
    CHECK(g.values[0] == 1);
    CHECK(g.values[2] == 3);
    CHECK_THROWS_AS(g.add_position(scene.mesh.vertex_count(), Vec3(1, 0, 0)), Error);
    CHECK_THROWS_AS(g.add(SegmentId::Roughness, 1 << 20, 1.0), Error);
    CHECK_THROWS_AS(g.add(SegmentId::Light, 0, 1.0), Error);  // not in layout
}

TEST_CASE("apply rejects mismatched layouts") {
    Scene scene = sphere_scene(1, 1, 8);
    auto layout = ParamLayout::for_scene(scene, false);
    ParamVector p = pack(scene, layout);
    Scene smaller = sphere_scene(0, 1, 8);
    CHECK_THROWS_AS(apply(p, smaller), SizeMismatch);
}
