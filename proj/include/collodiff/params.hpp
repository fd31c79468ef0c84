#pragma once

#include <memory>
#include <string>
#include <vector>

#include "collodiff/scene.hpp"
#include "collodiff/vec.hpp"

namespace collodiff {

// Flattened view of the optimizable state: vertex positions, the three
// texture maps, and optionally the light intensity. UV coordinates ride along
// on the mesh but stay frozen. GradVector shares the same layout.
enum class SegmentId { Positions, Diffuse, Specular, Roughness, Light };

const char* segment_name(SegmentId id);

struct Segment {
    SegmentId id;
    size_t offset = 0;
    size_t size = 0;
};

struct ParamLayout {
    std::vector<Segment> segments;
    size_t total = 0;

    bool has(SegmentId id) const;
    const Segment& get(SegmentId id) const;

    static std::shared_ptr<const ParamLayout> for_scene(const Scene& scene, bool optimize_light);
};

struct ParamVector {
    std::shared_ptr<const ParamLayout> layout;
    std::vector<double> values;
};

struct GradVector {
    std::shared_ptr<const ParamLayout> layout;
    std::vector<double> values;

    explicit GradVector(std::shared_ptr<const ParamLayout> l)
        : layout(std::move(l)), values(layout->total, 0.0) {}

    // All deposits are segment-checked so a bad index cannot silently land in
    // another parameter block.
    void add(SegmentId id, size_t local_index, double v);
    void add_position(int vertex, const Vec3& v);
    void add_texel(SegmentId id, int texel, int channel, int channels, double v);
    void accumulate(const GradVector& other, double scale = 1.0);
};

ParamVector pack(const Scene& scene, std::shared_ptr<const ParamLayout> layout);
void apply(const ParamVector& params, Scene& scene);

}  // namespace collodiff
