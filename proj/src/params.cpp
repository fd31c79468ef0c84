#include "collodiff/params.hpp"

#include "collodiff/errors.hpp"

namespace collodiff {

const char* segment_name(SegmentId id) {
    switch (id) {
        case SegmentId::Positions: return "positions";
        case SegmentId::Diffuse: return "diffuse";
        case SegmentId::Specular: return "specular";
        case SegmentId::Roughness: return "roughness";
        case SegmentId::Light: return "light";
    }
    return "?";
}

bool ParamLayout::has(SegmentId id) const {
    for (const auto& s : segments)
        if (s.id == id) return true;
    return false;
}

const Segment& ParamLayout::get(SegmentId id) const {
    for (const auto& s : segments)
        if (s.id == id) return s;
    throw Error(std::string("layout has no segment ") + segment_name(id));
}

std::shared_ptr<const ParamLayout> ParamLayout::for_scene(const Scene& scene,
                                                          bool optimize_light) {
    auto layout = std::make_shared<ParamLayout>();
    auto push = [&](SegmentId id, size_t size) {
        layout->segments.push_back({id, layout->total, size});
        layout->total += size;
    };
    push(SegmentId::Positions, size_t(scene.mesh.vertex_count()) * 3);
    push(SegmentId::Diffuse, size_t(scene.maps.diffuse.texel_count()) * 3);
    push(SegmentId::Specular, size_t(scene.maps.specular.texel_count()) * 3);
    push(SegmentId::Roughness, size_t(scene.maps.roughness.texel_count()));
    if (optimize_light) push(SegmentId::Light, 3);
    return layout;
}

void GradVector::add(SegmentId id, size_t local_index, double v) {
    const Segment& seg = layout->get(id);
    if (local_index >= seg.size)
        throw Error(std::string("gradient index out of segment ") + segment_name(id));
    values[seg.offset + local_index] += v;
}

void GradVector::add_position(int vertex, const Vec3& v) {
    const Segment& seg = layout->get(SegmentId::Positions);
    size_t base = size_t(vertex) * 3;
    if (base + 2 >= seg.size) throw Error("vertex index out of positions segment");
    values[seg.offset + base] += v.x;
    values[seg.offset + base + 1] += v.y;
    values[seg.offset + base + 2] += v.z;
}

void GradVector::add_texel(SegmentId id, int texel, int channel, int channels, double v) {
    add(id, size_t(texel) * channels + channel, v);
}

void GradVector::accumulate(const GradVector& other, double scale) {
    if (other.values.size() != values.size()) throw SizeMismatch("gradient layout mismatch");
    for (size_t i = 0; i < values.size(); ++i) values[i] += scale * other.values[i];
}

ParamVector pack(const Scene& scene, std::shared_ptr<const ParamLayout> layout) {
    ParamVector p;
    p.layout = std::move(layout);
    p.values.resize(p.layout->total);
    for (const auto& seg : p.layout->segments) {
        double* out = p.values.data() + seg.offset;
        switch (seg.id) {
            case SegmentId::Positions:
                for (int v = 0; v < scene.mesh.vertex_count(); ++v) {
                    out[3 * v] = scene.mesh.positions[v].x;
                    out[3 * v + 1] = scene.mesh.positions[v].y;
                    out[3 * v + 2] = scene.mesh.positions[v].z;
                }
                break;
            case SegmentId::Diffuse:
                std::copy(scene.maps.diffuse.data.begin(), scene.maps.diffuse.data.end(), out);
                break;
            case SegmentId::Specular:
                std::copy(scene.maps.specular.data.begin(), scene.maps.specular.data.end(), out);
                break;
            case SegmentId::Roughness:
                std::copy(scene.maps.roughness.data.begin(), scene.maps.roughness.data.end(),
                          out);
                break;
            case SegmentId::Light:
                out[0] = scene.light.intensity.x;
                out[1] = scene.light.intensity.y;
                out[2] = scene.light.intensity.z;
                break;
        }
    }
    return p;
}

void apply(const ParamVector& params, Scene& scene) {
    for (const auto& seg : params.layout->segments) {
        const double* in = params.values.data() + seg.offset;
        switch (seg.id) {
            case SegmentId::Positions:
                if (seg.size != size_t(scene.mesh.vertex_count()) * 3)
                    throw SizeMismatch("positions segment does not match mesh");
                for (int v = 0; v < scene.mesh.vertex_count(); ++v)
                    scene.mesh.positions[v] = Vec3(in[3 * v], in[3 * v + 1], in[3 * v + 2]);
                break;
            case SegmentId::Diffuse:
                if (seg.size != scene.maps.diffuse.data.size())
                    throw SizeMismatch("diffuse segment does not match map");
                std::copy(in, in + seg.size, scene.maps.diffuse.data.begin());
                break;
            case SegmentId::Specular:
                if (seg.size != scene.maps.specular.data.size())
                    throw SizeMismatch("specular segment does not match map");
                std::copy(in, in + seg.size, scene.maps.specular.data.begin());
                break;
            case SegmentId::Roughness:
                if (seg.size != scene.maps.roughness.data.size())
                    throw SizeMismatch("roughness segment does not match map");
                std::copy(in, in + seg.size, scene.maps.roughness.data.begin());
                break;
            case SegmentId::Light:
                scene.light.intensity = Vec3(in[0], in[1], in[2]);
                break;
        }
    }
}

}  // namespace collodiff
