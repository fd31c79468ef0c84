#pragma once

#include <vector>

#include "collodiff/camera.hpp"
#include "collodiff/mesh.hpp"

namespace collodiff {

// One silhouette edge after projection and clipping. p0/p1 are the source
// mesh vertices; the visible part covers edge parameters [t0, t1] of
// P(t) = (1-t) p0 + t p1, projecting to the 2D segment [q0, q1] with depths
// z0/z1 at its ends.
struct SilhouetteSegment {
    int v0 = -1, v1 = -1;
    Vec3 p0, p1;
    double t0 = 0, t1 = 1;
    Vec2 q0, q1;
    double z0 = 0, z1 = 0;
    double length_px = 0;
};

struct SilhouetteSet {
    std::vector<SilhouetteSegment> segments;
    double total_length = 0;  // pixels
};

// An edge is a silhouette for the view iff it is a boundary edge or its two
// faces change facing sign along the direction from the camera to the edge
// midpoint.
bool is_silhouette_edge(const Mesh& mesh, const Mesh::Edge& edge, const Camera& view);

// All silhouette edges projected into the view, clipped against the near
// plane and the image rectangle. Requires adjacency. Fully-behind or
// zero-length projections are dropped.
SilhouetteSet extract_silhouettes(const Mesh& mesh, const Camera& view);

// 2D parameter s on [q0, q1] -> 3D edge parameter t (perspective-correct).
double segment_param_2d_to_3d(const SilhouetteSegment& seg, double s);

}  // namespace collodiff
