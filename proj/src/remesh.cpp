#include <algorithm>
#include <cstdio>
#include <set>

#include "collodiff/bvh.hpp"
#include "collodiff/errors.hpp"
#include "collodiff/optimize.hpp"
#include "collodiff/parallel.hpp"

namespace collodiff {

namespace {

// Splits every edge longer than max_len at its midpoint, skipping edges whose
// faces were already touched this pass. Returns the number of splits.
int split_pass(Mesh& m, double max_len) {
    build_adjacency(m);
    std::vector<char> touched(m.triangle_count(), 0);
    const auto edges = m.edges;  // snapshot
    int splits = 0;
    for (const auto& e : edges) {
        if (length(m.positions[e.v1] - m.positions[e.v0]) <= max_len) continue;
        if (touched[e.f0] || (e.f1 >= 0 && touched[e.f1])) continue;

        int w = m.vertex_count();
        m.positions.push_back((m.positions[e.v0] + m.positions[e.v1]) * 0.5);
        if (!m.uvs.empty()) m.uvs.push_back((m.uvs[e.v0] + m.uvs[e.v1]) * 0.5);

        for (int f : {e.f0, e.f1}) {
            if (f < 0) continue;
            auto& t = m.triangles[f];
            for (int i = 0; i < 3; ++i) {
                int p = t[i], q = t[(i + 1) % 3];
                if ((p == e.v0 && q == e.v1) || (p == e.v1 && q == e.v0)) {
                    int o = t[(i + 2) % 3];
                    m.triangles[f] = {p, w, o};
                    touched[f] = 1;
                    m.triangles.push_back({w, q, o});
                    touched.push_back(1);
                    break;
                }
            }
        }
        ++splits;
    }
    if (splits) m.has_adjacency = false;
    return splits;
}

int opposite_vertex(const Mesh& m, int face, int v0, int v1) {
    for (int k = 0; k < 3; ++k) {
        int v = m.triangles[face][k];
        if (v != v0 && v != v1) return v;
    }
    return -1;
}

// Collapses interior edges shorter than min_len to their midpoint, rejecting
// collapses that break the link condition, flip or degenerate a face, or
// stretch an edge beyond max_len. Compacts the mesh afterwards.
int collapse_pass(Mesh& m, double min_len, double max_len) {
    build_adjacency(m);
    const int nv = m.vertex_count();
    const int nt = m.triangle_count();

    std::vector<std::vector<int>> vfaces(nv);
    for (int f = 0; f < nt; ++f)
        for (int k = 0; k < 3; ++k) vfaces[m.triangles[f][k]].push_back(f);
    std::vector<std::vector<int>> vring(nv);
    for (const auto& e : m.edges) {
        vring[e.v0].push_back(e.v1);
        vring[e.v1].push_back(e.v0);
    }

    std::vector<char> tri_dead(nt, 0), tri_dirty(nt, 0), vert_dead(nv, 0);
    const double area_eps = 1e-10 * min_len * min_len;
    const auto edges = m.edges;
    int collapses = 0;

    for (const auto& e : edges) {
        if (vert_dead[e.v0] || vert_dead[e.v1] || e.f1 < 0) continue;
        if (length(m.positions[e.v1] - m.positions[e.v0]) >= min_len) continue;

        bool dirty = false;
        for (int v : {e.v0, e.v1})
            for (int f : vfaces[v])
                if (tri_dirty[f] || tri_dead[f]) dirty = true;
        if (dirty) continue;

        // link condition: shared ring must be exactly the two opposite vertices
        int opp0 = opposite_vertex(m, e.f0, e.v0, e.v1);
        int opp1 = opposite_vertex(m, e.f1, e.v0, e.v1);
        if (opp0 < 0 || opp1 < 0 || opp0 == opp1) continue;
        std::vector<int> common;
        for (int a : vring[e.v0])
            for (int b : vring[e.v1])
                if (a == b && !vert_dead[a]) common.push_back(a);
        std::sort(common.begin(), common.end());
        common.erase(std::unique(common.begin(), common.end()), common.end());
        if (common.size() != 2) continue;
        if (!((common[0] == std::min(opp0, opp1)) && (common[1] == std::max(opp0, opp1))))
            continue;

        Vec3 mid = (m.positions[e.v0] + m.positions[e.v1]) * 0.5;

        // simulate the merged one-ring
        bool ok = true;
        for (int v : {e.v0, e.v1}) {
            for (int f : vfaces[v]) {
                if (f == e.f0 || f == e.f1 || tri_dead[f]) continue;
                Vec3 q[3];
                for (int k = 0; k < 3; ++k) {
                    int vi = m.triangles[f][k];
                    q[k] = (vi == e.v0 || vi == e.v1) ? mid : m.positions[vi];
                }
                Vec3 new_n = cross(q[1] - q[0], q[2] - q[0]);
                Vec3 old_n = m.face_normal_unnormalized(f);
                if (0.5 * length(new_n) <= area_eps || dot(new_n, old_n) <= 0) {
                    ok = false;
                    break;
                }
                for (int k = 0; k < 3 && ok; ++k)
                    if (length(q[(k + 1) % 3] - q[k]) > max_len) ok = false;
            }
            if (!ok) break;
        }
        if (!ok) continue;

        // apply: v1 merges into v0 at the midpoint
        m.positions[e.v0] = mid;
        if (!m.uvs.empty()) m.uvs[e.v0] = (m.uvs[e.v0] + m.uvs[e.v1]) * 0.5;
        tri_dead[e.f0] = tri_dead[e.f1] = 1;
        for (int f : vfaces[e.v1]) {
            if (tri_dead[f]) continue;
            for (int k = 0; k < 3; ++k)
                if (m.triangles[f][k] == e.v1) m.triangles[f][k] = e.v0;
            vfaces[e.v0].push_back(f);
        }
        for (int f : vfaces[e.v0]) tri_dirty[f] = 1;
        vert_dead[e.v1] = 1;
        ++collapses;
    }

    if (collapses) {
        // compact vertices and triangles
        std::vector<int> remap(nv, -1);
        Mesh out;
        out.positions.reserve(nv);
        if (!m.uvs.empty()) out.uvs.reserve(nv);
        for (int v = 0; v < nv; ++v) {
            if (vert_dead[v]) continue;
            remap[v] = int(out.positions.size());
            out.positions.push_back(m.positions[v]);
            if (!m.uvs.empty()) out.uvs.push_back(m.uvs[v]);
        }
        for (int f = 0; f < nt; ++f) {
            if (tri_dead[f]) continue;
            const auto& t = m.triangles[f];
            out.triangles.push_back({remap[t[0]], remap[t[1]], remap[t[2]]});
        }
        m = std::move(out);
    }
    return collapses;
}

// Flips interior edges when doing so lowers the squared valence deviation
// from 6, subject to geometric validity.
int flip_pass(Mesh& m) {
    build_adjacency(m);
    const int nv = m.vertex_count();
    const int nt = m.triangle_count();
    std::vector<int> valence(nv, 0);
    for (const auto& e : m.edges) {
        valence[e.v0]++;
        valence[e.v1]++;
    }
    std::vector<std::vector<int>> vfaces(nv);
    for (int f = 0; f < nt; ++f)
        for (int k = 0; k < 3; ++k) vfaces[m.triangles[f][k]].push_back(f);
    std::vector<std::set<int>> vring(nv);
    for (const auto& e : m.edges) {
        vring[e.v0].insert(e.v1);
        vring[e.v1].insert(e.v0);
    }

    std::vector<char> dirty(nt, 0);
    const auto edges = m.edges;
    int flips = 0;
    for (const auto& e : edges) {
        if (e.f1 < 0 || dirty[e.f0] || dirty[e.f1]) continue;
        int a = opposite_vertex(m, e.f0, e.v0, e.v1);
        int b = opposite_vertex(m, e.f1, e.v0, e.v1);
        if (a < 0 || b < 0 || a == b) continue;
        if (vring[a].count(b)) continue;  // edge (a,b) already exists

        auto dev = [&](int v, int d) {
            double x = valence[v] + d - 6.0;
            return x * x;
        };
        double before = dev(e.v0, 0) + dev(e.v1, 0) + dev(a, 0) + dev(b, 0);
        double after = dev(e.v0, -1) + dev(e.v1, -1) + dev(a, 1) + dev(b, 1);
        if (after >= before) continue;

        // orientation: find the directed pair (p -> q) inside f0
        int p = -1, q = -1;
        for (int i = 0; i < 3; ++i) {
            int u = m.triangles[e.f0][i], v = m.triangles[e.f0][(i + 1) % 3];
            if ((u == e.v0 && v == e.v1) || (u == e.v1 && v == e.v0)) {
                p = u;
                q = v;
                break;
            }
        }
        if (p < 0) continue;

        std::array<int, 3> t0 = {p, b, a};
        std::array<int, 3> t1 = {b, q, a};
        Vec3 n0 = cross(m.positions[t0[1]] - m.positions[t0[0]],
                        m.positions[t0[2]] - m.positions[t0[0]]);
        Vec3 n1 = cross(m.positions[t1[1]] - m.positions[t1[0]],
                        m.positions[t1[2]] - m.positions[t1[0]]);
        Vec3 old_n = m.face_normal_unnormalized(e.f0) + m.face_normal_unnormalized(e.f1);
        if (length(n0) < 1e-14 || length(n1) < 1e-14) continue;
        if (dot(n0, old_n) <= 0 || dot(n1, old_n) <= 0) continue;

        m.triangles[e.f0] = t0;
        m.triangles[e.f1] = t1;
        valence[p]--;
        valence[q]--;
        valence[a]++;
        valence[b]++;
        vring[a].insert(b);
        vring[b].insert(a);
        for (int v : {p, q, a, b})
            for (int f : vfaces[v]) dirty[f] = 1;
        ++flips;
    }
    if (flips) m.has_adjacency = false;
    return flips;
}

// Uniform tangential relaxation followed by projection back onto the input
// surface.
void smooth_pass(Mesh& m, const Mesh& original, const Bvh& original_bvh, double lambda) {
    build_adjacency(m);
    std::vector<Vec3> normals = vertex_normals(m);
    std::vector<Vec3> centroid(m.vertex_count(), Vec3());
    std::vector<int> degree(m.vertex_count(), 0);
    for (const auto& e : m.edges) {
        centroid[e.v0] += m.positions[e.v1];
        centroid[e.v1] += m.positions[e.v0];
        degree[e.v0]++;
        degree[e.v1]++;
    }
    std::vector<Vec3> next(m.vertex_count());
    for (int v = 0; v < m.vertex_count(); ++v) {
        if (degree[v] == 0) {
            next[v] = m.positions[v];
            continue;
        }
        Vec3 q = centroid[v] / double(degree[v]);
        Vec3 d = q - m.positions[v];
        Vec3 d_t = d - normals[v] * dot(normals[v], d);
        Vec3 relaxed = m.positions[v] + d_t * lambda;
        next[v] = original_bvh.closest_point(original, relaxed).point;
    }
    m.positions = std::move(next);
}

double median_edge_length(const Mesh& m) {
    std::vector<double> lens;
    lens.reserve(m.edges.size());
    for (const auto& e : m.edges) lens.push_back(length(m.positions[e.v1] - m.positions[e.v0]));
    if (lens.empty()) return 0;
    std::nth_element(lens.begin(), lens.begin() + lens.size() / 2, lens.end());
    return lens[lens.size() / 2];
}

}  // namespace

void uv_transfer(const Mesh& old_mesh, Mesh& mesh, double max_distance) {
    if (old_mesh.uvs.size() != old_mesh.positions.size()) return;  // nothing to transfer
    Bvh bvh(old_mesh);
    mesh.uvs.resize(mesh.positions.size());
    for (int v = 0; v < mesh.vertex_count(); ++v) {
        ClosestPoint cp = bvh.closest_point(old_mesh, mesh.positions[v]);
        if (cp.tri < 0 || cp.distance > max_distance)
            throw ProjectionTooFar("uv transfer: vertex " + std::to_string(v) + " is " +
                                   std::to_string(cp.distance) + " away from the source mesh");
        const auto& t = old_mesh.triangles[cp.tri];
        mesh.uvs[v] =
            old_mesh.uvs[t[0]] * cp.b0 + old_mesh.uvs[t[1]] * cp.b1 + old_mesh.uvs[t[2]] * cp.b2;
    }
}

Mesh remesh(const Mesh& mesh, double target_edge_length, int max_sweeps) {
    if (mesh.triangle_count() == 0) throw EmptyMesh();
    const double max_len = 4.0 / 3.0 * target_edge_length;
    const double min_len = 4.0 / 5.0 * target_edge_length;

    Mesh original = mesh;
    if (!original.has_adjacency) build_adjacency(original);
    Bvh original_bvh(original);

    Mesh m = original;
    for (int sweep = 0; sweep < max_sweeps; ++sweep) {
        int splits = 0;
        for (int i = 0; i < 10; ++i) {
            int s = split_pass(m, max_len);
            splits += s;
            if (!s) break;
        }
        int collapses = collapse_pass(m, min_len, max_len);
        int flips = flip_pass(m);
        smooth_pass(m, original, original_bvh, 0.5);
        if (log_level() >= 2)
            std::fprintf(stderr, "remesh sweep %d: %d splits, %d collapses, %d flips\n", sweep,
                         splits, collapses, flips);
        if (!splits && !collapses && !flips && sweep >= 1) break;
    }
    build_adjacency(m);

    bool bad = !m.manifold || self_intersects(m);
    if (bad) {
        // splits keep every vertex on the input surface, so a split-only
        // refinement cannot introduce intersections
        if (log_level() >= 1)
            std::fprintf(stderr, "remesh: full pipeline failed checks, using split-only mesh\n");
        m = original;
        for (int i = 0; i < 20; ++i)
            if (!split_pass(m, max_len)) break;
        build_adjacency(m);
        if (self_intersects(m))
            throw RemeshFailed("remesh could not produce an intersection-free mesh");
    }

    double med = median_edge_length(m);
    if (log_level() >= 1)
        std::fprintf(stderr, "remesh: %d vertices, median edge %.4g (target %.4g)\n",
                     m.vertex_count(), med, target_edge_length);

    uv_transfer(original, m, 10.0 * target_edge_length);
    return m;
}

}  // namespace collodiff
