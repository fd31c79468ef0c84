#include "collodiff/mesh.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>

#include "collodiff/bvh.hpp"
#include "collodiff/errors.hpp"
#include "collodiff/rng.hpp"

namespace collodiff {

Vec3 Mesh::bbox_min() const {
    Vec3 lo(1e300);
    for (const auto& p : positions) lo = min(lo, p);
    return lo;
}

Vec3 Mesh::bbox_max() const {
    Vec3 hi(-1e300);
    for (const auto& p : positions) hi = max(hi, p);
    return hi;
}

void build_adjacency(Mesh& mesh) {
    const int nv = mesh.vertex_count();
    for (int f = 0; f < mesh.triangle_count(); ++f) {
        const auto& t = mesh.triangles[f];
        for (int k = 0; k < 3; ++k) {
            if (t[k] < 0 || t[k] >= nv)
                throw Error("triangle " + std::to_string(f) + " references vertex " +
                            std::to_string(t[k]) + " out of range");
        }
        if (t[0] == t[1] || t[1] == t[2] || t[0] == t[2])
            throw Error("triangle " + std::to_string(f) + " repeats a vertex");
    }

    std::map<std::pair<int, int>, std::vector<int>> edge_faces;
    for (int f = 0; f < mesh.triangle_count(); ++f) {
        const auto& t = mesh.triangles[f];
        for (int k = 0; k < 3; ++k) {
            int a = t[k], b = t[(k + 1) % 3];
            edge_faces[{std::min(a, b), std::max(a, b)}].push_back(f);
        }
    }

    mesh.edges.clear();
    mesh.edges.reserve(edge_faces.size());
    mesh.manifold = true;
    for (const auto& [key, faces] : edge_faces) {
        if (faces.size() > 2) throw NonManifoldEdge(key.first, key.second, int(faces.size()));
        Mesh::Edge e;
        e.v0 = key.first;
        e.v1 = key.second;
        e.f0 = faces[0];
        e.f1 = faces.size() > 1 ? faces[1] : -1;
        if (e.f1 == -1) mesh.manifold = false;  // open boundary
        mesh.edges.push_back(e);
    }
    mesh.has_adjacency = true;
}

std::vector<Vec3> vertex_normals(const Mesh& mesh) {
    std::vector<Vec3> accum(mesh.vertex_count(), Vec3());
    for (int f = 0; f < mesh.triangle_count(); ++f) {
        // cross product has magnitude 2*area, giving area weighting for free
        Vec3 n = mesh.face_normal_unnormalized(f);
        for (int k = 0; k < 3; ++k) accum[mesh.triangles[f][k]] += n;
    }
    std::vector<Vec3> normals(mesh.vertex_count(), Vec3(0, 0, 1));
    std::vector<bool> resolved(mesh.vertex_count(), false);
    for (int v = 0; v < mesh.vertex_count(); ++v) {
        double len = length(accum[v]);
        if (len >= 1e-12) {
            normals[v] = accum[v] / len;
            resolved[v] = true;
        }
    }
    // degenerate sums fall back to any incident face normal
    for (int f = 0; f < mesh.triangle_count(); ++f) {
        Vec3 n = mesh.face_normal_unnormalized(f);
        double len = length(n);
        if (len < 1e-30) continue;
        for (int k = 0; k < 3; ++k) {
            int v = mesh.triangles[f][k];
            if (!resolved[v]) {
                normals[v] = n / len;
                resolved[v] = true;
            }
        }
    }
    return normals;
}

// Ericson, Real-Time Collision Detection, 5.1.5.
Vec3 closest_point_on_triangle(const Vec3& p, const Vec3& a, const Vec3& b, const Vec3& c) {
    Vec3 ab = b - a, ac = c - a, ap = p - a;
    double d1 = dot(ab, ap), d2 = dot(ac, ap);
    if (d1 <= 0 && d2 <= 0) return a;

    Vec3 bp = p - b;
    double d3 = dot(ab, bp), d4 = dot(ac, bp);
    if (d3 >= 0 && d4 <= d3) return b;

    double vc = d1 * d4 - d3 * d2;
    if (vc <= 0 && d1 >= 0 && d3 <= 0) {
        double v = d1 / (d1 - d3);
        return a + ab * v;
    }

    Vec3 cp = p - c;
    double d5 = dot(ab, cp), d6 = dot(ac, cp);
    if (d6 >= 0 && d5 <= d6) return c;

    double vb = d5 * d2 - d1 * d6;
    if (vb <= 0 && d2 >= 0 && d6 <= 0) {
        double w = d2 / (d2 - d6);
        return a + ac * w;
    }

    double va = d3 * d6 - d5 * d4;
    if (va <= 0 && (d4 - d3) >= 0 && (d5 - d6) >= 0) {
        double w = (d4 - d3) / ((d4 - d3) + (d5 - d6));
        return b + (c - b) * w;
    }

    double denom = 1.0 / (va + vb + vc);
    double v = vb * denom, w = vc * denom;
    return a + ab * v + ac * w;
}

double point_triangle_distance(const Vec3& p, const Vec3& a, const Vec3& b, const Vec3& c) {
    return length(p - closest_point_on_triangle(p, a, b, c));
}

double point_to_mesh_distance(const std::vector<Vec3>& points, const Mesh& mesh) {
    if (mesh.triangle_count() == 0) throw EmptyMesh();
    Bvh bvh(mesh);
    double sum = 0;
    for (const auto& p : points) sum += bvh.closest_point(mesh, p).distance;
    return points.empty() ? 0.0 : sum / double(points.size());
}

namespace {

void project_onto_axis(const Vec3& axis, const Vec3* pts, int n, double& lo, double& hi) {
    lo = hi = dot(axis, pts[0]);
    for (int i = 1; i < n; ++i) {
        double d = dot(axis, pts[i]);
        lo = std::min(lo, d);
        hi = std::max(hi, d);
    }
}

bool separated_on_axis(const Vec3& axis, const Vec3* ta, const Vec3* tb, double tol) {
    double l2 = length_squared(axis);
    if (l2 < 1e-24) return false;  // degenerate axis carries no information
    double alo, ahi, blo, bhi;
    project_onto_axis(axis, ta, 3, alo, ahi);
    project_onto_axis(axis, tb, 3, blo, bhi);
    double gap = std::max(blo - ahi, alo - bhi);
    return gap > -tol * std::sqrt(l2);
}

}  // namespace

bool triangles_intersect(const Vec3& a0, const Vec3& a1, const Vec3& a2,
                         const Vec3& b0, const Vec3& b1, const Vec3& b2, double tol) {
    const Vec3 ta[3] = {a0, a1, a2};
    const Vec3 tb[3] = {b0, b1, b2};
    const Vec3 ea[3] = {a1 - a0, a2 - a1, a0 - a2};
    const Vec3 eb[3] = {b1 - b0, b2 - b1, b0 - b2};

    if (separated_on_axis(cross(ea[0], ea[1]), ta, tb, tol)) return false;
    if (separated_on_axis(cross(eb[0], eb[1]), ta, tb, tol)) return false;
    for (const auto& u : ea)
        for (const auto& v : eb)
            if (separated_on_axis(cross(u, v), ta, tb, tol)) return false;
    return true;
}

bool self_intersects(const Mesh& mesh, std::vector<std::pair<int, int>>* pairs) {
    if (pairs) pairs->clear();
    if (mesh.triangle_count() < 2) return false;
    Bvh bvh(mesh);
    bool found = false;
    std::vector<int> candidates;
    for (int f = 0; f < mesh.triangle_count(); ++f) {
        const auto& t = mesh.triangles[f];
        Vec3 lo = min(mesh.positions[t[0]], min(mesh.positions[t[1]], mesh.positions[t[2]]));
        Vec3 hi = max(mesh.positions[t[0]], max(mesh.positions[t[1]], mesh.positions[t[2]]));
        candidates.clear();
        bvh.collect_aabb_overlaps(lo, hi, candidates);
        for (int g : candidates) {
            if (g <= f) continue;
            const auto& s = mesh.triangles[g];
            bool share = false;
            for (int i = 0; i < 3 && !share; ++i)
                for (int j = 0; j < 3; ++j)
                    if (t[i] == s[j]) {
                        share = true;
                        break;
                    }
            if (share) continue;
            if (triangles_intersect(mesh.positions[t[0]], mesh.positions[t[1]],
                                    mesh.positions[t[2]], mesh.positions[s[0]],
                                    mesh.positions[s[1]], mesh.positions[s[2]])) {
                found = true;
                if (!pairs) return true;
                pairs->push_back({f, g});
            }
        }
    }
    return found;
}

std::vector<Vec3> sample_surface_points(const Mesh& mesh, int count, uint64_t seed) {
    if (mesh.triangle_count() == 0) throw EmptyMesh();
    std::vector<double> cdf(mesh.triangle_count());
    double total = 0;
    for (int f = 0; f < mesh.triangle_count(); ++f) {
        total += mesh.face_area(f);
        cdf[f] = total;
    }
    std::vector<Vec3> points;
    points.reserve(count);
    Rng rng(seed, 0x5a3);
    for (int i = 0; i < count; ++i) {
        double u = rng.next_double() * total;
        int f = int(std::lower_bound(cdf.begin(), cdf.end(), u) - cdf.begin());
        f = std::min(f, mesh.triangle_count() - 1);
        double r1 = std::sqrt(rng.next_double());
        double r2 = rng.next_double();
        double b0 = 1 - r1, b1 = r1 * (1 - r2), b2 = r1 * r2;
        const auto& t = mesh.triangles[f];
        points.push_back(mesh.positions[t[0]] * b0 + mesh.positions[t[1]] * b1 +
                         mesh.positions[t[2]] * b2);
    }
    return points;
}

double normalized_point_to_mesh(const Mesh& from, const Mesh& to, int samples, uint64_t seed) {
    Vec3 extent = to.bbox_max() - to.bbox_min();
    double scale = max_component(extent);
    if (scale <= 0) throw EmptyMesh();
    std::vector<Vec3> pts = sample_surface_points(from, samples, seed);
    return point_to_mesh_distance(pts, to) / scale;
}

namespace {

Mesh make_icosahedron() {
    const double phi = (1.0 + std::sqrt(5.0)) / 2.0;
    Mesh m;
    m.positions = {{-1, phi, 0}, {1, phi, 0}, {-1, -phi, 0}, {1, -phi, 0},
                   {0, -1, phi}, {0, 1, phi}, {0, -1, -phi}, {0, 1, -phi},
                   {phi, 0, -1}, {phi, 0, 1}, {-phi, 0, -1}, {-phi, 0, 1}};
    for (auto& p : m.positions) p = normalize(p);
    m.triangles = {{0, 11, 5}, {0, 5, 1},  {0, 1, 7},   {0, 7, 10}, {0, 10, 11},
                   {1, 5, 9},  {5, 11, 4}, {11, 10, 2}, {10, 7, 6}, {7, 1, 8},
                   {3, 9, 4},  {3, 4, 2},  {3, 2, 6},   {3, 6, 8},  {3, 8, 9},
                   {4, 9, 5},  {2, 4, 11}, {6, 2, 10},  {8, 6, 7},  {9, 8, 1}};
    return m;
}

}  // namespace

Mesh make_icosphere(int subdivisions, double radius) {
    Mesh m = make_icosahedron();
    for (int s = 0; s < subdivisions; ++s) {
        std::map<std::pair<int, int>, int> midpoint;
        auto mid = [&](int a, int b) {
            auto key = std::make_pair(std::min(a, b), std::max(a, b));
            auto it = midpoint.find(key);
            if (it != midpoint.end()) return it->second;
            int idx = int(m.positions.size());
            m.positions.push_back(normalize(m.positions[a] + m.positions[b]));
            midpoint[key] = idx;
            return idx;
        };
        std::vector<std::array<int, 3>> next;
        next.reserve(m.triangles.size() * 4);
        for (const auto& t : m.triangles) {
            int ab = mid(t[0], t[1]), bc = mid(t[1], t[2]), ca = mid(t[2], t[0]);
            next.push_back({t[0], ab, ca});
            next.push_back({t[1], bc, ab});
            next.push_back({t[2], ca, bc});
            next.push_back({ab, bc, ca});
        }
        m.triangles = std::move(next);
    }
    for (auto& p : m.positions) p *= radius;
    assign_spherical_uvs(m);
    build_adjacency(m);
    return m;
}

Mesh make_ellipsoid(int subdivisions, const Vec3& semi_axes) {
    Mesh m = make_icosphere(subdivisions, 1.0);
    for (auto& p : m.positions) p = p * semi_axes;
    assign_spherical_uvs(m);
    return m;
}

Mesh make_blob(int subdivisions, uint64_t seed, double amplitude) {
    Mesh m = make_icosphere(subdivisions, 0.5);
    Rng rng(seed, 0xb10b);
    // random low-order spherical-harmonic-style displacement field
    struct Lobe {
        Vec3 dir;
        double freq, amp, phase;
    };
    std::vector<Lobe> lobes(5);
    for (auto& l : lobes) {
        l.dir = normalize(Vec3(rng.next_gaussian(), rng.next_gaussian(), rng.next_gaussian()));
        l.freq = 1.0 + 2.0 * rng.next_double();
        l.amp = amplitude * (0.4 + 0.6 * rng.next_double());
        l.phase = 6.2831853 * rng.next_double();
    }
    for (auto& p : m.positions) {
        Vec3 dir = normalize(p);
        double r = 0.5;
        for (const auto& l : lobes) r += l.amp * std::cos(l.freq * 3.1415926 * dot(dir, l.dir) + l.phase) * 0.5;
        p = dir * r;
    }
    assign_spherical_uvs(m);
    return m;
}

Mesh make_quad(const Vec3& center, const Vec3& span_u, const Vec3& span_v) {
    Mesh m;
    m.positions = {center - span_u * 0.5 - span_v * 0.5, center + span_u * 0.5 - span_v * 0.5,
                   center + span_u * 0.5 + span_v * 0.5, center - span_u * 0.5 + span_v * 0.5};
    m.uvs = {{0, 0}, {1, 0}, {1, 1}, {0, 1}};
    m.triangles = {{0, 1, 2}, {0, 2, 3}};
    build_adjacency(m);
    return m;
}

Mesh make_tetrahedron(double scale) {
    Mesh m;
    double s = scale / std::sqrt(3.0);
    m.positions = {{s, s, s}, {s, -s, -s}, {-s, s, -s}, {-s, -s, s}};
    m.uvs = {{0, 0}, {1, 0}, {0, 1}, {1, 1}};
    m.triangles = {{0, 2, 1}, {0, 1, 3}, {0, 3, 2}, {1, 2, 3}};
    build_adjacency(m);
    return m;
}

void assign_spherical_uvs(Mesh& mesh) {
    Vec3 c;
    for (const auto& p : mesh.positions) c += p;
    c = c / double(std::max<size_t>(1, mesh.positions.size()));
    mesh.uvs.resize(mesh.positions.size());
    for (size_t i = 0; i < mesh.positions.size(); ++i) {
        Vec3 d = mesh.positions[i] - c;
        double len = length(d);
        if (len < 1e-12) {
            mesh.uvs[i] = {0.5, 0.5};
            continue;
        }
        d = d / len;
        double u = 0.5 + std::atan2(d.y, d.x) / 6.283185307179586;
        double v = 0.5 - std::asin(std::clamp(d.z, -1.0, 1.0)) / 3.141592653589793;
        mesh.uvs[i] = {clamp01(u), clamp01(v)};
    }
}

Mesh load_obj(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open OBJ file: " + path);
    Mesh m;
    std::vector<Vec2> vt_pool;
    std::vector<int> vertex_vt;  // vt index assigned to each vertex, -1 if none
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty() || line[0] == '#') continue;
        std::istringstream ss(line);
        std::string tag;
        ss >> tag;
        if (tag == "v") {
            Vec3 p;
            ss >> p.x >> p.y >> p.z;
            m.positions.push_back(p);
        } else if (tag == "vt") {
            Vec2 t;
            ss >> t.x >> t.y;
            vt_pool.push_back(t);
        } else if (tag == "f") {
            std::vector<std::pair<int, int>> corners;  // (vertex, vt or -1)
            std::string tok;
            while (ss >> tok) {
                int v = 0, vt = -1;
                size_t slash = tok.find('/');
                v = std::stoi(tok.substr(0, slash));
                if (slash != std::string::npos) {
                    size_t slash2 = tok.find('/', slash + 1);
                    std::string vt_str = tok.substr(slash + 1, slash2 == std::string::npos
                                                                  ? std::string::npos
                                                                  : slash2 - slash - 1);
                    if (!vt_str.empty()) vt = std::stoi(vt_str);
                }
                int vi = v > 0 ? v - 1 : int(m.positions.size()) + v;
                int ti = vt == -1 ? -1 : (vt > 0 ? vt - 1 : int(vt_pool.size()) + vt);
                corners.push_back({vi, ti});
            }
            if (corners.size() < 3)
                throw IoError(path + ":" + std::to_string(line_no) + ": face with <3 vertices");
            vertex_vt.resize(m.positions.size(), -1);
            for (const auto& [vi, ti] : corners)
                if (ti >= 0 && vi < int(vertex_vt.size())) vertex_vt[vi] = ti;
            // fan-triangulate polygons
            for (size_t k = 1; k + 1 < corners.size(); ++k)
                m.triangles.push_back(
                    {corners[0].first, corners[k].first, corners[k + 1].first});
        }
    }
    if (!vt_pool.empty()) {
        vertex_vt.resize(m.positions.size(), -1);
        m.uvs.resize(m.positions.size(), Vec2(0, 0));
        for (size_t i = 0; i < m.positions.size(); ++i)
            if (vertex_vt[i] >= 0 && vertex_vt[i] < int(vt_pool.size()))
                m.uvs[i] = vt_pool[vertex_vt[i]];
    }
    build_adjacency(m);
    return m;
}

void save_obj(const Mesh& mesh, const std::string& path) {
    std::FILE* f = std::fopen(path.c_str(), "w");
    if (!f) throw IoError("cannot write OBJ file: " + path);
    for (const auto& p : mesh.positions)
        std::fprintf(f, "v %.9g %.9g %.9g\n", p.x, p.y, p.z);
    const bool with_uv = mesh.uvs.size() == mesh.positions.size();
    if (with_uv)
        for (const auto& t : mesh.uvs) std::fprintf(f, "vt %.9g %.9g\n", t.x, t.y);
    for (const auto& t : mesh.triangles) {
        if (with_uv)
            std::fprintf(f, "f %d/%d %d/%d %d/%d\n", t[0] + 1, t[0] + 1, t[1] + 1, t[1] + 1,
                         t[2] + 1, t[2] + 1);
        else
            std::fprintf(f, "f %d %d %d\n", t[0] + 1, t[1] + 1, t[2] + 1);
    }
    std::fclose(f);
}

}  // namespace collodiff
