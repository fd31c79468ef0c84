#include "collodiff/bvh.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "collodiff/errors.hpp"

namespace collodiff {

bool ray_triangle(const Vec3& origin, const Vec3& dir, const Vec3& p0, const Vec3& p1,
                  const Vec3& p2, double& t, double& b1, double& b2) {
    Vec3 e1 = p1 - p0, e2 = p2 - p0;
    Vec3 pvec = cross(dir, e2);
    double det = dot(e1, pvec);
    if (std::abs(det) < 1e-18) return false;
    double inv_det = 1.0 / det;
    Vec3 tvec = origin - p0;
    b1 = dot(tvec, pvec) * inv_det;
    if (b1 < 0 || b1 > 1) return false;
    Vec3 qvec = cross(tvec, e1);
    b2 = dot(dir, qvec) * inv_det;
    if (b2 < 0 || b1 + b2 > 1) return false;
    t = dot(e2, qvec) * inv_det;
    return true;
}

HitRecord make_hit_record(const Mesh& mesh, const std::vector<Vec3>* normals, int tri,
                          double t, double b1, double b2, const Vec3& origin, const Vec3& dir) {
    HitRecord h;
    h.tri = tri;
    h.b1 = b1;
    h.b2 = b2;
    h.b0 = 1.0 - b1 - b2;
    h.t = t;
    const auto& tv = mesh.triangles[tri];
    h.point = mesh.positions[tv[0]] * h.b0 + mesh.positions[tv[1]] * b1 +
              mesh.positions[tv[2]] * b2;
    if (mesh.uvs.size() == mesh.positions.size())
        h.uv = mesh.uvs[tv[0]] * h.b0 + mesh.uvs[tv[1]] * b1 + mesh.uvs[tv[2]] * b2;
    if (normals) {
        Vec3 n = (*normals)[tv[0]] * h.b0 + (*normals)[tv[1]] * b1 + (*normals)[tv[2]] * b2;
        double len = length(n);
        h.normal = len > 1e-14 ? n / len : normalize(mesh.face_normal_unnormalized(tri));
    } else {
        h.normal = normalize(mesh.face_normal_unnormalized(tri));
    }
    (void)origin;
    (void)dir;
    return h;
}

namespace {

struct BuildPrim {
    Vec3 lo, hi, centroid;
    int tri;
};

inline bool ray_aabb(const Vec3& origin, const Vec3& inv_dir, const Vec3& lo, const Vec3& hi,
                     double t_max, double& t_near) {
    double t0 = (lo.x - origin.x) * inv_dir.x, t1 = (hi.x - origin.x) * inv_dir.x;
    double tmin = std::min(t0, t1), tmax = std::max(t0, t1);
    t0 = (lo.y - origin.y) * inv_dir.y;
    t1 = (hi.y - origin.y) * inv_dir.y;
    tmin = std::max(tmin, std::min(t0, t1));
    tmax = std::min(tmax, std::max(t0, t1));
    t0 = (lo.z - origin.z) * inv_dir.z;
    t1 = (hi.z - origin.z) * inv_dir.z;
    tmin = std::max(tmin, std::min(t0, t1));
    tmax = std::min(tmax, std::max(t0, t1));
    t_near = tmin;
    return tmax >= tmin && tmin < t_max && tmax > 0;
}

inline double aabb_distance_sq(const Vec3& p, const Vec3& lo, const Vec3& hi) {
    double d = 0;
    for (int k = 0; k < 3; ++k) {
        double v = p[k];
        if (v < lo[k]) d += (lo[k] - v) * (lo[k] - v);
        else if (v > hi[k]) d += (v - hi[k]) * (v - hi[k]);
    }
    return d;
}

}  // namespace

Bvh::Bvh(const Mesh& mesh) { build(mesh); }

void Bvh::build(const Mesh& mesh) {
    const int n = mesh.triangle_count();
    default_t_min_ = n > 0 ? 1e-4 * mesh.bbox_diagonal() : 1e-8;
    if (n == 0) return;

    std::vector<BuildPrim> prims(n);
    for (int f = 0; f < n; ++f) {
        const auto& t = mesh.triangles[f];
        const Vec3 &a = mesh.positions[t[0]], &b = mesh.positions[t[1]],
                   &c = mesh.positions[t[2]];
        prims[f].lo = min(a, min(b, c));
        prims[f].hi = max(a, max(b, c));
        prims[f].centroid = (prims[f].lo + prims[f].hi) * 0.5;
        prims[f].tri = f;
    }

    nodes_.clear();
    nodes_.reserve(2 * n);
    tri_order_.resize(n);

    struct Task {
        int node, begin, end;
    };
    nodes_.push_back({});
    std::vector<Task> stack{{0, 0, n}};
    constexpr int kLeafSize = 4;
    constexpr int kBins = 16;

    while (!stack.empty()) {
        Task task = stack.back();
        stack.pop_back();
        Node& node = nodes_[task.node];
        Vec3 lo(1e300), hi(-1e300), clo(1e300), chi(-1e300);
        for (int i = task.begin; i < task.end; ++i) {
            lo = min(lo, prims[i].lo);
            hi = max(hi, prims[i].hi);
            clo = min(clo, prims[i].centroid);
            chi = max(chi, prims[i].centroid);
        }
        node.lo = lo;
        node.hi = hi;
        int count = task.end - task.begin;
        Vec3 cext = chi - clo;
        int axis = cext.x > cext.y ? (cext.x > cext.z ? 0 : 2) : (cext.y > cext.z ? 1 : 2);

        bool make_leaf = count <= kLeafSize || cext[axis] < 1e-12;
        int mid = -1;
        if (!make_leaf) {
            // binned SAH split
            struct Bin {
                Vec3 lo = Vec3(1e300), hi = Vec3(-1e300);
                int count = 0;
            };
            Bin bins[kBins];
            double scale = kBins / cext[axis];
            auto bin_of = [&](const BuildPrim& p) {
                int b = int((p.centroid[axis] - clo[axis]) * scale);
                return std::clamp(b, 0, kBins - 1);
            };
            for (int i = task.begin; i < task.end; ++i) {
                Bin& b = bins[bin_of(prims[i])];
                b.lo = min(b.lo, prims[i].lo);
                b.hi = max(b.hi, prims[i].hi);
                b.count++;
            }
            auto half_area = [](const Vec3& l, const Vec3& h) {
                Vec3 e = max(h - l, Vec3(0.0));
                return e.x * e.y + e.y * e.z + e.z * e.x;
            };
            double best_cost = 1e300;
            int best_split = -1;
            for (int s = 1; s < kBins; ++s) {
                Vec3 llo(1e300), lhi(-1e300), rlo(1e300), rhi(-1e300);
                int lcount = 0, rcount = 0;
                for (int b = 0; b < s; ++b)
                    if (bins[b].count) {
                        llo = min(llo, bins[b].lo);
                        lhi = max(lhi, bins[b].hi);
                        lcount += bins[b].count;
                    }
                for (int b = s; b < kBins; ++b)
                    if (bins[b].count) {
                        rlo = min(rlo, bins[b].lo);
                        rhi = max(rhi, bins[b].hi);
                        rcount += bins[b].count;
                    }
                if (!lcount || !rcount) continue;
                double cost = lcount * half_area(llo, lhi) + rcount * half_area(rlo, rhi);
                if (cost < best_cost) {
                    best_cost = cost;
                    best_split = s;
                }
            }
            if (best_split < 0) {
                make_leaf = true;
            } else {
                auto it = std::partition(prims.begin() + task.begin, prims.begin() + task.end,
                                         [&](const BuildPrim& p) { return bin_of(p) < best_split; });
                mid = int(it - prims.begin());
                if (mid == task.begin || mid == task.end) make_leaf = true;
            }
        }

        if (make_leaf) {
            node.first = task.begin;
            node.count = count;
            continue;
        }
        int left = int(nodes_.size());
        node.left = left;
        node.count = 0;
        nodes_.push_back({});
        nodes_.push_back({});
        stack.push_back({left, task.begin, mid});
        stack.push_back({left + 1, mid, task.end});
    }

    for (int i = 0; i < n; ++i) tri_order_[i] = prims[i].tri;
}

std::optional<HitRecord> Bvh::intersect(const Mesh& mesh, const Vec3& origin, const Vec3& dir,
                                        const std::vector<Vec3>* normals, double t_min) const {
    if (nodes_.empty()) return std::nullopt;
    if (t_min < 0) t_min = default_t_min_;
    Vec3 inv_dir(1.0 / dir.x, 1.0 / dir.y, 1.0 / dir.z);

    double best_t = 1e300;
    int best_tri = -1;
    double best_b1 = 0, best_b2 = 0;

    int stack[64];
    int sp = 0;
    stack[sp++] = 0;
    while (sp > 0) {
        const Node& node = nodes_[stack[--sp]];
        double t_near;
        if (!ray_aabb(origin, inv_dir, node.lo, node.hi, best_t, t_near)) continue;
        if (node.is_leaf()) {
            for (int i = node.first; i < node.first + node.count; ++i) {
                int f = tri_order_[i];
                const auto& tv = mesh.triangles[f];
                double t, b1, b2;
                if (ray_triangle(origin, dir, mesh.positions[tv[0]], mesh.positions[tv[1]],
                                 mesh.positions[tv[2]], t, b1, b2) &&
                    t > t_min && t < best_t) {
                    best_t = t;
                    best_tri = f;
                    best_b1 = b1;
                    best_b2 = b2;
                }
            }
        } else {
            // near child first
            double tl, tr;
            const Node& lnode = nodes_[node.left];
            const Node& rnode = nodes_[node.left + 1];
            bool hit_l = ray_aabb(origin, inv_dir, lnode.lo, lnode.hi, best_t, tl);
            bool hit_r = ray_aabb(origin, inv_dir, rnode.lo, rnode.hi, best_t, tr);
            if (hit_l && hit_r) {
                if (tl <= tr) {
                    stack[sp++] = node.left + 1;
                    stack[sp++] = node.left;
                } else {
                    stack[sp++] = node.left;
                    stack[sp++] = node.left + 1;
                }
            } else if (hit_l) {
                stack[sp++] = node.left;
            } else if (hit_r) {
                stack[sp++] = node.left + 1;
            }
        }
    }
    if (best_tri < 0) return std::nullopt;
    return make_hit_record(mesh, normals, best_tri, best_t, best_b1, best_b2, origin, dir);
}

ClosestPoint Bvh::closest_point(const Mesh& mesh, const Vec3& query) const {
    ClosestPoint best;
    best.distance = 1e300;
    if (nodes_.empty()) return best;

    // depth-first with distance pruning
    struct Entry {
        int node;
        double dist_sq;
    };
    Entry stack[64];
    int sp = 0;
    stack[sp++] = {0, aabb_distance_sq(query, nodes_[0].lo, nodes_[0].hi)};
    while (sp > 0) {
        Entry e = stack[--sp];
        if (e.dist_sq >= best.distance * best.distance) continue;
        const Node& node = nodes_[e.node];
        if (node.is_leaf()) {
            for (int i = node.first; i < node.first + node.count; ++i) {
                int f = tri_order_[i];
                const auto& tv = mesh.triangles[f];
                const Vec3 &a = mesh.positions[tv[0]], &b = mesh.positions[tv[1]],
                           &c = mesh.positions[tv[2]];
                Vec3 cp = closest_point_on_triangle(query, a, b, c);
                double d = length(query - cp);
                if (d < best.distance) {
                    best.distance = d;
                    best.point = cp;
                    best.tri = f;
                }
            }
        } else {
            Entry l{node.left, aabb_distance_sq(query, nodes_[node.left].lo, nodes_[node.left].hi)};
            Entry r{node.left + 1,
                    aabb_distance_sq(query, nodes_[node.left + 1].lo, nodes_[node.left + 1].hi)};
            // push farther first so the nearer child is explored next
            if (l.dist_sq < r.dist_sq) {
                stack[sp++] = r;
                stack[sp++] = l;
            } else {
                stack[sp++] = l;
                stack[sp++] = r;
            }
        }
    }

    // recover barycentrics of the closest point
    if (best.tri >= 0) {
        const auto& tv = mesh.triangles[best.tri];
        const Vec3 &a = mesh.positions[tv[0]], &b = mesh.positions[tv[1]],
                   &c = mesh.positions[tv[2]];
        Vec3 v0 = b - a, v1 = c - a, v2 = best.point - a;
        double d00 = dot(v0, v0), d01 = dot(v0, v1), d11 = dot(v1, v1);
        double d20 = dot(v2, v0), d21 = dot(v2, v1);
        double denom = d00 * d11 - d01 * d01;
        if (std::abs(denom) > 1e-30) {
            best.b1 = std::clamp((d11 * d20 - d01 * d21) / denom, 0.0, 1.0);
            best.b2 = std::clamp((d00 * d21 - d01 * d20) / denom, 0.0, 1.0);
        }
        best.b0 = std::clamp(1.0 - best.b1 - best.b2, 0.0, 1.0);
    }
    return best;
}

void Bvh::collect_aabb_overlaps(const Vec3& lo, const Vec3& hi, std::vector<int>& out) const {
    if (nodes_.empty()) return;
    int stack[64];
    int sp = 0;
    stack[sp++] = 0;
    while (sp > 0) {
        const Node& node = nodes_[stack[--sp]];
        bool overlap = node.lo.x <= hi.x && node.hi.x >= lo.x && node.lo.y <= hi.y &&
                       node.hi.y >= lo.y && node.lo.z <= hi.z && node.hi.z >= lo.z;
        if (!overlap) continue;
        if (node.is_leaf()) {
            for (int i = node.first; i < node.first + node.count; ++i) out.push_back(tri_order_[i]);
        } else {
            stack[sp++] = node.left;
            stack[sp++] = node.left + 1;
        }
    }
}

}  // namespace collodiff
