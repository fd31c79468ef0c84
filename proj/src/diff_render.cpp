#include "collodiff/diff_render.hpp"

#include <algorithm>
#include <cmath>

#include "collodiff/errors.hpp"
#include "collodiff/losses.hpp"
#include "collodiff/parallel.hpp"
#include "collodiff/rng.hpp"

namespace collodiff {

namespace {
constexpr double kProbeOffsetPx = 0.5;
}

NormalJacobians build_normal_jacobians(const Mesh& mesh) {
    const int nv = mesh.vertex_count();
    std::vector<Vec3> accum(nv, Vec3());
    for (int f = 0; f < mesh.triangle_count(); ++f) {
        Vec3 m = mesh.face_normal_unnormalized(f);
        for (int k = 0; k < 3; ++k) accum[mesh.triangles[f][k]] += m;
    }

    // raw dAccum_v/dp_w entries, one-ring sparse
    std::vector<std::vector<std::pair<int, Mat3>>> rows(nv);
    auto add_entry = [&](int v, int w, const Mat3& j) {
        for (auto& e : rows[v])
            if (e.first == w) {
                e.second += j;
                return;
            }
        rows[v].push_back({w, j});
    };
    for (int f = 0; f < mesh.triangle_count(); ++f) {
        const auto& t = mesh.triangles[f];
        const Vec3 &a = mesh.positions[t[0]], &b = mesh.positions[t[1]],
                   &c = mesh.positions[t[2]];
        // d cross / dp for m = (b-a) x (c-a)
        Mat3 da = Mat3::skew(c - b), db = Mat3::skew(a - c), dc = Mat3::skew(b - a);
        for (int v = 0; v < 3; ++v) {
            add_entry(t[v], t[0], da);
            add_entry(t[v], t[1], db);
            add_entry(t[v], t[2], dc);
        }
    }

    NormalJacobians nj;
    nj.start.resize(nv + 1, 0);
    for (int v = 0; v < nv; ++v) nj.start[v + 1] = nj.start[v] + int(rows[v].size());
    nj.entries.resize(nj.start[nv]);
    for (int v = 0; v < nv; ++v) {
        double len = length(accum[v]);
        Mat3 jn = len >= 1e-12 ? normalize_jacobian(accum[v]) : Mat3::zero();
        int base = nj.start[v];
        for (size_t k = 0; k < rows[v].size(); ++k)
            nj.entries[base + int(k)] = {rows[v][k].first, jn * rows[v][k].second};
    }
    return nj;
}

void interior_pass(const Scene& scene, const GradContext& ctx, int view,
                   const AdjointImage& adjoint, const RenderSettings& settings,
                   const std::vector<int>& hit_cache, GradVector& grad) {
    const Camera& cam = scene.views[view];
    if (adjoint.width != cam.width || adjoint.height != cam.height)
        throw SizeMismatch("adjoint size does not match view");
    const int spp = std::max(1, settings.spp);
    if (hit_cache.size() != size_t(cam.width) * cam.height * spp)
        throw SizeMismatch("hit cache does not match view and spp");

    const Mesh& mesh = scene.mesh;
    const std::vector<Vec3>& normals = ctx.geom.normals;
    const Vec3 L = scene.light.intensity;
    const bool want_light = grad.layout->has(SegmentId::Light);

    auto worker = [&](GradVector& g, int64_t y0, int64_t y1) {
        for (int64_t y = y0; y < y1; ++y) {
            for (int x = 0; x < cam.width; ++x) {
                Vec3 adj = adjoint.at(x, int(y));
                if (adj.x == 0 && adj.y == 0 && adj.z == 0) continue;
                Vec3 a = adj / double(spp);
                for (int s = 0; s < spp; ++s) {
                    int tri = hit_cache[(size_t(y) * cam.width + x) * spp + s];
                    if (tri < 0) continue;
                    Vec2 pos =
                        pixel_sample_position(settings.seed, view, x, int(y), cam.width, s, spp);
                    Ray ray = primary_ray(cam, pos);
                    const auto& tv = mesh.triangles[tri];
                    const Vec3 &p0 = mesh.positions[tv[0]], &p1 = mesh.positions[tv[1]],
                               &p2 = mesh.positions[tv[2]];
                    double t, b1, b2;
                    if (!ray_triangle(ray.origin, ray.dir, p0, p1, p2, t, b1, b2)) continue;
                    double b0 = 1.0 - b1 - b2;

                    Vec2 uv0 = mesh.uvs[tv[0]], uv1 = mesh.uvs[tv[1]], uv2 = mesh.uvs[tv[2]];
                    Vec2 uv = uv0 * b0 + uv1 * b1 + uv2 * b2;
                    const Vec3 &N0 = normals[tv[0]], &N1 = normals[tv[1]], &N2 = normals[tv[2]];
                    Vec3 n_tilde = N0 * b0 + N1 * b1 + N2 * b2;
                    double n_len = length(n_tilde);
                    if (n_len < 1e-14) continue;
                    Vec3 n_hat = n_tilde / n_len;
                    Vec3 v_hat = -ray.dir;
                    double mu = dot(n_hat, v_hat);

                    CollocatedSample mat = eval_collocated(scene.maps, uv, mu);
                    const BrdfEval& brdf = mat.brdf;
                    double inv_r2 = 1.0 / (t * t);

                    // texel scatter through the bilinear weights
                    for (int k = 0; k < 4; ++k) {
                        double wd = mat.diffuse.weight[k] * brdf.d_diffuse * inv_r2;
                        double ws = mat.specular.weight[k] * brdf.d_specular * inv_r2;
                        for (int c = 0; c < 3; ++c) {
                            if (wd != 0)
                                g.add_texel(SegmentId::Diffuse, mat.diffuse.texel[k], c, 3,
                                            a[c] * L[c] * wd);
                            if (ws != 0)
                                g.add_texel(SegmentId::Specular, mat.specular.texel[k], c, 3,
                                            a[c] * L[c] * ws);
                        }
                        double wr = 0;
                        for (int c = 0; c < 3; ++c)
                            wr += a[c] * L[c] * brdf.d_roughness[c] * inv_r2;
                        if (wr != 0)
                            g.add_texel(SegmentId::Roughness, mat.roughness.texel[k], 0, 1,
                                        wr * mat.roughness.weight[k]);
                    }
                    if (want_light)
                        for (int c = 0; c < 3; ++c)
                            g.add(SegmentId::Light, c, a[c] * brdf.value[c] * inv_r2);

                    if (mu <= 0) continue;  // value identically zero around backfacing hits

                    // intersection response: M [ds db1 db2]^T = b_j dp_j
                    Mat3 M = Mat3::from_columns(ray.dir, p0 - p1, p0 - p2);
                    double det = M.det();
                    if (std::abs(det) < 1e-18) continue;
                    Mat3 Mi = M.inverse();
                    Vec3 r0(Mi(0, 0), Mi(0, 1), Mi(0, 2));
                    Vec3 r1(Mi(1, 0), Mi(1, 1), Mi(1, 2));
                    Vec3 r2(Mi(2, 0), Mi(2, 1), Mi(2, 2));

                    double coeff_s = 0, coeff_u = 0, coeff_v = 0, coeff_mu = 0;
                    for (int c = 0; c < 3; ++c) {
                        double w = a[c] * L[c] * inv_r2;
                        coeff_s += a[c] * L[c] * (-2.0 * brdf.value[c] / (t * t * t));
                        double gu = brdf.d_diffuse * mat.diffuse.du[c] +
                                    brdf.d_specular * mat.specular.du[c] +
                                    brdf.d_roughness[c] * mat.roughness.du.x;
                        double gv = brdf.d_diffuse * mat.diffuse.dv[c] +
                                    brdf.d_specular * mat.specular.dv[c] +
                                    brdf.d_roughness[c] * mat.roughness.dv.x;
                        coeff_u += w * gu;
                        coeff_v += w * gv;
                        coeff_mu += w * brdf.d_mu[c];
                    }
                    if (!std::isfinite(coeff_s + coeff_u + coeff_v + coeff_mu))
                        throw NonFiniteGradient("non-finite interior gradient at pixel (" +
                                                std::to_string(x) + "," + std::to_string(y) +
                                                ")");

                    Vec3 h = normalize_jacobian(n_tilde) * v_hat;
                    double k1 = coeff_u * (uv1.x - uv0.x) + coeff_v * (uv1.y - uv0.y) +
                                coeff_mu * (dot(h, N1) - dot(h, N0));
                    double k2 = coeff_u * (uv2.x - uv0.x) + coeff_v * (uv2.y - uv0.y) +
                                coeff_mu * (dot(h, N2) - dot(h, N0));
                    Vec3 g_common = r0 * coeff_s + r1 * k1 + r2 * k2;

                    const double bc[3] = {b0, b1, b2};
                    for (int j = 0; j < 3; ++j)
                        g.add_position(tv[j], g_common * bc[j]);

                    // one-ring dependence of the interpolated vertex normals
                    for (int j = 0; j < 3; ++j) {
                        double w = coeff_mu * bc[j];
                        if (w == 0) continue;
                        int vtx = tv[j];
                        for (int e = ctx.normal_jac.start[vtx];
                             e < ctx.normal_jac.start[vtx + 1]; ++e) {
                            const auto& [nbr, J] = ctx.normal_jac.entries[e];
                            g.add_position(nbr, J.transpose_times(h) * w);
                        }
                    }
                }
            }
        }
    };

    if (settings.threads <= 1) {
        worker(grad, 0, cam.height);
    } else {
        int n = std::min(settings.threads, cam.height);
        std::vector<GradVector> locals;
        locals.reserve(n);
        for (int i = 0; i < n; ++i) locals.emplace_back(grad.layout);
        parallel_chunks(cam.height, n,
                        [&](int w, int64_t y0, int64_t y1) { worker(locals[w], y0, y1); });
        for (auto& l : locals) grad.accumulate(l);
    }
}

BoundaryStats boundary_pass(const Scene& scene, const GradContext& ctx, int view,
                            const AdjointImage& adjoint, const SilhouetteSet& silhouettes,
                            int samples, uint64_t seed, GradVector& grad, BoundaryProbe probe) {
    BoundaryStats stats;
    const Camera& cam = scene.views[view];
    if (adjoint.width != cam.width || adjoint.height != cam.height)
        throw SizeMismatch("adjoint size does not match view");
    if (silhouettes.segments.empty() || silhouettes.total_length <= 0 || samples <= 0)
        return stats;

    std::vector<double> cdf(silhouettes.segments.size());
    double acc = 0;
    int usable = 0;
    for (size_t i = 0; i < silhouettes.segments.size(); ++i) {
        double len = silhouettes.segments[i].length_px;
        if (len < 1e-12) {
            ++stats.degenerate_skipped;
            len = 0;
        } else {
            ++usable;
        }
        acc += len;
        cdf[i] = acc;
    }
    if (usable == 0 || acc <= 0) return stats;
    const double total_len = acc;

    auto worker = [&](GradVector& g, int64_t i0, int64_t i1) {
        for (int64_t i = i0; i < i1; ++i) {
            Rng rng(seed, uint64_t(view) + 0xb0d1, uint64_t(i));
            double pick = rng.next_double() * total_len;
            size_t si = std::lower_bound(cdf.begin(), cdf.end(), pick) - cdf.begin();
            si = std::min(si, silhouettes.segments.size() - 1);
            const SilhouetteSegment& seg = silhouettes.segments[si];
            if (seg.length_px < 1e-12) continue;
            double s = rng.next_double();

            Vec2 x = seg.q0 + (seg.q1 - seg.q0) * s;
            int px = std::clamp(int(std::floor(x.x)), 0, cam.width - 1);
            int py = std::clamp(int(std::floor(x.y)), 0, cam.height - 1);
            Vec3 adj = adjoint.at(px, py);
            if (adj.x == 0 && adj.y == 0 && adj.z == 0) continue;

            Vec2 tangent = (seg.q1 - seg.q0) / seg.length_px;
            Vec2 n2d = perp(tangent);

            Vec3 delta_radiance;
            if (probe == BoundaryProbe::Radiance) {
                Vec3 lo = radiance_at(scene, ctx.geom, view, x - n2d * kProbeOffsetPx);
                Vec3 hi = radiance_at(scene, ctx.geom, view, x + n2d * kProbeOffsetPx);
                delta_radiance = lo - hi;
            } else {
                Ray rm = primary_ray(cam, x - n2d * kProbeOffsetPx);
                Ray rp = primary_ray(cam, x + n2d * kProbeOffsetPx);
                double cm =
                    ctx.geom.bvh.intersect(scene.mesh, rm.origin, rm.dir, nullptr) ? 1.0 : 0.0;
                double cp =
                    ctx.geom.bvh.intersect(scene.mesh, rp.origin, rp.dir, nullptr) ? 1.0 : 0.0;
                delta_radiance = Vec3(cm - cp);
            }

            double weighted = dot(adj, delta_radiance);
            if (weighted == 0) continue;
            if (!std::isfinite(weighted))
                throw NonFiniteGradient("non-finite boundary gradient at segment " +
                                        std::to_string(si));

            double t3 = segment_param_2d_to_3d(seg, s);
            Vec3 point = seg.p0 + (seg.p1 - seg.p0) * t3;
            ProjectionJacobian J = projection_jacobian(cam, point);
            Vec3 nj = J.d_px * n2d.x + J.d_py * n2d.y;  // n . dx'/dp, per endpoint scale

            double scale = weighted * total_len / double(samples);
            g.add_position(seg.v0, nj * (scale * (1.0 - t3)));
            g.add_position(seg.v1, nj * (scale * t3));
        }
    };

    worker(grad, 0, samples);
    return stats;
}

double grad_image_loss(const Scene& scene, const GradContext& ctx, int view,
                       const Image& target, const RenderSettings& settings, double lambda_rend,
                       bool use_target_mask, GradVector& grad) {
    const Camera& cam = scene.views[view];
    if (target.width != cam.width || target.height != cam.height)
        throw SizeMismatch("target size does not match view");

    std::vector<int> hit_cache;
    Image rendered = render(scene, ctx.geom, view, settings, &hit_cache);
    ViewLossResult vl =
        view_rendering_loss(rendered, target, lambda_rend, settings.gamma, use_target_mask);

    interior_pass(scene, ctx, view, vl.adjoint, settings, hit_cache, grad);
    if (settings.boundary_term) {
        SilhouetteSet sil = extract_silhouettes(scene.mesh, cam);
        int m = settings.boundary_samples > 0 ? settings.boundary_samples
                                              : cam.width * cam.height;
        boundary_pass(scene, ctx, view, vl.adjoint, sil, m, settings.seed, grad);
    }
    return vl.value;
}

}  // namespace collodiff
