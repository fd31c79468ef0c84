#include "collodiff/losses.hpp"

#include <cmath>

#include "collodiff/diff_render.hpp"
#include "collodiff/errors.hpp"
#include "collodiff/parallel.hpp"

namespace collodiff {

namespace {
inline double sgn(double v) { return (v > 0) - (v < 0); }  // sign(0) = 0
}

ViewLossResult view_rendering_loss(const Image& rendered, const Image& target,
                                   double lambda_rend, double gamma, bool use_target_mask) {
    if (rendered.width != target.width || rendered.height != target.height)
        throw SizeMismatch("rendered/target size mismatch");
    ViewLossResult res;
    res.adjoint = Image(rendered.width, rendered.height);
    if (lambda_rend == 0) return res;

    const bool masked = use_target_mask && target.has_mask();
    double n_valid = 0;
    if (masked) {
        for (double m : target.mask) n_valid += m;
        if (n_valid <= 0) return res;
    } else {
        n_valid = double(rendered.width) * rendered.height;
    }
    const double scale = lambda_rend / n_valid;

    double sum = 0;
    for (size_t i = 0; i < rendered.pixels.size(); ++i) {
        double m = masked ? target.mask[i] : 1.0;
        if (m == 0) continue;
        const Vec3& rv = rendered.pixels[i];
        const Vec3& tv = target.pixels[i];
        Vec3 adj;
        for (int c = 0; c < 3; ++c) {
            double d = tone_map_scalar(rv[c], gamma) - tone_map_scalar(tv[c], gamma);
            sum += m * std::abs(d);
            adj[c] = scale * m * sgn(d) * tone_map_derivative(rv[c], gamma);
        }
        res.adjoint.pixels[i] = adj;
    }
    res.value = scale * sum;
    return res;
}

RenderingLossResult rendering_loss(const std::vector<Image>& rendered,
                                   const std::vector<Image>& targets,
                                   const LossWeights& weights, double gamma,
                                   bool use_target_masks) {
    if (rendered.size() != targets.size()) throw SizeMismatch("view count mismatch");
    RenderingLossResult res;
    for (size_t k = 0; k < rendered.size(); ++k) {
        ViewLossResult vl =
            view_rendering_loss(rendered[k], targets[k], weights.rend, gamma, use_target_masks);
        res.value += vl.value;
        res.adjoints.push_back(std::move(vl.adjoint));
    }
    return res;
}

MeshLossResult laplacian_loss(const Mesh& mesh, const Eigen::SparseMatrix<double>& L,
                              double lambda) {
    MeshLossResult res;
    res.grad.assign(mesh.vertex_count(), Vec3());
    if (lambda == 0) return res;
    Eigen::MatrixX3d V = position_matrix(mesh);
    Eigen::MatrixX3d LV = L * V;
    res.value = lambda * LV.squaredNorm();
    Eigen::MatrixX3d G = 2.0 * lambda * (L.transpose() * LV);
    for (int i = 0; i < mesh.vertex_count(); ++i)
        res.grad[i] = Vec3(G(i, 0), G(i, 1), G(i, 2));
    return res;
}

MeshLossResult normal_consistency_loss(const Mesh& mesh, double lambda) {
    MeshLossResult res;
    res.grad.assign(mesh.vertex_count(), Vec3());
    if (lambda == 0) return res;

    for (const auto& e : mesh.edges) {
        if (e.f1 < 0) continue;
        Vec3 m0 = mesh.face_normal_unnormalized(e.f0);
        Vec3 m1 = mesh.face_normal_unnormalized(e.f1);
        double l0 = length(m0), l1 = length(m1);
        if (l0 < 1e-14 || l1 < 1e-14) {
            if (log_level() >= 2) std::fprintf(stderr, "normal loss: degenerate face skipped\n");
            continue;
        }
        Vec3 n0 = m0 / l0, n1 = m1 / l1;
        double r = 1.0 - dot(n0, n1);
        res.value += lambda * r * r;

        // d(r^2)/dp = -2 r (n1^T dn0/dp + n0^T dn1/dp)
        Vec3 h0 = normalize_jacobian(m0) * n1;  // jacobian is symmetric
        Vec3 h1 = normalize_jacobian(m1) * n0;
        double w = -2.0 * lambda * r;
        for (int which = 0; which < 2; ++which) {
            int f = which == 0 ? e.f0 : e.f1;
            const Vec3& h = which == 0 ? h0 : h1;
            const auto& t = mesh.triangles[f];
            const Vec3 &a = mesh.positions[t[0]], &b = mesh.positions[t[1]],
                       &c = mesh.positions[t[2]];
            Mat3 da = Mat3::skew(c - b), db = Mat3::skew(a - c), dc = Mat3::skew(b - a);
            res.grad[t[0]] += da.transpose_times(h) * w;
            res.grad[t[1]] += db.transpose_times(h) * w;
            res.grad[t[2]] += dc.transpose_times(h) * w;
        }
    }
    return res;
}

MeshLossResult edge_length_loss(const Mesh& mesh, double lambda) {
    MeshLossResult res;
    res.grad.assign(mesh.vertex_count(), Vec3());
    if (lambda == 0 || mesh.edges.empty()) return res;
    double sum_sq = 0;
    for (const auto& e : mesh.edges)
        sum_sq += length_squared(mesh.positions[e.v0] - mesh.positions[e.v1]);
    if (sum_sq <= 0) return res;  // all edges zero: gradient defined as 0
    double root = std::sqrt(sum_sq);
    res.value = lambda * root;
    double w = lambda / root;
    for (const auto& e : mesh.edges) {
        Vec3 d = mesh.positions[e.v0] - mesh.positions[e.v1];
        res.grad[e.v0] += d * w;
        res.grad[e.v1] -= d * w;
    }
    return res;
}

SpecularLossResult specular_correlation_loss(const MaterialMaps& maps,
                                             const LossWeights& weights) {
    const Texture& as = maps.specular;
    const Texture& ad = maps.diffuse;
    if (as.width != ad.width || as.height != ad.height)
        throw SizeMismatch("specular/diffuse resolution mismatch");

    SpecularLossResult res;
    res.grad_specular = Texture::constant(as.width, as.height, 3, Vec3());
    res.grad_diffuse = Texture::constant(ad.width, ad.height, 3, Vec3());
    if (weights.spec == 0) return res;

    const int radius = 3;  // 7x7 window
    const double inv_2s1 = 1.0 / (2.0 * weights.sigma1 * weights.sigma1);
    const double inv_2s2 = 1.0 / (2.0 * weights.sigma2 * weights.sigma2);
    const Vec3 lum_w(0.2126, 0.7152, 0.0722);

    std::vector<double> lum(size_t(ad.width) * ad.height);
    for (int i = 0; i < ad.texel_count(); ++i) lum[i] = dot(ad.texel_rgb(i), lum_w);

    for (int py = 0; py < as.height; ++py)
        for (int px = 0; px < as.width; ++px) {
            const int p = py * as.width + px;
            double mu_sum = 0;
            Vec3 avg;
            double mus[49];
            int qs[49];
            int count = 0;
            for (int dy = -radius; dy <= radius; ++dy) {
                int qy = py + dy;
                if (qy < 0 || qy >= as.height) continue;
                for (int dx = -radius; dx <= radius; ++dx) {
                    int qx = px + dx;
                    if (qx < 0 || qx >= as.width) continue;
                    int q = qy * as.width + qx;
                    double dl = lum[p] - lum[q];
                    double mu = std::exp(-(dx * dx + dy * dy) * inv_2s1 - dl * dl * inv_2s2);
                    mus[count] = mu;
                    qs[count] = q;
                    ++count;
                    mu_sum += mu;
                    avg += as.texel_rgb(q) * mu;
                }
            }
            avg = avg / mu_sum;

            Vec3 center = as.texel_rgb(p);
            Vec3 sign;
            for (int c = 0; c < 3; ++c) {
                double d = center[c] - avg[c];
                res.value += weights.spec * std::abs(d);
                sign[c] = sgn(d);
            }
            // center term
            for (int c = 0; c < 3; ++c)
                res.grad_specular.data[size_t(p) * 3 + c] += weights.spec * sign[c];
            // average terms: d avg_c / d as[q,c] = mu_q / mu_sum,
            // d avg_c / d mu_q = (as[q,c] - avg_c) / mu_sum
            for (int k = 0; k < count; ++k) {
                int q = qs[k];
                double mu = mus[k];
                for (int c = 0; c < 3; ++c)
                    res.grad_specular.data[size_t(q) * 3 + c] -=
                        weights.spec * sign[c] * mu / mu_sum;

                double d_to_mu = 0;
                Vec3 as_q = as.texel_rgb(q);
                for (int c = 0; c < 3; ++c)
                    d_to_mu += -weights.spec * sign[c] * (as_q[c] - avg[c]) / mu_sum;
                // exp(-dl^2 * inv_2s2): d/d lum_p = mu * (-2 dl inv_2s2)
                double dl = lum[p] - lum[q];
                double dmu_dlp = mu * (-2.0 * dl * inv_2s2);
                double dmu_dlq = -dmu_dlp;
                for (int c = 0; c < 3; ++c) {
                    res.grad_diffuse.data[size_t(p) * 3 + c] += d_to_mu * dmu_dlp * lum_w[c];
                    res.grad_diffuse.data[size_t(q) * 3 + c] += d_to_mu * dmu_dlq * lum_w[c];
                }
            }
        }
    return res;
}

RoughnessLossResult roughness_tv_loss(const MaterialMaps& maps, double lambda) {
    const Texture& r = maps.roughness;
    RoughnessLossResult res;
    res.grad = Texture::constant(r.width, r.height, 1, Vec3());
    if (lambda == 0) return res;
    for (int y = 0; y < r.height; ++y)
        for (int x = 0; x < r.width; ++x) {
            double v = r.texel(x, y)[0];
            if (x + 1 < r.width) {
                double d = r.texel(x + 1, y)[0] - v;
                res.value += lambda * std::abs(d);
                double s = lambda * sgn(d);
                res.grad.texel(x + 1, y)[0] += s;
                res.grad.texel(x, y)[0] -= s;
            }
            if (y + 1 < r.height) {
                double d = r.texel(x, y + 1)[0] - v;
                res.value += lambda * std::abs(d);
                double s = lambda * sgn(d);
                res.grad.texel(x, y + 1)[0] += s;
                res.grad.texel(x, y)[0] -= s;
            }
        }
    return res;
}

TotalLossResult total_loss(const Scene& scene, const std::vector<Image>& targets,
                           const LossWeights& weights, const LossOptions& options,
                           std::shared_ptr<const ParamLayout> layout) {
    if (targets.size() != scene.views.size())
        throw SizeMismatch("target count does not match views");

    TotalLossResult res{LossBreakdown{}, GradVector(layout), {}};
    GradContext ctx(scene);

    for (size_t k = 0; k < scene.views.size(); ++k) {
        std::vector<int> hit_cache;
        Image rendered = render(scene, ctx.geom, int(k), options.render, &hit_cache);
        ViewLossResult vl = view_rendering_loss(rendered, targets[k], weights.rend,
                                                options.render.gamma, options.use_target_masks);
        res.breakdown.rend += vl.value;
        interior_pass(scene, ctx, int(k), vl.adjoint, options.render, hit_cache, res.grad);
        if (options.render.boundary_term) {
            SilhouetteSet sil = extract_silhouettes(scene.mesh, scene.views[k]);
            int m = options.render.boundary_samples > 0
                        ? options.render.boundary_samples
                        : scene.views[k].width * scene.views[k].height;
            boundary_pass(scene, ctx, int(k), vl.adjoint, sil, m, options.render.seed, res.grad);
        }
        res.rendered.push_back(std::move(rendered));
    }

    Eigen::SparseMatrix<double> L = cotangent_laplacian(scene.mesh, options.laplacian_mode);
    MeshLossResult lap = laplacian_loss(scene.mesh, L, weights.lap);
    MeshLossResult nrm = normal_consistency_loss(scene.mesh, weights.normal);
    MeshLossResult edg = edge_length_loss(scene.mesh, weights.edge);
    res.breakdown.lap = lap.value;
    res.breakdown.normal = nrm.value;
    res.breakdown.edge = edg.value;
    for (int v = 0; v < scene.mesh.vertex_count(); ++v)
        res.grad.add_position(v, lap.grad[v] + nrm.grad[v] + edg.grad[v]);

    SpecularLossResult spec = specular_correlation_loss(scene.maps, weights);
    res.breakdown.spec = spec.value;
    for (size_t i = 0; i < spec.grad_specular.data.size(); ++i)
        if (spec.grad_specular.data[i] != 0)
            res.grad.add(SegmentId::Specular, i, spec.grad_specular.data[i]);
    for (size_t i = 0; i < spec.grad_diffuse.data.size(); ++i)
        if (spec.grad_diffuse.data[i] != 0)
            res.grad.add(SegmentId::Diffuse, i, spec.grad_diffuse.data[i]);

    RoughnessLossResult roug = roughness_tv_loss(scene.maps, weights.roug);
    res.breakdown.roug = roug.value;
    for (size_t i = 0; i < roug.grad.data.size(); ++i)
        if (roug.grad.data[i] != 0) res.grad.add(SegmentId::Roughness, i, roug.grad.data[i]);

    res.breakdown.total = res.breakdown.rend + res.breakdown.lap + res.breakdown.normal +
                          res.breakdown.edge + res.breakdown.spec + res.breakdown.roug;
    return res;
}

}  // namespace collodiff
