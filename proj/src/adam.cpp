#include <cmath>

#include "collodiff/errors.hpp"
#include "collodiff/material.hpp"
#include "collodiff/optimize.hpp"

namespace collodiff {

AdamStepResult adam_step(AdamState& state, const ParamVector& params, const GradVector& grad) {
    if (params.values.size() != state.m.size() || grad.values.size() != state.m.size())
        throw SizeMismatch("adam state/params/grad layout mismatch");
    for (double g : grad.values)
        if (!std::isfinite(g)) throw NonFiniteGradient("non-finite gradient entering adam");

    state.step += 1;
    const AdamConfig& cfg = state.config;
    const double corr1 = 1.0 - std::pow(cfg.beta1, double(state.step));
    const double corr2 = 1.0 - std::pow(cfg.beta2, double(state.step));

    AdamStepResult out;
    out.params = params;

    for (const auto& seg : params.layout->segments) {
        double lr = cfg.lr_textures;
        if (seg.id == SegmentId::Positions) lr = cfg.lr_positions;
        if (seg.id == SegmentId::Light) lr = cfg.lr_light;

        double clamp_lo = 0.0, clamp_hi = 1.0;
        bool do_clamp = true;
        if (seg.id == SegmentId::Roughness) clamp_lo = kAlphaMin;
        if (seg.id == SegmentId::Light) clamp_hi = 1e30;  // intensity only floored at 0
        if (seg.id == SegmentId::Positions) do_clamp = false;

        if (seg.id == SegmentId::Positions)
            out.displacement.assign(seg.size / 3, Vec3());

        for (size_t i = seg.offset; i < seg.offset + seg.size; ++i) {
            double g = grad.values[i];
            state.m[i] = cfg.beta1 * state.m[i] + (1.0 - cfg.beta1) * g;
            state.v[i] = cfg.beta2 * state.v[i] + (1.0 - cfg.beta2) * g * g;
            double m_hat = state.m[i] / corr1;
            double v_hat = state.v[i] / corr2;
            double delta = -lr * m_hat / (std::sqrt(v_hat) + cfg.epsilon);
            if (seg.id == SegmentId::Positions) {
                size_t local = i - seg.offset;
                out.displacement[local / 3][int(local % 3)] = delta;
            } else {
                double v = out.params.values[i] + delta;
                out.params.values[i] = do_clamp ? std::clamp(v, clamp_lo, clamp_hi) : v;
            }
        }
    }
    return out;
}

}  // namespace collodiff
