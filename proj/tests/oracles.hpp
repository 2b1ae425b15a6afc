#pragma once

// Test-only reference implementations. These stay independent of the render
// module's fast paths: impulse responses are evaluated sample by sample with
// std::exp/std::sin, and the convolutions iterate (m, t) pairs directly.

#include "scraperoll/modal.hpp"
#include "scraperoll/render.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <span>
#include <vector>

namespace scraperoll::oracles {

// Direct evaluation of a mode bank, independent of modal::synthesize_ir.
inline std::vector<double> direct_ir(const ModalIR& ir, double sample_rate,
                                     std::size_t n_samples)
{
    std::vector<double> h(n_samples, 0.0);
    for (const Mode& m : ir.modes) {
        if (m.frequency >= sample_rate / 2.0)
            continue;
        const double w = 2.0 * std::numbers::pi * m.frequency;
        for (std::size_t k = 0; k < n_samples; ++k) {
            const double t = static_cast<double>(k) / sample_rate;
            h[k] += m.amplitude * std::exp(-m.decay * t) * std::sin(w * t);
        }
    }
    return h;
}

// Dense double-loop rendering: for every output sample t, sum over every
// excitation m with the IR of m's morph block. O(T1 * T0).
inline std::vector<double> dense_render(const ForceSignal& force, const IrField& field,
                                        std::span<const double> path_position,
                                        const RenderSettings& settings)
{
    const std::size_t t1 = force.size();
    const auto t0_samples =
        static_cast<std::size_t>(std::llround(settings.t0 * settings.sample_rate));

    // Per-block IRs via the direct evaluator.
    const std::size_t n_blocks = (t1 + settings.morph_block - 1) / settings.morph_block;
    std::vector<std::vector<double>> block_ir(n_blocks);
    for (std::size_t b = 0; b < n_blocks; ++b) {
        const double s = std::clamp(path_position[b * settings.morph_block], 0.0, 1.0);
        const ModalIR ir = mix_ir(ir_at_position(field, s), field.scraper_ir, field.eta);
        block_ir[b] = direct_ir(ir, settings.sample_rate, t0_samples);
    }

    std::vector<double> y(t1 + t0_samples, 0.0);
    for (std::size_t t = 0; t < y.size(); ++t) {
        const std::size_t m_lo = t >= t0_samples ? t - t0_samples + 1 : 0;
        const std::size_t m_hi = std::min(t, t1 - 1);
        for (std::size_t m = m_lo; m <= m_hi; ++m)
            y[t] += force.samples[m] * block_ir[m / settings.morph_block][t - m];
    }
    return y;
}

// Textbook finite convolution of a force with one fixed truncated IR.
inline std::vector<double> textbook_convolution(std::span<const double> f,
                                                std::span<const double> h)
{
    std::vector<double> y(f.size() + h.size(), 0.0);
    for (std::size_t t = 0; t < y.size(); ++t) {
        const std::size_t m_lo = t >= h.size() ? t - h.size() + 1 : 0;
        const std::size_t m_hi = std::min(t, f.size() - 1);
        for (std::size_t m = m_lo; m <= m_hi; ++m)
            y[t] += f[m] * h[t - m];
    }
    return y;
}

inline double relative_l2(std::span<const double> a, std::span<const double> b)
{
    double diff = 0.0, ref = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double d = a[i] - b[i];
        diff += d * d;
        ref += b[i] * b[i];
    }
    return ref > 0.0 ? std::sqrt(diff / ref) : std::sqrt(diff);
}

} // namespace scraperoll::oracles
