#pragma once

#include "scraperoll/force.hpp"
#include "scraperoll/modal.hpp"

#include <filesystem>
#include <span>
#include <vector>

namespace scraperoll {

struct RenderSettings {
    double sample_rate = 44100.0;
    std::size_t morph_block = 64; // force samples between IR updates
    double t0 = 0.5;              // IR ring time, seconds
    double output_peak = 0.5;     // normalization target, (0, 1]

    void validate() const;
};

struct AudioBuffer {
    double sample_rate = 0.0;
    std::vector<double> samples;

    std::size_t size() const { return samples.size(); }
    void validate() const;
};

/// Modified convolution with a location-dependent IR: every force sample m
/// excites the total impulse response at that sample's path position,
///   y(t) = sum_m f(m) h_{s(m)}(t - m),  0 <= t - m < T0,
/// so the drive runs for T1 samples and the last excitation rings for t0
/// seconds beyond it (output length T1 + T0). The IR is refreshed once per
/// morph_block of m; all samples in a block share the block-start position.
AudioBuffer render_time_varying(const ForceSignal& force, const IrField& field,
                                std::span<const double> path_position,
                                const RenderSettings& settings);

struct NormalizeResult {
    AudioBuffer buffer;
    double scale = 1.0;
};

/// Rescales so the peak magnitude equals output_peak; silent buffers pass
/// through with scale 1. Idempotent.
NormalizeResult normalize(const AudioBuffer& buf, double output_peak);

// 16-bit PCM mono RIFF/WAVE. Samples quantize as round(x * 32767) clamped to
// [-32768, 32767]; reading divides by 32767. Only 16-bit PCM mono files load.
void write_wav(const AudioBuffer& buf, const std::filesystem::path& path);
AudioBuffer read_wav(const std::filesystem::path& path);

} // namespace scraperoll
