#pragma once

#include <cstddef>
#include <filesystem>
#include <span>
#include <utility>
#include <vector>

namespace scraperoll {

/// One resonance of an impulse response: a decaying sinusoid
/// amplitude * exp(-decay t) * sin(2 pi frequency t).
struct Mode {
    double frequency = 0.0; // Hz
    double amplitude = 0.0; // linear gain at t = 0
    double decay = 0.0;     // 1/s
};

inline constexpr int kDefaultModeCount = 50;      // strongest modes kept by extraction
inline constexpr std::size_t kMaxMixedModes = 100; // cap after surface+scraper mixing
inline constexpr double kMinPeakSeparationHz = 20.0;

/// A mode bank representing an impulse response at one location. Modes are
/// kept sorted ascending by frequency; that rank order is the morphing
/// correspondence.
struct ModalIR {
    std::vector<Mode> modes;
    double t0 = 0.0; // seconds

    std::size_t size() const { return modes.size(); }
    bool empty() const { return modes.empty(); }
    void sort_by_frequency();
    void validate() const;
};

/// Location-dependent impulse responses along a normalized path position
/// s in [0, 1]: surface anchors to morph between, plus the scraper's own IR
/// mixed in with weight eta.
struct IrField {
    std::vector<std::pair<double, ModalIR>> anchors; // (s, IR), s strictly increasing
    ModalIR scraper_ir;                              // may be empty
    double eta = 1.0;

    void validate() const;
};

/// Sinusoidal-modelling extraction: single long magnitude spectrum, the
/// n_modes largest local maxima with parabolic bin interpolation (>= 20 Hz
/// apart), then per mode a narrowband envelope (hop 256) whose log-linear fit
/// yields decay and t=0 amplitude.
ModalIR extract_modes(std::span<const double> ir_waveform, double sample_rate,
                      int n_modes = kDefaultModeCount);

/// Logarithmic interpolation between rank-paired modes: every parameter is
/// a_x^(1-w) * b_x^w. w=0 and w=1 return the inputs exactly. Counts are
/// truncated to the smaller bank.
ModalIR morph_modes(const ModalIR& a, const ModalIR& b, double w);

/// IR at an arbitrary path position: morph between the bracketing anchors,
/// clamped to the nearest anchor outside their span.
ModalIR ir_at_position(const IrField& field, double s);

/// Superposition of decaying sinusoids, length round(t0 * sample_rate).
/// Modes at or above Nyquist are skipped; their count is reported through
/// dropped_modes when given.
std::vector<double> synthesize_ir(const ModalIR& ir, double sample_rate,
                                  std::size_t* dropped_modes = nullptr);

/// Union of surface modes and eta-weighted scraper modes, truncated to the
/// kMaxMixedModes largest amplitudes. eta = 0 reproduces the surface IR.
ModalIR mix_ir(const ModalIR& surface, const ModalIR& scraper, double eta);

// ".mir" text container: line 1 "MIR1 t0=<seconds>", then one
// "frequency_hz amplitude decay_per_s" triple per line.
void save_modal_ir(const ModalIR& ir, const std::filesystem::path& path);
ModalIR load_modal_ir(const std::filesystem::path& path);

} // namespace scraperoll
