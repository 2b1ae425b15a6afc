#include "scraperoll/modal.hpp"

#include "scraperoll/dsp.hpp"
#include "scraperoll/errors.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>
#include <sstream>

namespace scraperoll {

namespace {

constexpr std::size_t kEnvelopeHop = 256;
constexpr std::size_t kEnvelopeWindow = 2048;
constexpr double kDecayInterpFloor = 1e-6;

} // namespace

void ModalIR::sort_by_frequency()
{
    std::stable_sort(modes.begin(), modes.end(),
                     [](const Mode& a, const Mode& b) { return a.frequency < b.frequency; });
}

void ModalIR::validate() const
{
    if (!(t0 > 0.0))
        throw ParameterError("ModalIR: t0 must be positive");
    if (modes.size() > kMaxMixedModes)
        throw ParameterError("ModalIR: too many modes");
    double prev = 0.0;
    for (const Mode& m : modes) {
        if (!(m.frequency > 0.0))
            throw ParameterError("ModalIR: mode frequency must be positive");
        if (!(m.amplitude > 0.0))
            throw ParameterError("ModalIR: mode amplitude must be positive");
        if (m.decay < 0.0)
            throw ParameterError("ModalIR: mode decay must be non-negative");
        if (m.frequency < prev)
            throw ParameterError("ModalIR: modes must be sorted ascending by frequency");
        prev = m.frequency;
    }
}

void IrField::validate() const
{
    if (anchors.empty())
        throw ParameterError("IrField: need at least one anchor");
    double prev = -1.0;
    for (const auto& [s, ir] : anchors) {
        if (s < 0.0 || s > 1.0)
            throw ParameterError("IrField: anchor positions must lie in [0, 1]");
        if (s <= prev)
            throw ParameterError("IrField: anchor positions must be strictly increasing");
        prev = s;
        ir.validate();
        if (ir.empty())
            throw ParameterError("IrField: anchor IR has no modes");
    }
    if (eta < 0.0)
        throw ParameterError("IrField: eta must be non-negative");
    if (!scraper_ir.empty())
        scraper_ir.validate();
}

ModalIR extract_modes(std::span<const double> ir_waveform, double sample_rate, int n_modes)
{
    if (ir_waveform.size() < 4096)
        throw ParameterError("extract_modes: waveform must be at least 4096 samples");
    if (n_modes < 1)
        throw ParameterError("extract_modes: n_modes must be >= 1");
    if (!(sample_rate > 0.0))
        throw ParameterError("extract_modes: sample_rate must be positive");

    double peak = 0.0;
    for (double v : ir_waveform)
        peak = std::max(peak, std::abs(v));
    if (peak < 1e-9)
        throw DegenerateInputError("extract_modes: input is silent");

    // (1) One long transform over the whole waveform.
    const std::size_t n = ir_waveform.size();
    const auto mag = dsp::magnitude_spectrum(ir_waveform);
    const double bin_hz = sample_rate / static_cast<double>(n);

    // (2) Largest local maxima, >= 20 Hz apart, with parabolic refinement on
    // the log magnitude.
    std::vector<std::size_t> candidates;
    for (std::size_t k = 1; k + 1 < mag.size(); ++k)
        if (mag[k] > mag[k - 1] && mag[k] >= mag[k + 1] && mag[k] > 0.0)
            candidates.push_back(k);
    std::sort(candidates.begin(), candidates.end(),
              [&](std::size_t a, std::size_t b) { return mag[a] > mag[b]; });

    // Short Hann probe for local frequency refinement: its mainlobe is a few
    // tens of Hz wide and its sidelobes suppress the Lorentzian tails of loud
    // neighbors that skew the long-transform peak position.
    const std::size_t probe_len = std::min<std::size_t>(8192, n);
    const auto probe_win = dsp::hann_window(probe_len);
    const auto refine_frequency = [&](double freq) {
        double step = bin_hz;
        for (int iter = 0; iter < 3; ++iter) {
            const double lo = freq - step, hi = freq + step;
            if (lo <= 0.0 || hi >= sample_rate / 2.0)
                break;
            const double ma =
                dsp::windowed_magnitude_at(ir_waveform, 0, probe_win, lo, sample_rate);
            const double mb =
                dsp::windowed_magnitude_at(ir_waveform, 0, probe_win, freq, sample_rate);
            const double mc =
                dsp::windowed_magnitude_at(ir_waveform, 0, probe_win, hi, sample_rate);
            if (!(ma > 0.0) || !(mb > 0.0) || !(mc > 0.0))
                break;
            const double la = std::log(ma), lb = std::log(mb), lc = std::log(mc);
            const double denom = la - 2.0 * lb + lc;
            if (denom == 0.0)
                break;
            freq += step * std::clamp(0.5 * (la - lc) / denom, -1.0, 1.0);
            step = std::max(step / 4.0, 0.05);
        }
        return freq;
    };

    std::vector<double> picked_freqs;
    for (std::size_t k : candidates) {
        if (picked_freqs.size() >= static_cast<std::size_t>(n_modes))
            break;
        double delta = 0.0;
        if (k > 0 && k + 1 < mag.size() && mag[k - 1] > 0.0 && mag[k + 1] > 0.0) {
            const double la = std::log(mag[k - 1]);
            const double lb = std::log(mag[k]);
            const double lc = std::log(mag[k + 1]);
            const double denom = la - 2.0 * lb + lc;
            if (denom != 0.0)
                delta = std::clamp(0.5 * (la - lc) / denom, -0.5, 0.5);
        }
        double freq = (static_cast<double>(k) + delta) * bin_hz;
        if (!(freq > 0.0) || freq >= sample_rate / 2.0)
            continue;
        freq = refine_frequency(freq);
        if (!(freq > 0.0) || freq >= sample_rate / 2.0)
            continue;
        bool separated = true;
        for (double f : picked_freqs)
            if (std::abs(f - freq) < kMinPeakSeparationHz) {
                separated = false;
                break;
            }
        if (separated)
            picked_freqs.push_back(freq);
    }
    if (picked_freqs.empty())
        throw DegenerateInputError("extract_modes: no spectral peaks found");

    // (3) Narrowband envelope per picked frequency; log-linear fit against the
    // frame start time gives the decay rate, and the intercept gives the t=0
    // amplitude once the within-window decay gain is divided out:
    //   env(t_start) = (A/2) e^(-d t_start) sum_n w[n] e^(-d n / sr).
    const auto window = dsp::hann_window(kEnvelopeWindow);

    ModalIR ir;
    ir.t0 = static_cast<double>(n) / sample_rate;
    for (double freq : picked_freqs) {
        std::vector<double> times;
        std::vector<double> env;
        for (std::size_t start = 0; start + kEnvelopeWindow <= n; start += kEnvelopeHop) {
            const double m =
                dsp::windowed_magnitude_at(ir_waveform, start, window, freq, sample_rate);
            env.push_back(m);
            times.push_back(static_cast<double>(start) / sample_rate);
        }
        const double env_peak = *std::max_element(env.begin(), env.end());
        if (!(env_peak > 0.0))
            continue;
        std::vector<double> t_fit, y_fit;
        for (std::size_t j = 0; j < env.size(); ++j)
            if (env[j] >= env_peak / 100.0 && env[j] > 0.0) {
                t_fit.push_back(times[j]);
                y_fit.push_back(std::log(env[j]));
            }
        if (t_fit.size() < 2) {
            t_fit.assign(times.begin(), times.begin() + 2);
            y_fit = {std::log(std::max(env[0], 1e-300)), std::log(std::max(env[1], 1e-300))};
        }
        const auto fit = dsp::fit_line(t_fit, y_fit);
        Mode mode;
        mode.frequency = freq;
        mode.decay = std::max(-fit.slope, 0.0);
        double window_gain = 0.0;
        for (std::size_t k = 0; k < window.size(); ++k)
            window_gain +=
                window[k] * std::exp(-mode.decay * static_cast<double>(k) / sample_rate);
        mode.amplitude = 2.0 * std::exp(fit.intercept) / window_gain;
        if (mode.amplitude > 0.0)
            ir.modes.push_back(mode);
    }
    if (ir.modes.empty())
        throw DegenerateInputError("extract_modes: no usable modes");
    ir.sort_by_frequency();
    ir.validate();
    return ir;
}

ModalIR morph_modes(const ModalIR& a, const ModalIR& b, double w)
{
    if (w < 0.0 || w > 1.0)
        throw ParameterError("morph_modes: weight must lie in [0, 1]");
    a.validate();
    b.validate();
    // Endpoints are returned verbatim; the decay floor below would otherwise
    // perturb zero-decay modes.
    if (w == 0.0)
        return a;
    if (w == 1.0)
        return b;

    const std::size_t count = std::min(a.size(), b.size());
    ModalIR out;
    out.t0 = std::max(a.t0, b.t0);
    out.modes.resize(count);
    for (std::size_t i = 0; i < count; ++i) {
        const Mode& ma = a.modes[i];
        const Mode& mb = b.modes[i];
        Mode& m = out.modes[i];
        m.frequency = std::pow(ma.frequency, 1.0 - w) * std::pow(mb.frequency, w);
        m.amplitude = std::pow(ma.amplitude, 1.0 - w) * std::pow(mb.amplitude, w);
        m.decay = std::pow(std::max(ma.decay, kDecayInterpFloor), 1.0 - w) *
                  std::pow(std::max(mb.decay, kDecayInterpFloor), w);
    }
    out.sort_by_frequency();
    return out;
}

ModalIR ir_at_position(const IrField& field, double s)
{
    field.validate();
    const auto& anchors = field.anchors;
    if (anchors.size() == 1 || s <= anchors.front().first)
        return anchors.front().second;
    if (s >= anchors.back().first)
        return anchors.back().second;
    std::size_t hi = 1;
    while (anchors[hi].first < s)
        ++hi;
    const auto& [s0, ir0] = anchors[hi - 1];
    const auto& [s1, ir1] = anchors[hi];
    return morph_modes(ir0, ir1, (s - s0) / (s1 - s0));
}

std::vector<double> synthesize_ir(const ModalIR& ir, double sample_rate,
                                  std::size_t* dropped_modes)
{
    ir.validate();
    if (ir.empty())
        throw DegenerateInputError("synthesize_ir: empty mode bank");
    if (!(sample_rate > 0.0))
        throw ParameterError("synthesize_ir: sample_rate must be positive");
    const auto n = static_cast<std::size_t>(std::llround(ir.t0 * sample_rate));

    std::size_t dropped = 0;
    std::vector<double> out(n, 0.0);
    for (const Mode& m : ir.modes) {
        if (m.frequency >= sample_rate / 2.0) {
            ++dropped;
            continue;
        }
        const double w = 2.0 * std::numbers::pi * m.frequency;
        for (std::size_t k = 0; k < n; ++k) {
            const double t = static_cast<double>(k) / sample_rate;
            out[k] += m.amplitude * std::exp(-m.decay * t) * std::sin(w * t);
        }
    }
    if (dropped_modes)
        *dropped_modes = dropped;
    return out;
}

ModalIR mix_ir(const ModalIR& surface, const ModalIR& scraper, double eta)
{
    if (eta < 0.0)
        throw ParameterError("mix_ir: eta must be non-negative");
    surface.validate();

    ModalIR out = surface;
    if (eta > 0.0 && !scraper.empty()) {
        scraper.validate();
        out.t0 = std::max(surface.t0, scraper.t0);
        for (Mode m : scraper.modes) {
            m.amplitude *= eta;
            out.modes.push_back(m);
        }
    }
    if (out.modes.size() > kMaxMixedModes) {
        std::stable_sort(out.modes.begin(), out.modes.end(),
                         [](const Mode& a, const Mode& b) { return a.amplitude > b.amplitude; });
        out.modes.resize(kMaxMixedModes);
    }
    out.sort_by_frequency();
    return out;
}

void save_modal_ir(const ModalIR& ir, const std::filesystem::path& path)
{
    ir.validate();
    std::ofstream os(path);
    if (!os)
        throw IoError("save_modal_ir: cannot open " + path.string());
    char buf[128];
    std::snprintf(buf, sizeof(buf), "MIR1 t0=%.17g\n", ir.t0);
    os << buf;
    for (const Mode& m : ir.modes) {
        std::snprintf(buf, sizeof(buf), "%.17g %.17g %.17g\n", m.frequency, m.amplitude, m.decay);
        os << buf;
    }
    if (!os)
        throw IoError("save_modal_ir: write failed for " + path.string());
}

ModalIR load_modal_ir(const std::filesystem::path& path)
{
    std::ifstream is(path);
    if (!is)
        throw IoError("load_modal_ir: cannot open " + path.string());
    std::string line;
    if (!std::getline(is, line))
        throw FormatError("load_modal_ir: empty file " + path.string());

    ModalIR ir;
    {
        std::istringstream header(line);
        std::string magic, t0_field;
        header >> magic >> t0_field;
        if (magic != "MIR1" || t0_field.rfind("t0=", 0) != 0)
            throw FormatError("load_modal_ir: bad header, expected 'MIR1 t0=<seconds>'");
        try {
            ir.t0 = std::stod(t0_field.substr(3));
        } catch (const std::exception&) {
            throw FormatError("load_modal_ir: unparsable t0 value");
        }
    }
    int line_no = 1;
    while (std::getline(is, line)) {
        ++line_no;
        if (line.find_first_not_of(" \t\r") == std::string::npos)
            continue;
        std::istringstream row(line);
        Mode m;
        if (!(row >> m.frequency >> m.amplitude >> m.decay))
            throw FormatError("load_modal_ir: malformed mode at line " + std::to_string(line_no));
        ir.modes.push_back(m);
    }
    ir.sort_by_frequency();
    try {
        ir.validate();
    } catch (const ParameterError& e) {
        throw FormatError(std::string("load_modal_ir: ") + e.what());
    }
    return ir;
}

} // namespace scraperoll
