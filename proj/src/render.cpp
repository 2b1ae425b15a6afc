#include "scraperoll/render.hpp"

#include "scraperoll/errors.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <numbers>

namespace scraperoll {

void RenderSettings::validate() const
{
    if (!(sample_rate > 0.0))
        throw ParameterError("RenderSettings: sample_rate must be positive");
    if (morph_block < 1)
        throw ParameterError("RenderSettings: morph_block must be >= 1");
    if (!(t0 > 0.0))
        throw ParameterError("RenderSettings: t0 must be positive");
    if (!(output_peak > 0.0) || output_peak > 1.0)
        throw ParameterError("RenderSettings: output_peak must lie in (0, 1]");
}

void AudioBuffer::validate() const
{
    if (!(sample_rate > 0.0))
        throw ParameterError("AudioBuffer: sample_rate must be positive");
    for (double v : samples)
        if (!std::isfinite(v))
            throw ParameterError("AudioBuffer: non-finite sample");
}

namespace {

// Mode-bank synthesis of the truncated IR by complex phasor recurrence,
// resynchronized to the closed form every kResyncInterval samples so rounding
// drift stays below ~1e-13 relative. Four output samples are produced per
// pass from one phasor state (h[n+j] = Im(z w^j), then z <- z w^4), which
// removes the serial rotation chain from the inner loop and lets it
// vectorize. Modes whose envelope has decayed below kSilenceFloor of the
// loudest initial amplitude are dropped chunk by chunk.
constexpr std::size_t kResyncInterval = 512;
constexpr double kSilenceFloor = 1e-15;

class ModeBankSynth {
public:
    void synthesize(const ModalIR& ir, double sample_rate, std::vector<double>& out)
    {
        const std::size_t n = out.size();
        std::fill(out.begin(), out.end(), 0.0);

        amp_.clear();
        decay_.clear();
        phase_step_.clear();
        double max_amp = 0.0;
        for (const Mode& m : ir.modes) {
            if (m.frequency >= sample_rate / 2.0)
                continue;
            amp_.push_back(m.amplitude);
            decay_.push_back(m.decay);
            phase_step_.push_back(2.0 * std::numbers::pi * m.frequency / sample_rate);
            max_amp = std::max(max_amp, m.amplitude);
        }
        const std::size_t total = amp_.size();
        if (total == 0 || max_amp == 0.0)
            return;
        const double floor = kSilenceFloor * max_amp;

        for (auto* v : {&zre_, &zim_, &w1re_, &w1im_, &w2re_, &w2im_, &w3re_, &w3im_, &w4re_,
                        &w4im_}) {
            v->resize(total);
        }

        for (std::size_t chunk = 0; chunk < n; chunk += kResyncInterval) {
            const std::size_t chunk_end = std::min(n, chunk + kResyncInterval);
            const double t_start = static_cast<double>(chunk) / sample_rate;
            // Compact the bank to modes still audible in this chunk and set
            // their phasors to the exact closed-form state.
            std::size_t active = 0;
            for (std::size_t i = 0; i < total; ++i) {
                const double env = amp_[i] * std::exp(-decay_[i] * t_start);
                if (env < floor)
                    continue;
                const double phi = phase_step_[i] * static_cast<double>(chunk);
                zre_[active] = env * std::cos(phi);
                zim_[active] = env * std::sin(phi);
                const double g = std::exp(-decay_[i] / sample_rate);
                const double re1 = g * std::cos(phase_step_[i]);
                const double im1 = g * std::sin(phase_step_[i]);
                w1re_[active] = re1;
                w1im_[active] = im1;
                w2re_[active] = re1 * re1 - im1 * im1;
                w2im_[active] = 2.0 * re1 * im1;
                w3re_[active] = w2re_[active] * re1 - w2im_[active] * im1;
                w3im_[active] = w2re_[active] * im1 + w2im_[active] * re1;
                w4re_[active] = w2re_[active] * w2re_[active] - w2im_[active] * w2im_[active];
                w4im_[active] = 2.0 * w2re_[active] * w2im_[active];
                ++active;
            }
            if (active == 0)
                break; // every mode has decayed below the floor for good
            run_chunk(out, chunk, chunk_end, active);
        }
    }

private:
    void run_chunk(std::vector<double>& out, std::size_t begin, std::size_t end,
                   std::size_t active)
    {
        double* __restrict zre = zre_.data();
        double* __restrict zim = zim_.data();
        const double* __restrict w1re = w1re_.data();
        const double* __restrict w1im = w1im_.data();
        const double* __restrict w2re = w2re_.data();
        const double* __restrict w2im = w2im_.data();
        const double* __restrict w3re = w3re_.data();
        const double* __restrict w3im = w3im_.data();
        const double* __restrict w4re = w4re_.data();
        const double* __restrict w4im = w4im_.data();

        std::size_t k = begin;
        for (; k + 4 <= end; k += 4) {
            double a0 = 0.0, a1 = 0.0, a2 = 0.0, a3 = 0.0;
            for (std::size_t i = 0; i < active; ++i) {
                const double re = zre[i];
                const double im = zim[i];
                a0 += im;
                a1 += re * w1im[i] + im * w1re[i];
                a2 += re * w2im[i] + im * w2re[i];
                a3 += re * w3im[i] + im * w3re[i];
                zre[i] = re * w4re[i] - im * w4im[i];
                zim[i] = re * w4im[i] + im * w4re[i];
            }
            out[k] += a0;
            out[k + 1] += a1;
            out[k + 2] += a2;
            out[k + 3] += a3;
        }
        for (; k < end; ++k) {
            double acc = 0.0;
            for (std::size_t i = 0; i < active; ++i) {
                acc += zim[i];
                const double re = zre[i] * w1re[i] - zim[i] * w1im[i];
                zim[i] = zre[i] * w1im[i] + zim[i] * w1re[i];
                zre[i] = re;
            }
            out[k] += acc;
        }
    }

    std::vector<double> amp_, decay_, phase_step_;
    std::vector<double> zre_, zim_;
    std::vector<double> w1re_, w1im_, w2re_, w2im_, w3re_, w3im_, w4re_, w4im_;
};

// y[m+j+k] += f[m+j] h[k] for four excitations at once; one pass over the
// destination window instead of four.
void accumulate_four(double* __restrict dst, const double* __restrict h, std::size_t t0,
                     const double* f)
{
    const double f0 = f[0], f1 = f[1], f2 = f[2], f3 = f[3];
    dst[0] += f0 * h[0];
    dst[1] += f0 * h[1] + f1 * h[0];
    dst[2] += f0 * h[2] + f1 * h[1] + f2 * h[0];
    for (std::size_t k = 3; k < t0; ++k)
        dst[k] += f0 * h[k] + f1 * h[k - 1] + f2 * h[k - 2] + f3 * h[k - 3];
    dst[t0] += f1 * h[t0 - 1] + f2 * h[t0 - 2] + f3 * h[t0 - 3];
    dst[t0 + 1] += f2 * h[t0 - 1] + f3 * h[t0 - 2];
    dst[t0 + 2] += f3 * h[t0 - 1];
}

} // namespace

AudioBuffer render_time_varying(const ForceSignal& force, const IrField& field,
                                std::span<const double> path_position,
                                const RenderSettings& settings)
{
    settings.validate();
    force.validate();
    field.validate();
    if (force.size() != path_position.size())
        throw ParameterError("render_time_varying: force and path position lengths differ");
    if (force.sample_rate != settings.sample_rate)
        throw ParameterError("render_time_varying: force sample rate does not match settings");
    for (double s : path_position)
        if (!(s >= -1e-9) || !(s <= 1.0 + 1e-9))
            throw ParameterError("render_time_varying: path position outside [0, 1]");

    const std::size_t t1 = force.size();
    const auto t0_samples =
        static_cast<std::size_t>(std::llround(settings.t0 * settings.sample_rate));

    AudioBuffer out;
    out.sample_rate = settings.sample_rate;
    out.samples.assign(t1 + t0_samples, 0.0);
    if (t0_samples == 0 || t1 == 0)
        return out;

    ModeBankSynth synth;
    std::vector<double> ir_wave(t0_samples);
    const std::size_t block = settings.morph_block;
    for (std::size_t m0 = 0; m0 < t1; m0 += block) {
        const std::size_t m1 = std::min(t1, m0 + block);
        const double s = std::clamp(path_position[m0], 0.0, 1.0);
        const ModalIR total_ir = mix_ir(ir_at_position(field, s), field.scraper_ir, field.eta);
        synth.synthesize(total_ir, settings.sample_rate, ir_wave);

        std::size_t m = m0;
        if (t0_samples >= 4) {
            for (; m + 4 <= m1; m += 4) {
                const double* f = force.samples.data() + m;
                if (f[0] == 0.0 && f[1] == 0.0 && f[2] == 0.0 && f[3] == 0.0)
                    continue;
                accumulate_four(out.samples.data() + m, ir_wave.data(), t0_samples, f);
            }
        }
        for (; m < m1; ++m) {
            const double fm = force.samples[m];
            if (fm == 0.0)
                continue;
            double* __restrict dst = out.samples.data() + m;
            const double* __restrict src = ir_wave.data();
            for (std::size_t k = 0; k < t0_samples; ++k)
                dst[k] += fm * src[k];
        }
    }
    return out;
}

NormalizeResult normalize(const AudioBuffer& buf, double output_peak)
{
    if (!(output_peak > 0.0) || output_peak > 1.0)
        throw ParameterError("normalize: output_peak must lie in (0, 1]");
    buf.validate();
    double peak = 0.0;
    for (double v : buf.samples)
        peak = std::max(peak, std::abs(v));

    NormalizeResult result;
    result.buffer = buf;
    result.scale = 1.0;
    if (peak == 0.0 || peak == output_peak)
        return result;

    // Dividing by the peak first makes the peak sample exactly output_peak,
    // which is what makes repeated normalization a bit-exact no-op.
    for (double& v : result.buffer.samples)
        v = (v / peak) * output_peak;
    result.scale = output_peak / peak;
    return result;
}

namespace {

template <typename T>
void write_le(std::ostream& os, T value)
{
    unsigned char bytes[sizeof(T)];
    std::memcpy(bytes, &value, sizeof(T));
    os.write(reinterpret_cast<const char*>(bytes), sizeof(T));
}

template <typename T>
bool read_le(std::istream& is, T& value)
{
    unsigned char bytes[sizeof(T)];
    if (!is.read(reinterpret_cast<char*>(bytes), sizeof(T)))
        return false;
    std::memcpy(&value, bytes, sizeof(T));
    return true;
}

} // namespace

void write_wav(const AudioBuffer& buf, const std::filesystem::path& path)
{
    buf.validate();
    std::ofstream os(path, std::ios::binary);
    if (!os)
        throw IoError("write_wav: cannot open " + path.string());

    const auto data_size = static_cast<std::uint32_t>(buf.samples.size() * 2);
    const auto rate = static_cast<std::uint32_t>(std::llround(buf.sample_rate));
    os.write("RIFF", 4);
    write_le<std::uint32_t>(os, 36 + data_size);
    os.write("WAVE", 4);
    os.write("fmt ", 4);
    write_le<std::uint32_t>(os, 16);
    write_le<std::uint16_t>(os, 1); // PCM
    write_le<std::uint16_t>(os, 1); // mono
    write_le<std::uint32_t>(os, rate);
    write_le<std::uint32_t>(os, rate * 2);
    write_le<std::uint16_t>(os, 2);
    write_le<std::uint16_t>(os, 16);
    os.write("data", 4);
    write_le<std::uint32_t>(os, data_size);
    for (double v : buf.samples) {
        const long q = std::lround(v * 32767.0);
        write_le<std::int16_t>(os, static_cast<std::int16_t>(std::clamp(q, -32768L, 32767L)));
    }
    if (!os)
        throw IoError("write_wav: write failed for " + path.string());
}

AudioBuffer read_wav(const std::filesystem::path& path)
{
    std::ifstream is(path, std::ios::binary);
    if (!is)
        throw IoError("read_wav: cannot open " + path.string());

    std::array<char, 4> tag{};
    std::uint32_t riff_size = 0;
    if (!is.read(tag.data(), 4) || std::string_view(tag.data(), 4) != "RIFF" ||
        !read_le(is, riff_size))
        throw FormatError("read_wav: not a RIFF file");
    if (!is.read(tag.data(), 4) || std::string_view(tag.data(), 4) != "WAVE")
        throw FormatError("read_wav: not a WAVE file");

    bool have_fmt = false;
    std::uint16_t format = 0, channels = 0, bits = 0;
    std::uint32_t rate = 0;
    AudioBuffer buf;
    while (is.read(tag.data(), 4)) {
        std::uint32_t chunk_size = 0;
        if (!read_le(is, chunk_size))
            throw FormatError("read_wav: truncated chunk header");
        const std::string_view id(tag.data(), 4);
        if (id == "fmt ") {
            std::uint16_t block_align = 0;
            std::uint32_t byte_rate = 0;
            if (chunk_size < 16 || !read_le(is, format) || !read_le(is, channels) ||
                !read_le(is, rate) || !read_le(is, byte_rate) || !read_le(is, block_align) ||
                !read_le(is, bits))
                throw FormatError("read_wav: truncated fmt chunk");
            is.ignore(chunk_size - 16 + (chunk_size % 2));
            have_fmt = true;
        } else if (id == "data") {
            if (!have_fmt)
                throw FormatError("read_wav: data chunk before fmt chunk");
            if (format != 1)
                throw FormatError("read_wav: only PCM files are supported");
            if (channels != 1)
                throw FormatError("read_wav: only mono files are supported");
            if (bits != 16)
                throw FormatError("read_wav: only 16-bit samples are supported");
            const std::size_t count = chunk_size / 2;
            buf.sample_rate = static_cast<double>(rate);
            buf.samples.resize(count);
            for (std::size_t i = 0; i < count; ++i) {
                std::int16_t q = 0;
                if (!read_le(is, q))
                    throw FormatError("read_wav: truncated data chunk");
                buf.samples[i] = static_cast<double>(q) / 32767.0;
            }
            return buf;
        } else {
            is.ignore(chunk_size + (chunk_size % 2));
        }
    }
    throw FormatError("read_wav: no data chunk found");
}

} // namespace scraperoll
