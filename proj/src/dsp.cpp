#include "scraperoll/dsp.hpp"

#include "scraperoll/errors.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <mutex>
#include <numbers>

namespace scraperoll::dsp {

namespace {

// FFTW plan creation/destruction is not thread-safe; execution is.
std::mutex& plan_mutex()
{
    static std::mutex m;
    return m;
}

} // namespace

std::vector<std::complex<double>> fft_real(std::span<const double> x)
{
    if (x.empty())
        throw ParameterError("fft_real: empty input");
    const std::size_t n = x.size();
    std::vector<double> in(x.begin(), x.end());
    std::vector<std::complex<double>> out(n / 2 + 1);

    fftw_plan plan;
    {
        std::lock_guard lock(plan_mutex());
        plan = fftw_plan_dft_r2c_1d(static_cast<int>(n), in.data(),
                                    reinterpret_cast<fftw_complex*>(out.data()), FFTW_ESTIMATE);
    }
    fftw_execute(plan);
    {
        std::lock_guard lock(plan_mutex());
        fftw_destroy_plan(plan);
    }
    return out;
}

std::vector<double> magnitude_spectrum(std::span<const double> x)
{
    auto spec = fft_real(x);
    std::vector<double> mag(spec.size());
    std::transform(spec.begin(), spec.end(), mag.begin(), [](auto c) { return std::abs(c); });
    return mag;
}

std::vector<std::complex<double>> fft2_real(int ny, int nx, std::span<const double> grid)
{
    if (nx <= 0 || ny <= 0 || grid.size() != static_cast<std::size_t>(nx) * ny)
        throw ParameterError("fft2_real: grid size does not match dimensions");
    std::vector<double> in(grid.begin(), grid.end());
    std::vector<std::complex<double>> out(static_cast<std::size_t>(ny) * (nx / 2 + 1));

    fftw_plan plan;
    {
        std::lock_guard lock(plan_mutex());
        plan = fftw_plan_dft_r2c_2d(ny, nx, in.data(),
                                    reinterpret_cast<fftw_complex*>(out.data()), FFTW_ESTIMATE);
    }
    fftw_execute(plan);
    {
        std::lock_guard lock(plan_mutex());
        fftw_destroy_plan(plan);
    }
    return out;
}

std::vector<double> ifft2_real(int ny, int nx, std::span<const std::complex<double>> spectrum)
{
    const std::size_t expected = static_cast<std::size_t>(ny) * (nx / 2 + 1);
    if (nx <= 0 || ny <= 0 || spectrum.size() != expected)
        throw ParameterError("ifft2_real: spectrum size does not match dimensions");
    std::vector<std::complex<double>> in(spectrum.begin(), spectrum.end());
    std::vector<double> out(static_cast<std::size_t>(nx) * ny);

    fftw_plan plan;
    {
        std::lock_guard lock(plan_mutex());
        plan = fftw_plan_dft_c2r_2d(ny, nx, reinterpret_cast<fftw_complex*>(in.data()),
                                    out.data(), FFTW_ESTIMATE);
    }
    fftw_execute(plan);
    {
        std::lock_guard lock(plan_mutex());
        fftw_destroy_plan(plan);
    }
    return out;
}

std::vector<double> moving_mean(std::span<const double> x, std::size_t window)
{
    const std::size_t n = x.size();
    std::vector<double> out(n, 0.0);
    if (n == 0 || window <= 1) {
        std::copy(x.begin(), x.end(), out.begin());
        return out;
    }
    // Prefix sums; window [i - w/2, i + w/2 - 1] clamped to the series.
    std::vector<double> prefix(n + 1, 0.0);
    for (std::size_t i = 0; i < n; ++i)
        prefix[i + 1] = prefix[i] + x[i];
    const std::ptrdiff_t half = static_cast<std::ptrdiff_t>(window / 2);
    for (std::size_t i = 0; i < n; ++i) {
        const std::ptrdiff_t lo = std::max<std::ptrdiff_t>(0, static_cast<std::ptrdiff_t>(i) - half);
        const std::ptrdiff_t hi =
            std::min<std::ptrdiff_t>(static_cast<std::ptrdiff_t>(n) - 1,
                                     static_cast<std::ptrdiff_t>(i) + half - 1 + (window % 2));
        out[i] = (prefix[hi + 1] - prefix[lo]) / static_cast<double>(hi - lo + 1);
    }
    return out;
}

std::vector<double> hann_window(std::size_t n)
{
    std::vector<double> w(n);
    if (n == 1) {
        w[0] = 1.0;
        return w;
    }
    for (std::size_t i = 0; i < n; ++i)
        w[i] = 0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * static_cast<double>(i) /
                                    static_cast<double>(n - 1));
    return w;
}

double windowed_magnitude_at(std::span<const double> x, std::size_t start,
                             std::span<const double> win, double freq_hz, double sample_rate)
{
    const std::size_t nw = win.size();
    if (start + nw > x.size())
        throw ParameterError("windowed_magnitude_at: frame exceeds signal");
    const double omega = 2.0 * std::numbers::pi * freq_hz / sample_rate;
    // Recurrence-free direct correlation; nw is small (a few thousand samples).
    double re = 0.0, im = 0.0;
    for (std::size_t n = 0; n < nw; ++n) {
        const double v = win[n] * x[start + n];
        const double phase = omega * static_cast<double>(n);
        re += v * std::cos(phase);
        im -= v * std::sin(phase);
    }
    return std::hypot(re, im);
}

namespace {

std::vector<double> detrend_and_window(std::span<const double> x)
{
    const std::size_t n = x.size();
    double mean = 0.0;
    for (double v : x)
        mean += v;
    mean /= static_cast<double>(n);
    auto w = hann_window(n);
    std::vector<double> y(n);
    for (std::size_t i = 0; i < n; ++i)
        y[i] = (x[i] - mean) * w[i];
    return y;
}

} // namespace

double spectral_centroid(std::span<const double> x, double sample_rate)
{
    if (x.size() < 4)
        throw ParameterError("spectral_centroid: input too short");
    auto mag = magnitude_spectrum(detrend_and_window(x));
    const double bin_hz = sample_rate / static_cast<double>(x.size());
    double num = 0.0, den = 0.0;
    for (std::size_t k = 1; k < mag.size(); ++k) {
        num += static_cast<double>(k) * bin_hz * mag[k];
        den += mag[k];
    }
    if (den <= 0.0)
        throw DegenerateInputError("spectral_centroid: silent input");
    return num / den;
}

double dominant_frequency(std::span<const double> x, double sample_rate)
{
    if (x.size() < 8)
        throw ParameterError("dominant_frequency: input too short");
    auto mag = magnitude_spectrum(detrend_and_window(x));
    std::size_t best = 1;
    for (std::size_t k = 2; k + 1 < mag.size(); ++k)
        if (mag[k] > mag[best])
            best = k;
    if (mag[best] <= 0.0)
        throw DegenerateInputError("dominant_frequency: silent input");
    double delta = 0.0;
    if (best > 1 && best + 1 < mag.size()) {
        const double a = mag[best - 1], b = mag[best], c = mag[best + 1];
        const double denom = a - 2.0 * b + c;
        if (std::abs(denom) > 0.0)
            delta = std::clamp(0.5 * (a - c) / denom, -0.5, 0.5);
    }
    return (static_cast<double>(best) + delta) * sample_rate / static_cast<double>(x.size());
}

LineFit fit_line(std::span<const double> t, std::span<const double> y)
{
    if (t.size() != y.size() || t.size() < 2)
        throw ParameterError("fit_line: need at least two matched samples");
    const double n = static_cast<double>(t.size());
    double st = 0.0, sy = 0.0, stt = 0.0, sty = 0.0;
    for (std::size_t i = 0; i < t.size(); ++i) {
        st += t[i];
        sy += y[i];
        stt += t[i] * t[i];
        sty += t[i] * y[i];
    }
    const double denom = n * stt - st * st;
    if (denom == 0.0)
        throw ParameterError("fit_line: degenerate abscissae");
    LineFit fit;
    fit.slope = (n * sty - st * sy) / denom;
    fit.intercept = (sy - fit.slope * st) / n;
    return fit;
}

} // namespace scraperoll::dsp
