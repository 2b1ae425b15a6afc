#pragma once

#include <complex>
#include <cstddef>
#include <span>
#include <vector>

// Small numeric helpers shared by the synthesis modules and the analysis
// utilities. FFTs are backed by FFTW (double precision, FFTW_ESTIMATE plans);
// plan creation is serialized internally so callers may use these from
// multiple threads.

namespace scraperoll::dsp {

// Real-to-complex FFT, returns n/2+1 bins.
std::vector<std::complex<double>> fft_real(std::span<const double> x);

// Magnitude of fft_real.
std::vector<double> magnitude_spectrum(std::span<const double> x);

// 2D real<->complex transforms for grid filtering. `spectrum` is laid out
// row-major ny x (nx/2+1). The inverse is unnormalized (scale by 1/(nx*ny)).
std::vector<std::complex<double>> fft2_real(int ny, int nx, std::span<const double> grid);
std::vector<double> ifft2_real(int ny, int nx, std::span<const std::complex<double>> spectrum);

// Centered moving mean with window `window` samples, shrinking at the edges.
std::vector<double> moving_mean(std::span<const double> x, std::size_t window);

std::vector<double> hann_window(std::size_t n);

// Magnitude of the windowed DFT of x[start .. start+win.size()) probed at an
// arbitrary frequency (not restricted to bin centers).
double windowed_magnitude_at(std::span<const double> x, std::size_t start,
                             std::span<const double> win, double freq_hz, double sample_rate);

// Amplitude-weighted mean frequency after mean removal and Hann windowing.
double spectral_centroid(std::span<const double> x, double sample_rate);

// Frequency of the largest non-DC spectral peak (mean removed, Hann windowed,
// parabolic bin refinement).
double dominant_frequency(std::span<const double> x, double sample_rate);

struct LineFit {
    double slope = 0.0;
    double intercept = 0.0;
};

// Ordinary least squares y ~ slope*t + intercept.
LineFit fit_line(std::span<const double> t, std::span<const double> y);

} // namespace scraperoll::dsp
