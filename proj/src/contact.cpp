#include "scraperoll/contact.hpp"

#include "scraperoll/dsp.hpp"
#include "scraperoll/errors.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

namespace scraperoll {

namespace {

constexpr std::size_t kDetrendWindow = 1024;

} // namespace

void NonlinearityParams::validate() const
{
    if (!(alpha_min > 0.0) || alpha_min > alpha_max)
        throw ParameterError("NonlinearityParams: need 0 < alpha_min <= alpha_max");
    if (!(zeta > 0.0))
        throw ParameterError("NonlinearityParams: zeta must be positive");
    if (smoothing_gain < 0.0)
        throw ParameterError("NonlinearityParams: smoothing_gain must be non-negative");
}

void ContactPathSignals::validate() const
{
    const std::size_t n = S.size();
    if (n == 0)
        throw ParameterError("contact path is empty");
    for (const auto* series : {&dSdx, &dSdy, &d2Sdx2, &d2Sdy2, &alpha_x, &alpha_y,
                               &d2Sdx2_pre_smooth, &d2Sdy2_pre_smooth})
        if (series->size() != n)
            throw ParameterError("contact path series have mismatched lengths");
    if (!(sample_rate > 0.0))
        throw ParameterError("contact path sample_rate must be positive");
    for (std::size_t i = 0; i < n; ++i)
        if (!std::isfinite(S[i]) || !std::isfinite(dSdx[i]) || !std::isfinite(d2Sdx2[i]) ||
            !std::isfinite(dSdy[i]) || !std::isfinite(d2Sdy2[i]))
            throw ParameterError("contact path contains non-finite values");
}

double alpha_of_normal_force(double n, double n_min, double n_max, const NonlinearityParams& p)
{
    p.validate();
    if (n_max < n_min)
        throw ParameterError("alpha_of_normal_force: N_max < N_min");
    if (n_max == n_min)
        return p.alpha_max; // constant-force convention
    const double tol = 1e-9 * std::max(std::abs(n_min), std::abs(n_max));
    if (n < n_min - tol || n > n_max + tol)
        throw ParameterError("alpha_of_normal_force: N outside [N_min, N_max]");
    const double clamped = std::clamp(n, n_min, n_max);
    const double nu = std::pow((clamped - n_min) / (n_max - n_min), p.zeta);
    return (1.0 - nu) * p.alpha_max + nu * p.alpha_min;
}

double constrain_curvature(double curvature, double alpha)
{
    if (!(alpha > 0.0))
        throw ParameterError("constrain_curvature: alpha must be positive");
    return std::tanh(alpha * curvature) / alpha;
}

namespace {

// Normalized truncated Gaussian, support +-2*half_window, sigma = half_window/2.
std::vector<double> make_kernel(int half_window)
{
    const int reach = 2 * half_window;
    const double sigma = static_cast<double>(half_window) / 2.0;
    std::vector<double> kernel(static_cast<std::size_t>(2 * reach + 1));
    double sum = 0.0;
    for (int j = -reach; j <= reach; ++j) {
        const double v = std::exp(-0.5 * (j / sigma) * (j / sigma));
        kernel[static_cast<std::size_t>(j + reach)] = v;
        sum += v;
    }
    for (double& v : kernel)
        v /= sum;
    return kernel;
}

std::size_t reflect_index(std::ptrdiff_t i, std::ptrdiff_t n)
{
    if (n == 1)
        return 0;
    while (i < 0 || i >= n) {
        if (i < 0)
            i = -i;
        if (i >= n)
            i = 2 * (n - 1) - i;
    }
    return static_cast<std::size_t>(i);
}

double apply_kernel(std::span<const double> x, std::size_t center,
                    std::span<const double> kernel)
{
    const auto n = static_cast<std::ptrdiff_t>(x.size());
    const auto reach = static_cast<std::ptrdiff_t>(kernel.size() / 2);
    double acc = 0.0;
    for (std::ptrdiff_t j = -reach; j <= reach; ++j)
        acc += kernel[static_cast<std::size_t>(j + reach)] *
               x[reflect_index(static_cast<std::ptrdiff_t>(center) + j, n)];
    return acc;
}

} // namespace

std::vector<double> gaussian_smooth(std::span<const double> series, int half_window)
{
    if (half_window < 0)
        throw ParameterError("gaussian_smooth: half_window must be >= 0");
    std::vector<double> out(series.begin(), series.end());
    if (half_window == 0 || series.empty())
        return out;
    const auto kernel = make_kernel(half_window);
    for (std::size_t i = 0; i < series.size(); ++i)
        out[i] = apply_kernel(series, i, kernel);
    return out;
}

std::vector<double> gaussian_smooth(std::span<const double> series,
                                    std::span<const int> half_windows)
{
    if (half_windows.size() != series.size())
        throw ParameterError("gaussian_smooth: half_windows length mismatch");
    std::vector<double> out(series.begin(), series.end());
    std::vector<std::vector<double>> cache;
    for (std::size_t i = 0; i < series.size(); ++i) {
        const int w = half_windows[i];
        if (w < 0)
            throw ParameterError("gaussian_smooth: half_window must be >= 0");
        if (w == 0)
            continue;
        if (static_cast<std::size_t>(w) >= cache.size())
            cache.resize(static_cast<std::size_t>(w) + 1);
        auto& kernel = cache[static_cast<std::size_t>(w)];
        if (kernel.empty())
            kernel = make_kernel(w);
        out[i] = apply_kernel(series, i, kernel);
    }
    return out;
}

namespace {

// Cumulative path integral with moving-mean drift removal.
std::vector<double> integrate_detrended(std::span<const double> integrand,
                                        std::span<const double> step)
{
    std::vector<double> acc(integrand.size());
    double running = 0.0;
    for (std::size_t i = 0; i < integrand.size(); ++i) {
        running += integrand[i] * step[i];
        acc[i] = running;
    }
    const auto baseline = dsp::moving_mean(acc, kDetrendWindow);
    for (std::size_t i = 0; i < acc.size(); ++i)
        acc[i] -= baseline[i];
    return acc;
}

} // namespace

ContactPathSignals build_contact_path(const SurfaceDepthMap& map, const MotionTrajectory& traj,
                                      const NormalForceBounds& bounds,
                                      const NonlinearityParams& p, bool apply_nonlinearity)
{
    map.validate();
    traj.validate();
    p.validate();

    const std::size_t n = traj.size();
    ContactPathSignals path;
    path.sample_rate = traj.sample_rate;
    path.S.resize(n);
    path.dSdx.resize(n);
    path.dSdy.resize(n);
    path.d2Sdx2.resize(n);
    path.d2Sdy2.resize(n);
    path.alpha_x.resize(n);
    path.alpha_y.resize(n);

    std::vector<double> cx(n), cy(n);
    std::vector<int> half_windows(n, 0);
    for (std::size_t i = 0; i < n; ++i) {
        const SurfaceSample s = sample_surface(map, traj.x[i], traj.y[i]);
        const double alpha =
            alpha_of_normal_force(traj.normal_force[i], bounds.n_min, bounds.n_max, p);
        path.alpha_x[i] = alpha;
        path.alpha_y[i] = alpha; // isotropic limit applied to both axes
        if (apply_nonlinearity) {
            cx[i] = constrain_curvature(s.d2zdx2, alpha);
            cy[i] = constrain_curvature(s.d2zdy2, alpha);
            half_windows[i] = static_cast<int>(std::lround(p.smoothing_gain * alpha));
        } else {
            cx[i] = s.d2zdx2;
            cy[i] = s.d2zdy2;
        }
    }

    path.d2Sdx2_pre_smooth = cx;
    path.d2Sdy2_pre_smooth = cy;
    if (apply_nonlinearity) {
        path.d2Sdx2 = gaussian_smooth(cx, half_windows);
        path.d2Sdy2 = gaussian_smooth(cy, half_windows);
    } else {
        path.d2Sdx2 = cx;
        path.d2Sdy2 = cy;
    }

    // Path steps for the cumulative integrals.
    std::vector<double> step_x(n, 0.0), step_y(n, 0.0);
    for (std::size_t i = 1; i < n; ++i) {
        step_x[i] = traj.x[i] - traj.x[i - 1];
        step_y[i] = traj.y[i] - traj.y[i - 1];
    }

    path.dSdx = integrate_detrended(path.d2Sdx2, step_x);
    path.dSdy = integrate_detrended(path.d2Sdy2, step_y);

    std::vector<double> slope_flux(n);
    for (std::size_t i = 0; i < n; ++i)
        slope_flux[i] = path.dSdx[i] * step_x[i] + path.dSdy[i] * step_y[i];
    std::vector<double> ones(n, 1.0);
    path.S = integrate_detrended(slope_flux, ones);

    path.validate();
    return path;
}

} // namespace scraperoll
