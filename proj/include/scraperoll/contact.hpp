#pragma once

#include "scraperoll/kinematics.hpp"
#include "scraperoll/surface.hpp"

#include <span>
#include <vector>

namespace scraperoll {

/// Parameters of the tanh curvature constraint. The limits interpolate with
/// the normal force: light contact (N near N_min) allows curvature up to
/// 1/alpha_max, firm contact up to 1/alpha_min.
struct NonlinearityParams {
    double zeta = 0.95;
    double alpha_max = 0.05;
    double alpha_min = 0.01;
    // Gaussian half-window samples per unit alpha. The default makes the
    // trajectory-average half-window 5 samples when alpha averages
    // (alpha_max + alpha_min)/2 under the default limits.
    double smoothing_gain = 5.0 / (0.5 * (0.05 + 0.01));

    void validate() const;
};

/// The physically constrained scraper trajectory along the motion path and
/// its derivatives, sampled at the trajectory rate. d2Sdx2/d2Sdy2 are the
/// smoothed curvature series the force model consumes; the *_pre_smooth
/// copies keep the constrained-but-unsmoothed values, which obey
/// |c| <= 1/alpha pointwise.
struct ContactPathSignals {
    double sample_rate = 0.0;
    std::vector<double> S;      // meters
    std::vector<double> dSdx;   // dimensionless
    std::vector<double> dSdy;
    std::vector<double> d2Sdx2; // 1/m
    std::vector<double> d2Sdy2;
    std::vector<double> alpha_x;
    std::vector<double> alpha_y;
    std::vector<double> d2Sdx2_pre_smooth;
    std::vector<double> d2Sdy2_pre_smooth;

    std::size_t size() const { return S.size(); }
    void validate() const;
};

/// alpha(N) = (1 - nu) alpha_max + nu alpha_min with
/// nu = ((N - N_min)/(N_max - N_min))^zeta. Monotone non-increasing in N.
/// Equal bounds mean constant force; alpha_max is returned by convention.
double alpha_of_normal_force(double n, double n_min, double n_max, const NonlinearityParams& p);

/// Soft clip of a raw curvature: (1/alpha) tanh(alpha c). Odd, |result| < 1/alpha.
double constrain_curvature(double curvature, double alpha);

/// Truncated Gaussian moving average: sigma = half_window/2, support
/// +-2*half_window, kernel normalized to unit sum, edges reflected.
/// half_window 0 is the identity.
std::vector<double> gaussian_smooth(std::span<const double> series, int half_window);

/// Per-sample variant; half_windows[i] selects the (renormalized) kernel for
/// output sample i.
std::vector<double> gaussian_smooth(std::span<const double> series,
                                    std::span<const int> half_windows);

/// Runs the full trajectory constraint: sample the raw surface derivatives
/// along the motion, apply the force-dependent tanh limit and Gaussian
/// smoothing to the curvatures, then reconstruct slopes and height by path
/// integration with moving-mean detrending (window 1024 samples).
/// apply_nonlinearity=false bypasses both the tanh and the smoothing (the
/// no-nonlinearity ablation).
ContactPathSignals build_contact_path(const SurfaceDepthMap& map, const MotionTrajectory& traj,
                                      const NormalForceBounds& bounds,
                                      const NonlinearityParams& p,
                                      bool apply_nonlinearity = true);

} // namespace scraperoll
