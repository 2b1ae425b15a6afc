#include "scraperoll/force.hpp"

#include "scraperoll/errors.hpp"

#include <algorithm>
#include <cmath>

namespace scraperoll {

void ScrapeParams::validate() const
{
    if (!(scraper_mass > 0.0))
        throw ParameterError("ScrapeParams: scraper_mass must be positive");
    if (beta1 < 0.0)
        throw ParameterError("ScrapeParams: beta1 must be non-negative");
    if (!(beta2 > 0.0))
        throw ParameterError("ScrapeParams: beta2 must be positive");
}

void RollParams::validate() const
{
    if (!(spring_k > 0.0))
        throw ParameterError("RollParams: spring_k must be positive");
    if (lambda < 0.0)
        throw ParameterError("RollParams: lambda must be non-negative");
    if (rho_static && *rho_static < 0.0)
        throw ParameterError("RollParams: rho_static must be non-negative");
}

void ForceSignal::validate() const
{
    if (!(sample_rate > 0.0))
        throw ParameterError("ForceSignal: sample_rate must be positive");
    for (double v : samples)
        if (!std::isfinite(v))
            throw ParameterError("ForceSignal: non-finite sample");
}

namespace {

void require_matched(const ContactPathSignals& path, const MotionTrajectory& traj)
{
    if (path.size() != traj.size())
        throw ParameterError("force: contact path and trajectory lengths differ");
    if (path.sample_rate != traj.sample_rate)
        throw ParameterError("force: contact path and trajectory sample rates differ");
}

double signed_power(double magnitude, double exponent)
{
    // pow(x, 1) is exact per IEEE, but stay out of libm for the common case.
    return exponent == 1.0 ? magnitude : std::pow(magnitude, exponent);
}

} // namespace

std::vector<double> vertical_force(const ContactPathSignals& path, const MotionTrajectory& traj,
                                   double scraper_mass)
{
    if (!(scraper_mass > 0.0))
        throw ParameterError("vertical_force: scraper_mass must be positive");
    require_matched(path, traj);
    std::vector<double> f(path.size());
    for (std::size_t i = 0; i < f.size(); ++i)
        f[i] = scraper_mass * (path.d2Sdx2[i] * traj.vx[i] * traj.vx[i] +
                               path.d2Sdy2[i] * traj.vy[i] * traj.vy[i]);
    return f;
}

std::vector<double> horizontal_force(const ContactPathSignals& path, const MotionTrajectory& traj,
                                     const ScrapeParams& p)
{
    p.validate();
    require_matched(path, traj);
    std::vector<double> f(path.size());
    for (std::size_t i = 0; i < f.size(); ++i) {
        const double slope_rate = traj.vx[i] * path.dSdx[i] + traj.vy[i] * path.dSdy[i];
        f[i] = p.beta1 * signed_power(std::abs(slope_rate), p.beta2);
    }
    return f;
}

ForceSignal total_scrape_force(const ContactPathSignals& path, const MotionTrajectory& traj,
                               const ScrapeParams& p)
{
    const auto fv = vertical_force(path, traj, p.scraper_mass);
    const auto fh = horizontal_force(path, traj, p);
    ForceSignal f;
    f.sample_rate = traj.sample_rate;
    f.samples.resize(fv.size());
    for (std::size_t i = 0; i < fv.size(); ++i)
        f.samples[i] = fv[i] + fh[i];
    f.validate();
    return f;
}

double rolling_com_position(double theta, double radius, double com_offset)
{
    if (!(radius > 0.0) || com_offset < 0.0 || com_offset >= radius)
        throw ParameterError("rolling_com_position: need 0 <= com_offset < radius");
    return radius * theta - com_offset * std::sin(theta);
}

Penetration penetration(const ContactPathSignals& path, const RollMotion& roll,
                        std::optional<double> rho_static)
{
    roll.validate();
    if (path.size() != roll.theta.size())
        throw ParameterError("penetration: contact path and roll motion lengths differ");
    const double offset = rho_static.value_or(roll.com_offset);
    if (offset < 0.0)
        throw ParameterError("penetration: rho_static must be non-negative");

    const std::size_t n = path.size();
    std::vector<double> x(n);
    for (std::size_t i = 0; i < n; ++i)
        x[i] = rolling_com_position(roll.theta[i], roll.radius, roll.com_offset);

    std::vector<double> raw(n);
    double mean = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        raw[i] = roll.radius - roll.com_offset * std::cos(x[i] / roll.radius) + path.S[i];
        mean += raw[i];
    }
    mean /= static_cast<double>(n);

    Penetration pen;
    pen.rho.resize(n);
    pen.rho_dot.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        pen.rho[i] = std::max(raw[i] - mean + offset, 0.0);
        const std::size_t lo = i == 0 ? 0 : i - 1;
        const std::size_t hi = i + 1 == n ? i : i + 1;
        const double x_dot = (x[hi] - x[lo]) * roll.sample_rate / static_cast<double>(hi - lo);
        pen.rho_dot[i] = pen.rho[i] == 0.0
                             ? 0.0
                             : (roll.com_offset / roll.radius) * x_dot *
                                       std::sin(x[i] / roll.radius) +
                                   x_dot * path.dSdx[i];
    }
    return pen;
}

std::vector<double> rolling_force(std::span<const double> rho, std::span<const double> rho_dot,
                                  const RollParams& p)
{
    p.validate();
    if (rho.size() != rho_dot.size())
        throw ParameterError("rolling_force: rho and rho_dot lengths differ");
    std::vector<double> f(rho.size());
    for (std::size_t i = 0; i < f.size(); ++i) {
        if (rho[i] < 0.0)
            throw ParameterError("rolling_force: negative penetration");
        const double elastic = rho[i] * std::sqrt(rho[i]); // rho^(3/2)
        f[i] = p.spring_k * elastic + p.lambda * elastic * rho_dot[i];
    }
    return f;
}

ForceSignal total_rolling_force(const ContactPathSignals& path, const RollMotion& roll,
                                const ScrapeParams& sp, const RollParams& rp)
{
    sp.validate();
    const auto pen = penetration(path, roll, rp.rho_static);
    const auto f_roll = rolling_force(pen.rho, pen.rho_dot, rp);

    const std::size_t n = path.size();
    std::vector<double> x(n);
    for (std::size_t i = 0; i < n; ++i)
        x[i] = rolling_com_position(roll.theta[i], roll.radius, roll.com_offset);

    ForceSignal f;
    f.sample_rate = roll.sample_rate;
    f.samples.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        const std::size_t lo = i == 0 ? 0 : i - 1;
        const std::size_t hi = i + 1 == n ? i : i + 1;
        const double v = (x[hi] - x[lo]) * roll.sample_rate / static_cast<double>(hi - lo);
        f.samples[i] = sp.beta1 * signed_power(std::abs(path.dSdx[i] * v), sp.beta2) +
                       sp.scraper_mass * path.d2Sdx2[i] * v * v + f_roll[i];
    }
    f.validate();
    return f;
}

} // namespace scraperoll
