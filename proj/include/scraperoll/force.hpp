#pragma once

#include "scraperoll/contact.hpp"
#include "scraperoll/kinematics.hpp"

#include <optional>
#include <span>
#include <vector>

namespace scraperoll {

/// Free parameters of the scraping force model.
struct ScrapeParams {
    double scraper_mass = 0.02; // m_p, kg
    double beta1 = 0.05;        // horizontal-force gain
    double beta2 = 1.0;         // horizontal-force exponent

    void validate() const;
};

/// Hertz-like rolling contact parameters.
struct RollParams {
    double spring_k = 0.0; // k, N/m^(3/2)
    double lambda = 0.1;   // dissipation constant
    // Static offset added to the penetration after mean removal; defaults to
    // the ball's center-of-mass offset r when unset.
    std::optional<double> rho_static;

    void validate() const;
};

/// Audio-rate contact force.
struct ForceSignal {
    double sample_rate = 0.0;
    std::vector<double> samples; // newtons

    std::size_t size() const { return samples.size(); }
    double duration() const
    {
        return sample_rate > 0.0 ? static_cast<double>(samples.size()) / sample_rate : 0.0;
    }
    void validate() const;
};

/// f_v(t) = m_p (d2S/dx2 vx^2 + d2S/dy2 vy^2): micro-accelerations of the
/// scraper forced over the constrained trajectory.
std::vector<double> vertical_force(const ContactPathSignals& path, const MotionTrajectory& traj,
                                   double scraper_mass);

/// f_h(t) = beta1 |vx dS/dx + vy dS/dy|^beta2: micro-collisions with steep
/// asperities. Always non-negative.
std::vector<double> horizontal_force(const ContactPathSignals& path, const MotionTrajectory& traj,
                                     const ScrapeParams& p);

/// Scalar sum f_v + f_h.
ForceSignal total_scrape_force(const ContactPathSignals& path, const MotionTrajectory& traj,
                               const ScrapeParams& p);

/// Horizontal position of the center of mass of a rolling eccentric ball:
/// x = R theta - r sin(theta).
double rolling_com_position(double theta, double radius, double com_offset);

struct Penetration {
    std::vector<double> rho;     // meters, clamped at 0
    std::vector<double> rho_dot; // m/s, zeroed where contact is lost
};

/// Penetration depth of the rolling contact. The raw geometric value
/// R - r cos(x/R) + S carries a huge static component, so the mean is removed
/// and rho_static (default r) restores a nominal compression; rho clamps at
/// zero where the ball leaves the surface.
Penetration penetration(const ContactPathSignals& path, const RollMotion& roll,
                        std::optional<double> rho_static = std::nullopt);

/// f_roll = k rho^(3/2) + lambda rho^(3/2) rho_dot.
std::vector<double> rolling_force(std::span<const double> rho, std::span<const double> rho_dot,
                                  const RollParams& p);

/// Scrape-like terms evaluated along the rolling path plus the Hertzian
/// rolling force:
/// f = beta1 |dS/dx v|^beta2 + m_p d2S/dx2 v^2 + f_roll, v = dx/dt.
ForceSignal total_rolling_force(const ContactPathSignals& path, const RollMotion& roll,
                                const ScrapeParams& sp, const RollParams& rp);

} // namespace scraperoll
