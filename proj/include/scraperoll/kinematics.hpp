#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

namespace scraperoll {

/// Time series of the macroscopic contact-point motion: positions, velocities,
/// and the normal force pressing the objects together. All series share one
/// length and sample rate; N(t) must stay positive (contact is never lost).
struct MotionTrajectory {
    double sample_rate = 0.0;
    std::vector<double> x;  // meters
    std::vector<double> y;  // meters
    std::vector<double> vx; // m/s
    std::vector<double> vy; // m/s
    std::vector<double> normal_force; // newtons

    std::size_t size() const { return x.size(); }
    double duration() const
    {
        return sample_rate > 0.0 ? static_cast<double>(x.size()) / sample_rate : 0.0;
    }

    void validate() const;
};

/// Hand-held cylinder scraping back and forth, approximated as simple
/// harmonic motion. Feeds the normal-force bounds.
struct ShmParams {
    double mass = 0.1;        // kg
    double gravity = 9.81;    // m/s^2
    double omega = 0.0;       // rad/s, angular frequency of the motion
    double amplitude = 0.0;   // L, meters
    double angle = 0.0;       // theta, cylinder angle from horizontal, radians
    double friction = 0.0;    // mu

    void validate() const;
};

struct NormalForceBounds {
    double n_min = 0.0;
    double n_max = 0.0;
};

/// Normal forces at the two ends of an SHM scrape:
///   N_max = (m g + w^2 m L tan(theta)) / (1 - mu tan(theta))
///   N_min = (m g - w^2 m L tan(theta)) / (1 - mu tan(theta))
/// Throws SingularityError when mu tan(theta) >= 1 and ContactLossError when
/// N_min would be non-positive.
NormalForceBounds normal_force_bounds(const ShmParams& p);

enum class MotionKind {
    BackAndForth,
    Circular,
    SingleLineShort,
    SingleLineLong,
    FourScrapesLine,
};

/// Analytic ideal trajectories for the scraping motions. BackAndForth is
/// x = (extent/2) sin(w t); Circular traces a circle of circumference `extent`
/// at constant speed; line kinds use raised-cosine (rest-to-rest) speed
/// profiles. speed_scale multiplies the angular frequency of periodic kinds
/// and compresses the active stroke of line kinds. N(t) is filled from the
/// SHM bounds via normal_force_profile.
MotionTrajectory make_scrape_motion(MotionKind kind, double speed_scale, double duration,
                                    double sample_rate, const ShmParams& shm, double extent);

/// The SHM parameters the motion actually realizes: periodic kinds run at
/// omega * speed_scale. Force bounds must be computed from this.
ShmParams effective_shm(const ShmParams& shm, MotionKind kind, double speed_scale);

/// Signed projection of the positions onto the motion's principal axis,
/// oriented canonically (first nonzero component positive).
std::vector<double> principal_axis_projection(const MotionTrajectory& traj);

/// Position along the principal axis rescaled to [0, 1]; used to index
/// location-dependent impulse responses.
std::vector<double> normalized_axis_position(const MotionTrajectory& traj);

/// Fills N(t) by linear interpolation along the torso axis: maximal at the
/// near end of the trajectory and minimal at the far end.
MotionTrajectory normal_force_profile(MotionTrajectory traj, const NormalForceBounds& bounds);

/// Rotation of a ball whose center of mass sits `com_offset` from the
/// geometric center; theta is the angular displacement of the ball.
struct RollMotion {
    double radius = 0.0;     // R, meters
    double com_offset = 0.0; // r, meters
    double mass = 0.0;       // kg
    double sample_rate = 0.0;
    std::vector<double> theta; // rad
    std::vector<double> omega; // rad/s

    void validate() const;
};

/// Constant angular acceleration a = -g sin(incline) / R integrated from
/// initial_omega: rolling up the incline decelerates, rolling down accelerates.
RollMotion make_roll_motion(double radius, double com_offset, double mass,
                            double surface_incline, double initial_omega, double duration,
                            double sample_rate, double gravity = 9.81);

/// Support force for the eccentric center of mass circling the geometric
/// center: N = m (g + r w^2 cos(theta)), clamped below at 0.05 m g.
std::vector<double> rolling_normal_profile(const RollMotion& roll, double gravity = 9.81);

// Trajectory text files: one "t,x,y" row per line, SI units, optional
// "#"-prefixed header lines. Positions are resampled to sample_rate by linear
// interpolation; velocities come from central differences; N(t) is constant.
MotionTrajectory load_trajectory(const std::filesystem::path& path, double sample_rate,
                                 double constant_normal_force);
void save_trajectory(const MotionTrajectory& traj, const std::filesystem::path& path);

} // namespace scraperoll
