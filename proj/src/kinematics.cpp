#include "scraperoll/kinematics.hpp"

#include "scraperoll/errors.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>
#include <sstream>

namespace scraperoll {

namespace {

std::size_t sample_count(double duration, double sample_rate)
{
    if (!(duration > 0.0) || !(sample_rate > 0.0))
        throw ParameterError("duration and sample_rate must be positive");
    const auto n = static_cast<std::size_t>(std::llround(duration * sample_rate));
    if (n < 2)
        throw ParameterError("trajectory would have fewer than 2 samples");
    return n;
}

} // namespace

void MotionTrajectory::validate() const
{
    const std::size_t n = x.size();
    if (n == 0)
        throw ParameterError("trajectory is empty");
    if (y.size() != n || vx.size() != n || vy.size() != n || normal_force.size() != n)
        throw ParameterError("trajectory series have mismatched lengths");
    if (!(sample_rate > 0.0))
        throw ParameterError("trajectory sample_rate must be positive");
    for (std::size_t i = 0; i < n; ++i) {
        if (!std::isfinite(x[i]) || !std::isfinite(y[i]) || !std::isfinite(vx[i]) ||
            !std::isfinite(vy[i]) || !std::isfinite(normal_force[i]))
            throw ParameterError("trajectory contains non-finite values");
        if (!(normal_force[i] > 0.0))
            throw ParameterError("trajectory normal force must stay positive");
    }
}

void ShmParams::validate() const
{
    if (!(mass > 0.0) || !(omega > 0.0) || !(amplitude > 0.0))
        throw ParameterError("ShmParams: mass, omega, amplitude must be positive");
    if (angle < 0.0 || angle >= std::numbers::pi / 2.0)
        throw ParameterError("ShmParams: angle must lie in [0, pi/2)");
    if (friction < 0.0)
        throw ParameterError("ShmParams: friction must be non-negative");
}

NormalForceBounds normal_force_bounds(const ShmParams& p)
{
    p.validate();
    const double tan_theta = std::tan(p.angle);
    const double denom = 1.0 - p.friction * tan_theta;
    // Within rounding of the pole counts as the pole.
    if (denom <= 1e-12)
        throw SingularityError("normal_force_bounds: mu * tan(theta) >= 1");
    const double mg = p.mass * p.gravity;
    const double drive = p.omega * p.omega * p.mass * p.amplitude * tan_theta;
    NormalForceBounds b;
    b.n_max = (mg + drive) / denom;
    b.n_min = (mg - drive) / denom;
    if (b.n_min <= 0.0)
        throw ContactLossError("normal_force_bounds: N_min <= 0, scraper would leave the surface");
    return b;
}

namespace {

// Single rest-to-rest stroke of length `dist` over `stroke_time`, evaluated at
// local time t (clamped). Raised-cosine speed profile:
//   v(t) = (2 dist / T) * (1 - cos(2 pi t / T)) / 2
//   x(t) = dist * (t/T - sin(2 pi t / T) / (2 pi))
void raised_cosine_stroke(double dist, double stroke_time, double t, double& pos, double& vel)
{
    if (t <= 0.0) {
        pos = 0.0;
        vel = 0.0;
        return;
    }
    if (t >= stroke_time) {
        pos = dist;
        vel = 0.0;
        return;
    }
    const double phase = 2.0 * std::numbers::pi * t / stroke_time;
    pos = dist * (t / stroke_time - std::sin(phase) / (2.0 * std::numbers::pi));
    vel = (dist / stroke_time) * (1.0 - std::cos(phase));
}

} // namespace

ShmParams effective_shm(const ShmParams& shm, MotionKind kind, double speed_scale)
{
    if (!(speed_scale > 0.0))
        throw ParameterError("effective_shm: speed_scale must be positive");
    ShmParams effective = shm;
    if (kind == MotionKind::BackAndForth || kind == MotionKind::Circular)
        effective.omega = shm.omega * speed_scale;
    return effective;
}

MotionTrajectory make_scrape_motion(MotionKind kind, double speed_scale, double duration,
                                    double sample_rate, const ShmParams& shm, double extent)
{
    if (!(extent > 0.0))
        throw ParameterError("make_scrape_motion: extent must be positive");
    if (!(speed_scale > 0.0))
        throw ParameterError("make_scrape_motion: speed_scale must be positive");
    const std::size_t n = sample_count(duration, sample_rate);

    MotionTrajectory traj;
    traj.sample_rate = sample_rate;
    traj.x.resize(n);
    traj.y.assign(n, 0.0);
    traj.vx.resize(n);
    traj.vy.assign(n, 0.0);
    traj.normal_force.assign(n, 1.0); // replaced below

    const ShmParams effective = effective_shm(shm, kind, speed_scale);

    switch (kind) {
    case MotionKind::BackAndForth: {
        const double amp = extent / 2.0;
        for (std::size_t k = 0; k < n; ++k) {
            const double t = static_cast<double>(k) / sample_rate;
            traj.x[k] = amp * std::sin(effective.omega * t);
            traj.vx[k] = amp * effective.omega * std::cos(effective.omega * t);
        }
        break;
    }
    case MotionKind::Circular: {
        const double radius = extent / (2.0 * std::numbers::pi);
        for (std::size_t k = 0; k < n; ++k) {
            const double t = static_cast<double>(k) / sample_rate;
            traj.x[k] = radius * std::sin(effective.omega * t);
            traj.y[k] = -radius * std::cos(effective.omega * t);
            traj.vx[k] = radius * effective.omega * std::cos(effective.omega * t);
            traj.vy[k] = radius * effective.omega * std::sin(effective.omega * t);
        }
        break;
    }
    case MotionKind::SingleLineShort:
    case MotionKind::SingleLineLong: {
        const double stroke_time = duration / speed_scale;
        for (std::size_t k = 0; k < n; ++k) {
            const double t = static_cast<double>(k) / sample_rate;
            raised_cosine_stroke(extent, stroke_time, t, traj.x[k], traj.vx[k]);
        }
        break;
    }
    case MotionKind::FourScrapesLine: {
        const double seg_time = duration / 4.0;
        const double stroke_time = seg_time / speed_scale;
        const double seg_dist = extent / 4.0;
        for (std::size_t k = 0; k < n; ++k) {
            const double t = static_cast<double>(k) / sample_rate;
            const int seg = std::min(3, static_cast<int>(t / seg_time));
            double pos = 0.0, vel = 0.0;
            raised_cosine_stroke(seg_dist, stroke_time, t - seg * seg_time, pos, vel);
            traj.x[k] = seg * seg_dist + pos;
            traj.vx[k] = vel;
        }
        break;
    }
    default:
        throw ParameterError("make_scrape_motion: unknown motion kind");
    }

    return normal_force_profile(std::move(traj), normal_force_bounds(effective));
}

std::vector<double> principal_axis_projection(const MotionTrajectory& traj)
{
    const std::size_t n = traj.size();
    if (n == 0)
        throw ParameterError("principal_axis_projection: empty trajectory");
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        mx += traj.x[i];
        my += traj.y[i];
    }
    mx /= static_cast<double>(n);
    my /= static_cast<double>(n);

    double cxx = 0.0, cxy = 0.0, cyy = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double dx = traj.x[i] - mx;
        const double dy = traj.y[i] - my;
        cxx += dx * dx;
        cxy += dx * dy;
        cyy += dy * dy;
    }

    // Dominant eigenvector of the 2x2 covariance, closed form.
    double ux, uy;
    if (cxy == 0.0) {
        if (cxx >= cyy) {
            ux = 1.0;
            uy = 0.0;
        } else {
            ux = 0.0;
            uy = 1.0;
        }
    } else {
        const double lambda = 0.5 * (cxx + cyy + std::sqrt((cxx - cyy) * (cxx - cyy) + 4.0 * cxy * cxy));
        ux = lambda - cyy;
        uy = cxy;
        const double norm = std::hypot(ux, uy);
        ux /= norm;
        uy /= norm;
    }
    if (ux < 0.0 || (ux == 0.0 && uy < 0.0)) {
        ux = -ux;
        uy = -uy;
    }

    std::vector<double> d(n);
    for (std::size_t i = 0; i < n; ++i)
        d[i] = (traj.x[i] - mx) * ux + (traj.y[i] - my) * uy;
    return d;
}

std::vector<double> normalized_axis_position(const MotionTrajectory& traj)
{
    auto d = principal_axis_projection(traj);
    const auto [lo, hi] = std::minmax_element(d.begin(), d.end());
    const double span = *hi - *lo;
    if (span <= 0.0) {
        std::fill(d.begin(), d.end(), 0.5);
        return d;
    }
    const double dmin = *lo;
    for (double& v : d)
        v = (v - dmin) / span;
    return d;
}

MotionTrajectory normal_force_profile(MotionTrajectory traj, const NormalForceBounds& bounds)
{
    auto d = principal_axis_projection(traj);
    const auto [lo, hi] = std::minmax_element(d.begin(), d.end());
    const double span = *hi - *lo;
    if (span <= 0.0)
        throw DegenerateInputError("normal_force_profile: trajectory has zero extent");
    const double dmin = *lo;
    for (std::size_t i = 0; i < traj.size(); ++i) {
        const double frac = (d[i] - dmin) / span;
        traj.normal_force[i] = bounds.n_max + (bounds.n_min - bounds.n_max) * frac;
    }
    return traj;
}

void RollMotion::validate() const
{
    if (!(radius > 0.0) || com_offset < 0.0 || com_offset >= radius)
        throw ParameterError("RollMotion: need 0 <= com_offset < radius and radius > 0");
    if (!(mass > 0.0))
        throw ParameterError("RollMotion: mass must be positive");
    if (!(sample_rate > 0.0))
        throw ParameterError("RollMotion: sample_rate must be positive");
    if (theta.size() != omega.size() || theta.empty())
        throw ParameterError("RollMotion: series empty or mismatched");
}

RollMotion make_roll_motion(double radius, double com_offset, double mass,
                            double surface_incline, double initial_omega, double duration,
                            double sample_rate, double gravity)
{
    if (initial_omega == 0.0 && surface_incline == 0.0)
        throw DegenerateInputError("make_roll_motion: no rotation and no incline, nothing moves");
    const std::size_t n = sample_count(duration, sample_rate);

    RollMotion roll;
    roll.radius = radius;
    roll.com_offset = com_offset;
    roll.mass = mass;
    roll.sample_rate = sample_rate;
    roll.theta.resize(n);
    roll.omega.resize(n);

    const double accel = -gravity * std::sin(surface_incline) / radius;
    for (std::size_t k = 0; k < n; ++k) {
        const double t = static_cast<double>(k) / sample_rate;
        roll.theta[k] = initial_omega * t + 0.5 * accel * t * t;
        roll.omega[k] = initial_omega + accel * t;
    }
    roll.validate();
    return roll;
}

std::vector<double> rolling_normal_profile(const RollMotion& roll, double gravity)
{
    roll.validate();
    const double floor = 0.05 * roll.mass * gravity;
    std::vector<double> n_force(roll.theta.size());
    for (std::size_t k = 0; k < n_force.size(); ++k) {
        const double w = roll.omega[k];
        const double raw =
            roll.mass * (gravity + roll.com_offset * w * w * std::cos(roll.theta[k]));
        n_force[k] = std::max(raw, floor);
    }
    return n_force;
}

MotionTrajectory load_trajectory(const std::filesystem::path& path, double sample_rate,
                                 double constant_normal_force)
{
    if (!(constant_normal_force > 0.0))
        throw ParameterError("load_trajectory: constant normal force must be positive");
    std::ifstream is(path);
    if (!is)
        throw IoError("load_trajectory: cannot open " + path.string());

    std::vector<double> ts, xs, ys;
    std::string line;
    int line_no = 0;
    while (std::getline(is, line)) {
        ++line_no;
        const auto first = line.find_first_not_of(" \t\r");
        if (first == std::string::npos || line[first] == '#')
            continue;
        double t = 0.0, px = 0.0, py = 0.0;
        char c1 = 0, c2 = 0;
        std::istringstream row(line);
        if (!(row >> t >> c1 >> px >> c2 >> py) || c1 != ',' || c2 != ',')
            throw FormatError("load_trajectory: malformed row at line " + std::to_string(line_no));
        if (!ts.empty() && t <= ts.back())
            throw FormatError("load_trajectory: time column must be strictly increasing (line " +
                              std::to_string(line_no) + ")");
        ts.push_back(t);
        xs.push_back(px);
        ys.push_back(py);
    }
    if (ts.size() < 2)
        throw FormatError("load_trajectory: need at least two rows");

    const double duration = ts.back() - ts.front();
    const std::size_t n = sample_count(duration, sample_rate);

    MotionTrajectory traj;
    traj.sample_rate = sample_rate;
    traj.x.resize(n);
    traj.y.resize(n);
    traj.vx.resize(n);
    traj.vy.resize(n);
    traj.normal_force.assign(n, constant_normal_force);

    std::size_t seg = 0;
    for (std::size_t k = 0; k < n; ++k) {
        const double t = ts.front() + static_cast<double>(k) / sample_rate;
        while (seg + 2 < ts.size() && ts[seg + 1] < t)
            ++seg;
        const double t0 = ts[seg], t1 = ts[seg + 1];
        const double frac = std::clamp((t - t0) / (t1 - t0), 0.0, 1.0);
        traj.x[k] = xs[seg] + frac * (xs[seg + 1] - xs[seg]);
        traj.y[k] = ys[seg] + frac * (ys[seg + 1] - ys[seg]);
    }
    // Central differences, one-sided at the ends.
    for (std::size_t k = 0; k < n; ++k) {
        const std::size_t lo = k == 0 ? 0 : k - 1;
        const std::size_t hi = k + 1 == n ? k : k + 1;
        const double dt = static_cast<double>(hi - lo) / sample_rate;
        traj.vx[k] = (traj.x[hi] - traj.x[lo]) / dt;
        traj.vy[k] = (traj.y[hi] - traj.y[lo]) / dt;
    }
    traj.validate();
    return traj;
}

void save_trajectory(const MotionTrajectory& traj, const std::filesystem::path& path)
{
    traj.validate();
    std::ofstream os(path);
    if (!os)
        throw IoError("save_trajectory: cannot open " + path.string());
    os << "# t,x,y\n";
    char buf[96];
    for (std::size_t k = 0; k < traj.size(); ++k) {
        std::snprintf(buf, sizeof(buf), "%.17g,%.17g,%.17g\n",
                      static_cast<double>(k) / traj.sample_rate, traj.x[k], traj.y[k]);
        os << buf;
    }
    if (!os)
        throw IoError("save_trajectory: write failed for " + path.string());
}

} // namespace scraperoll
