#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "scraperoll/contact.hpp"
#include "scraperoll/errors.hpp"
#include "scraperoll/force.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

using namespace scraperoll;

namespace {

constexpr double kPi = std::numbers::pi;

ContactPathSignals make_path(std::size_t n, double sample_rate)
{
    ContactPathSignals path;
    path.sample_rate = sample_rate;
    path.S.assign(n, 0.0);
    path.dSdx.assign(n, 0.0);
    path.dSdy.assign(n, 0.0);
    path.d2Sdx2.assign(n, 0.0);
    path.d2Sdy2.assign(n, 0.0);
    path.alpha_x.assign(n, 0.05);
    path.alpha_y.assign(n, 0.05);
    path.d2Sdx2_pre_smooth.assign(n, 0.0);
    path.d2Sdy2_pre_smooth.assign(n, 0.0);
    return path;
}

MotionTrajectory make_traj(std::size_t n, double sample_rate, double vx, double vy)
{
    MotionTrajectory traj;
    traj.sample_rate = sample_rate;
    traj.x.resize(n);
    traj.y.resize(n);
    traj.vx.assign(n, vx);
    traj.vy.assign(n, vy);
    traj.normal_force.assign(n, 1.0);
    for (std::size_t i = 0; i < n; ++i) {
        traj.x[i] = vx * static_cast<double>(i) / sample_rate;
        traj.y[i] = vy * static_cast<double>(i) / sample_rate;
    }
    return traj;
}

ContactPathSignals randomized_path(std::size_t n, double sample_rate, std::uint32_t seed)
{
    std::mt19937 rng(seed);
    std::uniform_real_distribution<double> slope(-0.05, 0.05), curv(-100.0, 100.0);
    auto path = make_path(n, sample_rate);
    for (std::size_t i = 0; i < n; ++i) {
        path.dSdx[i] = slope(rng);
        path.dSdy[i] = slope(rng);
        path.d2Sdx2[i] = curv(rng);
        path.d2Sdy2[i] = curv(rng);
    }
    return path;
}

} // namespace

TEST_CASE("vertical force vanishes for a stationary scraper or flat path")
{
    auto path = make_path(256, 44100.0);
    auto traj = make_traj(256, 44100.0, 0.0, 0.0);
    for (std::size_t i = 0; i < 256; ++i)
        path.d2Sdx2[i] = 50.0;
    for (double f : vertical_force(path, traj, 0.1))
        CHECK(f == 0.0);

    path = make_path(256, 44100.0); // flat: zero curvature
    traj = make_traj(256, 44100.0, 0.4, 0.2);
    for (double f : vertical_force(path, traj, 0.1))
        CHECK(f == 0.0);
}

TEST_CASE("vertical force matches the scalar oracle")
{
    auto path = make_path(16, 44100.0);
    std::fill(path.d2Sdx2.begin(), path.d2Sdx2.end(), 50.0);
    const auto traj = make_traj(16, 44100.0, 0.3, 0.0);
    const auto f = vertical_force(path, traj, 0.1);

    const long double expected = 0.1L * (50.0L * 0.3L * 0.3L);
    for (double v : f) {
        CHECK(v == doctest::Approx(static_cast<double>(expected)).epsilon(1e-12));
        CHECK(v == doctest::Approx(0.45).epsilon(1e-12));
    }
}

TEST_CASE("horizontal force: zero slopes, scalar oracle, velocity sign symmetry")
{
    const ScrapeParams p; // beta1 = 0.05, beta2 = 1
    auto path = make_path(16, 44100.0);
    auto traj = make_traj(16, 44100.0, 1.0, 0.0);
    for (double f : horizontal_force(path, traj, p))
        CHECK(f == 0.0);

    std::fill(path.dSdx.begin(), path.dSdx.end(), 0.02);
    const auto f = horizontal_force(path, traj, p);
    for (double v : f)
        CHECK(v == doctest::Approx(0.001).epsilon(1e-12));

    auto negated = traj;
    for (std::size_t i = 0; i < negated.size(); ++i) {
        negated.vx[i] = -negated.vx[i];
        negated.vy[i] = -negated.vy[i];
    }
    const auto f_neg = horizontal_force(path, negated, p);
    for (std::size_t i = 0; i < f.size(); ++i)
        CHECK(f[i] == f_neg[i]);
}

TEST_CASE("horizontal force is never negative")
{
    const ScrapeParams p;
    std::mt19937 rng(5);
    std::uniform_real_distribution<double> v(-2.0, 2.0);
    auto path = randomized_path(1024, 44100.0, 77);
    auto traj = make_traj(1024, 44100.0, 0.0, 0.0);
    for (std::size_t i = 0; i < traj.size(); ++i) {
        traj.vx[i] = v(rng);
        traj.vy[i] = v(rng);
    }
    for (double f : horizontal_force(path, traj, p))
        REQUIRE(f >= 0.0);
}

TEST_CASE("total scrape force is the exact sum of its parts")
{
    const ScrapeParams p;
    const auto path = randomized_path(2048, 44100.0, 11);
    auto traj = make_traj(2048, 44100.0, 0.0, 0.0);
    std::mt19937 rng(13);
    std::uniform_real_distribution<double> v(-1.0, 1.0);
    for (std::size_t i = 0; i < traj.size(); ++i) {
        traj.vx[i] = v(rng);
        traj.vy[i] = v(rng);
    }
    const auto fv = vertical_force(path, traj, p.scraper_mass);
    const auto fh = horizontal_force(path, traj, p);
    const auto total = total_scrape_force(path, traj, p);
    for (std::size_t i = 0; i < total.size(); ++i)
        CHECK(total.samples[i] == fv[i] + fh[i]);
}

TEST_CASE("doubling velocities doubles f_h and quadruples f_v")
{
    const ScrapeParams p; // beta2 = 1
    const auto path = randomized_path(512, 44100.0, 21);
    auto traj = make_traj(512, 44100.0, 0.31, -0.17);
    auto doubled = traj;
    for (std::size_t i = 0; i < traj.size(); ++i) {
        doubled.vx[i] = 2.0 * traj.vx[i];
        doubled.vy[i] = 2.0 * traj.vy[i];
    }
    const auto fh1 = horizontal_force(path, traj, p);
    const auto fh2 = horizontal_force(path, doubled, p);
    const auto fv1 = vertical_force(path, traj, p.scraper_mass);
    const auto fv2 = vertical_force(path, doubled, p.scraper_mass);
    for (std::size_t i = 0; i < traj.size(); ++i) {
        CHECK(fh2[i] == 2.0 * fh1[i]);
        CHECK(fv2[i] == 4.0 * fv1[i]);
    }
}

TEST_CASE("length mismatches are parameter errors")
{
    const auto path = make_path(100, 44100.0);
    const auto traj = make_traj(101, 44100.0, 0.1, 0.0);
    CHECK_THROWS_AS(vertical_force(path, traj, 0.1), ParameterError);
    CHECK_THROWS_AS(horizontal_force(path, traj, ScrapeParams{}), ParameterError);
}

TEST_CASE("rolling center-of-mass position")
{
    CHECK(rolling_com_position(0.0, 0.05, 0.001) == 0.0);
    CHECK(rolling_com_position(kPi, 0.05, 0.001) ==
          doctest::Approx(0.05 * kPi).epsilon(1e-12));

    const double x = rolling_com_position(kPi / 2.0, 0.05, 0.001);
    const long double expected = 0.05L * (3.14159265358979323846264338328L / 2.0L) - 0.001L;
    CHECK(x == doctest::Approx(static_cast<double>(expected)).epsilon(1e-12));
    CHECK(x == doctest::Approx(0.077539816339744827).epsilon(1e-12));

    CHECK_THROWS_AS(rolling_com_position(1.0, 0.05, 0.06), ParameterError);
}

TEST_CASE("penetration: no eccentricity on a flat surface is constant")
{
    const auto roll = make_roll_motion(0.05, 0.0, 0.2, 0.0, 10.0, 0.5, 44100.0);
    const auto path = make_path(roll.theta.size(), 44100.0);
    const auto pen = penetration(path, roll, 1e-4);
    for (std::size_t i = 0; i < pen.rho.size(); ++i) {
        CHECK(pen.rho[i] == doctest::Approx(1e-4).epsilon(1e-12));
        CHECK(std::abs(pen.rho_dot[i]) < 1e-12);
    }
}

TEST_CASE("penetration: eccentric rolling sweeps a 2r peak-to-peak depth")
{
    const double r = 0.001;
    const auto roll = make_roll_motion(0.05, r, 0.2, 0.0, 2.0 * kPi, 1.2, 44100.0);
    const auto path = make_path(roll.theta.size(), 44100.0);
    const auto pen = penetration(path, roll); // rho_static defaults to r

    const auto [lo, hi] = std::minmax_element(pen.rho.begin(), pen.rho.end());
    CHECK(*hi - *lo == doctest::Approx(2.0 * r).epsilon(0.01));

    // Periodic at the rotation period.
    const std::size_t period = 44100;
    REQUIRE(pen.rho.size() >= period + 1);
    CHECK(std::abs(pen.rho[0] - pen.rho[period]) < 1e-6 * 2.0 * r);
}

TEST_CASE("rolling force: contact loss, pure elasticity, scalar oracle")
{
    RollParams p;
    p.spring_k = 1e6;
    p.lambda = 0.1;

    const std::vector<double> zero{0.0, 0.0};
    const std::vector<double> zero_dot{0.0, 0.0};
    for (double f : rolling_force(zero, zero_dot, p))
        CHECK(f == 0.0);

    const std::vector<double> rho{1e-4};
    const std::vector<double> still{0.0};
    CHECK(rolling_force(rho, still, p)[0] ==
          doctest::Approx(1e6 * std::pow(1e-4, 1.5)).epsilon(1e-12));

    const std::vector<double> moving{0.01};
    const long double expected =
        1e6L * std::pow(1e-4L, 1.5L) + 0.1L * std::pow(1e-4L, 1.5L) * 0.01L;
    CHECK(rolling_force(rho, moving, p)[0] ==
          doctest::Approx(static_cast<double>(expected)).epsilon(1e-12));
    CHECK(rolling_force(rho, moving, p)[0] == doctest::Approx(1.000000001).epsilon(1e-12));

    const std::vector<double> negative{-1e-5};
    CHECK_THROWS_AS(rolling_force(negative, still, p), ParameterError);
}

TEST_CASE("total rolling force: term isolation and exact sum")
{
    RollParams rp;
    rp.spring_k = 1e6;
    rp.lambda = 0.1;
    ScrapeParams sp;
    sp.scraper_mass = 0.2;

    // r = 0, flat surface, rho_static = 0: silence.
    {
        const auto roll = make_roll_motion(0.05, 0.0, 0.2, 0.0, 10.0, 0.25, 44100.0);
        const auto path = make_path(roll.theta.size(), 44100.0);
        RollParams quiet = rp;
        quiet.rho_static = 0.0;
        const auto f = total_rolling_force(path, roll, sp, quiet);
        for (double v : f.samples)
            CHECK(v == 0.0);
    }

    // Flat surface with eccentricity: the rolling term is everything.
    {
        const auto roll = make_roll_motion(0.05, 0.001, 0.2, 0.0, 10.0, 0.25, 44100.0);
        const auto path = make_path(roll.theta.size(), 44100.0);
        const auto f = total_rolling_force(path, roll, sp, rp);
        const auto pen = penetration(path, roll, rp.rho_static);
        const auto f_roll = rolling_force(pen.rho, pen.rho_dot, rp);
        for (std::size_t i = 0; i < f.size(); ++i)
            CHECK(f.samples[i] == f_roll[i]);
    }

    // Random path signals: total equals the three-term sum bit-exactly.
    {
        const auto roll = make_roll_motion(0.05, 0.001, 0.2, 0.05, 10.0, 0.25, 44100.0);
        auto path = randomized_path(roll.theta.size(), 44100.0, 31);
        const auto f = total_rolling_force(path, roll, sp, rp);
        const auto pen = penetration(path, roll, rp.rho_static);
        const auto f_roll = rolling_force(pen.rho, pen.rho_dot, rp);

        std::vector<double> x(roll.theta.size());
        for (std::size_t i = 0; i < x.size(); ++i)
            x[i] = rolling_com_position(roll.theta[i], roll.radius, roll.com_offset);
        for (std::size_t i = 0; i < f.size(); ++i) {
            const std::size_t lo = i == 0 ? 0 : i - 1;
            const std::size_t hi = i + 1 == x.size() ? i : i + 1;
            const double v = (x[hi] - x[lo]) * 44100.0 / static_cast<double>(hi - lo);
            const double expected = sp.beta1 * std::abs(path.dSdx[i] * v) +
                                    sp.scraper_mass * path.d2Sdx2[i] * v * v + f_roll[i];
            REQUIRE(f.samples[i] == expected);
        }
    }
}

TEST_CASE("rolling force spectrum peaks at the rotation frequency")
{
    const double omega = 8.0 * kPi; // 4 Hz
    const auto roll = make_roll_motion(0.05, 0.001, 0.2, 0.0, omega, 2.0, 44100.0);
    const auto path = make_path(roll.theta.size(), 44100.0);
    RollParams rp;
    rp.spring_k = 1e6;
    const auto f = total_rolling_force(path, roll, ScrapeParams{}, rp);

    // Coarse DFT probe: compare energy at the rotation frequency against a
    // sweep of other frequencies.
    auto probe = [&](double freq) {
        double re = 0.0, im = 0.0;
        double mean = 0.0;
        for (double v : f.samples)
            mean += v;
        mean /= static_cast<double>(f.size());
        for (std::size_t i = 0; i < f.size(); ++i) {
            const double phase = 2.0 * kPi * freq * static_cast<double>(i) / 44100.0;
            re += (f.samples[i] - mean) * std::cos(phase);
            im += (f.samples[i] - mean) * std::sin(phase);
        }
        return std::hypot(re, im);
    };
    const double rotation_hz = omega / (2.0 * kPi);
    const double at_rotation = probe(rotation_hz);
    for (double freq : {1.0, 2.0, 3.0, 5.5, 6.0, 7.0, 11.0, 17.0})
        CHECK(at_rotation > probe(freq));
}

TEST_CASE("force signals stay finite over random scenarios")
{
    std::mt19937 rng(4242);
    std::uniform_real_distribution<double> v(-3.0, 3.0);
    for (int trial = 0; trial < 20; ++trial) {
        const auto path = randomized_path(512, 44100.0, 5000 + trial);
        auto traj = make_traj(512, 44100.0, 0.0, 0.0);
        for (std::size_t i = 0; i < traj.size(); ++i) {
            traj.vx[i] = v(rng);
            traj.vy[i] = v(rng);
        }
        const auto f = total_scrape_force(path, traj, ScrapeParams{});
        for (double s : f.samples)
            REQUIRE(std::isfinite(s));
    }
}
