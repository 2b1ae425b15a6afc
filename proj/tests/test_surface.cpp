#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "scraperoll/errors.hpp"
#include "scraperoll/surface.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <random>
#include <vector>

using namespace scraperoll;
namespace fs = std::filesystem;

namespace {

fs::path temp_file(const char* name)
{
    return fs::temp_directory_path() / name;
}

// Independent lag-1 autocorrelation estimate, scanning within rows only.
double lag1_autocorrelation(const SurfaceDepthMap& map)
{
    double mean = 0.0;
    for (double h : map.heights)
        mean += h;
    mean /= static_cast<double>(map.heights.size());
    double num = 0.0, den = 0.0;
    for (std::uint32_t j = 0; j < map.ny; ++j) {
        for (std::uint32_t i = 0; i < map.nx; ++i) {
            const double a = map.at(i, j) - mean;
            den += a * a;
            if (i + 1 < map.nx)
                num += a * (map.at(i + 1, j) - mean);
        }
    }
    return num / den;
}

SurfaceDepthMap constant_map(std::uint32_t nx, std::uint32_t ny, double dx, double value)
{
    SurfaceDepthMap map;
    map.nx = nx;
    map.ny = ny;
    map.dx = dx;
    map.dy = dx;
    map.heights.assign(static_cast<std::size_t>(nx) * ny, value);
    return map;
}

} // namespace

TEST_CASE("fractal surface: zero mean and exact rms")
{
    const auto map = generate_fractal_surface(64, 64, 5.6e-6, 2.0, 1e-5, 7);
    double mean = 0.0;
    for (double h : map.heights)
        mean += h;
    mean /= static_cast<double>(map.heights.size());
    CHECK(std::abs(mean) < 1e-12);

    double var = 0.0;
    for (double h : map.heights)
        var += (h - mean) * (h - mean);
    const double stddev = std::sqrt(var / static_cast<double>(map.heights.size() - 1));
    CHECK(std::abs(stddev - 1e-5) < 1e-9);
}

TEST_CASE("fractal surface: deterministic per seed")
{
    const auto a = generate_fractal_surface(64, 64, 5.6e-6, 2.0, 1e-5, 7);
    const auto b = generate_fractal_surface(64, 64, 5.6e-6, 2.0, 1e-5, 7);
    REQUIRE(a.heights.size() == b.heights.size());
    for (std::size_t i = 0; i < a.heights.size(); ++i)
        CHECK(a.heights[i] == b.heights[i]);

    const auto c = generate_fractal_surface(64, 64, 5.6e-6, 2.0, 1e-5, 8);
    bool any_different = false;
    for (std::size_t i = 0; i < a.heights.size(); ++i)
        any_different |= a.heights[i] != c.heights[i];
    CHECK(any_different);
}

TEST_CASE("fractal surface: exponent 0 gives white heights")
{
    for (std::uint64_t seed = 0; seed < 12; ++seed) {
        const auto map = generate_fractal_surface(64, 64, 5.6e-6, 0.0, 1e-5, seed);
        CHECK(std::abs(lag1_autocorrelation(map)) < 0.1);
    }
    // Sanity: a strongly red spectrum is visibly correlated.
    const auto smooth = generate_fractal_surface(64, 64, 5.6e-6, 3.0, 1e-5, 1);
    CHECK(lag1_autocorrelation(smooth) > 0.5);
}

TEST_CASE("fractal surface: doubling rms doubles every height bit-exactly")
{
    const auto a = generate_fractal_surface(48, 32, 5.6e-6, 1.5, 1e-5, 42);
    const auto b = generate_fractal_surface(48, 32, 5.6e-6, 1.5, 2e-5, 42);
    REQUIRE(a.heights.size() == b.heights.size());
    for (std::size_t i = 0; i < a.heights.size(); ++i)
        CHECK(b.heights[i] == 2.0 * a.heights[i]);
}

TEST_CASE("fractal surface: parameter validation")
{
    CHECK_THROWS_AS(generate_fractal_surface(3, 64, 5.6e-6, 2.0, 1e-5, 0), ParameterError);
    CHECK_THROWS_AS(generate_fractal_surface(64, 2, 5.6e-6, 2.0, 1e-5, 0), ParameterError);
    CHECK_THROWS_AS(generate_fractal_surface(64, 64, 5.6e-6, 2.0, 0.0, 0), ParameterError);
    CHECK_THROWS_AS(generate_fractal_surface(64, 64, 5.6e-6, -0.5, 1e-5, 0), ParameterError);
    CHECK_THROWS_AS(generate_fractal_surface(64, 64, 5.6e-6, 4.5, 1e-5, 0), ParameterError);
    CHECK_THROWS_AS(generate_fractal_surface(64, 64, 0.0, 2.0, 1e-5, 0), ParameterError);
}

TEST_CASE("SDM1 round trip is bit-identical")
{
    const auto path = temp_file("roundtrip.sdm1");
    const auto map = generate_fractal_surface(64, 64, 5.6e-6, 2.0, 1e-5, 3);
    save_depth_map(map, path);
    const auto loaded = load_depth_map(path);
    CHECK(loaded.nx == map.nx);
    CHECK(loaded.ny == map.ny);
    CHECK(loaded.dx == map.dx);
    CHECK(loaded.dy == map.dy);
    REQUIRE(loaded.heights.size() == map.heights.size());
    for (std::size_t i = 0; i < map.heights.size(); ++i)
        CHECK(loaded.heights[i] == map.heights[i]);
    fs::remove(path);
}

TEST_CASE("SDM1 loader rejects bad files")
{
    CHECK_THROWS_AS(load_depth_map(temp_file("does_not_exist.sdm1")), IoError);

    const auto bad_magic = temp_file("bad_magic.sdm1");
    {
        std::ofstream os(bad_magic, std::ios::binary);
        os << "XXXXgarbage";
    }
    CHECK_THROWS_AS(load_depth_map(bad_magic), FormatError);
    fs::remove(bad_magic);

    // Header claims 64x64 but only 10 floats of payload follow.
    const auto truncated = temp_file("truncated.sdm1");
    {
        const auto map = generate_fractal_surface(64, 64, 5.6e-6, 2.0, 1e-5, 3);
        save_depth_map(map, truncated);
        fs::resize_file(truncated, 4 + 4 + 4 + 8 + 8 + 10 * 4);
    }
    CHECK_THROWS_AS(load_depth_map(truncated), FormatError);
    fs::remove(truncated);
}

TEST_CASE("sampling a constant grid")
{
    const auto map = constant_map(16, 16, 1e-3, 4.25);
    const auto s = sample_surface(map, 7.3e-3, 5.1e-3);
    CHECK(s.z == doctest::Approx(4.25).epsilon(1e-12));
    CHECK(std::abs(s.dzdx) < 1e-9);
    CHECK(std::abs(s.dzdy) < 1e-9);
    CHECK(std::abs(s.d2zdx2) < 1e-6);
    CHECK(std::abs(s.d2zdy2) < 1e-6);
}

TEST_CASE("sampling a plane gives its slope and zero curvature")
{
    const double dx = 5.6e-6;
    const double a = 0.37;
    SurfaceDepthMap map = constant_map(32, 32, dx, 0.0);
    for (std::uint32_t j = 0; j < map.ny; ++j)
        for (std::uint32_t i = 0; i < map.nx; ++i)
            map.heights[static_cast<std::size_t>(j) * map.nx + i] = a * (i * dx);

    // Interior only: the plane is not periodic, so stay off the wrap seam.
    for (double x : {5.0 * dx, 12.25 * dx, 20.5 * dx}) {
        const auto s = sample_surface(map, x, 9.0 * map.dy);
        CHECK(s.dzdx == doctest::Approx(a).epsilon(1e-9));
        CHECK(std::abs(s.d2zdx2) < 1e-6 * a / dx);
        CHECK(std::abs(s.dzdy) < 1e-9);
    }
}

TEST_CASE("sampling a sinusoid reproduces the analytic second derivative")
{
    const double dx = 5.6e-6;
    const std::uint32_t nx = 64;
    const double wavelength = 16.0 * dx;
    SurfaceDepthMap map = constant_map(nx, 8, dx, 0.0);
    for (std::uint32_t j = 0; j < map.ny; ++j)
        for (std::uint32_t i = 0; i < map.nx; ++i)
            map.heights[static_cast<std::size_t>(j) * map.nx + i] =
                1e-5 * std::sin(2.0 * std::numbers::pi * (i * dx) / wavelength);

    // Curvature probe at the crest x = L/4.
    const double x = wavelength / 4.0;
    const auto s = sample_surface(map, x, 4.0 * map.dy);
    const double k = 2.0 * std::numbers::pi / wavelength;
    const double expected = -k * k * 1e-5;
    CHECK(s.d2zdx2 == doctest::Approx(expected).epsilon(0.02));
}

TEST_CASE("bilinear sampling at grid nodes reproduces stored heights")
{
    const auto map = generate_fractal_surface(32, 24, 5.6e-6, 1.0, 1e-5, 11);
    for (std::uint32_t j = 2; j < map.ny - 2; j += 3)
        for (std::uint32_t i = 2; i < map.nx - 2; i += 5) {
            const auto s = sample_surface(map, i * map.dx, j * map.dy);
            CHECK(s.z == map.at(i, j));
        }
}

TEST_CASE("sampling is linear in the height field")
{
    const auto z1 = generate_fractal_surface(32, 32, 5.6e-6, 1.0, 1e-5, 21);
    const auto z2 = generate_fractal_surface(32, 32, 5.6e-6, 2.5, 2e-5, 22);
    const double a = 1.7, b = -0.4;
    SurfaceDepthMap combined = z1;
    for (std::size_t i = 0; i < combined.heights.size(); ++i)
        combined.heights[i] = a * z1.heights[i] + b * z2.heights[i];

    const double dx = z1.dx;
    const double height_scale = 3e-5;
    const double curvature_scale = 4.0 * height_scale / (dx * dx);
    std::mt19937 rng(99);
    std::uniform_real_distribution<double> pos(2.0 * dx, 29.0 * dx);
    for (int trial = 0; trial < 50; ++trial) {
        const double x = pos(rng), y = pos(rng);
        const auto sc = sample_surface(combined, x, y);
        const auto s1 = sample_surface(z1, x, y);
        const auto s2 = sample_surface(z2, x, y);
        CHECK(std::abs(sc.z - (a * s1.z + b * s2.z)) < 1e-11 * height_scale);
        CHECK(std::abs(sc.dzdx - (a * s1.dzdx + b * s2.dzdx)) < 1e-11 * height_scale / dx);
        CHECK(std::abs(sc.d2zdx2 - (a * s1.d2zdx2 + b * s2.d2zdx2)) < 1e-11 * curvature_scale);
        CHECK(std::abs(sc.d2zdy2 - (a * s1.d2zdy2 + b * s2.d2zdy2)) < 1e-11 * curvature_scale);
    }
}

TEST_CASE("periodic wrap keeps every coordinate valid")
{
    const auto map = generate_fractal_surface(16, 16, 1e-4, 1.5, 1e-5, 5);
    const double span_x = map.nx * map.dx;
    const double span_y = map.ny * map.dy;
    for (double x : {-3.7 * span_x, -0.2 * span_x, 0.0, 2.9 * span_x})
        for (double y : {-1.1 * span_y, 0.5 * span_y, 4.0 * span_y}) {
            const auto s = sample_surface(map, x, y);
            CHECK(std::isfinite(s.z));
            CHECK(std::isfinite(s.d2zdx2));
            // One full period over in x must reproduce the same sample.
            const auto wrapped = sample_surface(map, x + span_x, y);
            CHECK(s.z == doctest::Approx(wrapped.z).epsilon(1e-9));
        }
}
