#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "oracles.hpp"
#include "scraperoll/errors.hpp"
#include "scraperoll/render.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>

using namespace scraperoll;
namespace fs = std::filesystem;

namespace {

ModalIR single_mode(double f, double a, double d, double t0)
{
    ModalIR ir;
    ir.t0 = t0;
    ir.modes = {{f, a, d}};
    return ir;
}

ModalIR random_bank(std::mt19937& rng, std::size_t n_modes, double t0)
{
    std::uniform_real_distribution<double> gap(120.0, 500.0), amp(0.2, 1.5), dec(2.0, 80.0);
    ModalIR ir;
    ir.t0 = t0;
    double f = 200.0 + gap(rng);
    for (std::size_t i = 0; i < n_modes; ++i) {
        ir.modes.push_back({f, amp(rng), dec(rng)});
        f += gap(rng);
    }
    return ir;
}

IrField two_anchor_field(std::mt19937& rng, std::size_t n_modes, double t0, double eta)
{
    IrField field;
    field.anchors = {{0.0, random_bank(rng, n_modes, t0)}, {1.0, random_bank(rng, n_modes, t0)}};
    field.scraper_ir = random_bank(rng, n_modes, t0);
    field.eta = eta;
    return field;
}

ForceSignal random_force(std::mt19937& rng, std::size_t n, double sample_rate)
{
    std::uniform_real_distribution<double> dist(-1.0, 1.0);
    ForceSignal f;
    f.sample_rate = sample_rate;
    f.samples.resize(n);
    for (double& v : f.samples)
        v = dist(rng);
    return f;
}

std::vector<double> linear_position(std::size_t n)
{
    std::vector<double> s(n);
    for (std::size_t i = 0; i < n; ++i)
        s[i] = n > 1 ? static_cast<double>(i) / static_cast<double>(n - 1) : 0.0;
    return s;
}

} // namespace

TEST_CASE("unit impulse through a single-anchor field reproduces the anchor IR")
{
    const double sr = 44100.0;
    RenderSettings settings;
    settings.sample_rate = sr;
    settings.t0 = 0.1;

    IrField field;
    field.anchors = {{0.0, single_mode(700.0, 1.0, 12.0, settings.t0)}};
    field.eta = 0.0;

    ForceSignal force;
    force.sample_rate = sr;
    force.samples.assign(512, 0.0);
    force.samples[0] = 1.0;

    const auto out = render_time_varying(force, field, linear_position(512), settings);
    const auto expected = synthesize_ir(field.anchors[0].second, sr);
    REQUIRE(out.size() == 512 + expected.size());
    double max_err = 0.0, max_ref = 0.0;
    for (std::size_t k = 0; k < expected.size(); ++k) {
        max_err = std::max(max_err, std::abs(out.samples[k] - expected[k]));
        max_ref = std::max(max_ref, std::abs(expected[k]));
    }
    CHECK(max_err <= 1e-10 * max_ref);
    for (std::size_t k = expected.size(); k < out.size(); ++k)
        CHECK(out.samples[k] == 0.0);
}

TEST_CASE("zero force renders silence")
{
    std::mt19937 rng(3);
    RenderSettings settings;
    settings.t0 = 0.05;
    const auto field = two_anchor_field(rng, 4, settings.t0, 0.5);
    ForceSignal force;
    force.sample_rate = settings.sample_rate;
    force.samples.assign(1024, 0.0);
    const auto out = render_time_varying(force, field, linear_position(1024), settings);
    for (double v : out.samples)
        CHECK(v == 0.0);
}

TEST_CASE("time-varying render matches the dense double-loop oracle")
{
    std::mt19937 rng(17);
    RenderSettings settings;
    settings.t0 = 0.05;
    for (int trial = 0; trial < 5; ++trial) {
        const std::size_t t1 = 2048 + (rng() % 2048);
        const auto field = two_anchor_field(rng, 6, settings.t0, 0.8);
        const auto force = random_force(rng, t1, settings.sample_rate);
        const auto pos = linear_position(t1);

        const auto fast = render_time_varying(force, field, pos, settings);
        const auto dense = oracles::dense_render(force, field, pos, settings);
        REQUIRE(fast.size() == dense.size());
        CHECK(oracles::relative_l2(fast.samples, dense) <= 1e-9);
    }
}

TEST_CASE("constant field reduces to a textbook convolution")
{
    std::mt19937 rng(29);
    RenderSettings settings;
    settings.t0 = 0.04;
    for (int trial = 0; trial < 3; ++trial) {
        IrField field;
        field.anchors = {{0.0, random_bank(rng, 5, settings.t0)}};
        field.eta = 0.0;
        const std::size_t t1 = 1500 + (rng() % 1000);
        const auto force = random_force(rng, t1, settings.sample_rate);

        const auto fast = render_time_varying(force, field, linear_position(t1), settings);
        const auto ir = synthesize_ir(field.anchors[0].second, settings.sample_rate);
        const auto expected = oracles::textbook_convolution(force.samples, ir);
        REQUIRE(fast.size() == expected.size());
        CHECK(oracles::relative_l2(fast.samples, expected) <= 1e-12);
    }
}

TEST_CASE("rendering is linear in the force")
{
    std::mt19937 rng(41);
    RenderSettings settings;
    settings.t0 = 0.03;
    const auto field = two_anchor_field(rng, 5, settings.t0, 0.6);
    const std::size_t t1 = 2048;
    const auto f1 = random_force(rng, t1, settings.sample_rate);
    const auto f2 = random_force(rng, t1, settings.sample_rate);
    ForceSignal sum;
    sum.sample_rate = settings.sample_rate;
    sum.samples.resize(t1);
    for (std::size_t i = 0; i < t1; ++i)
        sum.samples[i] = f1.samples[i] + f2.samples[i];

    const auto pos = linear_position(t1);
    const auto y1 = render_time_varying(f1, field, pos, settings);
    const auto y2 = render_time_varying(f2, field, pos, settings);
    const auto ys = render_time_varying(sum, field, pos, settings);
    std::vector<double> combined(ys.size());
    for (std::size_t i = 0; i < combined.size(); ++i)
        combined[i] = y1.samples[i] + y2.samples[i];
    CHECK(oracles::relative_l2(ys.samples, combined) <= 1e-12);
}

TEST_CASE("halving the morph block converges monotonically")
{
    std::mt19937 rng(55);
    RenderSettings settings;
    settings.t0 = 0.04;
    IrField field;
    field.anchors = {{0.0, single_mode(300.0, 1.0, 10.0, settings.t0)},
                     {1.0, single_mode(600.0, 1.0, 10.0, settings.t0)}};
    field.eta = 0.0;
    const std::size_t t1 = 4096;
    const auto force = random_force(rng, t1, settings.sample_rate);
    const auto pos = linear_position(t1);

    auto render_with_block = [&](std::size_t block) {
        RenderSettings s = settings;
        s.morph_block = block;
        return render_time_varying(force, field, pos, s);
    };
    const auto y64 = render_with_block(64);
    const auto y32 = render_with_block(32);
    const auto y16 = render_with_block(16);
    const auto y8 = render_with_block(8);

    auto l2_diff = [](const AudioBuffer& a, const AudioBuffer& b) {
        double acc = 0.0;
        for (std::size_t i = 0; i < a.size(); ++i)
            acc += (a.samples[i] - b.samples[i]) * (a.samples[i] - b.samples[i]);
        return std::sqrt(acc);
    };
    const double d1 = l2_diff(y64, y32);
    const double d2 = l2_diff(y32, y16);
    const double d3 = l2_diff(y16, y8);
    CHECK(d1 > d2);
    CHECK(d2 > d3);
}

TEST_CASE("render output is always finite")
{
    std::mt19937 rng(67);
    RenderSettings settings;
    settings.t0 = 0.02;
    for (int trial = 0; trial < 8; ++trial) {
        const auto field = two_anchor_field(rng, 4, settings.t0, 1.2);
        const std::size_t t1 = 512 + (rng() % 1024);
        const auto force = random_force(rng, t1, settings.sample_rate);
        const auto out = render_time_varying(force, field, linear_position(t1), settings);
        for (double v : out.samples)
            REQUIRE(std::isfinite(v));
    }
}

TEST_CASE("render validates its inputs")
{
    std::mt19937 rng(71);
    RenderSettings settings;
    const auto field = two_anchor_field(rng, 3, settings.t0, 0.5);
    const auto force = random_force(rng, 256, settings.sample_rate);
    CHECK_THROWS_AS(render_time_varying(force, field, linear_position(128), settings),
                    ParameterError);

    std::vector<double> bad_pos(256, 2.0);
    CHECK_THROWS_AS(render_time_varying(force, field, bad_pos, settings), ParameterError);
}

TEST_CASE("normalize scales to the target peak")
{
    AudioBuffer buf;
    buf.sample_rate = 44100.0;
    buf.samples = {0.5, -2.0, 1.0, 0.0};
    const auto result = normalize(buf, 0.5);
    CHECK(result.scale == 0.25);
    CHECK(result.buffer.samples[1] == -0.5);
    double peak = 0.0;
    for (double v : result.buffer.samples)
        peak = std::max(peak, std::abs(v));
    CHECK(peak == 0.5);
}

TEST_CASE("normalize passes silence through and is idempotent")
{
    AudioBuffer silent;
    silent.sample_rate = 44100.0;
    silent.samples.assign(16, 0.0);
    const auto result = normalize(silent, 0.5);
    CHECK(result.scale == 1.0);
    for (double v : result.buffer.samples)
        CHECK(v == 0.0);

    std::mt19937 rng(83);
    std::uniform_real_distribution<double> dist(-3.0, 3.0);
    AudioBuffer buf;
    buf.sample_rate = 44100.0;
    buf.samples.resize(1024);
    for (double& v : buf.samples)
        v = dist(rng);
    const auto once = normalize(buf, 0.5);
    const auto twice = normalize(once.buffer, 0.5);
    CHECK(twice.scale == 1.0);
    for (std::size_t i = 0; i < buf.samples.size(); ++i)
        CHECK(twice.buffer.samples[i] == once.buffer.samples[i]);
}

TEST_CASE("wav round trip stays within the quantization step")
{
    std::mt19937 rng(97);
    std::uniform_real_distribution<double> dist(-1.0, 1.0);
    AudioBuffer buf;
    buf.sample_rate = 44100.0;
    buf.samples.resize(4096);
    for (double& v : buf.samples)
        v = dist(rng);

    const auto path = fs::temp_directory_path() / "roundtrip.wav";
    write_wav(buf, path);
    const auto loaded = read_wav(path);
    CHECK(loaded.sample_rate == buf.sample_rate);
    REQUIRE(loaded.size() == buf.size());
    for (std::size_t i = 0; i < buf.size(); ++i)
        CHECK(std::abs(loaded.samples[i] - buf.samples[i]) <= 1.0 / 32767.0);
    fs::remove(path);
}

TEST_CASE("wav header carries RIFF and WAVE tags")
{
    AudioBuffer buf;
    buf.sample_rate = 44100.0;
    buf.samples.assign(64, 0.25);
    const auto path = fs::temp_directory_path() / "header.wav";
    write_wav(buf, path);

    std::ifstream is(path, std::ios::binary);
    char header[12] = {};
    is.read(header, 12);
    CHECK(std::string(header, 4) == "RIFF");
    CHECK(std::string(header + 8, 4) == "WAVE");
    fs::remove(path);
}

TEST_CASE("wav reader rejects stereo, non-PCM, and missing files")
{
    CHECK_THROWS_AS(read_wav(fs::temp_directory_path() / "missing.wav"), IoError);

    // Hand-built stereo header.
    const auto stereo = fs::temp_directory_path() / "stereo.wav";
    {
        std::ofstream os(stereo, std::ios::binary);
        auto w16 = [&](std::uint16_t v) { os.write(reinterpret_cast<char*>(&v), 2); };
        auto w32 = [&](std::uint32_t v) { os.write(reinterpret_cast<char*>(&v), 4); };
        os.write("RIFF", 4);
        w32(36 + 8);
        os.write("WAVE", 4);
        os.write("fmt ", 4);
        w32(16);
        w16(1);
        w16(2); // stereo
        w32(44100);
        w32(44100 * 4);
        w16(4);
        w16(16);
        os.write("data", 4);
        w32(8);
        w32(0);
        w32(0);
    }
    CHECK_THROWS_AS(read_wav(stereo), FormatError);
    fs::remove(stereo);

    const auto float_fmt = fs::temp_directory_path() / "float.wav";
    {
        std::ofstream os(float_fmt, std::ios::binary);
        auto w16 = [&](std::uint16_t v) { os.write(reinterpret_cast<char*>(&v), 2); };
        auto w32 = [&](std::uint32_t v) { os.write(reinterpret_cast<char*>(&v), 4); };
        os.write("RIFF", 4);
        w32(36 + 4);
        os.write("WAVE", 4);
        os.write("fmt ", 4);
        w32(16);
        w16(3); // IEEE float, not PCM
        w16(1);
        w32(44100);
        w32(44100 * 4);
        w16(4);
        w16(32);
        os.write("data", 4);
        w32(4);
        w32(0);
    }
    CHECK_THROWS_AS(read_wav(float_fmt), FormatError);
    fs::remove(float_fmt);
}

TEST_CASE("wav quantization clamps out-of-range samples")
{
    AudioBuffer buf;
    buf.sample_rate = 44100.0;
    buf.samples = {1.5, -1.5, 1.0, -1.0};
    const auto path = fs::temp_directory_path() / "clamp.wav";
    write_wav(buf, path);
    const auto loaded = read_wav(path);
    CHECK(loaded.samples[0] == doctest::Approx(1.0).epsilon(1e-4));
    CHECK(loaded.samples[1] == doctest::Approx(-32768.0 / 32767.0).epsilon(1e-6));
    fs::remove(path);
}
