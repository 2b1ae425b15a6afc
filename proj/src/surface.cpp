#include "scraperoll/surface.hpp"

#include "scraperoll/dsp.hpp"
#include "scraperoll/errors.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <cstring>
#include <fstream>
#include <numbers>
#include <random>

namespace scraperoll {

namespace {

constexpr std::array<char, 4> kSdmMagic = {'S', 'D', 'M', '1'};

double uniform01(std::mt19937_64& rng)
{
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

// Box-Muller on explicitly constructed uniforms; std::normal_distribution is
// implementation-defined and would break cross-stdlib determinism.
class GaussianSource {
public:
    explicit GaussianSource(std::uint64_t seed) : rng_(seed) {}

    double next()
    {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        const double u1 = 1.0 - uniform01(rng_); // (0, 1]
        const double u2 = uniform01(rng_);
        const double mag = std::sqrt(-2.0 * std::log(u1));
        const double ang = 2.0 * std::numbers::pi * u2;
        spare_ = mag * std::sin(ang);
        have_spare_ = true;
        return mag * std::cos(ang);
    }

private:
    std::mt19937_64 rng_;
    double spare_ = 0.0;
    bool have_spare_ = false;
};

template <typename T>
void write_le(std::ostream& os, T value)
{
    unsigned char bytes[sizeof(T)];
    std::memcpy(bytes, &value, sizeof(T));
    os.write(reinterpret_cast<const char*>(bytes), sizeof(T));
}

template <typename T>
bool read_le(std::istream& is, T& value)
{
    unsigned char bytes[sizeof(T)];
    if (!is.read(reinterpret_cast<char*>(bytes), sizeof(T)))
        return false;
    std::memcpy(&value, bytes, sizeof(T));
    return true;
}

} // namespace

void SurfaceDepthMap::validate() const
{
    if (nx < 4 || ny < 4)
        throw ParameterError("depth map needs nx >= 4 and ny >= 4");
    if (!(dx > 0.0) || !(dy > 0.0))
        throw ParameterError("depth map spacing must be positive");
    if (heights.size() != static_cast<std::size_t>(nx) * ny)
        throw ParameterError("depth map height count does not match dimensions");
    for (double h : heights)
        if (!std::isfinite(h))
            throw ParameterError("depth map contains non-finite heights");
}

SurfaceDepthMap generate_fractal_surface(std::uint32_t nx, std::uint32_t ny, double dx,
                                         double spectral_exponent, double rms_height,
                                         std::uint64_t seed)
{
    if (nx < 4 || ny < 4)
        throw ParameterError("generate_fractal_surface: nx and ny must be >= 4");
    if (!(dx > 0.0))
        throw ParameterError("generate_fractal_surface: dx must be positive");
    if (!(rms_height > 0.0))
        throw ParameterError("generate_fractal_surface: rms_height must be positive");
    if (spectral_exponent < 0.0 || spectral_exponent > 4.0)
        throw ParameterError("generate_fractal_surface: spectral_exponent must be in [0, 4]");

    const std::size_t count = static_cast<std::size_t>(nx) * ny;
    std::vector<double> noise(count);
    GaussianSource gauss(seed);
    for (double& v : noise)
        v = gauss.next();

    // Shape white noise with a 1/f^(exponent/2) amplitude filter; filtering in
    // the r2c half-spectrum keeps the field real by construction.
    auto spec = dsp::fft2_real(static_cast<int>(ny), static_cast<int>(nx), noise);
    const int half_nx = static_cast<int>(nx) / 2 + 1;
    for (std::uint32_t ky = 0; ky < ny; ++ky) {
        const double fy = (ky <= ny / 2 ? static_cast<double>(ky)
                                        : static_cast<double>(ky) - static_cast<double>(ny)) /
                          (static_cast<double>(ny) * dx);
        for (int kx = 0; kx < half_nx; ++kx) {
            const double fx = static_cast<double>(kx) / (static_cast<double>(nx) * dx);
            const double f = std::hypot(fx, fy);
            auto& c = spec[static_cast<std::size_t>(ky) * half_nx + kx];
            if (f == 0.0)
                c = 0.0; // no DC offset
            else
                c *= std::pow(f, -0.5 * spectral_exponent);
        }
    }
    auto grid = dsp::ifft2_real(static_cast<int>(ny), static_cast<int>(nx), spec);

    double mean = 0.0;
    for (double v : grid)
        mean += v;
    mean /= static_cast<double>(count);
    double var = 0.0;
    for (double v : grid)
        var += (v - mean) * (v - mean);
    const double stddev = std::sqrt(var / static_cast<double>(count - 1));
    if (!(stddev > 0.0))
        throw DegenerateInputError("generate_fractal_surface: filtered field is constant");
    const double scale = rms_height / stddev;

    SurfaceDepthMap map;
    map.nx = nx;
    map.ny = ny;
    map.dx = dx;
    map.dy = dx;
    map.heights.resize(count);
    for (std::size_t i = 0; i < count; ++i)
        map.heights[i] = static_cast<double>(static_cast<float>((grid[i] - mean) * scale));
    return map;
}

void save_depth_map(const SurfaceDepthMap& map, const std::filesystem::path& path)
{
    map.validate();
    std::ofstream os(path, std::ios::binary);
    if (!os)
        throw IoError("save_depth_map: cannot open " + path.string());
    os.write(kSdmMagic.data(), kSdmMagic.size());
    write_le<std::uint32_t>(os, map.nx);
    write_le<std::uint32_t>(os, map.ny);
    write_le<double>(os, map.dx);
    write_le<double>(os, map.dy);
    for (double h : map.heights)
        write_le<float>(os, static_cast<float>(h));
    if (!os)
        throw IoError("save_depth_map: write failed for " + path.string());
}

SurfaceDepthMap load_depth_map(const std::filesystem::path& path)
{
    std::ifstream is(path, std::ios::binary);
    if (!is)
        throw IoError("load_depth_map: cannot open " + path.string());
    std::array<char, 4> magic{};
    if (!is.read(magic.data(), magic.size()))
        throw FormatError("load_depth_map: file shorter than magic");
    if (magic != kSdmMagic)
        throw FormatError("load_depth_map: bad magic, expected SDM1");

    SurfaceDepthMap map;
    if (!read_le(is, map.nx) || !read_le(is, map.ny) || !read_le(is, map.dx) ||
        !read_le(is, map.dy))
        throw FormatError("load_depth_map: truncated header");

    const std::size_t count = static_cast<std::size_t>(map.nx) * map.ny;
    map.heights.resize(count);
    for (std::size_t i = 0; i < count; ++i) {
        float h = 0.0f;
        if (!read_le(is, h))
            throw FormatError("load_depth_map: truncated payload, expected " +
                              std::to_string(count) + " heights, got " + std::to_string(i));
        map.heights[i] = static_cast<double>(h);
    }
    try {
        map.validate();
    } catch (const ParameterError& e) {
        throw FormatError(std::string("load_depth_map: ") + e.what());
    }
    return map;
}

namespace {

// Bilinear interpolation with periodic wrap. Coordinates that land within
// 1e-9 of a grid node are snapped so node queries reproduce stored heights.
double interp_height(const SurfaceDepthMap& map, double x, double y)
{
    double u = x / map.dx;
    double v = y / map.dy;
    const double nxd = static_cast<double>(map.nx);
    const double nyd = static_cast<double>(map.ny);
    u = std::fmod(u, nxd);
    if (u < 0.0)
        u += nxd;
    if (u >= nxd)
        u = 0.0;
    v = std::fmod(v, nyd);
    if (v < 0.0)
        v += nyd;
    if (v >= nyd)
        v = 0.0;

    auto split = [](double t, std::uint32_t n, std::uint32_t& i0, std::uint32_t& i1, double& frac) {
        double fl = std::floor(t);
        frac = t - fl;
        if (frac < 1e-9)
            frac = 0.0;
        else if (frac > 1.0 - 1e-9) {
            frac = 0.0;
            fl += 1.0;
        }
        i0 = static_cast<std::uint32_t>(fl) % n;
        i1 = (i0 + 1) % n;
    };

    std::uint32_t ix0, ix1, iy0, iy1;
    double fx, fy;
    split(u, map.nx, ix0, ix1, fx);
    split(v, map.ny, iy0, iy1, fy);

    const double h00 = map.at(ix0, iy0);
    const double h10 = map.at(ix1, iy0);
    const double h01 = map.at(ix0, iy1);
    const double h11 = map.at(ix1, iy1);
    return (1.0 - fx) * (1.0 - fy) * h00 + fx * (1.0 - fy) * h10 + (1.0 - fx) * fy * h01 +
           fx * fy * h11;
}

} // namespace

SurfaceSample sample_surface(const SurfaceDepthMap& map, double x, double y)
{
    // Callers validate the map once; sampling runs at audio rate.
    const double zc = interp_height(map, x, y);
    const double zxp = interp_height(map, x + map.dx, y);
    const double zxm = interp_height(map, x - map.dx, y);
    const double zyp = interp_height(map, x, y + map.dy);
    const double zym = interp_height(map, x, y - map.dy);

    SurfaceSample s;
    s.z = zc;
    s.dzdx = (zxp - zxm) / (2.0 * map.dx);
    s.dzdy = (zyp - zym) / (2.0 * map.dy);
    s.d2zdx2 = (zxp - 2.0 * zc + zxm) / (map.dx * map.dx);
    s.d2zdy2 = (zyp - 2.0 * zc + zym) / (map.dy * map.dy);
    return s;
}

} // namespace scraperoll
