#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

namespace scraperoll {

/// 2D grid of surface heights z(x,y), the micro-geometry that drives the
/// contact force. Row-major, y outer, x inner. Immutable by convention once
/// built; sampling is pure and safe for concurrent readers.
///
/// Height values are kept f32-representable so that SDM1 round trips are
/// bit-exact; all arithmetic on them is done in double.
struct SurfaceDepthMap {
    std::vector<double> heights;
    std::uint32_t nx = 0;
    std::uint32_t ny = 0;
    double dx = 0.0; // meters per sample in x
    double dy = 0.0; // meters per sample in y

    double at(std::uint32_t ix, std::uint32_t iy) const
    {
        return heights[static_cast<std::size_t>(iy) * nx + ix];
    }

    // Throws ParameterError if dimensions, spacings, or values are invalid.
    void validate() const;
};

/// Height and derivatives of the interpolated height field at one point.
struct SurfaceSample {
    double z = 0.0;      // meters
    double dzdx = 0.0;   // dimensionless slope
    double dzdy = 0.0;
    double d2zdx2 = 0.0; // 1/m
    double d2zdy2 = 0.0;
};

/// Procedural stand-in for measured surface scans: zero-mean heights whose
/// radially averaged power spectrum follows 1/f^spectral_exponent, rescaled so
/// the sample standard deviation equals rms_height. Deterministic per seed.
/// dy is set equal to dx.
SurfaceDepthMap generate_fractal_surface(std::uint32_t nx, std::uint32_t ny, double dx,
                                         double spectral_exponent, double rms_height,
                                         std::uint64_t seed);

// SDM1 container: magic "SDM1", u32 nx, u32 ny, f64 dx, f64 dy (little endian),
// then nx*ny little-endian f32 heights, row-major (y outer, x inner).
void save_depth_map(const SurfaceDepthMap& map, const std::filesystem::path& path);
SurfaceDepthMap load_depth_map(const std::filesystem::path& path);

/// Bilinear height sample plus first/second derivatives by central differences
/// of the interpolated field at step dx (resp. dy). Coordinates wrap
/// periodically, so every (x, y) is valid.
SurfaceSample sample_surface(const SurfaceDepthMap& map, double x, double y);

} // namespace scraperoll
