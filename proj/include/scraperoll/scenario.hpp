#pragma once

#include "scraperoll/contact.hpp"
#include "scraperoll/force.hpp"
#include "scraperoll/kinematics.hpp"
#include "scraperoll/render.hpp"

#include <cstdint>
#include <filesystem>
#include <optional>
#include <set>
#include <string>
#include <vector>

namespace scraperoll {

enum class EventKind { Scrape, Roll };

/// One pipeline component switched off for the ablation experiments.
enum class Ablation {
    OnlySurfaceIr,          // force eta = 0
    NoNormalForceVariation, // N(t) pinned to (N_min + N_max)/2
    NoNonlinearity,         // bypass the tanh constraint and smoothing
    ConstantIr,             // first surface anchor everywhere
    OnlyBallIr,             // ball/scraper IR replaces the surface anchors
};

Ablation ablation_from_name(const std::string& name); // ParseError on unknown names
std::string ablation_name(Ablation a);

struct FractalSurfaceSpec {
    std::uint32_t nx = 0;
    std::uint32_t ny = 0;
    double dx = 5.6e-6; // microscope-scale default spacing
    double spectral_exponent = 0.0;
    double rms_height = 0.0;
};

struct MotionSpec {
    MotionKind kind = MotionKind::BackAndForth;
    double speed_scale = 1.0;
    double duration = 0.0; // seconds
    double extent = 0.0;   // meters
};

struct RollSpec {
    double radius = 0.0;
    double com_offset = 0.0;
    double mass = 0.0;
    double incline = 0.0;
    double initial_omega = 0.0;
    double duration = 0.0;
    double gravity = 9.81;
    double spring_k = 0.0;
    double lambda = 0.1;
    std::optional<double> rho_static;
};

/// Full declarative description of one synthesis event, as read from a
/// scenario file. Paths are stored resolved against the scenario's directory.
struct RenderScenario {
    EventKind kind = EventKind::Scrape;
    std::uint64_t seed = 0;
    std::set<Ablation> ablations;

    // surface source (exactly one)
    std::optional<std::filesystem::path> surface_file;
    std::optional<FractalSurfaceSpec> surface_fractal;

    // motion source (exactly one, scrape only)
    std::optional<MotionSpec> motion;
    std::optional<std::filesystem::path> trajectory_file;
    std::optional<double> trajectory_normal_force;

    ShmParams shm;
    bool has_shm = false;

    RollSpec roll;

    NonlinearityParams nonlinearity;
    ScrapeParams scrape;

    std::vector<std::pair<double, std::filesystem::path>> surface_anchors; // (s, .mir)
    std::optional<std::filesystem::path> scraper_ir_file;                  // scrape
    std::optional<std::filesystem::path> ball_ir_file;                     // roll
    double eta = 1.0;

    RenderSettings render;
};

/// Parses and fully validates a scenario file. Unknown keys, duplicate keys,
/// unknown ablation names, and missing required keys are ParseErrors naming
/// the offending key and line; referenced files must exist.
RenderScenario parse_scenario(const std::filesystem::path& path);

/// Canonical text form; parse(serialize(s)) reproduces s.
std::string serialize_scenario(const RenderScenario& s);

struct RunResult {
    AudioBuffer audio; // normalized
    double normalization_scale = 1.0;
    double peak_before = 0.0;
    std::string report_json; // every resolved parameter
};

/// Executes the full pipeline for one scenario. Deterministic per seed.
/// Errors from the stages are rethrown as PipelineError with the stage name.
RunResult run_scenario(const RenderScenario& s);

/// Square grid of response proportions; rows are the true motion, columns the
/// chosen one. Rows of well-formed data sum to 1, but degenerate all-zero
/// comparison matrices are representable.
struct ConfusionMatrix {
    std::size_t n = 0;
    std::vector<double> values; // row-major n x n

    double at(std::size_t row, std::size_t col) const { return values[row * n + col]; }
    void validate() const;
};

/// CSV grid, one row per line, comma separated.
ConfusionMatrix load_confusion_csv(const std::filesystem::path& path);

/// 1 - ||recorded - synth||_F / ||recorded||_F.
double confusion_similarity(const ConfusionMatrix& recorded, const ConfusionMatrix& synth);

} // namespace scraperoll
