#include "scraperoll/errors.hpp"
#include "scraperoll/kinematics.hpp"
#include "scraperoll/render.hpp"
#include "scraperoll/scenario.hpp"
#include "scraperoll/surface.hpp"

#include <CLI11.hpp>

#include <atomic>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <vector>

namespace fs = std::filesystem;
using namespace scraperoll;

namespace {

// Exit codes: 0 success, 2 parse error, 3 pipeline error, 4 I/O error.
int exit_code_for(const std::exception& e)
{
    if (dynamic_cast<const ParseError*>(&e) || dynamic_cast<const FormatError*>(&e))
        return 2;
    if (dynamic_cast<const IoError*>(&e))
        return 4;
    return 3;
}

unsigned default_workers()
{
    if (const char* env = std::getenv("SCRAPEROLL_WORKERS")) {
        const int v = std::atoi(env);
        if (v > 0)
            return static_cast<unsigned>(v);
    }
    const unsigned hw = std::thread::hardware_concurrency();
    return hw > 0 ? hw : 1;
}

void apply_overrides(RenderScenario& scenario, const std::optional<std::uint64_t>& seed,
                     const std::vector<std::string>& ablate)
{
    if (seed)
        scenario.seed = *seed;
    for (const auto& name : ablate)
        scenario.ablations.insert(ablation_from_name(name));
}

void write_report(const std::string& report_json, const fs::path& path)
{
    std::ofstream os(path);
    if (!os)
        throw IoError("cannot open report file " + path.string());
    os << report_json << "\n";
}

int render_one(const fs::path& scenario_path, const fs::path& out_path,
               const std::optional<std::uint64_t>& seed, const std::vector<std::string>& ablate,
               const std::optional<fs::path>& report_path)
{
    RenderScenario scenario = parse_scenario(scenario_path);
    apply_overrides(scenario, seed, ablate);
    const RunResult result = run_scenario(scenario);
    write_wav(result.audio, out_path);
    if (report_path)
        write_report(result.report_json, *report_path);
    std::printf("wrote %s (%zu samples, peak scale %.6g)\n", out_path.string().c_str(),
                result.audio.samples.size(), result.normalization_scale);
    return 0;
}

int run_batch(const fs::path& in_dir, const fs::path& out_dir,
              const std::optional<std::uint64_t>& seed, const std::vector<std::string>& ablate,
              unsigned workers, const std::optional<fs::path>& report_dir)
{
    if (!fs::is_directory(in_dir))
        throw IoError("batch: not a directory: " + in_dir.string());
    fs::create_directories(out_dir);
    if (report_dir)
        fs::create_directories(*report_dir);

    std::vector<fs::path> files;
    for (const auto& entry : fs::directory_iterator(in_dir))
        if (entry.is_regular_file() && entry.path().extension() == ".srs")
            files.push_back(entry.path());
    std::sort(files.begin(), files.end());
    if (files.empty()) {
        std::fprintf(stderr, "batch: no .srs scenarios in %s\n", in_dir.string().c_str());
        return 2;
    }

    std::atomic<std::size_t> next{0};
    std::atomic<int> worst_exit{0};
    std::mutex io_mutex;
    auto worker = [&] {
        for (;;) {
            const std::size_t i = next.fetch_add(1);
            if (i >= files.size())
                return;
            const fs::path& file = files[i];
            const fs::path out = out_dir / file.stem().replace_extension(".wav");
            try {
                RenderScenario scenario = parse_scenario(file);
                apply_overrides(scenario, seed, ablate);
                const RunResult result = run_scenario(scenario);
                write_wav(result.audio, out);
                if (report_dir)
                    write_report(result.report_json,
                                 *report_dir / file.stem().replace_extension(".json"));
                std::lock_guard lock(io_mutex);
                std::printf("ok   %s -> %s\n", file.filename().string().c_str(),
                            out.string().c_str());
            } catch (const std::exception& e) {
                std::lock_guard lock(io_mutex);
                std::fprintf(stderr, "FAIL %s: %s\n", file.filename().string().c_str(), e.what());
                int expected = 0;
                const int code = exit_code_for(e);
                worst_exit.compare_exchange_strong(expected, code);
            }
        }
    };

    const unsigned n_threads = std::max(1u, std::min<unsigned>(workers, files.size()));
    std::vector<std::thread> pool;
    for (unsigned i = 0; i < n_threads; ++i)
        pool.emplace_back(worker);
    for (auto& t : pool)
        t.join();
    return worst_exit.load();
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"scraperoll: physically based scraping and rolling sound synthesis"};
    app.require_subcommand(1);

    // render
    auto* render_cmd = app.add_subcommand("render", "Render one scenario file to a WAV");
    std::string scenario_arg, out_arg;
    std::optional<std::uint64_t> seed;
    std::vector<std::string> ablate;
    std::optional<fs::path> report_path;
    unsigned workers = default_workers();
    render_cmd->add_option("scenario", scenario_arg, "Scenario file (.srs)")->required();
    render_cmd->add_option("--out", out_arg, "Output WAV path")->required();
    render_cmd->add_option("--seed", seed, "Override the scenario seed");
    render_cmd->add_option("--ablate", ablate, "Ablation flags")->delimiter(',');
    render_cmd->add_option("--workers", workers, "Accepted for symmetry with batch");
    render_cmd->add_option("--report", report_path, "Write the resolved-parameter report (JSON)");

    // batch
    auto* batch_cmd = app.add_subcommand("batch", "Render every .srs scenario in a directory");
    std::string batch_in, batch_out;
    std::optional<fs::path> report_dir;
    batch_cmd->add_option("dir", batch_in, "Directory of .srs scenarios")->required();
    batch_cmd->add_option("--out", batch_out, "Output directory")->required();
    batch_cmd->add_option("--seed", seed, "Override every scenario's seed");
    batch_cmd->add_option("--ablate", ablate, "Ablation flags applied to every scenario")
        ->delimiter(',');
    batch_cmd->add_option("--workers", workers,
                          "Concurrent renders (default: SCRAPEROLL_WORKERS or hardware)");
    batch_cmd->add_option("--report-dir", report_dir, "Write per-scenario JSON reports here");

    // similarity
    auto* sim_cmd =
        app.add_subcommand("similarity", "Compare two confusion matrices (CSV grids)");
    std::string csv_a, csv_b;
    sim_cmd->add_option("recorded", csv_a, "Reference confusion matrix CSV")->required();
    sim_cmd->add_option("synth", csv_b, "Synthesis confusion matrix CSV")->required();

    // gen-surface
    auto* gen_surf = app.add_subcommand("gen-surface", "Emit a fractal depth map (SDM1)");
    std::uint32_t nx = 256, ny = 256;
    double dx = 5.6e-6, exponent = 2.0, rms = 1e-5;
    std::uint64_t surf_seed = 0;
    std::string surf_out;
    gen_surf->add_option("--nx", nx, "Grid width (samples)");
    gen_surf->add_option("--ny", ny, "Grid height (samples)");
    gen_surf->add_option("--dx", dx, "Grid spacing (meters)");
    gen_surf->add_option("--exponent", exponent, "Spectral exponent of 1/f^e power");
    gen_surf->add_option("--rms", rms, "RMS height (meters)");
    gen_surf->add_option("--seed", surf_seed, "Generator seed");
    gen_surf->add_option("--out", surf_out, "Output .sdm1 path")->required();

    // gen-motion
    auto* gen_mot = app.add_subcommand("gen-motion", "Emit an analytic trajectory file (t,x,y)");
    std::string mot_kind = "back_and_forth", mot_out;
    double mot_duration = 2.0, mot_extent = 0.2, mot_rate = 44100.0, mot_omega = 6.283185307179586;
    double mot_speed = 1.0;
    gen_mot->add_option("--kind", mot_kind,
                        "back_and_forth|circular|single_line_short|single_line_long|"
                        "four_scrapes_line");
    gen_mot->add_option("--duration", mot_duration, "Seconds");
    gen_mot->add_option("--extent", mot_extent, "Meters");
    gen_mot->add_option("--sample-rate", mot_rate, "Rows per second");
    gen_mot->add_option("--omega", mot_omega, "Angular frequency for periodic kinds (rad/s)");
    gen_mot->add_option("--speed-scale", mot_speed, "Speed multiplier");
    gen_mot->add_option("--out", mot_out, "Output trajectory path")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? 0 : 2;
    }

    try {
        if (*render_cmd)
            return render_one(scenario_arg, out_arg, seed, ablate, report_path);
        if (*batch_cmd)
            return run_batch(batch_in, batch_out, seed, ablate, workers, report_dir);
        if (*sim_cmd) {
            const auto recorded = load_confusion_csv(csv_a);
            const auto synth = load_confusion_csv(csv_b);
            std::printf("%.12g\n", confusion_similarity(recorded, synth));
            return 0;
        }
        if (*gen_surf) {
            save_depth_map(generate_fractal_surface(nx, ny, dx, exponent, rms, surf_seed),
                           surf_out);
            std::printf("wrote %s (%ux%u, dx %.3g m)\n", surf_out.c_str(), nx, ny, dx);
            return 0;
        }
        if (*gen_mot) {
            MotionKind kind;
            if (mot_kind == "back_and_forth")
                kind = MotionKind::BackAndForth;
            else if (mot_kind == "circular")
                kind = MotionKind::Circular;
            else if (mot_kind == "single_line_short")
                kind = MotionKind::SingleLineShort;
            else if (mot_kind == "single_line_long")
                kind = MotionKind::SingleLineLong;
            else if (mot_kind == "four_scrapes_line")
                kind = MotionKind::FourScrapesLine;
            else
                throw ParseError("unknown motion kind '" + mot_kind + "'");
            // Flat cylinder angle keeps the bounds trivially valid; the file
            // stores positions only.
            ShmParams shm;
            shm.mass = 0.1;
            shm.omega = mot_omega;
            shm.amplitude = mot_extent / 2.0;
            shm.angle = 0.0;
            shm.friction = 0.0;
            const auto traj =
                make_scrape_motion(kind, mot_speed, mot_duration, mot_rate, shm, mot_extent);
            save_trajectory(traj, mot_out);
            std::printf("wrote %s (%zu rows)\n", mot_out.c_str(), traj.size());
            return 0;
        }
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return exit_code_for(e);
    }
    return 0;
}
