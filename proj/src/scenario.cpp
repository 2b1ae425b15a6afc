#include "scraperoll/scenario.hpp"

#include "scraperoll/errors.hpp"
#include "scraperoll/surface.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

namespace scraperoll {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

const std::map<std::string, Ablation>& ablation_names()
{
    static const std::map<std::string, Ablation> names = {
        {"only_surface_ir", Ablation::OnlySurfaceIr},
        {"no_normal_force_variation", Ablation::NoNormalForceVariation},
        {"no_nonlinearity", Ablation::NoNonlinearity},
        {"constant_ir", Ablation::ConstantIr},
        {"only_ball_ir", Ablation::OnlyBallIr},
    };
    return names;
}

std::string trim(const std::string& s)
{
    const auto first = s.find_first_not_of(" \t\r\n");
    if (first == std::string::npos)
        return {};
    const auto last = s.find_last_not_of(" \t\r\n");
    return s.substr(first, last - first + 1);
}

std::vector<std::string> split(const std::string& s, char sep)
{
    std::vector<std::string> parts;
    std::string current;
    std::istringstream stream(s);
    while (std::getline(stream, current, sep))
        parts.push_back(trim(current));
    return parts;
}

std::string format_double(double v)
{
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

} // namespace

Ablation ablation_from_name(const std::string& name)
{
    const auto it = ablation_names().find(name);
    if (it == ablation_names().end())
        throw ParseError("unknown ablation '" + name + "'");
    return it->second;
}

std::string ablation_name(Ablation a)
{
    for (const auto& [name, value] : ablation_names())
        if (value == a)
            return name;
    throw ParameterError("ablation_name: unmapped ablation value");
}

// ---------------------------------------------------------------------------
// Scenario parsing
// ---------------------------------------------------------------------------

namespace {

const std::map<std::string, MotionKind>& motion_kind_names()
{
    static const std::map<std::string, MotionKind> names = {
        {"back_and_forth", MotionKind::BackAndForth},
        {"circular", MotionKind::Circular},
        {"single_line_short", MotionKind::SingleLineShort},
        {"single_line_long", MotionKind::SingleLineLong},
        {"four_scrapes_line", MotionKind::FourScrapesLine},
    };
    return names;
}

std::string motion_kind_name(MotionKind kind)
{
    for (const auto& [name, value] : motion_kind_names())
        if (value == kind)
            return name;
    throw ParameterError("motion_kind_name: unmapped kind");
}

// Accumulates raw key values; finalize() applies defaults, cross-checks, and
// produces the validated RenderScenario.
class ScenarioBuilder {
public:
    explicit ScenarioBuilder(fs::path base_dir) : base_dir_(std::move(base_dir)) {}

    void set(const std::string& section, const std::string& key, const std::string& value,
             int line)
    {
        const std::string qualified = section + "." + key;
        if (!seen_.insert(qualified).second)
            throw ParseError("duplicate key '" + key + "' in [" + section + "]", line);
        line_ = line;
        if (section == "scenario")
            set_scenario(key, value);
        else if (section == "surface")
            set_surface(key, value);
        else if (section == "motion")
            set_motion(key, value);
        else if (section == "shm")
            set_shm(key, value);
        else if (section == "nonlinearity")
            set_nonlinearity(key, value);
        else if (section == "scrape")
            set_scrape(key, value);
        else if (section == "roll")
            set_roll(key, value);
        else if (section == "ir")
            set_ir(key, value);
        else if (section == "render")
            set_render(key, value);
        else
            throw ParseError("unknown section [" + section + "]", line);
    }

    RenderScenario finalize();

private:
    [[noreturn]] void unknown_key(const std::string& section, const std::string& key) const
    {
        throw ParseError("unknown key '" + key + "' in [" + section + "]", line_);
    }

    double number(const std::string& key, const std::string& value) const
    {
        try {
            std::size_t used = 0;
            const double v = std::stod(value, &used);
            if (used != value.size())
                throw std::invalid_argument("trailing characters");
            return v;
        } catch (const std::exception&) {
            throw ParseError("value of '" + key + "' is not a number: '" + value + "'", line_);
        }
    }

    std::uint64_t integer(const std::string& key, const std::string& value) const
    {
        try {
            std::size_t used = 0;
            const unsigned long long v = std::stoull(value, &used);
            if (used != value.size())
                throw std::invalid_argument("trailing characters");
            return v;
        } catch (const std::exception&) {
            throw ParseError("value of '" + key + "' is not an integer: '" + value + "'", line_);
        }
    }

    fs::path resolve(const std::string& value) const
    {
        fs::path p(value);
        return p.is_absolute() ? p : base_dir_ / p;
    }

    void require_exists(const fs::path& p) const
    {
        if (!fs::exists(p))
            throw ParseError("referenced file does not exist: " + p.string(), line_);
    }

    void set_scenario(const std::string& key, const std::string& value)
    {
        if (key == "kind") {
            if (value == "scrape")
                s_.kind = EventKind::Scrape;
            else if (value == "roll")
                s_.kind = EventKind::Roll;
            else
                throw ParseError("scenario kind must be 'scrape' or 'roll', got '" + value + "'",
                                 line_);
            have_kind_ = true;
        } else if (key == "seed") {
            s_.seed = integer(key, value);
        } else if (key == "ablations") {
            for (const auto& name : split(value, ',')) {
                if (name.empty())
                    continue;
                try {
                    s_.ablations.insert(ablation_from_name(name));
                } catch (const ParseError& e) {
                    throw ParseError(e.what(), line_);
                }
            }
        } else {
            unknown_key("scenario", key);
        }
    }

    void set_surface(const std::string& key, const std::string& value)
    {
        if (key == "file") {
            const auto p = resolve(value);
            require_exists(p);
            s_.surface_file = p;
        } else if (key == "generator") {
            if (value != "fractal")
                throw ParseError("unknown surface generator '" + value + "'", line_);
            have_generator_ = true;
        } else if (key == "nx") {
            fractal_.nx = static_cast<std::uint32_t>(integer(key, value));
            have_fractal_dims_ |= 1;
        } else if (key == "ny") {
            fractal_.ny = static_cast<std::uint32_t>(integer(key, value));
            have_fractal_dims_ |= 2;
        } else if (key == "dx") {
            fractal_.dx = number(key, value);
        } else if (key == "spectral_exponent") {
            fractal_.spectral_exponent = number(key, value);
            have_fractal_dims_ |= 4;
        } else if (key == "rms_height") {
            fractal_.rms_height = number(key, value);
            have_fractal_dims_ |= 8;
        } else {
            unknown_key("surface", key);
        }
    }

    void set_motion(const std::string& key, const std::string& value)
    {
        if (key == "kind") {
            const auto it = motion_kind_names().find(value);
            if (it == motion_kind_names().end())
                throw ParseError("unknown motion kind '" + value + "'", line_);
            motion_.kind = it->second;
            have_motion_kind_ = true;
        } else if (key == "file") {
            const auto p = resolve(value);
            require_exists(p);
            s_.trajectory_file = p;
        } else if (key == "duration") {
            motion_.duration = number(key, value);
            have_motion_duration_ = true;
        } else if (key == "extent") {
            motion_.extent = number(key, value);
            have_motion_extent_ = true;
        } else if (key == "speed_scale") {
            motion_.speed_scale = number(key, value);
        } else if (key == "constant_normal_force") {
            s_.trajectory_normal_force = number(key, value);
        } else {
            unknown_key("motion", key);
        }
    }

    void set_shm(const std::string& key, const std::string& value)
    {
        if (key == "mass")
            s_.shm.mass = number(key, value), shm_seen_ |= 1;
        else if (key == "omega")
            s_.shm.omega = number(key, value), shm_seen_ |= 2;
        else if (key == "amplitude")
            s_.shm.amplitude = number(key, value), shm_seen_ |= 4;
        else if (key == "angle")
            s_.shm.angle = number(key, value), shm_seen_ |= 8;
        else if (key == "friction")
            s_.shm.friction = number(key, value), shm_seen_ |= 16;
        else if (key == "gravity")
            s_.shm.gravity = number(key, value);
        else
            unknown_key("shm", key);
        s_.has_shm = true;
    }

    void set_nonlinearity(const std::string& key, const std::string& value)
    {
        if (key == "zeta")
            s_.nonlinearity.zeta = number(key, value);
        else if (key == "alpha_max")
            s_.nonlinearity.alpha_max = number(key, value);
        else if (key == "alpha_min")
            s_.nonlinearity.alpha_min = number(key, value);
        else if (key == "smoothing_gain")
            s_.nonlinearity.smoothing_gain = number(key, value);
        else
            unknown_key("nonlinearity", key);
    }

    void set_scrape(const std::string& key, const std::string& value)
    {
        if (key == "scraper_mass") {
            s_.scrape.scraper_mass = number(key, value);
            have_scraper_mass_ = true;
        } else if (key == "beta1") {
            s_.scrape.beta1 = number(key, value);
        } else if (key == "beta2") {
            s_.scrape.beta2 = number(key, value);
        } else {
            unknown_key("scrape", key);
        }
    }

    void set_roll(const std::string& key, const std::string& value)
    {
        if (key == "radius")
            s_.roll.radius = number(key, value), roll_seen_ |= 1;
        else if (key == "com_offset")
            s_.roll.com_offset = number(key, value), roll_seen_ |= 2;
        else if (key == "mass")
            s_.roll.mass = number(key, value), roll_seen_ |= 4;
        else if (key == "incline")
            s_.roll.incline = number(key, value), roll_seen_ |= 8;
        else if (key == "initial_omega")
            s_.roll.initial_omega = number(key, value), roll_seen_ |= 16;
        else if (key == "duration")
            s_.roll.duration = number(key, value), roll_seen_ |= 32;
        else if (key == "spring_k")
            s_.roll.spring_k = number(key, value), roll_seen_ |= 64;
        else if (key == "gravity")
            s_.roll.gravity = number(key, value);
        else if (key == "lambda")
            s_.roll.lambda = number(key, value);
        else if (key == "rho_static")
            s_.roll.rho_static = number(key, value);
        else
            unknown_key("roll", key);
    }

    void set_ir(const std::string& key, const std::string& value)
    {
        if (key == "surface_anchors") {
            for (const auto& entry : split(value, ',')) {
                if (entry.empty())
                    continue;
                const auto at = entry.rfind('@');
                if (at == std::string::npos)
                    throw ParseError("surface anchor entries must be 'file@position', got '" +
                                         entry + "'",
                                     line_);
                const auto p = resolve(trim(entry.substr(0, at)));
                require_exists(p);
                const double pos = number("surface_anchors", trim(entry.substr(at + 1)));
                s_.surface_anchors.emplace_back(pos, p);
            }
        } else if (key == "scraper_ir") {
            const auto p = resolve(value);
            require_exists(p);
            s_.scraper_ir_file = p;
        } else if (key == "ball_ir") {
            const auto p = resolve(value);
            require_exists(p);
            s_.ball_ir_file = p;
        } else if (key == "eta") {
            s_.eta = number(key, value);
        } else {
            unknown_key("ir", key);
        }
    }

    void set_render(const std::string& key, const std::string& value)
    {
        if (key == "sample_rate")
            s_.render.sample_rate = number(key, value);
        else if (key == "morph_block")
            s_.render.morph_block = static_cast<std::size_t>(integer(key, value));
        else if (key == "t0")
            s_.render.t0 = number(key, value);
        else if (key == "output_peak")
            s_.render.output_peak = number(key, value);
        else
            unknown_key("render", key);
    }

    fs::path base_dir_;
    RenderScenario s_;
    FractalSurfaceSpec fractal_;
    MotionSpec motion_;
    std::set<std::string> seen_;
    int line_ = 0;
    bool have_kind_ = false;
    bool have_generator_ = false;
    int have_fractal_dims_ = 0;
    bool have_motion_kind_ = false;
    bool have_motion_duration_ = false;
    bool have_motion_extent_ = false;
    bool have_scraper_mass_ = false;
    int shm_seen_ = 0;
    int roll_seen_ = 0;
};

RenderScenario ScenarioBuilder::finalize()
{
    if (!have_kind_)
        throw ParseError("missing required key 'kind' in [scenario]");

    // Surface: exactly one source.
    if (s_.surface_file && have_generator_)
        throw ParseError("[surface] must give either 'file' or 'generator', not both");
    if (!s_.surface_file) {
        if (!have_generator_)
            throw ParseError("[surface] needs 'file' or 'generator = fractal'");
        if ((have_fractal_dims_ & 1) == 0)
            throw ParseError("missing required key 'nx' in [surface]");
        if ((have_fractal_dims_ & 2) == 0)
            throw ParseError("missing required key 'ny' in [surface]");
        if ((have_fractal_dims_ & 4) == 0)
            throw ParseError("missing required key 'spectral_exponent' in [surface]");
        if ((have_fractal_dims_ & 8) == 0)
            throw ParseError("missing required key 'rms_height' in [surface]");
        s_.surface_fractal = fractal_;
    } else if (have_fractal_dims_ != 0) {
        throw ParseError("[surface] generator keys conflict with 'file'");
    }

    if (s_.kind == EventKind::Scrape) {
        if (roll_seen_ != 0)
            throw ParseError("[roll] keys are only valid in roll scenarios");
        if (s_.ball_ir_file)
            throw ParseError("'ball_ir' is only valid in roll scenarios");
        const bool analytic = have_motion_kind_;
        const bool from_file = s_.trajectory_file.has_value();
        if (analytic == from_file)
            throw ParseError("[motion] needs exactly one of 'kind' or 'file'");
        if (analytic) {
            if (!have_motion_duration_)
                throw ParseError("missing required key 'duration' in [motion]");
            if (!have_motion_extent_)
                throw ParseError("missing required key 'extent' in [motion]");
            if (shm_seen_ != 31)
                throw ParseError(
                    "[shm] needs mass, omega, amplitude, angle, friction for analytic motions");
            s_.motion = motion_;
        } else {
            if (!s_.trajectory_normal_force)
                throw ParseError("file motions need 'constant_normal_force' in [motion]");
            if (have_motion_duration_ || have_motion_extent_)
                throw ParseError("'duration'/'extent' are not used with file motions");
        }
        if (!have_scraper_mass_)
            throw ParseError("missing required key 'scraper_mass' in [scrape]");
    } else {
        if (have_motion_kind_ || s_.trajectory_file || have_motion_duration_ ||
            have_motion_extent_)
            throw ParseError("[motion] keys are only valid in scrape scenarios");
        if (shm_seen_ != 0)
            throw ParseError("[shm] keys are only valid in scrape scenarios");
        if (have_scraper_mass_)
            throw ParseError("'scraper_mass' is only valid in scrape scenarios");
        if (s_.scraper_ir_file)
            throw ParseError("'scraper_ir' is only valid in scrape scenarios");
        if (roll_seen_ != 127)
            throw ParseError("[roll] needs radius, com_offset, mass, incline, initial_omega, "
                             "duration, spring_k");
    }

    if (s_.surface_anchors.empty())
        throw ParseError("missing required key 'surface_anchors' in [ir]");
    double prev = -1.0;
    for (const auto& [pos, path] : s_.surface_anchors) {
        if (pos < 0.0 || pos > 1.0)
            throw ParseError("surface anchor positions must lie in [0, 1]");
        if (pos <= prev)
            throw ParseError("surface anchor positions must be strictly increasing");
        prev = pos;
    }
    if (s_.eta < 0.0)
        throw ParseError("'eta' must be non-negative");

    return s_;
}

} // namespace

RenderScenario parse_scenario(const fs::path& path)
{
    std::ifstream is(path);
    if (!is)
        throw IoError("parse_scenario: cannot open " + path.string());

    ScenarioBuilder builder(fs::absolute(path).parent_path());
    std::string line;
    std::string section;
    int line_no = 0;
    while (std::getline(is, line)) {
        ++line_no;
        const std::string text = trim(line);
        if (text.empty() || text[0] == '#')
            continue;
        if (text.front() == '[') {
            if (text.back() != ']')
                throw ParseError("unterminated section header", line_no);
            section = trim(text.substr(1, text.size() - 2));
            if (section.empty())
                throw ParseError("empty section header", line_no);
            continue;
        }
        const auto eq = text.find('=');
        if (eq == std::string::npos)
            throw ParseError("expected 'key = value', got '" + text + "'", line_no);
        if (section.empty())
            throw ParseError("key outside any [section]", line_no);
        const std::string key = trim(text.substr(0, eq));
        const std::string value = trim(text.substr(eq + 1));
        if (key.empty())
            throw ParseError("empty key", line_no);
        builder.set(section, key, value, line_no);
    }
    return builder.finalize();
}

std::string serialize_scenario(const RenderScenario& s)
{
    std::ostringstream os;
    os << "[scenario]\n";
    os << "kind = " << (s.kind == EventKind::Scrape ? "scrape" : "roll") << "\n";
    os << "seed = " << s.seed << "\n";
    if (!s.ablations.empty()) {
        std::vector<std::string> names;
        for (Ablation a : s.ablations)
            names.push_back(ablation_name(a));
        std::sort(names.begin(), names.end());
        os << "ablations = ";
        for (std::size_t i = 0; i < names.size(); ++i)
            os << (i ? "," : "") << names[i];
        os << "\n";
    }

    os << "\n[surface]\n";
    if (s.surface_file) {
        os << "file = " << s.surface_file->string() << "\n";
    } else if (s.surface_fractal) {
        const auto& g = *s.surface_fractal;
        os << "generator = fractal\n";
        os << "nx = " << g.nx << "\n";
        os << "ny = " << g.ny << "\n";
        os << "dx = " << format_double(g.dx) << "\n";
        os << "spectral_exponent = " << format_double(g.spectral_exponent) << "\n";
        os << "rms_height = " << format_double(g.rms_height) << "\n";
    }

    if (s.kind == EventKind::Scrape) {
        os << "\n[motion]\n";
        if (s.motion) {
            os << "kind = " << motion_kind_name(s.motion->kind) << "\n";
            os << "duration = " << format_double(s.motion->duration) << "\n";
            os << "extent = " << format_double(s.motion->extent) << "\n";
            os << "speed_scale = " << format_double(s.motion->speed_scale) << "\n";
        } else if (s.trajectory_file) {
            os << "file = " << s.trajectory_file->string() << "\n";
            os << "constant_normal_force = " << format_double(*s.trajectory_normal_force) << "\n";
        }
        if (s.motion) {
            os << "\n[shm]\n";
            os << "mass = " << format_double(s.shm.mass) << "\n";
            os << "omega = " << format_double(s.shm.omega) << "\n";
            os << "amplitude = " << format_double(s.shm.amplitude) << "\n";
            os << "angle = " << format_double(s.shm.angle) << "\n";
            os << "friction = " << format_double(s.shm.friction) << "\n";
            os << "gravity = " << format_double(s.shm.gravity) << "\n";
        }
        os << "\n[scrape]\n";
        os << "scraper_mass = " << format_double(s.scrape.scraper_mass) << "\n";
        os << "beta1 = " << format_double(s.scrape.beta1) << "\n";
        os << "beta2 = " << format_double(s.scrape.beta2) << "\n";
    } else {
        os << "\n[roll]\n";
        os << "radius = " << format_double(s.roll.radius) << "\n";
        os << "com_offset = " << format_double(s.roll.com_offset) << "\n";
        os << "mass = " << format_double(s.roll.mass) << "\n";
        os << "incline = " << format_double(s.roll.incline) << "\n";
        os << "initial_omega = " << format_double(s.roll.initial_omega) << "\n";
        os << "duration = " << format_double(s.roll.duration) << "\n";
        os << "spring_k = " << format_double(s.roll.spring_k) << "\n";
        os << "gravity = " << format_double(s.roll.gravity) << "\n";
        os << "lambda = " << format_double(s.roll.lambda) << "\n";
        if (s.roll.rho_static)
            os << "rho_static = " << format_double(*s.roll.rho_static) << "\n";
    }

    os << "\n[nonlinearity]\n";
    os << "zeta = " << format_double(s.nonlinearity.zeta) << "\n";
    os << "alpha_max = " << format_double(s.nonlinearity.alpha_max) << "\n";
    os << "alpha_min = " << format_double(s.nonlinearity.alpha_min) << "\n";
    os << "smoothing_gain = " << format_double(s.nonlinearity.smoothing_gain) << "\n";

    os << "\n[ir]\n";
    os << "surface_anchors = ";
    for (std::size_t i = 0; i < s.surface_anchors.size(); ++i) {
        const auto& [pos, path] = s.surface_anchors[i];
        os << (i ? ", " : "") << path.string() << "@" << format_double(pos);
    }
    os << "\n";
    if (s.scraper_ir_file)
        os << "scraper_ir = " << s.scraper_ir_file->string() << "\n";
    if (s.ball_ir_file)
        os << "ball_ir = " << s.ball_ir_file->string() << "\n";
    os << "eta = " << format_double(s.eta) << "\n";

    os << "\n[render]\n";
    os << "sample_rate = " << format_double(s.render.sample_rate) << "\n";
    os << "morph_block = " << s.render.morph_block << "\n";
    os << "t0 = " << format_double(s.render.t0) << "\n";
    os << "output_peak = " << format_double(s.render.output_peak) << "\n";
    return os.str();
}

// ---------------------------------------------------------------------------
// Pipeline execution
// ---------------------------------------------------------------------------

namespace {

template <typename F>
auto stage(const char* name, F&& body)
{
    try {
        return body();
    } catch (const PipelineError&) {
        throw;
    } catch (const Error& e) {
        throw PipelineError(name, e.what());
    }
}

void check_scenario(const RenderScenario& s)
{
    if (static_cast<bool>(s.surface_file) == static_cast<bool>(s.surface_fractal))
        throw ParameterError("scenario needs exactly one surface source");
    if (s.kind == EventKind::Scrape) {
        if (static_cast<bool>(s.motion) == static_cast<bool>(s.trajectory_file))
            throw ParameterError("scenario needs exactly one motion source");
        if (s.trajectory_file && !s.trajectory_normal_force)
            throw ParameterError("file motions need a constant normal force");
    }
    if (s.surface_anchors.empty())
        throw ParameterError("scenario needs at least one surface IR anchor");
    if (s.eta < 0.0)
        throw ParameterError("eta must be non-negative");
}

json shm_json(const ShmParams& p)
{
    return {{"mass", p.mass},           {"gravity", p.gravity},
            {"omega", p.omega},         {"amplitude", p.amplitude},
            {"angle", p.angle},         {"friction", p.friction}};
}

} // namespace

RunResult run_scenario(const RenderScenario& s)
{
    check_scenario(s);
    const bool ab_only_surface = s.ablations.count(Ablation::OnlySurfaceIr) > 0;
    const bool ab_no_nfv = s.ablations.count(Ablation::NoNormalForceVariation) > 0;
    const bool ab_no_nonlin = s.ablations.count(Ablation::NoNonlinearity) > 0;
    const bool ab_constant_ir = s.ablations.count(Ablation::ConstantIr) > 0;
    const bool ab_only_ball = s.ablations.count(Ablation::OnlyBallIr) > 0;

    json report;
    report["kind"] = s.kind == EventKind::Scrape ? "scrape" : "roll";
    report["seed"] = s.seed;
    {
        std::vector<std::string> names;
        for (Ablation a : s.ablations)
            names.push_back(ablation_name(a));
        report["ablations"] = names;
    }

    const SurfaceDepthMap map = stage("surface", [&] {
        if (s.surface_file) {
            report["surface"] = {{"file", s.surface_file->string()}};
            return load_depth_map(*s.surface_file);
        }
        const auto& g = *s.surface_fractal;
        report["surface"] = {{"generator", "fractal"},
                             {"nx", g.nx},
                             {"ny", g.ny},
                             {"dx", g.dx},
                             {"spectral_exponent", g.spectral_exponent},
                             {"rms_height", g.rms_height}};
        return generate_fractal_surface(g.nx, g.ny, g.dx, g.spectral_exponent, g.rms_height,
                                        s.seed);
    });

    MotionTrajectory traj;
    NormalForceBounds bounds;
    RollMotion roll;
    if (s.kind == EventKind::Scrape) {
        stage("motion", [&] {
            if (s.motion) {
                const auto& m = *s.motion;
                const ShmParams eff = effective_shm(s.shm, m.kind, m.speed_scale);
                bounds = normal_force_bounds(eff);
                traj = make_scrape_motion(m.kind, m.speed_scale, m.duration,
                                          s.render.sample_rate, s.shm, m.extent);
                report["motion"] = {{"kind", motion_kind_name(m.kind)},
                                    {"duration", m.duration},
                                    {"extent", m.extent},
                                    {"speed_scale", m.speed_scale}};
                report["shm"] = shm_json(s.shm);
            } else {
                traj = load_trajectory(*s.trajectory_file, s.render.sample_rate,
                                       *s.trajectory_normal_force);
                bounds = {*s.trajectory_normal_force, *s.trajectory_normal_force};
                report["motion"] = {{"file", s.trajectory_file->string()},
                                    {"constant_normal_force", *s.trajectory_normal_force}};
            }
            return 0;
        });
    } else {
        stage("motion", [&] {
            const auto& r = s.roll;
            roll = make_roll_motion(r.radius, r.com_offset, r.mass, r.incline, r.initial_omega,
                                    r.duration, s.render.sample_rate, r.gravity);
            const auto n_profile = rolling_normal_profile(roll, r.gravity);
            const std::size_t n = roll.theta.size();
            traj.sample_rate = s.render.sample_rate;
            traj.x.resize(n);
            traj.y.assign(n, 0.0);
            traj.vx.resize(n);
            traj.vy.assign(n, 0.0);
            traj.normal_force = n_profile;
            for (std::size_t i = 0; i < n; ++i)
                traj.x[i] = rolling_com_position(roll.theta[i], r.radius, r.com_offset);
            for (std::size_t i = 0; i < n; ++i) {
                const std::size_t lo = i == 0 ? 0 : i - 1;
                const std::size_t hi = i + 1 == n ? i : i + 1;
                traj.vx[i] = (traj.x[hi] - traj.x[lo]) * traj.sample_rate /
                             static_cast<double>(hi - lo);
            }
            const auto [lo, hi] = std::minmax_element(n_profile.begin(), n_profile.end());
            bounds = {*lo, *hi};
            report["roll"] = {{"radius", r.radius},
                              {"com_offset", r.com_offset},
                              {"mass", r.mass},
                              {"incline", r.incline},
                              {"initial_omega", r.initial_omega},
                              {"duration", r.duration},
                              {"gravity", r.gravity},
                              {"spring_k", r.spring_k},
                              {"lambda", r.lambda},
                              {"rho_static", r.rho_static.value_or(r.com_offset)}};
            return 0;
        });
    }
    report["normal_force_bounds"] = {{"n_min", bounds.n_min}, {"n_max", bounds.n_max}};

    if (ab_no_nfv) {
        const double mid = 0.5 * (bounds.n_min + bounds.n_max);
        std::fill(traj.normal_force.begin(), traj.normal_force.end(), mid);
    }

    const ContactPathSignals path = stage("contact", [&] {
        return build_contact_path(map, traj, bounds, s.nonlinearity, !ab_no_nonlin);
    });
    report["nonlinearity"] = {{"zeta", s.nonlinearity.zeta},
                              {"alpha_max", s.nonlinearity.alpha_max},
                              {"alpha_min", s.nonlinearity.alpha_min},
                              {"smoothing_gain", s.nonlinearity.smoothing_gain},
                              {"applied", !ab_no_nonlin}};

    ForceSignal force;
    if (s.kind == EventKind::Scrape) {
        force = stage("force", [&] { return total_scrape_force(path, traj, s.scrape); });
        report["scrape"] = {{"scraper_mass", s.scrape.scraper_mass},
                            {"beta1", s.scrape.beta1},
                            {"beta2", s.scrape.beta2}};
    } else {
        force = stage("force", [&] {
            ScrapeParams sp = s.scrape;
            sp.scraper_mass = s.roll.mass;
            RollParams rp;
            rp.spring_k = s.roll.spring_k;
            rp.lambda = s.roll.lambda;
            rp.rho_static = s.roll.rho_static;
            return total_rolling_force(path, roll, sp, rp);
        });
        report["scrape"] = {{"beta1", s.scrape.beta1}, {"beta2", s.scrape.beta2}};
    }

    const IrField field = stage("ir", [&] {
        IrField f;
        for (const auto& [pos, file] : s.surface_anchors)
            f.anchors.emplace_back(pos, load_modal_ir(file));
        const auto& contact_ir_file =
            s.kind == EventKind::Scrape ? s.scraper_ir_file : s.ball_ir_file;
        if (contact_ir_file)
            f.scraper_ir = load_modal_ir(*contact_ir_file);
        f.eta = s.eta;

        json ir_report;
        for (const auto& [pos, file] : s.surface_anchors)
            ir_report["anchors"].push_back({{"position", pos}, {"file", file.string()}});
        ir_report["eta"] = f.eta;
        if (contact_ir_file)
            ir_report[s.kind == EventKind::Scrape ? "scraper_ir" : "ball_ir"] =
                contact_ir_file->string();

        if (ab_only_ball) {
            if (f.scraper_ir.empty())
                throw ParameterError("only_ball_ir needs a ball/scraper IR in the scenario");
            f.anchors = {{0.0, f.scraper_ir}};
            f.scraper_ir = {};
            f.eta = 0.0;
        }
        if (ab_constant_ir)
            f.anchors = {f.anchors.front()};
        if (ab_only_surface)
            f.eta = 0.0;

        ir_report["effective_eta"] = f.eta;
        ir_report["effective_anchor_count"] = f.anchors.size();
        report["ir"] = ir_report;
        f.validate();
        return f;
    });

    const std::vector<double> position = normalized_axis_position(traj);
    AudioBuffer raw = stage("render", [&] {
        return render_time_varying(force, field, position, s.render);
    });
    report["render"] = {{"sample_rate", s.render.sample_rate},
                        {"morph_block", s.render.morph_block},
                        {"t0", s.render.t0},
                        {"output_peak", s.render.output_peak}};

    RunResult result;
    double peak = 0.0;
    for (double v : raw.samples)
        peak = std::max(peak, std::abs(v));
    result.peak_before = peak;
    auto norm = normalize(raw, s.render.output_peak);
    result.audio = std::move(norm.buffer);
    result.normalization_scale = norm.scale;
    report["normalization"] = {{"peak_before", peak}, {"scale", norm.scale}};
    report["output"] = {{"samples", result.audio.samples.size()},
                        {"duration_s", result.audio.samples.size() / s.render.sample_rate}};
    result.report_json = report.dump(2);
    return result;
}

// ---------------------------------------------------------------------------
// Confusion matrices
// ---------------------------------------------------------------------------

void ConfusionMatrix::validate() const
{
    if (n == 0 || values.size() != n * n)
        throw ParameterError("ConfusionMatrix: not a square grid");
    for (std::size_t row = 0; row < n; ++row) {
        double sum = 0.0;
        for (std::size_t col = 0; col < n; ++col) {
            const double v = at(row, col);
            if (!std::isfinite(v) || v < 0.0)
                throw ParameterError("ConfusionMatrix: entries must be finite and >= 0");
            sum += v;
        }
        // Rows describe response proportions; all-zero rows are allowed so
        // degenerate comparison matrices stay representable.
        if (sum > 1e-9 && std::abs(sum - 1.0) > 1e-9)
            throw ParameterError("ConfusionMatrix: row " + std::to_string(row) +
                                 " sums to " + std::to_string(sum) + ", expected 1");
    }
}

ConfusionMatrix load_confusion_csv(const std::filesystem::path& path)
{
    std::ifstream is(path);
    if (!is)
        throw IoError("load_confusion_csv: cannot open " + path.string());
    ConfusionMatrix m;
    std::string line;
    std::size_t width = 0;
    int line_no = 0;
    while (std::getline(is, line)) {
        ++line_no;
        const std::string text = trim(line);
        if (text.empty() || text[0] == '#')
            continue;
        const auto cells = split(text, ',');
        if (width == 0)
            width = cells.size();
        else if (cells.size() != width)
            throw FormatError("load_confusion_csv: ragged row at line " + std::to_string(line_no));
        for (const auto& cell : cells) {
            try {
                m.values.push_back(std::stod(cell));
            } catch (const std::exception&) {
                throw FormatError("load_confusion_csv: bad number '" + cell + "' at line " +
                                  std::to_string(line_no));
            }
        }
        ++m.n;
    }
    if (m.n == 0)
        throw FormatError("load_confusion_csv: no rows in " + path.string());
    if (width != m.n)
        throw FormatError("load_confusion_csv: grid is " + std::to_string(m.n) + "x" +
                          std::to_string(width) + ", expected square");
    m.validate();
    return m;
}

double confusion_similarity(const ConfusionMatrix& recorded, const ConfusionMatrix& synth)
{
    if (recorded.n != synth.n || recorded.values.size() != synth.values.size())
        throw ParameterError("confusion_similarity: matrices have different shapes");
    double ref = 0.0, diff = 0.0;
    for (std::size_t i = 0; i < recorded.values.size(); ++i) {
        const double d = recorded.values[i] - synth.values[i];
        ref += recorded.values[i] * recorded.values[i];
        diff += d * d;
    }
    if (ref == 0.0)
        throw DegenerateInputError("confusion_similarity: reference matrix is all zero");
    return 1.0 - std::sqrt(diff) / std::sqrt(ref);
}

} // namespace scraperoll
