#include "cli.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <optional>
#include <sstream>

#include "ffpc/config.hpp"
#include "ffpc/csv_io.hpp"

namespace ffpc::cli
{
namespace
{
struct Options
{
    std::string config;
    std::string out;
    std::optional<std::uint64_t> seed;
    std::string format = "csv";
    std::string input; // analyze, fit-beam
};

std::string num(double v)
{
    std::ostringstream os;
    os << std::setprecision(12) << v;
    return os.str();
}

// Relative config paths fall back to $FFPC_CONFIG_DIR when not found locally.
std::string resolve_config_path(const std::string &path)
{
    namespace fs = std::filesystem;
    if (fs::path(path).is_absolute() || fs::exists(path))
        return path;
    if (const char *dir = std::getenv("FFPC_CONFIG_DIR"))
    {
        const auto candidate = fs::path(dir) / path;
        if (fs::exists(candidate))
            return candidate.string();
    }
    return path;
}

ProjectConfig load(const Options &o, bool required)
{
    if (o.config.empty())
    {
        if (required)
            throw ConfigError("this command needs --config PATH");
        ProjectConfig cfg;
        cfg.wavelength = kDefaultWavelength;
        return cfg;
    }
    auto cfg = load_config(resolve_config_path(o.config));
    if (o.seed && cfg.scan)
        cfg.scan->seed = *o.seed;
    return cfg;
}

// Header comments: "# # ..." lines are metadata, the rest is the resolved
// config, so stripping one "# " from every comment gives a runnable config.
std::vector<std::string> header(const std::string &command, const ProjectConfig &cfg,
                                const std::vector<std::string> &extra = {})
{
    std::vector<std::string> lines{"# ffpc " + command};
    for (const auto &e : extra)
        lines.push_back("# " + e);
    for (const auto &l : comment_lines(cfg.to_text()))
        lines.push_back(l);
    return lines;
}

class Table
{
public:
    void add(const std::string &key, double value, const std::string &unit)
    {
        rows_.push_back(key + "," + num(value) + "," + unit);
    }
    void write(std::ostream &os, const std::vector<std::string> &comments) const
    {
        for (const auto &c : comments)
            os << "# " << c << "\n";
        os << "quantity,value,unit\n";
        for (const auto &r : rows_)
            os << r << "\n";
    }

private:
    std::vector<std::string> rows_;
};

Beam require_target(const ProjectConfig &cfg)
{
    if (!cfg.target)
        throw ConfigError("missing [target] section (waist, position)");
    return *cfg.target;
}

const AssemblySpec &require_assembly(const ProjectConfig &cfg)
{
    if (!cfg.assembly)
        throw ConfigError("missing [assembly] section");
    return *cfg.assembly;
}

int cmd_design(const ProjectConfig &cfg, std::ostream &os, std::ostream &err)
{
    const auto &a = require_assembly(cfg);
    const Beam target = require_target(cfg);
    try
    {
        const auto r = design_assembly(target, a, cfg.design, cfg.wavelength, cfg.facet_lensing);
        Table t;
        t.add("grin_length", r.grin_length * 1e6, "um");
        t.add("mm_length", r.mm_length * 1e6, "um");
        t.add("waist_error", r.waist_error * 1e9, "nm");
        t.add("position_error", r.position_error * 1e9, "nm");
        t.add("residual", r.residual, "1");
        t.write(os, header("design", cfg));
        return kOk;
    }
    catch (const NoSolutionError &e)
    {
        err << "error: " << e.what() << "\n";
        err << "best residual: " << e.best_residual() << "\n";
        return kInfeasible;
    }
}

int cmd_mode(const ProjectConfig &cfg, std::ostream &os)
{
    const auto geom = cfg.cavity_at_length();
    const auto mode = solve_mode(geom);
    const auto f = finesse(geom, mode);
    Table t;
    t.add("length", geom.length * 1e6, "um");
    t.add("g1", mode.g1, "1");
    t.add("g2", mode.g2, "1");
    t.add("waist", mode.waist_radius * 1e6, "um");
    t.add("waist_from_mirror1", mode.waist_from_mirror1 * 1e6, "um");
    t.add("waist_from_mirror2", mode.waist_from_mirror2() * 1e6, "um");
    t.add("spot_mirror1", mode.spot_mirror1 * 1e6, "um");
    t.add("spot_mirror2", mode.spot_mirror2 * 1e6, "um");
    t.add("gouy_increment", mode.gouy_increment, "rad");
    t.add("fsr", mode.fsr * 1e-9, "GHz");
    t.add("finesse", f.finesse, "1");
    t.add("linewidth", f.linewidth * 1e-6, "MHz");
    if (cfg.assembly || cfg.input_beam)
    {
        const Beam in = cfg.cavity_input();
        t.add("input_waist", in.waist_radius * 1e6, "um");
        t.add("input_position", in.waist_position * 1e6, "um");
        t.add("eta00", eta00(in, mode), "1");
    }
    t.write(os, header("mode", cfg));
    return kOk;
}

int cmd_match(const ProjectConfig &cfg, std::ostream &os)
{
    const auto geom = cfg.cavity_at_length();
    const auto mode = solve_mode(geom);
    const Beam in = cfg.cavity_input();
    const auto coupling = decompose(in, mode, cfg.coupling.max_order);
    const auto single = resonator_response(in, geom, mode, cfg.coupling, false);
    const auto dbl = resonator_response(in, geom, mode, cfg.coupling, true);
    const std::vector<std::string> summary{
        "eta00 = " + num(eta00(in, mode)),
        "residual = " + num(coupling.residual()),
        "beta_single = " + num(beta_from_transmissions(transmissions(single.coupling, single.model))),
        "beta_double = " + num(beta_from_transmissions(transmissions(dbl.coupling, dbl.model))),
    };
    write_coupling(os, coupling, header("match", cfg, summary));
    return kOk;
}

int cmd_sweep(const ProjectConfig &cfg, std::ostream &os)
{
    if (!cfg.sweep)
        throw ConfigError("missing [sweep] section");
    if (!cfg.cavity)
        throw ConfigError("missing [cavity] section");
    const auto rows = sweep_length(cfg.cavity_input(), *cfg.cavity, *cfg.sweep, cfg.coupling);
    write_sweep(os, rows, header("sweep", cfg));
    return kOk;
}

int cmd_spectrum(const ProjectConfig &cfg, std::ostream &os)
{
    const auto geom = cfg.cavity_at_length();
    const auto mode = solve_mode(geom);
    const auto scan = cfg.resolved_scan();
    const auto resp = resonator_response(cfg.cavity_input(), geom, mode, cfg.coupling, scan.double_sided);
    const auto spectrum = synthesize(geom, mode, resp.coupling, resp.model, scan);
    const std::vector<std::string> extra{"seed = " + std::to_string(scan.seed),
                                         "beta_model = " +
                                             num(beta_from_transmissions(transmissions(resp.coupling, resp.model)))};
    write_spectrum(os, spectrum, header("spectrum", cfg, extra));
    return kOk;
}

std::ifstream open_input(const std::string &path)
{
    if (path.empty())
        throw ConfigError("missing input file");
    std::ifstream in(path);
    if (!in)
        throw ConfigError("cannot open input file '" + path + "'");
    return in;
}

int cmd_analyze(const ProjectConfig &cfg, const Options &o, std::ostream &os, std::ostream &err)
{
    auto in = open_input(o.input);
    const auto spectrum = read_spectrum(in);
    ScanConfig scan = cfg.scan ? *cfg.scan : ScanConfig{};
    const auto a = analyze(spectrum, scan, cfg.cavity_length);
    for (const auto &w : a.warnings)
        err << "warning: " << w << "\n";
    std::vector<std::string> summary{"beta = " + num(a.beta), "linewidth_Hz = " + num(a.linewidth),
                                     "axis_scale = " + num(a.axis_scale),
                                     std::string("calibrated = ") + (a.calibrated ? "yes" : "no")};
    if (a.fsr)
        summary.push_back("fsr_Hz = " + num(*a.fsr));
    if (a.finesse)
        summary.push_back("finesse = " + num(*a.finesse));
    auto comments = header("analyze", cfg, summary);
    for (const auto &c : comments)
        os << "# " << c << "\n";
    os << "center_Hz,height,fwhm_Hz,baseline,prominence,sideband,fundamental\n";
    for (std::size_t i = 0; i < a.peaks.size(); ++i)
    {
        const auto &p = a.peaks[i];
        os << num(p.center) << "," << num(p.height) << "," << num(p.fwhm) << "," << num(p.baseline) << ","
           << num(p.prominence) << "," << (p.sideband ? 1 : 0) << "," << (i == a.fundamental ? 1 : 0) << "\n";
    }
    return kOk;
}

int cmd_fit_beam(const ProjectConfig &cfg, const Options &o, std::ostream &os)
{
    auto in = open_input(o.input);
    const auto data = read_knife_edge(in);
    const auto fit = fit_beam(data, cfg.wavelength);
    constexpr double z95 = 1.959963984540054;
    Table t;
    t.add("waist", fit.beam.waist_radius * 1e6, "um");
    t.add("waist_sigma", fit.waist_sigma() * 1e6, "um");
    t.add("waist_ci95_low", (fit.beam.waist_radius - z95 * fit.waist_sigma()) * 1e6, "um");
    t.add("waist_ci95_high", (fit.beam.waist_radius + z95 * fit.waist_sigma()) * 1e6, "um");
    t.add("position", fit.beam.waist_position * 1e6, "um");
    t.add("position_sigma", fit.position_sigma() * 1e6, "um");
    t.add("position_ci95_low", (fit.beam.waist_position - z95 * fit.position_sigma()) * 1e6, "um");
    t.add("position_ci95_high", (fit.beam.waist_position + z95 * fit.position_sigma()) * 1e6, "um");
    t.add("rms_residual", fit.rms_residual, "1");
    t.write(os, header("fit-beam", cfg));
    return kOk;
}

int cmd_calibrate(const ProjectConfig &cfg, std::ostream &os, std::ostream &err)
{
    const auto &a = require_assembly(cfg);
    const Beam target = require_target(cfg);
    try
    {
        const auto c = calibrate_grin(target, a, cfg.wavelength, cfg.facet_lensing);
        Table t;
        t.add("grin_gradient", c.gradient, "1/m");
        t.add("splice_mfd_scale", c.splice_mfd_scale, "1");
        t.add("waist_error", c.waist_error * 1e9, "nm");
        t.add("position_error", c.position_error * 1e9, "nm");
        t.write(os, header("calibrate-grin", cfg));
        return kOk;
    }
    catch (const NoSolutionError &e)
    {
        err << "error: " << e.what() << "\n";
        return kInfeasible;
    }
}

} // namespace

int run(const std::vector<std::string> &args, std::ostream &out, std::ostream &err)
{
    CLI::App app{"Fiber Fabry-Perot cavity mode-matching toolkit", "ffpc"};
    app.require_subcommand(1);
    app.fallthrough();
    Options o;
    app.add_option("--config", o.config, "Project config file");
    app.add_option("--out", o.out, "Write the result here instead of stdout");
    app.add_option("--format", o.format, "Output format")->check(CLI::IsMember({"csv"}));
    app.add_option("--seed", o.seed, "Noise seed, overrides scan.seed");

    struct Sub
    {
        const char *name;
        const char *help;
        bool needs_input;
    };
    const Sub subs[] = {
        {"design", "Solve GRIN and spacer lengths for a target output mode", false},
        {"mode", "Cavity eigenmode, FSR and finesse at the configured length", false},
        {"match", "Decompose the input beam into cavity modes", false},
        {"sweep", "Coupling, beta and finesse versus cavity length", false},
        {"spectrum", "Synthesize a piezo-scan transmission spectrum", false},
        {"analyze", "Fit peaks in a spectrum CSV and report beta and linewidth", true},
        {"fit-beam", "Fit waist and position to knife-edge CSV data", true},
        {"calibrate-grin", "Solve GRIN gradient and splice scale for a measured output mode", false},
    };
    for (const auto &s : subs)
    {
        auto *sub = app.add_subcommand(s.name, s.help);
        if (s.needs_input)
            sub->add_option("input", o.input, "Input CSV")->required();
    }

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try
    {
        app.parse(reversed);
    }
    catch (const CLI::ParseError &e)
    {
        const int code = app.exit(e, out, err);
        return code == 0 ? kOk : kUsage;
    }

    const std::string name = app.get_subcommands().front()->get_name();
    std::ostringstream buffer;
    try
    {
        const bool optional_config = name == "analyze" || name == "fit-beam";
        const ProjectConfig cfg = load(o, !optional_config);
        int code = kOk;
        if (name == "design")
            code = cmd_design(cfg, buffer, err);
        else if (name == "mode")
            code = cmd_mode(cfg, buffer);
        else if (name == "match")
            code = cmd_match(cfg, buffer);
        else if (name == "sweep")
            code = cmd_sweep(cfg, buffer);
        else if (name == "spectrum")
            code = cmd_spectrum(cfg, buffer);
        else if (name == "analyze")
            code = cmd_analyze(cfg, o, buffer, err);
        else if (name == "fit-beam")
            code = cmd_fit_beam(cfg, o, buffer);
        else if (name == "calibrate-grin")
            code = cmd_calibrate(cfg, buffer, err);
        if (code != kOk)
            return code;

        const std::string dest = !o.out.empty() ? o.out : cfg.output_path;
        if (dest.empty())
        {
            out << buffer.str();
        }
        else
        {
            std::ofstream f(dest, std::ios::binary);
            if (!f)
                throw ConfigError("cannot write output file '" + dest + "'");
            f << buffer.str();
        }
        return kOk;
    }
    catch (const ValidationError &e)
    {
        err << "error: " << e.what() << "\n";
        return kUsage;
    }
    catch (const NotImplementedError &e)
    {
        err << "error: " << e.what() << "\n";
        return kUsage;
    }
    catch (const NoSolutionError &e)
    {
        err << "error: " << e.what() << "\n";
        return kInfeasible;
    }
    catch (const InstabilityError &e)
    {
        err << "error: " << e.what() << "\n";
        return kInfeasible;
    }
    catch (const NoDataError &e)
    {
        err << "error: " << e.what() << "\n";
        return kInfeasible;
    }
    catch (const CoreClippingError &e)
    {
        err << "error: " << e.what() << "\n";
        return kInfeasible;
    }
    catch (const Error &e)
    {
        err << "numerical failure: " << e.what() << "\n";
        return kNumerical;
    }
}

} // namespace ffpc::cli
