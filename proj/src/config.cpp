#include "ffpc/config.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <set>
#include <sstream>
#include <vector>

namespace ffpc
{
namespace
{
std::string trim(const std::string &s)
{
    const auto a = s.find_first_not_of(" \t\r");
    if (a == std::string::npos)
        return {};
    const auto b = s.find_last_not_of(" \t\r");
    return s.substr(a, b - a + 1);
}

std::string lower(std::string s)
{
    std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return char(std::tolower(c)); });
    return s;
}

struct Entry
{
    std::string value;
    std::size_t line = 0;
    bool used = false;
};

using Section = std::map<std::string, Entry>;

struct RawConfig
{
    std::map<std::string, Section> sections; // "" is the global section
    std::map<std::string, std::size_t> section_lines;
};

RawConfig parse_raw(const std::string &text)
{
    RawConfig raw;
    raw.sections[""];
    std::string current;
    std::istringstream in(text);
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line))
    {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos)
            line = line.substr(0, hash);
        line = trim(line);
        if (line.empty())
            continue;
        if (line.front() == '[')
        {
            if (line.back() != ']')
                throw ParseError("unterminated section header '" + line + "'", lineno);
            current = lower(trim(line.substr(1, line.size() - 2)));
            if (current.empty())
                throw ParseError("empty section name", lineno);
            if (raw.section_lines.count(current))
                throw ParseError("duplicate section [" + current + "]", lineno);
            raw.sections[current];
            raw.section_lines[current] = lineno;
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ParseError("expected 'key = value', got '" + line + "'", lineno);
        const std::string key = lower(trim(line.substr(0, eq)));
        const std::string value = trim(line.substr(eq + 1));
        if (key.empty())
            throw ParseError("missing key before '='", lineno);
        if (value.empty())
            throw ParseError("missing value for key '" + key + "'", lineno);
        auto &sec = raw.sections[current];
        if (sec.count(key))
            throw ParseError("duplicate key '" + key + "'", lineno);
        sec[key] = {value, lineno, false};
    }
    return raw;
}

std::string qualified(const std::string &section, const std::string &key)
{
    return section.empty() ? key : section + "." + key;
}

class Reader
{
public:
    Reader(RawConfig &raw, std::string section) : raw_(raw), section_(std::move(section)) {}

    bool present() const { return raw_.sections.count(section_) > 0; }

    std::optional<std::string> string(const std::string &key)
    {
        auto sec = raw_.sections.find(section_);
        if (sec == raw_.sections.end())
            return std::nullopt;
        auto it = sec->second.find(key);
        if (it == sec->second.end())
            return std::nullopt;
        it->second.used = true;
        return it->second.value;
    }

    std::optional<double> quantity(const std::string &key, UnitKind kind)
    {
        auto s = string(key);
        if (!s)
            return std::nullopt;
        try
        {
            return parse_quantity(*s, kind, qualified(section_, key));
        }
        catch (const ConfigError &e)
        {
            throw ConfigError(std::string(e.what()) + " (line " + std::to_string(line(key)) + ")");
        }
    }

    double required(const std::string &key, UnitKind kind)
    {
        auto v = quantity(key, kind);
        if (!v)
            throw ConfigError("missing required key '" + qualified(section_, key) + "'");
        return *v;
    }

    double value_or(const std::string &key, UnitKind kind, double fallback)
    {
        return quantity(key, kind).value_or(fallback);
    }

    std::optional<bool> flag(const std::string &key)
    {
        auto s = string(key);
        if (!s)
            return std::nullopt;
        const auto v = lower(*s);
        if (v == "on" || v == "true" || v == "yes" || v == "1")
            return true;
        if (v == "off" || v == "false" || v == "no" || v == "0")
            return false;
        throw ConfigError("key '" + qualified(section_, key) + "' expects on/off, got '" + *s + "'");
    }

    std::optional<long long> integer(const std::string &key)
    {
        auto s = string(key);
        if (!s)
            return std::nullopt;
        std::size_t pos = 0;
        long long v = 0;
        try
        {
            v = std::stoll(*s, &pos);
        }
        catch (const std::exception &)
        {
            pos = 0;
        }
        if (pos != s->size())
            throw ConfigError("key '" + qualified(section_, key) + "' expects an integer, got '" + *s + "'");
        return v;
    }

    std::size_t line(const std::string &key) const
    {
        return raw_.sections.at(section_).at(key).line;
    }

private:
    RawConfig &raw_;
    std::string section_;
};

std::string fmt(double v)
{
    std::ostringstream os;
    os << std::setprecision(15) << v;
    return os.str();
}

std::string um(double v) { return fmt(v * 1e6) + "um"; }
std::string nm(double v) { return fmt(v * 1e9) + "nm"; }
std::string hz(double v) { return fmt(v) + "Hz"; }
std::string ppm(double v) { return fmt(v * 1e6) + "ppm"; }
} // namespace

double parse_quantity(const std::string &text_in, UnitKind kind, const std::string &key)
{
    const std::string text = trim(text_in);
    std::size_t pos = 0;
    double number = 0.0;
    try
    {
        number = std::stod(text, &pos);
    }
    catch (const std::exception &)
    {
        throw ConfigError("key '" + key + "': cannot parse a number from '" + text + "'");
    }
    std::string unit = trim(text.substr(pos));
    if (!std::isfinite(number))
        throw ConfigError("key '" + key + "': value must be finite");
    auto fail = [&](const std::string &expected) {
        return ConfigError("key '" + key + "': expected " + expected + ", got '" + text + "'");
    };
    switch (kind)
    {
    case UnitKind::length:
    {
        static const std::map<std::string, double> k{{"nm", 1e-9}, {"um", 1e-6}, {"µm", 1e-6},
                                                     {"mm", 1e-3}, {"m", 1.0}};
        auto it = k.find(unit);
        if (it == k.end())
            throw fail("a length with unit nm, um, mm or m");
        return number * it->second;
    }
    case UnitKind::frequency:
    {
        static const std::map<std::string, double> k{
            {"Hz", 1.0}, {"kHz", 1e3}, {"MHz", 1e6}, {"GHz", 1e9}, {"THz", 1e12}};
        auto it = k.find(unit);
        if (it == k.end())
            throw fail("a frequency with unit Hz, kHz, MHz, GHz or THz");
        return number * it->second;
    }
    case UnitKind::inverse_length:
    {
        static const std::map<std::string, double> k{{"/m", 1.0},    {"1/m", 1.0},    {"/mm", 1e3},
                                                     {"1/mm", 1e3}, {"/um", 1e6},    {"1/um", 1e6}};
        auto it = k.find(unit);
        if (it == k.end())
            throw fail("an inverse length with unit 1/m, 1/mm or 1/um");
        return number * it->second;
    }
    case UnitKind::fraction:
        if (unit.empty())
            return number;
        if (unit == "%")
            return number * 1e-2;
        if (unit == "ppm")
            return number * 1e-6;
        throw fail("a plain fraction, % or ppm");
    case UnitKind::number:
        if (!unit.empty())
            throw fail("a plain number");
        return number;
    }
    throw fail("a known unit");
}

ProjectConfig parse_config(const std::string &text)
{
    RawConfig raw = parse_raw(text);
    static const std::set<std::string> kSections{"",       "assembly", "input",  "cavity", "coupling", "scan",
                                                 "sweep", "target",   "design", "output"};
    for (const auto &[name, sec] : raw.sections)
        if (!kSections.count(name))
            throw ConfigError("unknown section [" + name + "] (line " + std::to_string(raw.section_lines[name]) + ")");

    ProjectConfig cfg;
    Reader global(raw, "");
    cfg.wavelength = global.required("wavelength", UnitKind::length);
    if (!(cfg.wavelength > 0))
        throw ConfigError("wavelength must be positive");

    Reader asmr(raw, "assembly");
    if (asmr.present())
    {
        // Lengths are the unknowns of a design run; everywhere else they are required.
        const bool designing = raw.sections.count("target") > 0;
        auto length = [&](const std::string &key) {
            return designing ? asmr.value_or(key, UnitKind::length, 0.0) : asmr.required(key, UnitKind::length);
        };
        GrinProfile grin{asmr.value_or("grin_index", UnitKind::number, kCalibratedGrin.n0),
                         asmr.value_or("grin_gradient", UnitKind::inverse_length, kCalibratedGrin.gradient),
                         asmr.value_or("grin_core_radius", UnitKind::length, kCalibratedGrin.core_radius)};
        AssemblySpec a;
        a.segments = {
            FiberSegmentSpecBuilder::single_mode(asmr.value_or("sm_mode_radius", UnitKind::length, kDefaultSmModeRadius),
                                                 asmr.value_or("sm_index", UnitKind::number, kSilicaIndex)),
            FiberSegmentSpecBuilder::graded_index(length("grin_length"), grin),
            FiberSegmentSpecBuilder::multimode_spacer(
                length("mm_length"), asmr.value_or("mm_index", UnitKind::number, kSilicaIndex),
                asmr.value_or("mm_core_radius", UnitKind::length, kDefaultMmCoreRadius))};
        a.facet_roc = asmr.required("facet_roc", UnitKind::length);
        a.splice_mfd_scale = asmr.value_or("splice_mfd_scale", UnitKind::number, kCalibratedSpliceScale);
        cfg.facet_lensing = asmr.flag("facet_lensing").value_or(true);
        try
        {
            a.validate();
        }
        catch (const ValidationError &e)
        {
            throw ConfigError(std::string("[assembly]: ") + e.what());
        }
        cfg.assembly = a;
    }

    Reader input(raw, "input");
    const auto source = input.string("source");
    if (source)
    {
        const auto s = lower(*source);
        if (s == "assembly")
            cfg.input_source = InputSource::assembly;
        else if (s == "beam")
            cfg.input_source = InputSource::beam;
        else
            throw ConfigError("key 'input.source' must be 'assembly' or 'beam', got '" + *source + "'");
    }
    else
    {
        cfg.input_source = cfg.assembly ? InputSource::assembly : InputSource::beam;
    }
    {
        auto w = input.quantity("waist", UnitKind::length);
        auto z = input.quantity("position", UnitKind::length);
        if (w || z)
        {
            if (!w || !z)
                throw ConfigError("[input] needs both 'waist' and 'position'");
            cfg.input_beam = Beam::make(*w, *z, cfg.wavelength, 1.0);
        }
    }
    if (input.present() || cfg.assembly)
    {
        if (cfg.input_source == InputSource::beam && !cfg.input_beam)
            throw ConfigError("[input] source = beam needs 'waist' and 'position'");
        if (cfg.input_source == InputSource::assembly && !cfg.assembly)
            throw ConfigError("[input] source = assembly needs an [assembly] section");
    }

    Reader cav(raw, "cavity");
    if (cav.present())
    {
        CavityGeometry g;
        cfg.cavity_length = cav.quantity("length", UnitKind::length);
        g.length = cfg.cavity_length.value_or(0.0);
        g.roc1 = cav.required("roc1", UnitKind::length);
        g.roc2 = cav.required("roc2", UnitKind::length);
        const double s1 = cav.value_or("structure_radius1", UnitKind::length, kDefaultStructureRadius);
        const double s2 = cav.value_or("structure_radius2", UnitKind::length, kDefaultStructureRadius);
        g.aperture1 = cav.value_or("aperture1", UnitKind::length, kApertureFraction * s1);
        g.aperture2 = cav.value_or("aperture2", UnitKind::length, kApertureFraction * s2);
        g.transmission1 = cav.value_or("transmission1", UnitKind::fraction, 50e-6);
        g.transmission2 = cav.value_or("transmission2", UnitKind::fraction, 50e-6);
        g.loss1 = cav.value_or("loss1", UnitKind::fraction, 0.0);
        g.loss2 = cav.value_or("loss2", UnitKind::fraction, 0.0);
        g.wavelength = cfg.wavelength;
        try
        {
            g.with_length(g.length > 0 ? g.length : 1.0).validate();
        }
        catch (const ValidationError &e)
        {
            throw ConfigError(std::string("[cavity]: ") + e.what());
        }
        cfg.cavity = g;
    }

    Reader coup(raw, "coupling");
    if (auto v = coup.integer("max_order"))
    {
        if (*v < 0 || *v > 20)
            throw ConfigError("key 'coupling.max_order' must lie in [0, 20]");
        cfg.coupling.max_order = int(*v);
    }
    cfg.coupling.efficiency = coup.value_or("efficiency", UnitKind::fraction, 1.0);
    cfg.coupling.input_intensity = coup.value_or("input_intensity", UnitKind::number, 1.0);
    cfg.coupling.finesse_tolerance = coup.value_or("finesse_tolerance", UnitKind::fraction, 0.02);

    Reader scan(raw, "scan");
    if (scan.present())
    {
        ScanConfig sc;
        const auto span = scan.string("span");
        if (!span)
            throw ConfigError("missing required key 'scan.span'");
        if (lower(*span).size() > 3 && lower(*span).substr(lower(*span).size() - 3) == "fsr")
        {
            cfg.scan_span_fsr = parse_quantity(span->substr(0, span->size() - 3), UnitKind::number, "scan.span");
            if (!(*cfg.scan_span_fsr > 0))
                throw ConfigError("key 'scan.span' must be positive");
        }
        else
        {
            sc.span = parse_quantity(*span, UnitKind::frequency, "scan.span");
        }
        const auto samples = scan.integer("samples");
        if (!samples)
            throw ConfigError("missing required key 'scan.samples'");
        if (*samples < 100)
            throw ConfigError("key 'scan.samples' must be >= 100");
        sc.samples = std::size_t(*samples);
        sc.center = scan.value_or("center", UnitKind::frequency, 0.0);
        sc.sideband_frequency = scan.value_or("sideband_frequency", UnitKind::frequency, 0.0);
        sc.sideband_fraction = scan.value_or("sideband_fraction", UnitKind::fraction, 0.0);
        sc.noise_rms = scan.value_or("noise_rms", UnitKind::number, 0.0);
        sc.double_sided = scan.flag("double_sided").value_or(false);
        sc.seed = std::uint64_t(scan.integer("seed").value_or(0));
        cfg.scan = sc;
    }

    Reader sw(raw, "sweep");
    if (sw.present())
    {
        SweepRange r{sw.required("start", UnitKind::length), sw.required("stop", UnitKind::length),
                     sw.value_or("step", UnitKind::length, 0.0)};
        try
        {
            r.lengths();
        }
        catch (const ValidationError &e)
        {
            throw ConfigError(std::string("[sweep]: ") + e.what());
        }
        cfg.sweep = r;
    }

    Reader tgt(raw, "target");
    if (tgt.present())
        cfg.target = Beam::make(tgt.required("waist", UnitKind::length), tgt.required("position", UnitKind::length),
                                cfg.wavelength, 1.0);

    Reader des(raw, "design");
    {
        auto gmin = des.quantity("grin_min", UnitKind::length);
        auto gmax = des.quantity("grin_max", UnitKind::length);
        if (gmin || gmax)
            cfg.design.grin = LengthRange{gmin.value_or(0.0), gmax.value_or(std::numeric_limits<double>::infinity())};
        cfg.design.mm.min = des.value_or("mm_min", UnitKind::length, cfg.design.mm.min);
        cfg.design.mm.max = des.value_or("mm_max", UnitKind::length, cfg.design.mm.max);
    }

    Reader outr(raw, "output");
    cfg.output_path = outr.string("path").value_or("");
    cfg.output_format = lower(outr.string("format").value_or("csv"));
    if (cfg.output_format != "csv")
        throw ConfigError("key 'output.format' supports only 'csv'");

    for (const auto &[name, sec] : raw.sections)
        for (const auto &[key, entry] : sec)
            if (!entry.used)
                throw ConfigError("unknown key '" + qualified(name, key) + "' (line " + std::to_string(entry.line) +
                                  ")");
    return cfg;
}

ProjectConfig load_config(const std::string &path)
{
    std::ifstream in(path);
    if (!in)
        throw ConfigError("cannot open config file '" + path + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str());
}

Beam ProjectConfig::cavity_input() const
{
    if (input_source == InputSource::beam)
    {
        if (!input_beam)
            throw ConfigError("no input beam configured ([input] waist/position)");
        return *input_beam;
    }
    if (!assembly)
        throw ConfigError("no [assembly] section to derive the input beam from");
    return output_mode(*assembly, wavelength, facet_lensing);
}

CavityGeometry ProjectConfig::cavity_at_length() const
{
    if (!cavity)
        throw ConfigError("missing [cavity] section");
    if (!cavity_length)
        throw ConfigError("missing required key 'cavity.length'");
    return cavity->with_length(*cavity_length);
}

ScanConfig ProjectConfig::resolved_scan() const
{
    if (!scan)
        throw ConfigError("missing [scan] section");
    ScanConfig s = *scan;
    if (scan_span_fsr)
    {
        if (!cavity_length)
            throw ConfigError("scan.span in FSR units needs 'cavity.length'");
        s.span = *scan_span_fsr * fsr(*cavity_length);
    }
    return s;
}

std::string ProjectConfig::to_text() const
{
    std::ostringstream os;
    os << "wavelength = " << nm(wavelength) << "\n";
    if (assembly)
    {
        const auto &a = *assembly;
        os << "[assembly]\n"
           << "sm_mode_radius = " << um(a.single_mode().mode_field_radius) << "\n"
           << "sm_index = " << fmt(a.single_mode().index) << "\n"
           << "grin_length = " << um(a.graded_index().length) << "\n"
           << "grin_index = " << fmt(a.graded_index().index) << "\n"
           << "grin_gradient = " << fmt(a.graded_index().gradient) << "/m\n"
           << "grin_core_radius = " << um(a.graded_index().core_radius) << "\n"
           << "mm_length = " << um(a.spacer().length) << "\n"
           << "mm_index = " << fmt(a.spacer().index) << "\n"
           << "mm_core_radius = " << um(a.spacer().core_radius) << "\n"
           << "facet_roc = " << um(a.facet_roc) << "\n"
           << "splice_mfd_scale = " << fmt(a.splice_mfd_scale) << "\n"
           << "facet_lensing = " << (facet_lensing ? "on" : "off") << "\n";
    }
    os << "[input]\nsource = " << (input_source == InputSource::assembly ? "assembly" : "beam") << "\n";
    if (input_beam)
        os << "waist = " << um(input_beam->waist_radius) << "\nposition = " << um(input_beam->waist_position) << "\n";
    if (cavity)
    {
        const auto &c = *cavity;
        os << "[cavity]\n";
        if (cavity_length)
            os << "length = " << um(*cavity_length) << "\n";
        os << "roc1 = " << um(c.roc1) << "\nroc2 = " << um(c.roc2) << "\n"
           << "aperture1 = " << um(c.aperture1) << "\naperture2 = " << um(c.aperture2) << "\n"
           << "transmission1 = " << ppm(c.transmission1) << "\ntransmission2 = " << ppm(c.transmission2) << "\n"
           << "loss1 = " << ppm(c.loss1) << "\nloss2 = " << ppm(c.loss2) << "\n";
    }
    os << "[coupling]\n"
       << "max_order = " << coupling.max_order << "\n"
       << "efficiency = " << fmt(coupling.efficiency) << "\n"
       << "input_intensity = " << fmt(coupling.input_intensity) << "\n"
       << "finesse_tolerance = " << fmt(coupling.finesse_tolerance) << "\n";
    if (scan)
    {
        const auto &s = *scan;
        os << "[scan]\n";
        if (scan_span_fsr)
            os << "span = " << fmt(*scan_span_fsr) << "fsr\n";
        else
            os << "span = " << hz(s.span) << "\n";
        os << "samples = " << s.samples << "\n"
           << "center = " << hz(s.center) << "\n"
           << "sideband_frequency = " << hz(s.sideband_frequency) << "\n"
           << "sideband_fraction = " << fmt(s.sideband_fraction) << "\n"
           << "noise_rms = " << fmt(s.noise_rms) << "\n"
           << "double_sided = " << (s.double_sided ? "on" : "off") << "\n"
           << "seed = " << s.seed << "\n";
    }
    if (sweep)
        os << "[sweep]\nstart = " << um(sweep->start) << "\nstop = " << um(sweep->stop) << "\nstep = " << um(sweep->step)
           << "\n";
    if (target)
        os << "[target]\nwaist = " << um(target->waist_radius) << "\nposition = " << um(target->waist_position) << "\n";
    if (design.grin || design.mm.min != 0.0 || design.mm.max != 2e-3)
    {
        os << "[design]\n";
        if (design.grin)
        {
            os << "grin_min = " << um(design.grin->min) << "\n";
            if (std::isfinite(design.grin->max))
                os << "grin_max = " << um(design.grin->max) << "\n";
        }
        os << "mm_min = " << um(design.mm.min) << "\nmm_max = " << um(design.mm.max) << "\n";
    }
    os << "[output]\nformat = " << output_format << "\n";
    if (!output_path.empty())
        os << "path = " << output_path << "\n";
    return os.str();
}

} // namespace ffpc
