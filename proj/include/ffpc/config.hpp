#ifndef FFPC_CONFIG_HPP
#define FFPC_CONFIG_HPP

// Project configuration files: INI-style sections of `key = value` lines with
// explicit unit suffixes on every dimensional quantity, e.g.
//
//     wavelength = 854nm
//     [cavity]
//     length = 426um
//     transmission1 = 50ppm
//
// Parsing is strict: unknown sections or keys, missing units and missing
// required geometry are errors that name the offending key and line.

#include <map>
#include <optional>
#include <string>

#include "ffpc/cavity.hpp"
#include "ffpc/fiber_assembly.hpp"
#include "ffpc/spectrum.hpp"
#include "ffpc/sweep.hpp"

namespace ffpc
{
class ConfigError : public ValidationError
{
public:
    using ValidationError::ValidationError;
};

enum class UnitKind
{
    length,
    frequency,
    inverse_length,
    fraction, // plain, %, ppm
    number,
};

/// Parse a quantity with a unit suffix into SI. Throws ConfigError naming `key`.
double parse_quantity(const std::string &text, UnitKind kind, const std::string &key);

enum class InputSource
{
    assembly,
    beam,
};

struct ProjectConfig
{
    double wavelength = 0.0;

    std::optional<AssemblySpec> assembly;
    bool facet_lensing = true;

    InputSource input_source = InputSource::assembly;
    std::optional<Beam> input_beam;

    std::optional<CavityGeometry> cavity; // length may be 0 when only sweeping
    std::optional<double> cavity_length;

    SweepOptions coupling;

    std::optional<ScanConfig> scan;
    std::optional<double> scan_span_fsr; // span given in FSR units

    std::optional<SweepRange> sweep;

    std::optional<Beam> target;
    DesignConstraints design;

    std::string output_path;
    std::string output_format = "csv";

    /// Canonical text form; parsing it yields an equivalent config.
    std::string to_text() const;

    /// The beam launched into the cavity ([input] section).
    Beam cavity_input() const;

    /// Cavity geometry at the configured length.
    CavityGeometry cavity_at_length() const;

    /// Scan config with any FSR-relative span resolved at the configured length.
    ScanConfig resolved_scan() const;
};

ProjectConfig parse_config(const std::string &text);
ProjectConfig load_config(const std::string &path);

} // namespace ffpc

#endif // FFPC_CONFIG_HPP
