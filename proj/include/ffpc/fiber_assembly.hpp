#ifndef FFPC_FIBER_ASSEMBLY_HPP
#define FFPC_FIBER_ASSEMBLY_HPP

// SM -> GRIN -> MM fiber stack: forward output mode, GRIN calibration,
// inverse length design, and knife-edge profiling.

#include <Eigen/Dense>

#include <cstdint>
#include <optional>
#include <vector>

#include "ffpc/beam_optics.hpp"

namespace ffpc
{
enum class SegmentKind
{
    single_mode,
    graded_index,
    multimode_spacer,
};

const char *to_string(SegmentKind kind);

/// One fiber segment. Fields that do not apply to `kind` are ignored:
/// single_mode uses mode_field_radius and index; graded_index uses index
/// (on-axis n0), gradient and core_radius; multimode_spacer uses index and
/// core_radius. Lengths in metres, gradient in 1/m.
struct FiberSegmentSpec
{
    SegmentKind kind = SegmentKind::single_mode;
    double length = 0.0;
    double index = 1.0;
    double mode_field_radius = 0.0;
    double gradient = 0.0;
    double core_radius = 0.0;

    void validate() const;
};

/// GRIN profile parameters, n(r) = n0 (1 - g^2 r^2 / 2).
struct GrinProfile
{
    double n0;
    double gradient;
    double core_radius;
};

// Fused-silica index near 854 nm, used for SM and MM defaults.
inline constexpr double kSilicaIndex = 1.4525;
inline constexpr double kDefaultSmModeRadius = 2.7e-6;
inline constexpr double kDefaultWavelength = 854e-9;
inline constexpr double kDefaultMmCoreRadius = 52.5e-6;

/// Defaults calibrated so that GRIN 492 um + MM 402 um with a 700 um facet
/// yields an 8.1 um waist 230 um outside the facet (see calibrate_grin).
inline constexpr GrinProfile kCalibratedGrin{1.47, 3819.410609346305, 31e-6};
inline constexpr double kCalibratedSpliceScale = 0.8250803963006896;

struct AssemblySpec
{
    std::vector<FiberSegmentSpec> segments;
    double facet_roc = 700e-6;
    double splice_mfd_scale = 1.0;

    /// Throws ValidationError unless segments are exactly [SM, GRIN, MM] and all
    /// parameters are physical.
    void validate() const;

    const FiberSegmentSpec &single_mode() const { return segments.at(0); }
    const FiberSegmentSpec &graded_index() const { return segments.at(1); }
    const FiberSegmentSpec &spacer() const { return segments.at(2); }

    /// Copy with new GRIN and MM lengths.
    AssemblySpec with_lengths(double grin_length, double mm_length) const;
};

/// Assembly built from the calibrated defaults with the given lengths.
AssemblySpec default_assembly(double grin_length, double mm_length);

struct FiberSegmentSpecBuilder
{
    static FiberSegmentSpec single_mode(double mode_field_radius, double index = kSilicaIndex);
    static FiberSegmentSpec graded_index(double length, const GrinProfile &profile);
    static FiberSegmentSpec multimode_spacer(double length, double index = kSilicaIndex,
                                             double core_radius = kDefaultMmCoreRadius);
};

/// Output mode in vacuum; waist_position is measured from the MM end facet,
/// positive outside the assembly. Throws CoreClippingError when the beam
/// radius exceeds the GRIN or MM core radius.
Beam output_mode(const AssemblySpec &assembly, double wavelength, bool include_facet_lensing = true);

/// Analytic derivatives of the output waist with respect to the two lengths.
struct OutputSensitivity
{
    double dw0_dgrin, dz0_dgrin;
    double dw0_dmm, dz0_dmm;
};

OutputSensitivity output_mode_sensitivity(const AssemblySpec &assembly, double wavelength,
                                          bool include_facet_lensing = true);

// ---------------------------------------------------------------------------
// Inverse design
// ---------------------------------------------------------------------------

struct LengthRange
{
    double min = 0.0;
    double max = 0.0;
    bool contains(double v, double slack = 0.0) const { return v >= min - slack && v <= max + slack; }
};

struct DesignConstraints
{
    /// GRIN range; an empty optional means [0, half pitch).
    std::optional<LengthRange> grin;
    LengthRange mm{0.0, 2e-3};
};

struct DesignResult
{
    double grin_length = 0.0;
    double mm_length = 0.0;
    double waist_error = 0.0;    // achieved - target (m)
    double position_error = 0.0; // achieved - target (m)
    /// Normalised residual: sqrt((dw/1 nm)^2 + (dz/10 nm)^2); < 1 means converged.
    double residual = 0.0;
};

inline constexpr double kDesignWaistTol = 1e-9;
inline constexpr double kDesignPositionTol = 10e-9;

/// Find GRIN and MM lengths whose output mode matches `target`. `base`
/// supplies every fiber parameter other than the two lengths. Among several
/// solutions the shortest GRIN length inside the first half pitch wins.
/// Throws NoSolutionError (with the best normalised residual) if unreachable.
DesignResult design_assembly(const Beam &target, const AssemblySpec &base, const DesignConstraints &constraints,
                             double wavelength, bool include_facet_lensing = true);

struct GrinCalibration
{
    double gradient = 0.0;
    double splice_mfd_scale = 1.0;
    double waist_error = 0.0;
    double position_error = 0.0;
};

/// Solve jointly for the GRIN gradient constant and the splice mode-field
/// scale so that `assembly` (with its lengths) reproduces `target`. A single
/// gradient cannot match both waist size and position; the splice scale is
/// the second physical unknown. Solutions with the scale outside [0.8, 1.3]
/// are rejected.
GrinCalibration calibrate_grin(const Beam &target, const AssemblySpec &assembly, double wavelength,
                               bool include_facet_lensing = true);

// ---------------------------------------------------------------------------
// Knife-edge profiling
// ---------------------------------------------------------------------------

struct KnifeEdgeSample
{
    double z = 0.0;
    double knife_position = 0.0;
    double power_fraction = 0.0;
};

using KnifeEdgeDataset = std::vector<KnifeEdgeSample>;

/// Transmitted fraction past a knife edge at x for a centred beam of radius w.
double knife_edge_fraction(double x, double w);

/// P = 0.5 erfc(sqrt(2) x / w(z)) on the z x x grid, plus Gaussian noise of
/// the given RMS (values clamped to [0, 1]).
KnifeEdgeDataset simulate_knife_edge(const Beam &beam, const std::vector<double> &z_list,
                                     const std::vector<double> &x_list, double noise_rms = 0.0,
                                     std::uint64_t seed = 0);

struct BeamFit
{
    Beam beam;
    Eigen::Matrix2d covariance; // over (w0, z0), m^2
    double rms_residual = 0.0;
    std::size_t iterations = 0;

    double waist_sigma() const { return std::sqrt(covariance(0, 0)); }
    double position_sigma() const { return std::sqrt(covariance(1, 1)); }
};

/// Least-squares fit of (w0, z0) to knife-edge data taken in vacuum.
/// Requires >= 2 distinct z planes with >= 5 edge positions each.
BeamFit fit_beam(const KnifeEdgeDataset &data, double wavelength);

} // namespace ffpc

#endif // FFPC_FIBER_ASSEMBLY_HPP
