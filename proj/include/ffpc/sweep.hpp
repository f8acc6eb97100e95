#ifndef FFPC_SWEEP_HPP
#define FFPC_SWEEP_HPP

// Cavity-length sweeps: eigenmode, coupling, per-order finesse and the
// resulting fundamental transmission at each length.

#include <string>
#include <vector>

#include "ffpc/cavity.hpp"
#include "ffpc/fiber_assembly.hpp"
#include "ffpc/mode_matching.hpp"

namespace ffpc
{
struct SweepRange
{
    double start = 0.0;
    double stop = 0.0;
    double step = 0.0; // 0 gives a single point at `start`

    std::vector<double> lengths() const;
};

struct SweepOptions
{
    int max_order = kDefaultMaxOrder;
    double efficiency = 1.0;
    double input_intensity = 1.0;
    /// Relative tolerance for calling the per-order finesse uniform.
    double finesse_tolerance = 0.02;
};

enum class SweepStatus
{
    ok,
    unstable,
    overdamped,
};

const char *to_string(SweepStatus s);

struct SweepRow
{
    double length = 0.0;
    SweepStatus status = SweepStatus::ok;
    double eta00 = 0.0;
    double beta = 0.0;
    double finesse = 0.0; // fundamental mode
    double t00 = 0.0;
    double waist = 0.0;
    double waist_from_mirror1 = 0.0;
    double fsr = 0.0;
    double residual = 0.0; // 1 - sum of eta up to max_order
    bool uniform_damping = true;
};

/// One row per length, in input order; unstable or overdamped lengths are
/// flagged rather than dropped. Throws NoDataError if no length is stable.
std::vector<SweepRow> sweep_length(const Beam &input, const CavityGeometry &family, const SweepRange &range,
                                   const SweepOptions &options = {});

/// Same with the input taken from a fiber assembly's output mode.
std::vector<SweepRow> sweep_length(const AssemblySpec &assembly, bool include_facet_lensing,
                                   const CavityGeometry &family, const SweepRange &range,
                                   const SweepOptions &options = {});

/// Coupled orders with their per-order finesse. Orders that carry no power
/// (eta < 1e-14) or that are overdamped by clipping are dropped, since they
/// do not form resonances.
struct ResonatorResponse
{
    CouplingSet coupling;
    TransmissionModel model;
};

ResonatorResponse resonator_response(const Beam &input, const CavityGeometry &geom, const CavityMode &mode,
                                     const SweepOptions &options = {}, bool double_sided = false);
ResonatorResponse resonator_response(const CouplingSet &coupling, const CavityGeometry &geom, const CavityMode &mode,
                                     const SweepOptions &options = {}, bool double_sided = false);

/// Evaluate a single length.
SweepRow sweep_point(const Beam &input, const CavityGeometry &geom, const SweepOptions &options = {});

} // namespace ffpc

#endif // FFPC_SWEEP_HPP
