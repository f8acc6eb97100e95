#ifndef FFPC_CAVITY_HPP
#define FFPC_CAVITY_HPP

// Two-mirror Fabry-Perot resonator: eigenmode geometry, resonance comb,
// aperture clipping and finesse.

#include <vector>

#include "ffpc/beam_optics.hpp"

namespace ffpc
{
// Default effective aperture as a fraction of the machined structure radius.
inline constexpr double kApertureFraction = 0.8;
inline constexpr double kDefaultStructureRadius = 50e-6;

/// Mirror radii are positive for mirrors concave towards the cavity.
struct CavityGeometry
{
    double length = 0.0;
    double roc1 = 0.0;
    double roc2 = 0.0;
    double aperture1 = kApertureFraction * kDefaultStructureRadius;
    double aperture2 = kApertureFraction * kDefaultStructureRadius;
    double transmission1 = 50e-6;
    double transmission2 = 50e-6;
    double loss1 = 0.0;
    double loss2 = 0.0;
    double wavelength = 854e-9;

    double g1() const { return 1.0 - length / roc1; }
    double g2() const { return 1.0 - length / roc2; }

    void validate() const;
    CavityGeometry with_length(double l) const
    {
        CavityGeometry c = *this;
        c.length = l;
        return c;
    }
};


struct CavityMode
{
    double waist_radius = 0.0;
    double waist_from_mirror1 = 0.0;
    double g1 = 0.0;
    double g2 = 0.0;
    double fsr = 0.0;          // Hz
    double gouy_increment = 0.0; // one-way Gouy phase per transverse order, rad
    double spot_mirror1 = 0.0;
    double spot_mirror2 = 0.0;
    double length = 0.0;
    double wavelength = 0.0;
    bool degenerate_confocal = false;

    double waist_from_mirror2() const { return length - waist_from_mirror1; }

    /// The cavity mode as a vacuum beam with z measured from mirror 1 towards mirror 2.
    Beam beam() const { return Beam::make(waist_radius, waist_from_mirror1, wavelength, 1.0); }
};

struct ModeOrder
{
    int n = 0;
    int m = 0;
    int total() const { return n + m; }
    bool operator==(const ModeOrder &) const = default;
    auto operator<=>(const ModeOrder &) const = default;
};

/// Closed-form two-mirror eigenmode. Throws InstabilityError unless
/// 0 < g1 g2 < 1; the symmetric confocal point g1 = g2 = 0 is accepted and
/// flagged as degenerate.
CavityMode solve_mode(const CavityGeometry &geom);

/// Eigenmode from the round-trip ABCD matrix, independent of the closed form.
struct RoundTripMode
{
    double waist_radius;
    double waist_from_mirror1;
    double round_trip_gouy; // rad, = 2 * one-way increment
};

RoundTripMode solve_mode_round_trip(const CavityGeometry &geom);

double fsr(double length);

/// FSR ((n + m) dzeta / pi mod 1) for each order; fundamental at 0.
std::vector<double> resonance_offsets(const CavityMode &mode, const std::vector<ModeOrder> &orders);

/// Per-reflection power lost outside a circular aperture of radius `aperture`
/// by the Hermite-Gauss (n, m) intensity pattern of spot radius `spot`.
double clipping_loss(const ModeOrder &order, double spot, double aperture);

/// Same, using the mode's spot on mirror 1 or 2 and the geometry's aperture.
double clipping_loss(const CavityGeometry &geom, const CavityMode &mode, const ModeOrder &order, int mirror);

struct FinesseResult
{
    double finesse = 0.0;
    double linewidth = 0.0; // Hz, FWHM
    double round_trip_loss = 0.0;
};

/// F = 2 pi / (T1 + T2 + L1 + L2 + clip1 + clip2); linewidth = FSR / F.
FinesseResult finesse(const CavityGeometry &geom, const CavityMode &mode, const ModeOrder &order = {});

} // namespace ffpc

#endif // FFPC_CAVITY_HPP
