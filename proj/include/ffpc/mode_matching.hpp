#ifndef FFPC_MODE_MATCHING_HPP
#define FFPC_MODE_MATCHING_HPP

// Fiber-to-cavity coupling: fundamental-mode efficiency, higher-order
// decomposition, the transmission-ratio estimator and the length transfer of
// a measured efficiency.
//
// All overlaps are taken at the mirror-1 plane; input beams are described in
// vacuum with z measured from mirror 1 towards mirror 2, the same frame as
// CavityMode::beam(). The overlap value does not depend on the plane.
//
// Basis: cavity eigenmodes are labelled Hermite-Gauss (n, m). A coaxial
// fundamental Gaussian input is separable in x and y, so its HG coefficient
// factorises as a_n a_m with one-dimensional overlaps a_n. Within a
// degenerate family N = n + m the same power could be written in the
// Laguerre-Gauss basis: for a coaxial round input only LG_{p,0} with N = 2p
// is excited and eta(LG_{p,0}) = sum over n + m = 2p of eta_nm.

#include <complex>
#include <functional>
#include <map>
#include <optional>
#include <vector>

#include "ffpc/cavity.hpp"

namespace ffpc
{
struct CouplingSet
{
    std::map<ModeOrder, double> entries;
    int max_order = 0;

    double total() const;
    double residual() const { return 1.0 - total(); }
    double eta(int n, int m) const;
    /// Sum of eta over a degenerate family n + m = N.
    double family(int total_order) const;
    void validate() const;
};

struct TransmissionModel
{
    double efficiency = 1.0;      // order-independent factor, (0, 1]
    double input_intensity = 1.0; // > 0
    /// Per-order finesse; orders not listed use `default_finesse`.
    std::map<ModeOrder, double> finesse;
    double default_finesse = 1.0;
    /// Both cavity ports are mode-filtering fiber assemblies.
    bool double_sided = false;

    double finesse_of(const ModeOrder &o) const;
    void validate() const;
};

/// Transverse offset and tilt are not modelled; a non-zero value throws
/// NotImplementedError.
struct Misalignment
{
    double offset = 0.0;
    double tilt = 0.0;
};

/// Power coupling between two coaxial fundamental Gaussians (same wavelength).
double eta00(const Beam &a, const Beam &b, const Misalignment &mis = {});

/// eta00 of an input beam into the cavity's fundamental mode at mirror 1.
double eta00(const Beam &input, const CavityMode &cavity, const Misalignment &mis = {});

// ---------------------------------------------------------------------------
// Numeric overlap oracle on radial fields
// ---------------------------------------------------------------------------

using RadialField = std::function<std::complex<double>(double)>;

/// Axially symmetric Gaussian field of `beam` at plane z, normalised to unit power.
RadialField gaussian_radial_field(const Beam &beam, double z);

/// LG_{p,0} field with spot radius w and wavefront radius R (R = inf for flat).
RadialField laguerre_gauss_radial_field(int p, double spot, double wavefront_radius, double wavelength);

/// |int u_a u_b^* 2 pi r dr|^2 by adaptive quadrature on [0, inf).
/// `scale` is a characteristic radius. Throws ValidationError if either field
/// is not normalised to 1e-8.
double numeric_overlap_oracle(const RadialField &a, const RadialField &b, double scale);

// ---------------------------------------------------------------------------
// Decomposition and transmissions
// ---------------------------------------------------------------------------

inline constexpr int kDefaultMaxOrder = 12;

/// Project the input beam onto the cavity HG basis at mirror 1 for all orders
/// with n + m <= max_order (<= 20).
CouplingSet decompose(const Beam &input, const CavityMode &cavity, int max_order = kDefaultMaxOrder,
                      const Misalignment &mis = {});

/// One-dimensional coefficients a_0..a_nmax (complex) used by decompose.
std::vector<std::complex<double>> hg_coefficients_1d(const Beam &input, const CavityMode &cavity, int nmax);

/// T_nm = eta~ eta_nm F_nm^2 I_in. In double-sided mode each order is filtered
/// again by the output assembly, T_nm = eta~ eta_nm eta_N F_nm^2 I_in with
/// eta_N the family sum, so a family transmits eta_N^2.
std::map<ModeOrder, double> transmissions(const CouplingSet &c, const TransmissionModel &model);

/// beta = eta_00 / sum eta_nm.
double beta(const CouplingSet &c);

/// beta = T_00 / sum T_nm from a transmission table.
double beta_from_transmissions(const std::map<ModeOrder, double> &t);

/// beta = t[0] / sum t, with t[0] the fundamental.
double beta_from_transmissions(const std::vector<double> &t);

/// eta00(L) = (T00 / T00_ref) (F00_ref / F00)^2 eta00_ref. Throws
/// InconsistentDataError if the result exceeds 1 + tolerance.
double infer_eta_at_length(double t00, double f00, double t00_ref, double f00_ref, double eta00_ref,
                           double tolerance = 1e-9);

} // namespace ffpc

#endif // FFPC_MODE_MATCHING_HPP
