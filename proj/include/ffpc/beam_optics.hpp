#ifndef FFPC_BEAM_OPTICS_HPP
#define FFPC_BEAM_OPTICS_HPP

// Fundamental Gaussian beams and paraxial ray-transfer (ABCD) elements.
//
// Ray convention: ray vectors are (height y, real angle theta), so an element
// that goes from index n_in to n_out has det(M) = n_in / n_out.  The complex
// beam parameter q is the physical one in the local medium,
//     q(z) = (z - z0) + i zR,    zR = pi w0^2 n / lambda,
// and transforms with the plain Moebius rule q' = (A q + B) / (C q + D).
// Across a flat interface this gives q' = q n_out / n_in, which keeps the waist
// radius and scales the apparent distance to the waist, as exact small-angle
// ray tracing requires.
//
// Curved interfaces and mirrors: R > 0 puts the centre of curvature on the
// exit side of the surface.  For a cavity mirror that is a surface concave
// towards the beam it reflects; for the coated end facet of a fiber (glass to
// vacuum) it is the dimple that forms the concave cavity mirror.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <numbers>
#include <string>

#include "ffpc/errors.hpp"

namespace ffpc
{
template <typename Scalar>
inline constexpr Scalar kPi = std::numbers::pi_v<Scalar>;

inline constexpr double kSpeedOfLight = 299792458.0;

template <typename Scalar>
using Complex = std::complex<Scalar>;

template <typename Scalar>
using Matrix2 = Eigen::Matrix<Scalar, 2, 2>;

// ---------------------------------------------------------------------------
// BeamState
// ---------------------------------------------------------------------------

/// Fundamental Gaussian mode. Lengths in metres; waist_radius is the 1/e^2
/// intensity radius; wavelength is the vacuum wavelength.
template <typename Scalar>
struct BeamState
{
    Scalar waist_radius{};
    Scalar waist_position{};
    Scalar wavelength{};
    Scalar medium_index{1};

    static BeamState make(Scalar w0, Scalar z0, Scalar lambda, Scalar n = Scalar(1))
    {
        BeamState b{w0, z0, lambda, n};
        b.validate();
        return b;
    }

    void validate() const
    {
        using std::isfinite;
        if (!(waist_radius > 0) || !isfinite(waist_radius))
            throw ValidationError("beam waist radius must be positive");
        if (!(wavelength > 0) || !isfinite(wavelength))
            throw ValidationError("beam wavelength must be positive");
        if (!(medium_index >= 1) || !isfinite(medium_index))
            throw ValidationError("medium index must be >= 1");
        if (!isfinite(waist_position))
            throw ValidationError("beam waist position must be finite");
    }

    Scalar rayleigh_range() const
    {
        return kPi<Scalar> * waist_radius * waist_radius * medium_index / wavelength;
    }

    /// Radius of curvature of the wavefront at z (infinite at the waist).
    Scalar curvature_radius(Scalar z) const
    {
        const Scalar dz = z - waist_position;
        const Scalar zr = rayleigh_range();
        if (dz == Scalar(0))
            return std::numeric_limits<Scalar>::infinity();
        return dz * (Scalar(1) + (zr / dz) * (zr / dz));
    }
};

using Beam = BeamState<double>;

/// w(z) = w0 sqrt(1 + ((z - z0)/zR)^2).
template <typename Scalar>
Scalar spot_radius(const BeamState<Scalar> &beam, Scalar z)
{
    const Scalar u = (z - beam.waist_position) / beam.rayleigh_range();
    return beam.waist_radius * std::sqrt(Scalar(1) + u * u);
}

// ---------------------------------------------------------------------------
// Complex beam parameter
// ---------------------------------------------------------------------------

template <typename Scalar>
struct ComplexBeamParameter
{
    Complex<Scalar> q;

    bool is_physical() const { return q.imag() > Scalar(0); }
};

using BeamParameter = ComplexBeamParameter<double>;

/// q of the beam evaluated at the plane z.
template <typename Scalar>
ComplexBeamParameter<Scalar> to_q(const BeamState<Scalar> &beam, Scalar z)
{
    return {Complex<Scalar>(z - beam.waist_position, beam.rayleigh_range())};
}

/// Waist offset and radius encoded in q. The returned offset is measured
/// from the current plane: a positive value means the waist lies ahead of it.
template <typename Scalar>
struct WaistLocation
{
    Scalar waist_radius;
    Scalar distance_ahead;
};

template <typename Scalar>
WaistLocation<Scalar> waist_of(const ComplexBeamParameter<Scalar> &q, Scalar wavelength, Scalar n)
{
    if (!(q.q.imag() > Scalar(0)))
        throw NonPhysicalBeamError("complex beam parameter has Im(q) <= 0");
    if (!(wavelength > 0) || !(n >= 1))
        throw ValidationError("waist_of: wavelength must be positive and index >= 1");
    return {std::sqrt(wavelength * q.q.imag() / (kPi<Scalar> * n)), -q.q.real()};
}

/// Local 1/e^2 radius encoded in q: w^2 = -lambda / (pi n Im(1/q)).
template <typename Scalar>
Scalar spot_radius_of(const ComplexBeamParameter<Scalar> &q, Scalar wavelength, Scalar n)
{
    if (!(q.q.imag() > Scalar(0)))
        throw NonPhysicalBeamError("complex beam parameter has Im(q) <= 0");
    const Scalar inv_imag = (Scalar(1) / q.q).imag();
    return std::sqrt(-wavelength / (kPi<Scalar> * n * inv_imag));
}

/// Rebuild a BeamState from q sitting at axial coordinate plane_z.
template <typename Scalar>
BeamState<Scalar> beam_from_q(const ComplexBeamParameter<Scalar> &q, Scalar plane_z,
                              Scalar wavelength, Scalar n)
{
    const auto w = waist_of(q, wavelength, n);
    return BeamState<Scalar>::make(w.waist_radius, plane_z + w.distance_ahead, wavelength, n);
}

// ---------------------------------------------------------------------------
// Ray-transfer elements
// ---------------------------------------------------------------------------

template <typename Scalar>
struct RayTransferElement
{
    Matrix2<Scalar> m = Matrix2<Scalar>::Identity();
    Scalar n_in{1};
    Scalar n_out{1};

    Scalar A() const { return m(0, 0); }
    Scalar B() const { return m(0, 1); }
    Scalar C() const { return m(1, 0); }
    Scalar D() const { return m(1, 1); }

    Scalar determinant() const { return m.determinant(); }

    /// |det - n_in/n_out| within a relative tolerance.
    bool is_consistent(Scalar rel_tol = Scalar(1e-9)) const
    {
        const Scalar expected = n_in / n_out;
        return std::abs(determinant() - expected) <= rel_tol * std::max(Scalar(1), std::abs(expected));
    }
};

using Element = RayTransferElement<double>;

/// Composition in matrix order: (second * first) applies `first`, then `second`.
template <typename Scalar>
RayTransferElement<Scalar> operator*(const RayTransferElement<Scalar> &second,
                                     const RayTransferElement<Scalar> &first)
{
    const Scalar tol = Scalar(1e-12) * std::max(std::abs(first.n_out), std::abs(second.n_in));
    if (std::abs(first.n_out - second.n_in) > tol)
        throw ValidationError("element chain has mismatched refractive indices at a junction");
    return {second.m * first.m, first.n_in, second.n_out};
}

/// Element that undoes `el` (propagates backwards through it).
template <typename Scalar>
RayTransferElement<Scalar> inverse(const RayTransferElement<Scalar> &el)
{
    return {el.m.inverse(), el.n_out, el.n_in};
}

template <typename Scalar>
ComplexBeamParameter<Scalar> apply_element(const ComplexBeamParameter<Scalar> &q,
                                           const RayTransferElement<Scalar> &el)
{
    if (!el.is_consistent())
        throw ValidationError("ray-transfer element violates det = n_in/n_out");
    const Complex<Scalar> den = el.C() * q.q + el.D();
    const Complex<Scalar> num = el.A() * q.q + el.B();
    // Zero up to the rounding of its two terms.
    const Scalar scale = std::abs(el.C() * q.q) + std::abs(el.D());
    if (std::abs(den) <= Scalar(8) * std::numeric_limits<Scalar>::epsilon() * scale || std::abs(den) == Scalar(0))
        throw SingularPropagationError("C q + D vanishes: element maps the beam to a point");
    return {num / den};
}

template <typename Scalar>
RayTransferElement<Scalar> free_space(Scalar distance, Scalar n = Scalar(1))
{
    if (!(distance >= 0) || !std::isfinite(distance))
        throw ValidationError("free_space: distance must be >= 0");
    if (!(n >= 1))
        throw ValidationError("free_space: index must be >= 1");
    RayTransferElement<Scalar> el;
    el.m << Scalar(1), distance, Scalar(0), Scalar(1);
    el.n_in = el.n_out = n;
    return el;
}

template <typename Scalar>
RayTransferElement<Scalar> thin_lens(Scalar focal_length, Scalar n = Scalar(1))
{
    if (focal_length == Scalar(0) || !std::isfinite(focal_length))
        throw ValidationError("thin_lens: focal length must be finite and non-zero");
    RayTransferElement<Scalar> el;
    el.m << Scalar(1), Scalar(0), Scalar(-1) / focal_length, Scalar(1);
    el.n_in = el.n_out = n;
    return el;
}

/// Parabolic graded-index section, n(r) = n0 (1 - g^2 r^2 / 2). In real-angle
/// form the matrix is [[cos gl, sin gl / g], [-g sin gl, cos gl]]; multiply
/// the angle row by n0 for the reduced-angle form.
template <typename Scalar>
RayTransferElement<Scalar> grin_section(Scalar length, Scalar n0, Scalar g)
{
    if (!(length >= 0) || !std::isfinite(length))
        throw ValidationError("grin_section: length must be >= 0");
    if (!(n0 > 1))
        throw ValidationError("grin_section: on-axis index must exceed 1");
    if (!(g > 0) || !std::isfinite(g))
        throw ValidationError("grin_section: gradient constant must be positive");
    const Scalar c = std::cos(g * length);
    const Scalar s = std::sin(g * length);
    RayTransferElement<Scalar> el;
    el.m << c, s / g, -g * s, c;
    el.n_in = el.n_out = n0;
    return el;
}

template <typename Scalar>
RayTransferElement<Scalar> flat_interface(Scalar n_in, Scalar n_out)
{
    if (!(n_in >= 1) || !(n_out >= 1))
        throw ValidationError("flat_interface: indices must be >= 1");
    RayTransferElement<Scalar> el;
    el.m << Scalar(1), Scalar(0), Scalar(0), n_in / n_out;
    el.n_in = n_in;
    el.n_out = n_out;
    return el;
}

/// Spherical refracting surface; see the header comment for the sign of R.
template <typename Scalar>
RayTransferElement<Scalar> curved_interface(Scalar radius, Scalar n_in, Scalar n_out)
{
    if (radius == Scalar(0) || !std::isfinite(radius))
        throw ValidationError("curved_interface: radius must be finite and non-zero");
    if (!(n_in >= 1) || !(n_out >= 1))
        throw ValidationError("curved_interface: indices must be >= 1");
    RayTransferElement<Scalar> el;
    el.m << Scalar(1), Scalar(0), (n_in - n_out) / (n_out * radius), n_in / n_out;
    el.n_in = n_in;
    el.n_out = n_out;
    return el;
}

/// Reflection off a mirror of radius R (R > 0 concave towards the beam).
template <typename Scalar>
RayTransferElement<Scalar> curved_mirror(Scalar radius, Scalar n = Scalar(1))
{
    if (radius == Scalar(0) || !std::isfinite(radius))
        throw ValidationError("curved_mirror: radius must be finite and non-zero");
    RayTransferElement<Scalar> el;
    el.m << Scalar(1), Scalar(0), Scalar(-2) / radius, Scalar(1);
    el.n_in = el.n_out = n;
    return el;
}

/// Propagate a beam through an element whose input plane sits at z_in.
/// The result is described in the exit medium with the exit plane at z_out.
template <typename Scalar>
BeamState<Scalar> propagate(const BeamState<Scalar> &beam, Scalar z_in,
                            const RayTransferElement<Scalar> &el, Scalar z_out)
{
    if (std::abs(beam.medium_index - el.n_in) > Scalar(1e-12) * el.n_in)
        throw ValidationError("propagate: beam medium does not match the element entry index");
    const auto q = apply_element(to_q(beam, z_in), el);
    return beam_from_q(q, z_out, beam.wavelength, el.n_out);
}

} // namespace ffpc

#endif // FFPC_BEAM_OPTICS_HPP
