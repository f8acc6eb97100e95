#include "ffpc/cavity.hpp"

#include <cmath>
#include <sstream>

#include "ffpc/hermite.hpp"
#include "ffpc/quadrature.hpp"

namespace ffpc
{
void CavityGeometry::validate() const
{
    if (!(length > 0) || !std::isfinite(length))
        throw ValidationError("cavity length must be positive");
    if (!(roc1 > 0) || !(roc2 > 0))
        throw ValidationError("mirror radii must be positive (concave)");
    if (!(aperture1 > 0) || !(aperture2 > 0))
        throw ValidationError("mirror apertures must be positive");
    for (double v : {transmission1, transmission2, loss1, loss2})
        if (!(v >= 0 && v < 1))
            throw ValidationError("mirror transmissions and losses must lie in [0, 1)");
    if (!(wavelength > 0))
        throw ValidationError("cavity wavelength must be positive");
}

double fsr(double length)
{
    if (!(length > 0))
        throw ValidationError("fsr: length must be positive");
    return kSpeedOfLight / (2.0 * length);
}

CavityMode solve_mode(const CavityGeometry &geom)
{
    geom.validate();
    const double L = geom.length, R1 = geom.roc1, R2 = geom.roc2, lambda = geom.wavelength;
    const double g1 = geom.g1(), g2 = geom.g2();
    const double gg = g1 * g2;
    constexpr double kDegenerate = 1e-12;
    const bool confocal = std::abs(g1) < kDegenerate && std::abs(g2) < kDegenerate;
    // Rounding can leave a boundary point (one flat-equivalent or concentric
    // mirror pair) marginally inside; treat it as the edge it is.
    const bool on_edge = std::abs(g1) < kDegenerate || std::abs(g2) < kDegenerate || std::abs(1.0 - gg) < kDegenerate;
    if (!confocal && (on_edge || !(gg > 0.0 && gg < 1.0)))
    {
        std::ostringstream msg;
        msg << "unstable resonator: g1 = " << g1 << ", g2 = " << g2 << " (need 0 < g1 g2 < 1)";
        throw InstabilityError(msg.str(), g1, g2);
    }

    CavityMode mode;
    mode.g1 = g1;
    mode.g2 = g2;
    mode.length = L;
    mode.wavelength = lambda;
    mode.fsr = fsr(L);
    mode.degenerate_confocal = confocal;

    const double den = g1 + g2 - 2.0 * gg;
    if (std::abs(den) < kDegenerate)
    {
        // Symmetric-confocal limit, taken along R1 = R2 = (R1 + R2)/2.
        mode.waist_from_mirror1 = 0.5 * L;
        mode.waist_radius = std::sqrt(lambda / (2.0 * kPi<double>) * std::sqrt(L * (R1 + R2 - L)));
    }
    else
    {
        mode.waist_from_mirror1 = (R1 == R2) ? 0.5 * L : L * g2 * (1.0 - g1) / den;
        mode.waist_radius = std::sqrt(L * lambda / kPi<double> * std::sqrt(gg * (1.0 - gg)) / std::abs(den));
    }
    const double s = (g1 < 0.0) ? -1.0 : 1.0;
    mode.gouy_increment = std::acos(s * std::sqrt(std::max(gg, 0.0)));

    const Beam b = mode.beam();
    mode.spot_mirror1 = spot_radius(b, 0.0);
    mode.spot_mirror2 = spot_radius(b, L);
    return mode;
}

RoundTripMode solve_mode_round_trip(const CavityGeometry &geom)
{
    geom.validate();
    // Reference plane: on mirror 1, heading towards mirror 2.
    const Element trip = curved_mirror(geom.roc1) * free_space(geom.length) * curved_mirror(geom.roc2) *
                         free_space(geom.length);
    const double A = trip.A(), B = trip.B(), C = trip.C(), D = trip.D();
    const double half_trace = 0.5 * (A + D);
    if (!(std::abs(half_trace) < 1.0))
        throw InstabilityError("round-trip matrix has |(A + D)/2| >= 1", geom.g1(), geom.g2());
    // Self-consistent q: C q^2 + (D - A) q - B = 0.
    const double re = (A - D) / (2.0 * C);
    const double im = std::sqrt(1.0 - half_trace * half_trace) / std::abs(C);
    const BeamParameter q{{re, im}};
    const auto w = waist_of(q, geom.wavelength, 1.0);
    const Complex<double> factor = A + B / q.q;
    double gouy = -std::arg(factor);
    if (gouy <= 0.0)
        gouy += 2.0 * kPi<double>;
    return {w.waist_radius, w.distance_ahead, gouy};
}

std::vector<double> resonance_offsets(const CavityMode &mode, const std::vector<ModeOrder> &orders)
{
    std::vector<double> out;
    out.reserve(orders.size());
    for (const auto &o : orders)
    {
        if (o.n < 0 || o.m < 0)
            throw ValidationError("mode orders must be non-negative");
        double frac = std::fmod(double(o.total()) * mode.gouy_increment / kPi<double>, 1.0);
        if (frac < 0)
            frac += 1.0;
        out.push_back(mode.fsr * frac);
    }
    return out;
}

double clipping_loss(const ModeOrder &order, double spot, double aperture)
{
    if (order.n < 0 || order.m < 0)
        throw ValidationError("mode orders must be non-negative");
    if (!(spot > 0) || !(aperture > 0))
        throw ValidationError("clipping_loss: spot and aperture must be positive");
    // Angular integrand is a trigonometric polynomial of degree 2N times a
    // radial factor, so an equispaced rule with > 2N + 1 points is exact.
    const int n_phi = 4 * (order.total() + 2);
    std::vector<double> cosv(n_phi), sinv(n_phi);
    for (int k = 0; k < n_phi; ++k)
    {
        const double phi = 2.0 * kPi<double> * k / n_phi;
        cosv[k] = std::cos(phi);
        sinv[k] = std::sin(phi);
    }
    const double scale = std::sqrt(2.0) / spot;
    auto ring = [&](double r) {
        double acc = 0.0;
        for (int k = 0; k < n_phi; ++k)
        {
            const double hx = hermite_function(order.n, scale * r * cosv[k]);
            const double hy = hermite_function(order.m, scale * r * sinv[k]);
            acc += hx * hx * hy * hy;
        }
        return (2.0 / (spot * spot)) * acc * (2.0 * kPi<double> / n_phi) * r;
    };
    quad::Options opt;
    opt.abs_tol = 1e-300;
    opt.rel_tol = 1e-11;
    opt.max_intervals = 20000;
    const double outside = quad::integrate_to_infinity(ring, aperture, spot, opt).value;
    if (outside < 1e-80)
        return 0.0;
    return std::min(outside, 1.0);
}

double clipping_loss(const CavityGeometry &geom, const CavityMode &mode, const ModeOrder &order, int mirror)
{
    if (mirror == 1)
        return clipping_loss(order, mode.spot_mirror1, geom.aperture1);
    if (mirror == 2)
        return clipping_loss(order, mode.spot_mirror2, geom.aperture2);
    throw ValidationError("mirror index must be 1 or 2");
}

FinesseResult finesse(const CavityGeometry &geom, const CavityMode &mode, const ModeOrder &order)
{
    geom.validate();
    const double loss = geom.transmission1 + geom.transmission2 + geom.loss1 + geom.loss2 +
                        clipping_loss(geom, mode, order, 1) + clipping_loss(geom, mode, order, 2);
    if (!(loss > 0))
        throw ValidationError("finesse: total round-trip loss must be positive");
    if (loss >= 1.0)
        throw OverdampedError("finesse: total round-trip loss >= 1, no resonance");
    FinesseResult r;
    r.round_trip_loss = loss;
    r.finesse = 2.0 * kPi<double> / loss;
    r.linewidth = mode.fsr / r.finesse;
    return r;
}

} // namespace ffpc
