#include "ffpc/mode_matching.hpp"

#include <cmath>
#include <numeric>
#include <sstream>

#include "ffpc/hermite.hpp"
#include "ffpc/quadrature.hpp"

namespace ffpc
{
double CouplingSet::total() const
{
    double s = 0.0;
    for (const auto &[order, eta] : entries)
        s += eta;
    return s;
}

double CouplingSet::eta(int n, int m) const
{
    auto it = entries.find({n, m});
    return it == entries.end() ? 0.0 : it->second;
}

double CouplingSet::family(int total_order) const
{
    double s = 0.0;
    for (const auto &[order, eta] : entries)
        if (order.total() == total_order)
            s += eta;
    return s;
}

void CouplingSet::validate() const
{
    for (const auto &[order, eta] : entries)
    {
        if (order.n < 0 || order.m < 0)
            throw ValidationError("coupling orders must be non-negative");
        if (!(eta >= -1e-12 && eta <= 1.0 + 1e-9))
            throw ValidationError("coupling efficiencies must lie in [0, 1]");
    }
    if (total() > 1.0 + 1e-9)
        throw ValidationError("coupling efficiencies sum to more than 1");
}

double TransmissionModel::finesse_of(const ModeOrder &o) const
{
    auto it = finesse.find(o);
    return it == finesse.end() ? default_finesse : it->second;
}

void TransmissionModel::validate() const
{
    if (!(efficiency > 0 && efficiency <= 1))
        throw ValidationError("transmission model efficiency must lie in (0, 1]");
    if (!(input_intensity > 0))
        throw ValidationError("input intensity must be positive");
    if (!(default_finesse > 0))
        throw ValidationError("finesse must be positive");
    for (const auto &[o, f] : finesse)
        if (!(f > 0))
            throw ValidationError("finesse must be positive");
}

namespace
{
void check_aligned(const Misalignment &mis)
{
    if (mis.offset != 0.0 || mis.tilt != 0.0)
        throw NotImplementedError("transverse offset and tilt are not modelled; only coaxial coupling is supported");
}

void check_comparable(const Beam &a, const Beam &b)
{
    a.validate();
    b.validate();
    if (std::abs(a.wavelength - b.wavelength) > 1e-12 * a.wavelength)
        throw ValidationError("cannot compare beams of different wavelengths");
    if (std::abs(a.medium_index - b.medium_index) > 1e-12)
        throw ValidationError("cannot compare beams described in different media");
}
} // namespace

double eta00(const Beam &a, const Beam &b, const Misalignment &mis)
{
    check_aligned(mis);
    check_comparable(a, b);
    const double wa = a.waist_radius, wb = b.waist_radius;
    const double ratio = wa / wb + wb / wa;
    const double dz = a.waist_position - b.waist_position;
    const double defocus = (a.wavelength / a.medium_index) * dz / (kPi<double> * wa * wb);
    return 4.0 / (ratio * ratio + defocus * defocus);
}

double eta00(const Beam &input, const CavityMode &cavity, const Misalignment &mis)
{
    return eta00(input, cavity.beam(), mis);
}

RadialField gaussian_radial_field(const Beam &beam, double z)
{
    beam.validate();
    const double k = 2.0 * kPi<double> * beam.medium_index / beam.wavelength;
    const Complex<double> inv_q = 1.0 / to_q(beam, z).q;
    const double w = spot_radius(beam, z);
    const double amp = std::sqrt(2.0 / kPi<double>) / w;
    return [=](double r) { return amp * std::exp(Complex<double>(0.0, -0.5 * k * r * r) * inv_q); };
}

RadialField laguerre_gauss_radial_field(int p, double spot, double wavefront_radius, double wavelength)
{
    if (p < 0 || !(spot > 0) || !(wavelength > 0))
        throw ValidationError("laguerre_gauss_radial_field: invalid parameters");
    const double k = 2.0 * kPi<double> / wavelength;
    const double curv = std::isinf(wavefront_radius) ? 0.0 : 1.0 / wavefront_radius;
    const double amp = std::sqrt(2.0 / kPi<double>) / spot;
    return [=](double r) {
        const double x = 2.0 * r * r / (spot * spot);
        const double radial = amp * std::laguerre(unsigned(p), x) * std::exp(-0.5 * x);
        return radial * std::exp(Complex<double>(0.0, -0.5 * k * r * r * curv));
    };
}

double numeric_overlap_oracle(const RadialField &a, const RadialField &b, double scale)
{
    if (!(scale > 0))
        throw ValidationError("numeric_overlap_oracle: scale must be positive");
    quad::Options opt;
    opt.abs_tol = 1e-13;
    opt.rel_tol = 1e-13;
    opt.max_intervals = 20000;
    const double two_pi = 2.0 * kPi<double>;
    auto norm = [&](const RadialField &u) {
        return quad::integrate_to_infinity([&](double r) { return std::norm(u(r)) * two_pi * r; }, 0.0, scale, opt)
            .value;
    };
    const double na = norm(a), nb = norm(b);
    if (std::abs(na - 1.0) > 1e-8 || std::abs(nb - 1.0) > 1e-8)
    {
        std::ostringstream msg;
        msg << "numeric_overlap_oracle: fields must be normalised (got " << na << ", " << nb << ")";
        throw ValidationError(msg.str());
    }
    const auto overlap = quad::integrate_to_infinity(
        [&](double r) { return a(r) * std::conj(b(r)) * (two_pi * r); }, 0.0, scale, opt);
    return std::norm(overlap.value);
}

std::vector<std::complex<double>> hg_coefficients_1d(const Beam &input, const CavityMode &cavity, int nmax)
{
    const Beam cav = cavity.beam();
    check_comparable(input, cav);
    const double k = 2.0 * kPi<double> / input.wavelength;
    const Complex<double> inv_q_in = 1.0 / to_q(input, 0.0).q;
    const double w_in = spot_radius(input, 0.0);
    const double w_c = spot_radius(cav, 0.0);
    const double inv_r_c = (1.0 / to_q(cav, 0.0).q).real();
    const double amp = std::pow(2.0 / kPi<double>, 0.25) / std::sqrt(w_in) * std::pow(2.0, 0.25) / std::sqrt(w_c);
    const double xi = std::sqrt(2.0) / w_c;

    quad::Options opt;
    opt.abs_tol = 1e-13;
    opt.rel_tol = 1e-13;
    opt.max_intervals = 20000;
    std::vector<std::complex<double>> out(std::size_t(nmax) + 1);
    for (int n = 0; n <= nmax; ++n)
    {
        auto integrand = [&](double x) {
            const double x2 = x * x;
            const Complex<double> in = std::exp(Complex<double>(0.0, -0.5 * k * x2) * inv_q_in);
            const Complex<double> cav_phase = std::exp(Complex<double>(0.0, 0.5 * k * x2 * inv_r_c));
            return amp * hermite_function(n, xi * x) * in * cav_phase;
        };
        out[std::size_t(n)] = quad::integrate_real_line(integrand, std::min(w_in, w_c), opt).value;
    }
    return out;
}

CouplingSet decompose(const Beam &input, const CavityMode &cavity, int max_order, const Misalignment &mis)
{
    check_aligned(mis);
    if (max_order < 0 || max_order > 20)
        throw ValidationError("decompose: max_order must lie in [0, 20]");
    const auto a = hg_coefficients_1d(input, cavity, max_order);
    CouplingSet out;
    out.max_order = max_order;
    for (int n = 0; n <= max_order; ++n)
        for (int m = 0; n + m <= max_order; ++m)
            out.entries[{n, m}] = std::norm(a[std::size_t(n)]) * std::norm(a[std::size_t(m)]);
    if (out.total() > 1.0 + 1e-9)
        throw NumericalError("decompose: coupling sum exceeds 1; quadrature failed to converge");
    return out;
}

std::map<ModeOrder, double> transmissions(const CouplingSet &c, const TransmissionModel &model)
{
    model.validate();
    std::map<ModeOrder, double> out;
    std::map<int, double> families;
    if (model.double_sided)
        for (const auto &[order, eta] : c.entries)
            families[order.total()] += eta;
    for (const auto &[order, eta] : c.entries)
    {
        const double f = model.finesse_of(order);
        const double filter = model.double_sided ? families[order.total()] : 1.0;
        out[order] = model.efficiency * eta * filter * f * f * model.input_intensity;
    }
    return out;
}

double beta(const CouplingSet &c)
{
    if (c.entries.empty())
        throw ValidationError("beta: empty coupling set");
    const double s = c.total();
    if (!(s > 0))
        throw ValidationError("beta: coupling set sums to zero");
    return c.eta(0, 0) / s;
}

double beta_from_transmissions(const std::map<ModeOrder, double> &t)
{
    if (t.empty())
        throw ValidationError("beta: empty transmission table");
    double s = 0.0;
    for (const auto &[o, v] : t)
        s += v;
    if (!(s > 0))
        throw ValidationError("beta: transmissions sum to zero");
    auto it = t.find({0, 0});
    return (it == t.end() ? 0.0 : it->second) / s;
}

double beta_from_transmissions(const std::vector<double> &t)
{
    if (t.empty())
        throw ValidationError("beta: empty transmission list");
    const double s = std::accumulate(t.begin(), t.end(), 0.0);
    if (!(s > 0))
        throw ValidationError("beta: transmissions sum to zero");
    return t.front() / s;
}

double infer_eta_at_length(double t00, double f00, double t00_ref, double f00_ref, double eta00_ref, double tolerance)
{
    if (!(t00 > 0 && f00 > 0 && t00_ref > 0 && f00_ref > 0))
        throw ValidationError("infer_eta_at_length: transmissions and finesses must be positive");
    if (!(eta00_ref > 0 && eta00_ref <= 1))
        throw ValidationError("infer_eta_at_length: reference efficiency must lie in (0, 1]");
    const double ratio = f00_ref / f00;
    const double eta = (t00 / t00_ref) * ratio * ratio * eta00_ref;
    if (eta > 1.0 + tolerance)
    {
        std::ostringstream msg;
        msg << "inferred eta00 = " << eta << " exceeds 1: transmission and finesse data are inconsistent";
        throw InconsistentDataError(msg.str());
    }
    return eta;
}

} // namespace ffpc
