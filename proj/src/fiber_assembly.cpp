#include "ffpc/fiber_assembly.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <map>
#include <random>
#include <sstream>

#include "ffpc/optimize.hpp"

namespace ffpc
{
const char *to_string(SegmentKind kind)
{
    switch (kind)
    {
    case SegmentKind::single_mode:
        return "single_mode";
    case SegmentKind::graded_index:
        return "graded_index";
    case SegmentKind::multimode_spacer:
        return "multimode_spacer";
    }
    return "unknown";
}

void FiberSegmentSpec::validate() const
{
    const std::string name = to_string(kind);
    if (!(length >= 0) || !std::isfinite(length))
        throw ValidationError(name + " segment length must be >= 0");
    if (!(index >= 1) || !std::isfinite(index))
        throw ValidationError(name + " segment index must be >= 1");
    switch (kind)
    {
    case SegmentKind::single_mode:
        if (!(mode_field_radius > 0))
            throw ValidationError("single_mode segment needs a positive mode-field radius");
        break;
    case SegmentKind::graded_index:
        if (!(index > 1))
            throw ValidationError("graded_index on-axis index must exceed 1");
        if (!(gradient > 0) || !std::isfinite(gradient))
            throw ValidationError("graded_index gradient constant must be positive");
        if (!(core_radius > 0))
            throw ValidationError("graded_index core radius must be positive");
        break;
    case SegmentKind::multimode_spacer:
        if (!(core_radius > 0))
            throw ValidationError("multimode_spacer core radius must be positive");
        break;
    }
}

void AssemblySpec::validate() const
{
    static constexpr std::array kOrder{SegmentKind::single_mode, SegmentKind::graded_index,
                                       SegmentKind::multimode_spacer};
    if (segments.size() != kOrder.size())
        throw ValidationError("assembly must contain exactly three segments: single_mode, graded_index, "
                              "multimode_spacer");
    for (std::size_t i = 0; i < kOrder.size(); ++i)
    {
        if (segments[i].kind != kOrder[i])
            throw ValidationError(std::string("assembly segment ") + std::to_string(i) + " must be " +
                                  to_string(kOrder[i]) + ", got " + to_string(segments[i].kind));
        segments[i].validate();
    }
    if (facet_roc == 0.0 || !std::isfinite(facet_roc))
        throw ValidationError("facet radius of curvature must be finite and non-zero");
    if (!(splice_mfd_scale >= 0.8 && splice_mfd_scale <= 1.3))
        throw ValidationError("splice_mfd_scale must lie in [0.8, 1.3]");
}

AssemblySpec AssemblySpec::with_lengths(double grin_length, double mm_length) const
{
    AssemblySpec out = *this;
    out.segments.at(1).length = grin_length;
    out.segments.at(2).length = mm_length;
    return out;
}

FiberSegmentSpec FiberSegmentSpecBuilder::single_mode(double mode_field_radius, double index)
{
    FiberSegmentSpec s;
    s.kind = SegmentKind::single_mode;
    s.mode_field_radius = mode_field_radius;
    s.index = index;
    return s;
}

FiberSegmentSpec FiberSegmentSpecBuilder::graded_index(double length, const GrinProfile &profile)
{
    FiberSegmentSpec s;
    s.kind = SegmentKind::graded_index;
    s.length = length;
    s.index = profile.n0;
    s.gradient = profile.gradient;
    s.core_radius = profile.core_radius;
    return s;
}

FiberSegmentSpec FiberSegmentSpecBuilder::multimode_spacer(double length, double index, double core_radius)
{
    FiberSegmentSpec s;
    s.kind = SegmentKind::multimode_spacer;
    s.length = length;
    s.index = index;
    s.core_radius = core_radius;
    return s;
}

AssemblySpec default_assembly(double grin_length, double mm_length)
{
    AssemblySpec a;
    a.segments = {FiberSegmentSpecBuilder::single_mode(kDefaultSmModeRadius),
                  FiberSegmentSpecBuilder::graded_index(grin_length, kCalibratedGrin),
                  FiberSegmentSpecBuilder::multimode_spacer(mm_length)};
    a.facet_roc = 700e-6;
    a.splice_mfd_scale = kCalibratedSpliceScale;
    return a;
}

namespace
{
Element facet_element(const AssemblySpec &a, bool lensing)
{
    const double n_mm = a.spacer().index;
    return lensing ? curved_interface(a.facet_roc, n_mm, 1.0) : flat_interface(n_mm, 1.0);
}

// q just inside the GRIN entrance face.
BeamParameter grin_entrance_q(const AssemblySpec &a, double wavelength)
{
    const auto &sm = a.single_mode();
    const auto &grin = a.graded_index();
    const auto start = Beam::make(sm.mode_field_radius * a.splice_mfd_scale, 0.0, wavelength, sm.index);
    return apply_element(to_q(start, 0.0), flat_interface(sm.index, grin.index));
}

// q in the spacer glass at the GRIN-MM splice for a given GRIN length.
BeamParameter spacer_entrance_q(const AssemblySpec &a, const BeamParameter &q_in, double grin_length)
{
    const auto &grin = a.graded_index();
    const auto el = flat_interface(grin.index, a.spacer().index) * grin_section(grin_length, grin.index, grin.gradient);
    return apply_element(q_in, el);
}

void check_clipping(const AssemblySpec &a, const BeamParameter &q_in, double wavelength)
{
    const auto &grin = a.graded_index();
    const auto &mm = a.spacer();
    constexpr int kSamples = 64;
    for (int i = 0; i <= kSamples; ++i)
    {
        const double z = grin.length * double(i) / kSamples;
        const auto q = apply_element(q_in, grin_section(z, grin.index, grin.gradient));
        const double w = spot_radius_of(q, wavelength, grin.index);
        if (w > grin.core_radius)
        {
            std::ostringstream msg;
            msg << "beam radius " << w * 1e6 << " um exceeds GRIN core radius " << grin.core_radius * 1e6
                << " um at " << z * 1e6 << " um past the SM-GRIN splice";
            throw CoreClippingError(msg.str(), z);
        }
    }
    // In a homogeneous spacer w(z) is largest at one of the two ends.
    const auto q0 = spacer_entrance_q(a, q_in, grin.length);
    for (double z : {0.0, mm.length})
    {
        const double w = spot_radius_of(BeamParameter{q0.q + z}, wavelength, mm.index);
        if (w > mm.core_radius)
        {
            std::ostringstream msg;
            msg << "beam radius " << w * 1e6 << " um exceeds spacer core radius " << mm.core_radius * 1e6
                << " um at " << (grin.length + z) * 1e6 << " um past the SM-GRIN splice";
            throw CoreClippingError(msg.str(), grin.length + z);
        }
    }
}

struct Forward
{
    BeamParameter q_spacer_end;
    BeamParameter q_vacuum;
};

Forward forward(const AssemblySpec &a, double wavelength, bool lensing)
{
    const auto q_in = grin_entrance_q(a, wavelength);
    const auto q_mm = spacer_entrance_q(a, q_in, a.graded_index().length);
    const BeamParameter q_end{q_mm.q + a.spacer().length};
    return {q_end, apply_element(q_end, facet_element(a, lensing))};
}

double normalised_residual(double dw, double dz)
{
    return std::hypot(dw / kDesignWaistTol, dz / kDesignPositionTol);
}
} // namespace

Beam output_mode(const AssemblySpec &assembly, double wavelength, bool include_facet_lensing)
{
    assembly.validate();
    if (!(wavelength > 0))
        throw ValidationError("wavelength must be positive");
    check_clipping(assembly, grin_entrance_q(assembly, wavelength), wavelength);
    const auto f = forward(assembly, wavelength, include_facet_lensing);
    return beam_from_q(f.q_vacuum, 0.0, wavelength, 1.0);
}

OutputSensitivity output_mode_sensitivity(const AssemblySpec &assembly, double wavelength,
                                          bool include_facet_lensing)
{
    assembly.validate();
    const auto &grin = assembly.graded_index();
    const double n_mm = assembly.spacer().index;
    const auto q_in = grin_entrance_q(assembly, wavelength);
    const auto q_grin = apply_element(q_in, grin_section(grin.length, grin.index, grin.gradient));
    const auto f = forward(assembly, wavelength, include_facet_lensing);
    const auto facet = facet_element(assembly, include_facet_lensing);

    // Riccati law in a parabolic medium: dq/dz = 1 + g^2 q^2.
    const Complex<double> dq_grin = 1.0 + grin.gradient * grin.gradient * q_grin.q * q_grin.q;
    const Complex<double> dq_end_dgrin = (n_mm / grin.index) * dq_grin;
    const Complex<double> dq_end_dmm = 1.0;
    const Complex<double> den = facet.C() * f.q_spacer_end.q + facet.D();
    const Complex<double> dvac_dend = facet.determinant() / (den * den);

    const auto w = waist_of(f.q_vacuum, wavelength, 1.0);
    auto dw = [&](Complex<double> dq) { return wavelength / (2.0 * kPi<double> * w.waist_radius) * dq.imag(); };
    const Complex<double> dv_g = dvac_dend * dq_end_dgrin;
    const Complex<double> dv_m = dvac_dend * dq_end_dmm;
    return {dw(dv_g), -dv_g.real(), dw(dv_m), -dv_m.real()};
}

DesignResult design_assembly(const Beam &target, const AssemblySpec &base, const DesignConstraints &constraints,
                             double wavelength, bool include_facet_lensing)
{
    base.validate();
    target.validate();
    if (target.medium_index != 1.0)
        throw ValidationError("design target must be a vacuum beam");
    if (target.waist_position < 0)
        throw ValidationError("design target waist must lie outside the facet (z0 >= 0)");
    if (std::abs(target.wavelength - wavelength) > 1e-15)
        throw ValidationError("design target wavelength differs from the design wavelength");

    const auto &grin = base.graded_index();
    const double half_pitch = kPi<double> / grin.gradient;
    LengthRange grin_range = constraints.grin.value_or(LengthRange{0.0, half_pitch});
    grin_range.max = std::min(grin_range.max, half_pitch * (1.0 - 1e-12));
    if (!(grin_range.max >= grin_range.min) || grin_range.min < 0 || constraints.mm.min < 0 ||
        !(constraints.mm.max >= constraints.mm.min))
        throw ValidationError("design constraints describe an empty length range");

    // Target q on the glass side of the facet.
    const auto facet = facet_element(base, include_facet_lensing);
    const auto q_target = apply_element(to_q(target, 0.0), inverse(facet));
    const auto q_in = grin_entrance_q(base, wavelength);
    auto mismatch = [&](double l) { return spacer_entrance_q(base, q_in, l).q.imag() - q_target.q.imag(); };

    // The spacer only adds a real length to q, so Im q must be matched by the
    // GRIN alone; the spacer length then follows from Re q.
    std::vector<double> roots;
    constexpr int kGrid = 4096;
    const double span = grin_range.max - grin_range.min;
    std::vector<double> xs(kGrid + 1), fs(kGrid + 1);
    for (int i = 0; i <= kGrid; ++i)
    {
        xs[i] = grin_range.min + span * double(i) / kGrid;
        fs[i] = mismatch(xs[i]);
    }
    const double f_scale = std::abs(q_target.q.imag());
    for (int i = 0; i <= kGrid; ++i)
    {
        if (std::abs(fs[i]) <= 1e-13 * f_scale)
            roots.push_back(xs[i]);
        if (i < kGrid && (fs[i] < 0) != (fs[i + 1] < 0) && fs[i] != 0 && fs[i + 1] != 0)
            roots.push_back(opt::brent_root(mismatch, xs[i], xs[i + 1], fs[i], fs[i + 1], 1e-16));
        // Tangent roots: a local minimum of |f| between grid points.
        if (i > 0 && i < kGrid && std::abs(fs[i]) < std::abs(fs[i - 1]) && std::abs(fs[i]) < std::abs(fs[i + 1]) &&
            (fs[i - 1] < 0) == (fs[i] < 0) && (fs[i + 1] < 0) == (fs[i] < 0))
        {
            double a = xs[i - 1], b = xs[i + 1];
            const double phi = 0.5 * (std::sqrt(5.0) - 1.0);
            for (int it = 0; it < 200 && b - a > 1e-16; ++it)
            {
                const double c = b - phi * (b - a), d = a + phi * (b - a);
                if (std::abs(mismatch(c)) < std::abs(mismatch(d)))
                    b = d;
                else
                    a = c;
            }
            const double x = 0.5 * (a + b);
            if (std::abs(mismatch(x)) <= 1e-10 * f_scale)
                roots.push_back(x);
        }
    }
    std::sort(roots.begin(), roots.end());

    std::optional<DesignResult> best;
    for (double l : roots)
    {
        const double mm = q_target.q.real() - spacer_entrance_q(base, q_in, l).q.real();
        if (!grin_range.contains(l, 1e-12) || !constraints.mm.contains(mm, 1e-12))
            continue;
        const double lg = std::clamp(l, grin_range.min, grin_range.max);
        const double lm = std::clamp(mm, constraints.mm.min, constraints.mm.max);
        Beam achieved;
        try
        {
            achieved = output_mode(base.with_lengths(lg, lm), wavelength, include_facet_lensing);
        }
        catch (const CoreClippingError &)
        {
            continue;
        }
        DesignResult r{lg, lm, achieved.waist_radius - target.waist_radius,
                       achieved.waist_position - target.waist_position, 0.0};
        r.residual = normalised_residual(r.waist_error, r.position_error);
        if (r.residual < 1.0)
        {
            best = r;
            break;
        }
    }
    if (best)
        return *best;

    // Unreachable: report the best compromise from a multistart simplex search.
    double best_residual = std::numeric_limits<double>::infinity();
    auto objective = [&](const opt::Vector &x) {
        const double lg = std::clamp(x[0] * 1e-6, grin_range.min, grin_range.max);
        const double lm = std::clamp(x[1] * 1e-6, constraints.mm.min, constraints.mm.max);
        const auto f = forward(base.with_lengths(lg, lm), wavelength, include_facet_lensing);
        if (!f.q_vacuum.is_physical())
            return std::numeric_limits<double>::max();
        const auto w = waist_of(f.q_vacuum, wavelength, 1.0);
        return normalised_residual(w.waist_radius - target.waist_radius, w.distance_ahead - target.waist_position);
    };
    for (int s = 0; s < 4; ++s)
    {
        opt::Vector x0(2), step(2);
        x0 << (grin_range.min + span * (2.0 * s + 1.0) / 8.0) * 1e6,
            0.5 * (constraints.mm.min + constraints.mm.max) * 1e6;
        step << std::max(span * 1e6 / 8.0, 1e-3), std::max((constraints.mm.max - constraints.mm.min) * 1e6 / 4.0, 1e-3);
        const auto r = opt::nelder_mead(objective, x0, step);
        best_residual = std::min(best_residual, r.value);
    }
    std::ostringstream msg;
    msg << "no assembly reaches w0 = " << target.waist_radius * 1e6 << " um at z0 = " << target.waist_position * 1e6
        << " um within the length constraints (best normalised residual " << best_residual << ")";
    throw NoSolutionError(msg.str(), best_residual);
}

GrinCalibration calibrate_grin(const Beam &target, const AssemblySpec &assembly, double wavelength,
                               bool include_facet_lensing)
{
    assembly.validate();
    target.validate();
    const double l_grin = assembly.graded_index().length;
    if (!(l_grin > 0))
        throw ValidationError("calibration needs a non-zero GRIN length");

    auto with = [&](double g, double scale) {
        AssemblySpec a = assembly;
        a.segments[1].gradient = g;
        a.splice_mfd_scale = scale;
        return a;
    };
    // Parameters: (g l / rad, scale); residual in micrometres.
    auto residual = [&](const opt::Vector &x) {
        opt::Vector r(2);
        const double g = x[0] / l_grin;
        if (!(g > 0) || !(x[1] > 0.1 && x[1] < 10.0))
        {
            r.setConstant(1e6);
            return r;
        }
        AssemblySpec a = with(g, x[1]);
        const auto f = forward(a, wavelength, include_facet_lensing);
        if (!f.q_vacuum.is_physical())
        {
            r.setConstant(1e6);
            return r;
        }
        const auto w = waist_of(f.q_vacuum, wavelength, 1.0);
        r << (w.waist_radius - target.waist_radius) * 1e6, (w.distance_ahead - target.waist_position) * 1e6;
        return r;
    };

    std::optional<GrinCalibration> best;
    double best_cost = std::numeric_limits<double>::infinity();
    for (double phase : {0.3, 0.7, 1.1, 1.5, 1.9, 2.3, 2.7, 3.1})
    {
        for (double scale : {0.9, 1.0, 1.15})
        {
            opt::Vector x0(2);
            x0 << phase, scale;
            const auto fit = opt::levenberg_marquardt(residual, x0);
            const double g = fit.x[0] / l_grin;
            const double s = fit.x[1];
            if (!(g > 0) || s < 0.8 || s > 1.3 || fit.x[0] >= kPi<double>)
                continue;
            const double cost = fit.cost;
            const bool better = cost < best_cost - 1e-18 ||
                                (std::abs(cost - best_cost) <= 1e-18 && best &&
                                 std::abs(s - 1.0) < std::abs(best->splice_mfd_scale - 1.0));
            if (better)
            {
                best_cost = cost;
                best = GrinCalibration{g, s, fit.residual[0] * 1e-6, fit.residual[1] * 1e-6};
            }
        }
    }
    if (!best || std::abs(best->waist_error) > kDesignWaistTol || std::abs(best->position_error) > kDesignPositionTol)
        throw NoSolutionError("GRIN calibration found no gradient/splice-scale pair reproducing the target",
                              best ? normalised_residual(best->waist_error, best->position_error)
                                   : std::numeric_limits<double>::infinity());
    return *best;
}

double knife_edge_fraction(double x, double w)
{
    return 0.5 * std::erfc(std::sqrt(2.0) * x / w);
}

KnifeEdgeDataset simulate_knife_edge(const Beam &beam, const std::vector<double> &z_list,
                                     const std::vector<double> &x_list, double noise_rms, std::uint64_t seed)
{
    beam.validate();
    if (noise_rms < 0)
        throw ValidationError("knife-edge noise RMS must be >= 0");
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> noise(0.0, 1.0);
    KnifeEdgeDataset out;
    out.reserve(z_list.size() * x_list.size());
    for (double z : z_list)
    {
        const double w = spot_radius(beam, z);
        for (double x : x_list)
        {
            double p = knife_edge_fraction(x, w);
            if (noise_rms > 0)
                p = std::clamp(p + noise_rms * noise(rng), 0.0, 1.0);
            out.push_back({z, x, p});
        }
    }
    return out;
}

namespace
{
// Per-plane radius from the x where P crosses erfc(1/sqrt 2)/2, i.e. x = w/2.
std::optional<double> plane_radius(std::vector<std::pair<double, double>> pts)
{
    std::sort(pts.begin(), pts.end());
    const double level = 0.5 * std::erfc(1.0 / std::sqrt(2.0));
    for (std::size_t i = 0; i + 1 < pts.size(); ++i)
    {
        const auto [x0, p0] = pts[i];
        const auto [x1, p1] = pts[i + 1];
        if ((p0 - level) * (p1 - level) <= 0 && p0 != p1)
        {
            const double x = x0 + (level - p0) * (x1 - x0) / (p1 - p0);
            if (x > 0)
                return 2.0 * x;
        }
    }
    return std::nullopt;
}
} // namespace

BeamFit fit_beam(const KnifeEdgeDataset &data, double wavelength)
{
    if (!(wavelength > 0))
        throw ValidationError("fit_beam: wavelength must be positive");
    std::map<double, std::vector<std::pair<double, double>>> planes;
    for (const auto &s : data)
    {
        if (!std::isfinite(s.z) || !std::isfinite(s.knife_position) || !std::isfinite(s.power_fraction))
            throw ValidationError("fit_beam: non-finite sample");
        planes[s.z].emplace_back(s.knife_position, s.power_fraction);
    }
    std::size_t usable = 0;
    for (const auto &[z, pts] : planes)
        if (pts.size() >= 5)
            ++usable;
    if (usable < 2)
        throw ValidationError("fit_beam needs at least 2 distinct z planes with at least 5 edge positions each");

    // Initial guess from a hyperbola through per-plane radii: w^2 = a + b z + c z^2.
    std::vector<std::pair<double, double>> radii;
    for (const auto &[z, pts] : planes)
        if (auto w = plane_radius(pts))
            radii.emplace_back(z, *w);
    if (radii.empty())
        throw FitError("fit_beam: no plane crosses the w/2 transmission level", 0, 0.0);
    auto min_it = std::min_element(radii.begin(), radii.end(), [](auto &a, auto &b) { return a.second < b.second; });
    double w0_guess = min_it->second, z0_guess = min_it->first;
    if (radii.size() >= 3)
    {
        const double zs = 1e-6;
        Eigen::MatrixXd A(radii.size(), 3);
        Eigen::VectorXd y(radii.size());
        for (std::size_t i = 0; i < radii.size(); ++i)
        {
            const double z = radii[i].first / zs;
            A.row(i) << 1.0, z, z * z;
            y[i] = std::pow(radii[i].second / zs, 2);
        }
        const Eigen::Vector3d c = A.colPivHouseholderQr().solve(y);
        if (c[2] > 0)
        {
            const double z0 = -c[1] / (2.0 * c[2]);
            const double w0sq = c[0] - c[2] * z0 * z0;
            if (w0sq > 0)
                w0_guess = std::sqrt(w0sq) * zs, z0_guess = z0 * zs;
        }
    }

    auto residual = [&](const opt::Vector &x) {
        const Beam b{std::abs(x[0]) * 1e-6, x[1] * 1e-6, wavelength, 1.0};
        opt::Vector r(data.size());
        for (std::size_t i = 0; i < data.size(); ++i)
            r[Eigen::Index(i)] = knife_edge_fraction(data[i].knife_position, spot_radius(b, data[i].z)) -
                                 data[i].power_fraction;
        return r;
    };
    opt::Vector x0(2);
    x0 << w0_guess * 1e6, z0_guess * 1e6;
    opt::LmOptions lm;
    lm.max_iterations = 500;
    auto fit = opt::levenberg_marquardt(residual, x0, lm);
    if (!fit.converged)
        throw FitError("fit_beam: Levenberg-Marquardt hit the iteration cap (" + std::to_string(fit.iterations) +
                           " iterations, cost " + std::to_string(fit.cost) + ")",
                       fit.iterations, fit.cost);
    BeamFit out;
    out.beam = Beam::make(std::abs(fit.x[0]) * 1e-6, fit.x[1] * 1e-6, wavelength, 1.0);
    out.covariance = opt::parameter_covariance(fit) * 1e-12;
    out.rms_residual = std::sqrt(fit.residual.squaredNorm() / double(fit.residual.size()));
    out.iterations = fit.iterations;
    return out;
}

} // namespace ffpc
