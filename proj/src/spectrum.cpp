#include "ffpc/spectrum.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <sstream>

#include "ffpc/optimize.hpp"

namespace ffpc
{
void ScanConfig::validate() const
{
    if (!(span > 0) || !std::isfinite(span))
        throw ValidationError("scan span must be positive");
    if (samples < 100)
        throw ValidationError("scan needs at least 100 samples");
    if (!(sideband_fraction >= 0 && sideband_fraction <= 0.5))
        throw ValidationError("sideband power fraction must lie in [0, 0.5]");
    if (!(sideband_frequency >= 0))
        throw ValidationError("sideband frequency must be >= 0");
    if (!(noise_rms >= 0))
        throw ValidationError("noise RMS must be >= 0");
}

namespace
{
double lorentzian(double x, double center, double height, double fwhm)
{
    const double u = 2.0 * (x - center) / fwhm;
    return height / (1.0 + u * u);
}

// Offset folded into [-fsr/2, fsr/2) around zero.
double fold(double offset, double fsr_hz)
{
    double f = std::fmod(offset, fsr_hz);
    if (f >= 0.5 * fsr_hz)
        f -= fsr_hz;
    if (f < -0.5 * fsr_hz)
        f += fsr_hz;
    return f;
}
} // namespace

TransmissionSpectrum synthesize(const CavityGeometry &geom, const CavityMode &mode, const CouplingSet &coupling,
                                const TransmissionModel &model, const ScanConfig &scan)
{
    geom.validate();
    scan.validate();
    coupling.validate();
    if (std::abs(geom.wavelength - mode.wavelength) > 1e-12 * geom.wavelength)
        throw ValidationError("synthesize: cavity geometry and mode use different wavelengths");
    const double fsr_hz = mode.fsr;
    if (!(fsr_hz > 0))
        throw ValidationError("synthesize: free spectral range must be positive");
    if (scan.sideband_frequency >= 0.5 * fsr_hz)
        throw ValidationError("synthesize: sidebands at or beyond FSR/2 overlap the neighbouring longitudinal order");

    TransmissionModel tm = model;
    tm.double_sided = model.double_sided || scan.double_sided;
    const auto trans = transmissions(coupling, tm);

    std::vector<ModeOrder> orders;
    for (const auto &[o, t] : trans)
        orders.push_back(o);
    const auto offsets = resonance_offsets(mode, orders);

    struct Line
    {
        double offset, height, fwhm;
        ModeOrder order;
    };
    std::vector<Line> lines;
    for (std::size_t i = 0; i < orders.size(); ++i)
    {
        const double h = trans.at(orders[i]);
        if (!(h > 0))
            continue;
        lines.push_back({offsets[i], h, fsr_hz / tm.finesse_of(orders[i]), orders[i]});
    }

    const bool sidebands = scan.sideband_frequency > 0 && scan.sideband_fraction > 0;
    const double carrier = sidebands ? 1.0 - 2.0 * scan.sideband_fraction : 1.0;

    TransmissionSpectrum sp;
    sp.detuning.resize(scan.samples);
    sp.intensity.assign(scan.samples, 0.0);
    const double lo = scan.center - 0.5 * scan.span;
    const double step = scan.span / double(scan.samples - 1);
    for (std::size_t i = 0; i < scan.samples; ++i)
        sp.detuning[i] = lo + step * double(i);
    const double hi = sp.detuning.back();

    for (const auto &ln : lines)
    {
        const long k_lo = long(std::floor((lo - ln.offset) / fsr_hz)) - 3;
        const long k_hi = long(std::ceil((hi - ln.offset) / fsr_hz)) + 3;
        for (long k = k_lo; k <= k_hi; ++k)
        {
            const double c = ln.offset + double(k) * fsr_hz;
            for (std::size_t i = 0; i < scan.samples; ++i)
            {
                const double x = sp.detuning[i];
                double v = carrier * lorentzian(x, c, ln.height, ln.fwhm);
                if (sidebands)
                    v += scan.sideband_fraction * (lorentzian(x, c - scan.sideband_frequency, ln.height, ln.fwhm) +
                                                   lorentzian(x, c + scan.sideband_frequency, ln.height, ln.fwhm));
                sp.intensity[i] += v;
            }
        }
    }

    // Annotations: one FSR around the scan centre, degenerate orders merged.
    std::vector<Line> sorted = lines;
    std::sort(sorted.begin(), sorted.end(),
              [&](const Line &a, const Line &b) { return fold(a.offset, fsr_hz) < fold(b.offset, fsr_hz); });
    for (const auto &ln : sorted)
    {
        const double c = scan.center + fold(ln.offset - scan.center, fsr_hz);
        bool merged = false;
        for (auto &a : sp.annotations)
        {
            if (!a.sideband && std::abs(fold(a.center - c, fsr_hz)) < 0.5 * std::min(a.fwhm, ln.fwhm))
            {
                a.height += carrier * ln.height;
                a.orders.push_back(ln.order);
                merged = true;
                break;
            }
        }
        if (!merged)
            sp.annotations.push_back({c, carrier * ln.height, ln.fwhm, {ln.order}, false});
    }
    if (sidebands)
    {
        const auto carriers = sp.annotations;
        for (const auto &a : carriers)
            for (double sgn : {-1.0, 1.0})
                sp.annotations.push_back({a.center + sgn * scan.sideband_frequency,
                                          a.height / carrier * scan.sideband_fraction, a.fwhm, a.orders, true});
    }

    if (scan.noise_rms > 0)
    {
        std::mt19937_64 rng(scan.seed);
        std::normal_distribution<double> noise(0.0, scan.noise_rms);
        for (auto &v : sp.intensity)
            v += noise(rng);
    }
    for (auto &v : sp.intensity)
        v = std::max(v, 0.0);
    return sp;
}

double integrate_spectrum(const TransmissionSpectrum &spectrum)
{
    double s = 0.0;
    for (std::size_t i = 1; i < spectrum.detuning.size(); ++i)
        s += 0.5 * (spectrum.intensity[i] + spectrum.intensity[i - 1]) *
             (spectrum.detuning[i] - spectrum.detuning[i - 1]);
    return s;
}

namespace
{
double median(std::vector<double> v)
{
    if (v.empty())
        return 0.0;
    auto mid = v.begin() + std::ptrdiff_t(v.size() / 2);
    std::nth_element(v.begin(), mid, v.end());
    return *mid;
}

// Robust noise RMS from first differences (insensitive to smooth peaks).
double estimate_noise(const std::vector<double> &y)
{
    std::vector<double> d;
    d.reserve(y.size());
    for (std::size_t i = 1; i < y.size(); ++i)
        d.push_back(y[i] - y[i - 1]);
    const double med = median(d);
    for (auto &v : d)
        v = std::abs(v - med);
    return 1.4826 * median(d) / std::sqrt(2.0);
}

struct Candidate
{
    std::size_t index;
    double prominence;
};

// Mean of max(mu + e, 0) for Gaussian e of RMS sigma; recorded intensities
// are clipped at zero, which lifts the apparent floor by about 0.4 sigma.
double clipped_mean(double mu, double sigma)
{
    if (!(sigma > 0))
        return mu;
    const double t = mu / sigma;
    return mu * 0.5 * std::erfc(-t / std::sqrt(2.0)) + sigma * std::exp(-0.5 * t * t) / std::sqrt(2.0 * kPi<double>);
}

FittedPeak fit_peak(const std::vector<double> &x, const std::vector<double> &y, std::size_t lo, std::size_t hi,
                    FittedPeak init, double noise, double clip_sigma, std::vector<std::string> &warnings)
{
    const std::size_t n = hi - lo;
    if (n < 5)
        return init;
    const double fw0 = init.fwhm, h0 = std::max(init.height, 1e-300), c0 = init.center;
    auto residual = [&](const opt::Vector &p) {
        const double c = c0 + p[0] * fw0;
        const double h = p[1] * h0;
        const double fw = std::abs(p[2]) * fw0;
        const double base = p[3] * h0;
        opt::Vector r(static_cast<Eigen::Index>(n));
        for (std::size_t i = 0; i < n; ++i)
            r[Eigen::Index(i)] = clipped_mean(lorentzian(x[lo + i], c, h, fw) + base, clip_sigma) - y[lo + i];
        return r;
    };
    opt::Vector p0(4);
    p0 << 0.0, 1.0, 1.0, init.baseline / h0;
    opt::LmOptions lm;
    lm.max_iterations = 200;
    const auto fit = opt::levenberg_marquardt(residual, p0, lm);
    FittedPeak out = init;
    if (!fit.converged || !(fit.x[1] > 0) || !std::isfinite(fit.cost))
    {
        std::ostringstream msg;
        msg << "Lorentzian fit did not converge for the peak near " << c0 << " Hz; using detection estimates";
        warnings.push_back(msg.str());
        return out;
    }
    out.center = c0 + fit.x[0] * fw0;
    out.height = fit.x[1] * h0;
    out.fwhm = std::abs(fit.x[2]) * fw0;
    out.baseline = fit.x[3] * h0;
    const Eigen::MatrixXd jtj = fit.jacobian.transpose() * fit.jacobian;
    Eigen::FullPivLU<Eigen::MatrixXd> lu(jtj);
    out.height_sigma = lu.isInvertible() ? noise * h0 * std::sqrt(std::max(lu.inverse()(1, 1), 0.0)) : INFINITY;
    return out;
}
} // namespace

SpectrumAnalysis analyze(const TransmissionSpectrum &spectrum, const ScanConfig &scan,
                         std::optional<double> cavity_length)
{
    const auto &xin = spectrum.detuning;
    const auto &yin = spectrum.intensity;
    if (xin.size() != yin.size())
        throw ValidationError("analyze: detuning and intensity lengths differ");
    if (xin.size() < 10)
        throw EmptySpectrumError("analyze: spectrum has fewer than 10 samples");
    std::vector<std::size_t> idx(xin.size());
    std::iota(idx.begin(), idx.end(), 0);
    std::sort(idx.begin(), idx.end(), [&](auto a, auto b) { return xin[a] < xin[b]; });
    std::vector<double> x(xin.size()), y(yin.size());
    for (std::size_t i = 0; i < idx.size(); ++i)
        x[i] = xin[idx[i]], y[i] = yin[idx[i]];
    const std::size_t n = x.size();

    SpectrumAnalysis out;
    const double floor = median(y);
    const auto top = std::size_t(std::max_element(y.begin(), y.end()) - y.begin());

    // Width of the tallest peak in samples sets the smoothing and the
    // minimum peak separation.
    const double half = floor + 0.5 * (y[top] - floor);
    std::size_t l = top, r = top;
    while (l > 0 && y[l] > half)
        --l;
    while (r + 1 < n && y[r] > half)
        ++r;
    const std::size_t width = std::max<std::size_t>(r - l, 1);
    const double dx = (x.back() - x.front()) / double(n - 1);
    const double fwhm_guess = double(width) * dx;

    const std::size_t k = std::max<std::size_t>(1, width / 4) | 1u;
    std::vector<double> s(n);
    {
        std::vector<double> cum(n + 1, 0.0);
        for (std::size_t i = 0; i < n; ++i)
            cum[i + 1] = cum[i] + y[i];
        const std::size_t h = k / 2;
        for (std::size_t i = 0; i < n; ++i)
        {
            const std::size_t a = i >= h ? i - h : 0;
            const std::size_t b = std::min(n, i + h + 1);
            s[i] = (cum[b] - cum[a]) / double(b - a);
        }
    }
    const double raw_noise = scan.noise_rms > 0 ? scan.noise_rms : estimate_noise(y);
    const double smooth_noise = raw_noise / std::sqrt(double(k));
    const double threshold = std::max(5.0 * smooth_noise, 1e-9 * (y[top] - floor));
    if (!(y[top] - floor > 5.0 * raw_noise) && !(s[top] - floor > threshold))
        throw EmptySpectrumError("analyze: no peak rises 5 noise RMS above the floor");

    // Zero readings mean the noise was clipped; the fit then models the clip.
    const bool clipped = std::count(y.begin(), y.end(), 0.0) > std::ptrdiff_t(n / 100);
    const double clip_sigma = clipped ? raw_noise : 0.0;

    std::vector<Candidate> cands;
    for (std::size_t i = 1; i + 1 < n; ++i)
    {
        if (!(s[i] > s[i - 1] && s[i] >= s[i + 1]) || s[i] - floor < threshold)
            continue;
        double min_l = s[i], min_r = s[i];
        std::size_t j = i;
        while (j > 0 && s[j - 1] <= s[i])
            min_l = std::min(min_l, s[--j]);
        j = i;
        while (j + 1 < n && s[j + 1] <= s[i])
            min_r = std::min(min_r, s[++j]);
        const double prom = s[i] - std::max(min_l, min_r);
        if (prom >= threshold)
            cands.push_back({i, prom});
    }
    if (cands.empty())
        throw EmptySpectrumError("analyze: no peak rises 5 noise RMS above the floor");

    // Minimum separation FWHM/2, higher prominence wins.
    std::sort(cands.begin(), cands.end(), [](auto &a, auto &b) { return a.prominence > b.prominence; });
    std::vector<Candidate> kept;
    for (const auto &c : cands)
    {
        const bool clash = std::any_of(kept.begin(), kept.end(), [&](const Candidate &o) {
            return std::abs(x[o.index] - x[c.index]) < 0.5 * fwhm_guess;
        });
        if (!clash)
            kept.push_back(c);
    }
    std::sort(kept.begin(), kept.end(), [](auto &a, auto &b) { return a.index < b.index; });

    for (std::size_t p = 0; p < kept.size(); ++p)
    {
        const std::size_t i = kept[p].index;
        const double reach = 2.5 * fwhm_guess;
        double left = x[i] - reach, right = x[i] + reach;
        if (p > 0)
            left = std::max(left, 0.5 * (x[kept[p - 1].index] + x[i]));
        if (p + 1 < kept.size())
            right = std::min(right, 0.5 * (x[kept[p + 1].index] + x[i]));
        const auto lo = std::size_t(std::lower_bound(x.begin(), x.end(), left) - x.begin());
        const auto hi = std::size_t(std::upper_bound(x.begin(), x.end(), right) - x.begin());
        FittedPeak init{x[i], y[i] - floor, fwhm_guess, floor, kept[p].prominence, false};
        init.height = std::max(s[i] - floor, kept[p].prominence);
        out.peaks.push_back(fit_peak(x, y, lo, hi, init, raw_noise, clip_sigma, out.warnings));
    }

    // Every cavity line is at least as broad as the fundamental. Narrow or
    // insignificant fits are noise.
    {
        const auto top_fit = std::max_element(out.peaks.begin(), out.peaks.end(),
                                              [](auto &a, auto &b) { return a.height < b.height; });
        const double min_width = 0.5 * top_fit->fwhm;
        const FittedPeak keep_top = *top_fit;
        const auto before = out.peaks.size();
        std::erase_if(out.peaks, [&](const FittedPeak &p) {
            if (p.center == keep_top.center && p.height == keep_top.height)
                return false;
            return p.fwhm < min_width || p.height < 5.0 * p.height_sigma;
        });
        if (out.peaks.size() < before)
        {
            std::ostringstream msg;
            msg << "discarded " << before - out.peaks.size() << " noise peak(s) narrower than half the main line "
                << "or below 5 sigma";
            out.warnings.push_back(msg.str());
        }
    }

    const auto fund_it = std::max_element(out.peaks.begin(), out.peaks.end(),
                                          [](auto &a, auto &b) { return a.height < b.height; });
    out.fundamental = std::size_t(fund_it - out.peaks.begin());

    // Axis calibration from the fundamental's sideband pair.
    const double omega = scan.sideband_frequency;
    if (omega > 0)
    {
        const auto &c0 = out.peaks[out.fundamental];
        double best_mismatch = 0.05;
        std::optional<double> spacing;
        for (const auto &lp : out.peaks)
        {
            const double dl = c0.center - lp.center;
            if (!(dl > 0.7 * omega && dl < 1.4 * omega) || lp.height >= c0.height)
                continue;
            for (const auto &rp : out.peaks)
            {
                const double dr = rp.center - c0.center;
                if (!(dr > 0.7 * omega && dr < 1.4 * omega) || rp.height >= c0.height)
                    continue;
                const double mismatch = std::abs(dl - dr) / (0.5 * (dl + dr));
                if (mismatch < best_mismatch)
                    best_mismatch = mismatch, spacing = 0.5 * (rp.center - lp.center);
            }
        }
        if (spacing)
        {
            out.axis_scale = omega / *spacing;
            out.calibrated = true;
        }
        else
        {
            out.warnings.push_back("sideband calibration missing: no symmetric sideband pair found around the "
                                   "fundamental; using the nominal frequency axis");
        }
    }
    for (auto &p : out.peaks)
    {
        p.center *= out.axis_scale;
        p.fwhm *= out.axis_scale;
    }

    if (omega > 0)
    {
        for (auto &p : out.peaks)
            for (const auto &q : out.peaks)
            {
                if (&p == &q || q.height <= p.height)
                    continue;
                const double tol = std::max(0.5 * q.fwhm, 0.01 * omega);
                if (std::abs(std::abs(p.center - q.center) - omega) < tol)
                {
                    p.sideband = true;
                    break;
                }
            }
    }

    const auto &fund = out.peaks[out.fundamental];
    out.linewidth = fund.fwhm;
    if (fund.fwhm < 4.0 * dx * out.axis_scale)
    {
        std::ostringstream msg;
        msg << "fundamental linewidth spans only " << fund.fwhm / (dx * out.axis_scale)
            << " samples; fitted heights and widths are unreliable below about 4";
        out.warnings.push_back(msg.str());
    }
    if (cavity_length)
    {
        out.fsr = fsr(*cavity_length);
        out.finesse = *out.fsr / out.linewidth;
    }
    double total = 0.0;
    for (const auto &p : out.peaks)
    {
        if (p.sideband)
            continue;
        if (out.fsr)
        {
            const double d = p.center - fund.center;
            if (d < -0.5 * *out.fsr || d >= 0.5 * *out.fsr)
                continue;
        }
        total += p.height;
    }
    out.beta = fund.height / total;
    return out;
}

} // namespace ffpc
