#include "ffpc/sweep.hpp"

#include <algorithm>
#include <cmath>
#include <future>
#include <limits>
#include <thread>

namespace ffpc
{
std::vector<double> SweepRange::lengths() const
{
    if (!(start > 0) || !std::isfinite(start))
        throw ValidationError("sweep start length must be positive");
    if (step < 0 || !(stop >= start))
        throw ValidationError("sweep range must have stop >= start and step >= 0");
    if (step == 0.0 || stop == start)
        return {start};
    std::vector<double> out;
    const auto count = std::size_t(std::floor((stop - start) / step * (1.0 + 1e-12))) + 1;
    out.reserve(count);
    for (std::size_t i = 0; i < count; ++i)
        out.push_back(start + step * double(i));
    return out;
}

const char *to_string(SweepStatus s)
{
    switch (s)
    {
    case SweepStatus::ok:
        return "ok";
    case SweepStatus::unstable:
        return "unstable";
    case SweepStatus::overdamped:
        return "overdamped";
    }
    return "unknown";
}

SweepRow sweep_point(const Beam &input, const CavityGeometry &geom, const SweepOptions &options)
{
    constexpr double nan = std::numeric_limits<double>::quiet_NaN();
    SweepRow row;
    row.length = geom.length;
    CavityMode mode;
    try
    {
        mode = solve_mode(geom);
    }
    catch (const InstabilityError &)
    {
        row.status = SweepStatus::unstable;
        row.eta00 = row.beta = row.finesse = row.t00 = row.waist = row.waist_from_mirror1 = row.residual = nan;
        row.fsr = fsr(geom.length);
        row.uniform_damping = false;
        return row;
    }
    row.waist = mode.waist_radius;
    row.waist_from_mirror1 = mode.waist_from_mirror1;
    row.fsr = mode.fsr;
    row.eta00 = eta00(input, mode);

    const auto coupling = decompose(input, mode, options.max_order);
    row.residual = coupling.residual();
    ResonatorResponse resp;
    try
    {
        resp = resonator_response(coupling, geom, mode, options);
    }
    catch (const OverdampedError &)
    {
        row.status = SweepStatus::overdamped;
        row.beta = row.finesse = row.t00 = nan;
        row.uniform_damping = false;
        return row;
    }
    row.finesse = resp.model.default_finesse;
    for (const auto &[order, f] : resp.model.finesse)
        if (std::abs(f - row.finesse) > options.finesse_tolerance * row.finesse)
            row.uniform_damping = false;
    // Coupled orders that clip beyond recovery never resonate.
    for (const auto &[order, eta] : coupling.entries)
        if (eta >= 1e-14 && !resp.coupling.entries.count(order))
            row.uniform_damping = false;
    const auto t = transmissions(resp.coupling, resp.model);
    row.t00 = t.at({0, 0});
    row.beta = beta_from_transmissions(t);
    return row;
}

ResonatorResponse resonator_response(const Beam &input, const CavityGeometry &geom, const CavityMode &mode,
                                     const SweepOptions &options, bool double_sided)
{
    return resonator_response(decompose(input, mode, options.max_order), geom, mode, options, double_sided);
}

ResonatorResponse resonator_response(const CouplingSet &full, const CavityGeometry &geom, const CavityMode &mode,
                                     const SweepOptions &options, bool double_sided)
{
    ResonatorResponse out;
    out.coupling.max_order = full.max_order;
    out.model.efficiency = options.efficiency;
    out.model.input_intensity = options.input_intensity;
    out.model.double_sided = double_sided;
    out.model.default_finesse = finesse(geom, mode).finesse;
    for (const auto &[order, eta] : full.entries)
    {
        if (eta < 1e-14)
            continue;
        try
        {
            out.model.finesse[order] = finesse(geom, mode, order).finesse;
        }
        catch (const OverdampedError &)
        {
            continue;
        }
        out.coupling.entries[order] = eta;
    }
    return out;
}

std::vector<SweepRow> sweep_length(const Beam &input, const CavityGeometry &family, const SweepRange &range,
                                   const SweepOptions &options)
{
    const auto lengths = range.lengths();
    std::vector<SweepRow> rows(lengths.size());
    const std::size_t workers =
        std::max<std::size_t>(1, std::min<std::size_t>(std::thread::hardware_concurrency(), lengths.size()));
    std::vector<std::future<void>> jobs;
    for (std::size_t w = 0; w < workers; ++w)
    {
        jobs.push_back(std::async(std::launch::async, [&, w] {
            for (std::size_t i = w; i < lengths.size(); i += workers)
                rows[i] = sweep_point(input, family.with_length(lengths[i]), options);
        }));
    }
    for (auto &j : jobs)
        j.get();
    const bool any_stable =
        std::any_of(rows.begin(), rows.end(), [](const SweepRow &r) { return r.status != SweepStatus::unstable; });
    if (!any_stable)
        throw NoDataError("sweep range contains no stable cavity length");
    return rows;
}

std::vector<SweepRow> sweep_length(const AssemblySpec &assembly, bool include_facet_lensing,
                                   const CavityGeometry &family, const SweepRange &range, const SweepOptions &options)
{
    const Beam input = output_mode(assembly, family.wavelength, include_facet_lensing);
    return sweep_length(input, family, range, options);
}

} // namespace ffpc
