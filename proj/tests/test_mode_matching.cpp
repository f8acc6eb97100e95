#include <doctest.h>

#include "ffpc/mode_matching.hpp"
#include "oracles.hpp"

using namespace ffpc;
using oracle::cd;

namespace
{
constexpr double um = 1e-6;
constexpr double lambda = 854e-9;

CavityMode cavity(double L, double r1 = 700 * um, double r2 = 540 * um)
{
    CavityGeometry c;
    c.length = L;
    c.roc1 = r1;
    c.roc2 = r2;
    c.wavelength = lambda;
    return solve_mode(c);
}

// Complex q of a vacuum beam at plane z.
cd q_at(double w0, double z0, double z)
{
    return cd(z - z0, oracle::pi * w0 * w0 / lambda);
}

// One-dimensional Hermite-Gauss field of order n for beam parameter q,
// normalised numerically over [-x_max, x_max].
std::function<cd(double)> hg_1d(int n, cd q, double x_max)
{
    const double k = 2 * oracle::pi / lambda;
    const double w = std::sqrt(-lambda / (oracle::pi * (1.0 / q).imag()));
    auto raw = [=](double x) { return std::hermite(n, std::sqrt(2.0) * x / w) * std::exp(cd(0, -0.5 * k * x * x) / q); };
    const double norm = oracle::simpson([&](double x) { return std::norm(raw(x)); }, -x_max, x_max, 8000);
    return [=](double x) { return raw(x) / std::sqrt(norm); };
}

double overlap_1d(const std::function<cd(double)> &a, const std::function<cd(double)> &b, double x_max)
{
    const cd s = oracle::simpson([&](double x) { return a(x) * std::conj(b(x)); }, -x_max, x_max, 8000);
    return std::norm(s);
}

// Radial Gaussian from q, normalised to unit power numerically.
std::function<cd(double)> radial_gaussian(cd q, double r_max)
{
    const double k = 2 * oracle::pi / lambda;
    auto raw = [=](double r) { return std::exp(cd(0, -0.5 * k * r * r) / q); };
    const double norm =
        oracle::simpson([&](double r) { return std::norm(raw(r)) * 2 * oracle::pi * r; }, 0.0, r_max, 8000);
    return [=](double r) { return raw(r) / std::sqrt(norm); };
}

double radial_overlap(const std::function<cd(double)> &a, const std::function<cd(double)> &b, double r_max)
{
    return std::norm(oracle::simpson([&](double r) { return a(r) * std::conj(b(r)) * 2.0 * oracle::pi * r; }, 0.0,
                                     r_max, 8000));
}

CouplingSet make_set(std::initializer_list<std::pair<ModeOrder, double>> e, int max_order = 4)
{
    CouplingSet c;
    for (const auto &[o, v] : e)
        c.entries[o] = v;
    c.max_order = max_order;
    return c;
}
} // namespace

TEST_SUITE("mode_matching")
{
    TEST_CASE("eta00 closed form")
    {
        const auto a = Beam::make(8.1 * um, 230 * um, lambda);
        CHECK(eta00(a, a) == doctest::Approx(1.0).epsilon(1e-12));
        auto g = oracle::rng(3);
        for (int i = 0; i < 200; ++i)
        {
            const auto x = Beam::make(oracle::uniform(g, 1, 20) * um, oracle::uniform(g, -500, 500) * um, lambda);
            const auto y = Beam::make(oracle::uniform(g, 1, 20) * um, oracle::uniform(g, -500, 500) * um, lambda);
            const double e = eta00(x, y);
            CHECK(e == doctest::Approx(eta00(y, x)).epsilon(1e-14));
            CHECK(e <= 1.0);
            CHECK(e > 0.0);
        }
        // Any change in waist or position lowers the coupling.
        CHECK(eta00(a, Beam::make(8.1 * um, 231 * um, lambda)) < 1.0 - 1e-12);
        CHECK(eta00(a, Beam::make(8.11 * um, 230 * um, lambda)) < 1.0 - 1e-12);
        CHECK_THROWS_AS(eta00(a, Beam::make(8.1 * um, 230 * um, 866e-9)), ValidationError);
        CHECK_THROWS_AS(eta00(a, a, Misalignment{1e-6, 0.0}), NotImplementedError);
        CHECK_THROWS_AS(eta00(a, a, Misalignment{0.0, 1e-3}), NotImplementedError);
    }

    TEST_CASE("single-mode fibre baseline against the overlap integral")
    {
        const auto mode = cavity(426 * um);
        const auto sm = Beam::make(2.7 * um, 0.0, lambda);
        const double e = eta00(sm, mode);
        CHECK(e == doctest::Approx(0.29).epsilon(0.05));

        const double r_max = 60 * um;
        const auto a = radial_gaussian(q_at(2.7 * um, 0.0, 0.0), r_max);
        const auto b = radial_gaussian(q_at(mode.waist_radius, mode.waist_from_mirror1, 0.0), r_max);
        CHECK(radial_overlap(a, b, r_max) == doctest::Approx(e).epsilon(1e-6));

        // The library's own quadrature agrees too.
        const double lib = numeric_overlap_oracle(gaussian_radial_field(sm, 0.0),
                                                  gaussian_radial_field(mode.beam(), 0.0), 10 * um);
        CHECK(lib == doctest::Approx(e).epsilon(1e-6));
    }

    TEST_CASE("overlap is the same at every common plane")
    {
        const auto mode = cavity(426 * um);
        const auto fa = Beam::make(8.1 * um, 230 * um, lambda);
        const double e = eta00(fa, mode);
        for (double z : {-300 * um, 0.0, 213 * um, 426 * um, 2e-3})
        {
            const double r_max = 8 * spot_radius(fa, z) + 8 * spot_radius(mode.beam(), z);
            const auto a = radial_gaussian(q_at(fa.waist_radius, fa.waist_position, z), r_max);
            const auto b = radial_gaussian(q_at(mode.waist_radius, mode.waist_from_mirror1, z), r_max);
            CHECK(radial_overlap(a, b, r_max) == doctest::Approx(e).epsilon(1e-6));
        }
    }

    TEST_CASE("numeric overlap oracle")
    {
        const auto beam = Beam::make(8.1 * um, 230 * um, lambda);
        const auto u = gaussian_radial_field(beam, 100 * um);
        CHECK(numeric_overlap_oracle(u, u, 10 * um) == doctest::Approx(1.0).epsilon(1e-10));
        const double w = spot_radius(beam, 100 * um);
        const auto lg0 = laguerre_gauss_radial_field(0, w, 1e-3, lambda);
        const auto lg1 = laguerre_gauss_radial_field(1, w, 1e-3, lambda);
        CHECK(numeric_overlap_oracle(lg0, lg1, w) < 1e-10);
        CHECK(numeric_overlap_oracle(lg1, lg1, w) == doctest::Approx(1.0).epsilon(1e-10));
        auto twice = [&](double r) { return 2.0 * u(r); };
        CHECK_THROWS_AS(numeric_overlap_oracle(twice, u, 10 * um), ValidationError);
    }

    TEST_CASE("decomposition of a matched input")
    {
        const auto mode = cavity(426 * um);
        const auto c = decompose(mode.beam(), mode, 12);
        CHECK(c.eta(0, 0) == doctest::Approx(1.0).epsilon(1e-9));
        for (const auto &[o, v] : c.entries)
            if (o.total() > 0)
                CHECK(v < 1e-9);
    }

    TEST_CASE("decomposition against one-dimensional overlap integrals")
    {
        const auto mode = cavity(426 * um);
        for (const auto &input : {Beam::make(2.7 * um, 0.0, lambda), Beam::make(8.1 * um, 230 * um, lambda),
                                  Beam::make(6 * um, 50 * um, lambda)})
        {
            const auto c = decompose(input, mode, 8);
            const cd q_in = q_at(input.waist_radius, input.waist_position, 0.0);
            const cd q_cav = q_at(mode.waist_radius, mode.waist_from_mirror1, 0.0);
            const double x_max = 12 * std::max(spot_radius(input, 0.0), mode.spot_mirror1);
            const auto in = hg_1d(0, q_in, x_max);
            std::vector<double> a;
            for (int n = 0; n <= 8; ++n)
                a.push_back(overlap_1d(in, hg_1d(n, q_cav, x_max), x_max));
            for (int n = 0; n <= 8; ++n)
                for (int m = 0; n + m <= 8; ++m)
                    CHECK(c.eta(n, m) == doctest::Approx(a[n] * a[m]).epsilon(1e-6).scale(1e-3));
        }
    }

    TEST_CASE("decomposition on random pairs")
    {
        auto g = oracle::rng(11);
        int done = 0;
        while (done < 200)
        {
            const double L = oracle::uniform(g, 50, 520) * um;
            const auto mode = cavity(L);
            const auto input = Beam::make(oracle::uniform(g, 2, 15) * um, oracle::uniform(g, -200, 600) * um, lambda);
            const auto c = decompose(input, mode, 6);
            CHECK(c.eta(0, 0) == doctest::Approx(eta00(input, mode)).epsilon(1e-6));
            CHECK(c.total() <= 1.0 + 1e-9);
            for (const auto &[o, v] : c.entries)
                if (o.n % 2 || o.m % 2)
                    CHECK(v < 1e-12);
            ++done;
        }
    }

    TEST_CASE("completeness improves with truncation order")
    {
        // Pure waist-size mismatch at the waist plane of a symmetric cavity.
        const auto mode = cavity(400 * um, 700 * um, 700 * um);
        const auto input = Beam::make(1.3 * mode.waist_radius, mode.waist_from_mirror1, lambda);
        double last = INFINITY;
        for (int n : {4, 8, 12, 20})
        {
            const double r = decompose(input, mode, n).residual();
            CHECK(r >= -1e-9);
            CHECK(r <= last);
            last = r;
        }
        CHECK(last < 1e-4);

        // The SM baseline spreads its power over many even orders.
        const auto sm = decompose(Beam::make(2.7 * um, 0.0, lambda), cavity(426 * um), 12);
        CHECK(sm.eta(0, 0) == doctest::Approx(0.29).epsilon(0.05));
        CHECK(sm.family(2) > 0.05);
        CHECK(sm.eta(1, 0) < 1e-12);
        CHECK_THROWS_AS(decompose(Beam::make(2.7 * um, 0.0, lambda), cavity(426 * um), 21),
                        ValidationError);
    }

    TEST_CASE("beta")
    {
        CHECK(beta(make_set({{{0, 0}, 0.4}})) == 1.0);
        const auto c = make_set({{{0, 0}, 0.90}, {{2, 0}, 0.06}, {{0, 2}, 0.04}});
        CHECK(beta(c) == doctest::Approx(0.90).epsilon(1e-12));

        TransmissionModel equal;
        equal.default_finesse = 5e4;
        CHECK(beta_from_transmissions(transmissions(c, equal)) == doctest::Approx(0.90).epsilon(1e-12));

        TransmissionModel damped = equal;
        damped.finesse[{2, 0}] = 1e5;
        damped.finesse[{0, 2}] = 1e5;
        const double b = beta_from_transmissions(transmissions(c, damped));
        CHECK(b == doctest::Approx(0.9 / (0.9 + 4 * 0.1)).epsilon(1e-12));
        CHECK(b < 0.85);

        CHECK(beta_from_transmissions(std::vector<double>{3.0, 1.0}) == doctest::Approx(0.75));
        CHECK_THROWS_AS(beta(CouplingSet{}), ValidationError);
        CHECK_THROWS_AS(beta_from_transmissions(std::vector<double>{0.0, 0.0}), ValidationError);
    }

    TEST_CASE("transmissions follow the finesse-squared law")
    {
        const auto c = make_set({{{0, 0}, 0.7}, {{2, 0}, 0.1}, {{1, 1}, 0.05}, {{0, 2}, 0.1}});
        TransmissionModel m;
        m.efficiency = 0.6;
        m.input_intensity = 2.5;
        m.default_finesse = 1000;
        auto t = transmissions(c, m);
        CHECK(t[{0, 0}] == doctest::Approx(0.6 * 0.7 * 1e6 * 2.5).epsilon(1e-14));
        m.finesse[{0, 0}] = 2000;
        auto t2 = transmissions(c, m);
        CHECK(t2[{0, 0}] == doctest::Approx(4 * t[{0, 0}]).epsilon(1e-14));
        CHECK(t2[{2, 0}] == doctest::Approx(t[{2, 0}]).epsilon(1e-14));

        // Double-sided: a family transmits its summed efficiency squared.
        m.finesse.clear();
        m.double_sided = true;
        const auto td = transmissions(c, m);
        double fam2 = 0;
        for (const auto &[o, v] : td)
            if (o.total() == 2)
                fam2 += v;
        CHECK(fam2 == doctest::Approx(0.6 * 0.25 * 0.25 * 1e6 * 2.5).epsilon(1e-14));
        CHECK(td.at({0, 0}) == doctest::Approx(0.6 * 0.49 * 1e6 * 2.5).epsilon(1e-14));
        // Filtering at both ends favours the fundamental.
        CHECK(beta_from_transmissions(td) > beta(c));

        m.efficiency = 0.0;
        CHECK_THROWS_AS(transmissions(c, m), ValidationError);
    }

    TEST_CASE("length transfer of the efficiency")
    {
        CHECK(infer_eta_at_length(2.0, 6e4, 2.0, 6e4, 0.74) == doctest::Approx(0.74).epsilon(1e-15));

        // Round trip: synthesise transmissions at two lengths, then infer.
        auto g = oracle::rng(8);
        for (int i = 0; i < 100; ++i)
        {
            const double eta_ref = oracle::uniform(g, 0.1, 0.95);
            const double eta = oracle::uniform(g, 0.05, 1.0);
            TransmissionModel a, b;
            a.efficiency = b.efficiency = oracle::uniform(g, 0.2, 1.0);
            a.input_intensity = b.input_intensity = oracle::uniform(g, 0.5, 2.0);
            a.default_finesse = oracle::uniform(g, 1e3, 7e4);
            b.default_finesse = oracle::uniform(g, 1e3, 7e4);
            const double t_ref = transmissions(make_set({{{0, 0}, eta_ref}}), a).at({0, 0});
            const double t = transmissions(make_set({{{0, 0}, eta}}), b).at({0, 0});
            CHECK(infer_eta_at_length(t, b.default_finesse, t_ref, a.default_finesse, eta_ref) ==
                  doctest::Approx(eta).epsilon(1e-12));
        }
        CHECK_THROWS_AS(infer_eta_at_length(3.0, 6e4, 2.0, 6e4, 0.74), InconsistentDataError);
        CHECK_THROWS_AS(infer_eta_at_length(-1.0, 6e4, 2.0, 6e4, 0.74), ValidationError);
        CHECK_THROWS_AS(infer_eta_at_length(1.0, 6e4, 2.0, 6e4, 1.2), ValidationError);
    }

    TEST_CASE("fibre assembly output near the optimum length")
    {
        const auto fa = Beam::make(8.1 * um, 230 * um, lambda);
        CHECK(eta00(fa, cavity(460 * um)) >= 0.93);
        CHECK(eta00(fa, cavity(426 * um)) > 0.9);
    }
}
