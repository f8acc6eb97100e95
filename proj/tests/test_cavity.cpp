#include <doctest.h>

#include "ffpc/cavity.hpp"
#include "oracles.hpp"

using namespace ffpc;

namespace
{
constexpr double um = 1e-6;
constexpr double lambda = 854e-9;

CavityGeometry geometry(double L, double r1, double r2)
{
    CavityGeometry c;
    c.length = L;
    c.roc1 = r1;
    c.roc2 = r2;
    c.wavelength = lambda;
    return c;
}

// Power of the Hermite-Gauss (n, m) intensity outside radius a, by 2D polar
// Simpson quadrature of the textbook pattern.
double hg_outside(int n, int m, double w, double a)
{
    double norm = 2.0 / (oracle::pi * w * w);
    for (int k = 1; k <= n; ++k)
        norm /= 2.0 * k;
    for (int k = 1; k <= m; ++k)
        norm /= 2.0 * k;
    auto intensity = [&](double r, double phi) {
        const double x = std::sqrt(2.0) * r * std::cos(phi) / w;
        const double y = std::sqrt(2.0) * r * std::sin(phi) / w;
        const double hx = std::hermite(n, x), hy = std::hermite(m, y);
        return norm * hx * hx * hy * hy * std::exp(-2.0 * r * r / (w * w));
    };
    const double inside = oracle::simpson(
        [&](double r) { return r * oracle::simpson([&](double p) { return intensity(r, p); }, 0.0, 2 * oracle::pi, 200); },
        0.0, a, 2000);
    return 1.0 - inside;
}
} // namespace

TEST_SUITE("cavity")
{
    TEST_CASE("closed form agrees with the round-trip eigenmode on random geometries")
    {
        auto g = oracle::rng(5);
        int done = 0;
        double worst_w = 0, worst_z = 0, worst_gouy = 0;
        while (done < 1000)
        {
            const double L = oracle::uniform(g, 20 * um, 1000 * um);
            const double r1 = oracle::uniform(g, 0.3, 5.0) * L;
            const double r2 = oracle::uniform(g, 0.3, 5.0) * L;
            const double g1 = 1 - L / r1, g2 = 1 - L / r2;
            const double p = g1 * g2;
            if (!(p > 1e-3 && p < 1 - 1e-3))
                continue;
            const auto geom = geometry(L, r1, r2);
            const auto mode = solve_mode(geom);
            const auto ref = oracle::cavity_round_trip(L, r1, r2, lambda);
            const auto lib = solve_mode_round_trip(geom);
            worst_w = std::max(worst_w, std::abs(mode.waist_radius / ref.waist - 1));
            worst_z = std::max(worst_z, std::abs(mode.waist_from_mirror1 - ref.waist_from_mirror1) / L);
            worst_gouy = std::max(worst_gouy, std::abs(2 * mode.gouy_increment - ref.gouy));
            CHECK(lib.waist_radius == doctest::Approx(ref.waist).epsilon(1e-9));
            CHECK(lib.waist_from_mirror1 == doctest::Approx(ref.waist_from_mirror1).scale(L).epsilon(1e-9));
            CHECK(mode.waist_from_mirror1 + mode.waist_from_mirror2() == doctest::Approx(L).epsilon(1e-15));
            // Spot radii follow the beam law evaluated on the mirrors.
            CHECK(mode.spot_mirror1 == doctest::Approx(spot_radius(mode.beam(), 0.0)).epsilon(1e-12));
            CHECK(mode.spot_mirror2 == doctest::Approx(spot_radius(mode.beam(), L)).epsilon(1e-12));
            CHECK(mode.spot_mirror1 >= mode.waist_radius);
            CHECK(mode.spot_mirror2 >= mode.waist_radius);
            ++done;
        }
        CHECK(worst_w < 1e-9);
        CHECK(worst_z < 1e-9);
        CHECK(worst_gouy < 1e-9);
    }

    TEST_CASE("asymmetric fibre cavity at 460 um")
    {
        const auto mode = solve_mode(geometry(460 * um, 700 * um, 540 * um));
        CHECK(mode.g1 == doctest::Approx(0.3429).epsilon(1e-3));
        CHECK(mode.g2 == doctest::Approx(0.1481).epsilon(1e-3));
        CHECK(mode.waist_radius == doctest::Approx(8.4 * um).epsilon(0.01));
        CHECK(mode.waist_from_mirror1 == doctest::Approx(115 * um).epsilon(0.01));
        // The waist sits closer to the flatter mirror.
        CHECK(mode.waist_from_mirror1 < mode.waist_from_mirror2());
        CHECK_NOTHROW(solve_mode(geometry(426 * um, 700 * um, 540 * um)));
    }

    TEST_CASE("symmetric cavities put the waist in the middle")
    {
        for (double L : {50 * um, 300 * um, 699 * um, 900 * um, 1390 * um})
        {
            const auto mode = solve_mode(geometry(L, 700 * um, 700 * um));
            CHECK(mode.waist_from_mirror1 == L / 2);
        }
    }

    TEST_CASE("symmetric confocal cavity")
    {
        const double L = 500 * um;
        const auto mode = solve_mode(geometry(L, L, L));
        CHECK(mode.degenerate_confocal);
        CHECK(mode.waist_radius == doctest::Approx(std::sqrt(L * lambda / (2 * oracle::pi))).epsilon(1e-12));
        CHECK(mode.gouy_increment == doctest::Approx(oracle::pi / 2).epsilon(1e-12));
        const auto off = resonance_offsets(mode, {{0, 0}, {1, 0}, {0, 1}, {2, 0}, {2, 1}, {3, 0}});
        CHECK(off[0] == 0.0);
        CHECK(off[1] == doctest::Approx(mode.fsr / 2).epsilon(1e-12));
        CHECK(off[2] == doctest::Approx(mode.fsr / 2).epsilon(1e-12));
        CHECK(off[3] == doctest::Approx(0.0).scale(mode.fsr).epsilon(1e-12));
        CHECK(off[4] == doctest::Approx(mode.fsr / 2).epsilon(1e-12));
        CHECK(off[5] == doctest::Approx(mode.fsr / 2).epsilon(1e-12));

        // Slightly off the confocal point the closed form is continuous.
        const auto near = solve_mode(geometry(L * (1 + 1e-7), L, L));
        CHECK(near.waist_radius == doctest::Approx(mode.waist_radius).epsilon(1e-6));
    }

    TEST_CASE("unstable geometries carry their g parameters")
    {
        for (auto [L, r1, r2] : {std::tuple{600 * um, 700 * um, 540 * um}, std::tuple{1500 * um, 700 * um, 700 * um},
                                 std::tuple{540 * um, 700 * um, 540 * um}})
        {
            try
            {
                solve_mode(geometry(L, r1, r2));
                FAIL("expected InstabilityError");
            }
            catch (const InstabilityError &e)
            {
                CHECK(e.g1() == doctest::Approx(1 - L / r1));
                CHECK(e.g2() == doctest::Approx(1 - L / r2));
            }
        }
        // Confocal but asymmetric: g1 = 0 alone is the stability edge.
        CHECK_THROWS_AS(solve_mode(geometry(700 * um, 700 * um, 540 * um)), InstabilityError);
        CHECK_THROWS_AS(solve_mode(geometry(-1.0, 700 * um, 540 * um)), ValidationError);
        CHECK_THROWS_AS(solve_mode(geometry(100 * um, -700 * um, 540 * um)), ValidationError);
    }

    TEST_CASE("free spectral range")
    {
        CHECK(fsr(132 * um) == doctest::Approx(1.1353e12).epsilon(5e-4));
        CHECK(fsr(132 * um) == doctest::Approx(kSpeedOfLight / (2 * 132 * um)).epsilon(1e-15));
        CHECK(fsr(426 * um) == doctest::Approx(351.9e9).epsilon(1e-4));
        for (double L : {10 * um, 426 * um, 3e-3})
            CHECK(fsr(2 * L) == doctest::Approx(fsr(L) / 2).epsilon(1e-15));
        CHECK_THROWS_AS(fsr(0.0), ValidationError);
    }

    TEST_CASE("resonance offsets")
    {
        // Near-planar: every order collapses onto the fundamental.
        const double L = 1 * um;
        const auto planar = solve_mode(geometry(L, 1.0, 1.0));
        const auto off = resonance_offsets(planar, {{0, 0}, {1, 0}, {2, 3}});
        for (double o : off)
            CHECK(o / planar.fsr < 1e-2);

        const auto geom = geometry(426 * um, 700 * um, 540 * um);
        const auto mode = solve_mode(geom);
        const double dz = std::acos(std::sqrt(mode.g1 * mode.g2));
        const auto first = resonance_offsets(mode, {{1, 0}});
        CHECK(first[0] == doctest::Approx(mode.fsr * dz / oracle::pi).epsilon(1e-12));
        const auto ref = oracle::cavity_round_trip(geom.length, geom.roc1, geom.roc2, lambda);
        CHECK(first[0] == doctest::Approx(mode.fsr * ref.gouy / (2 * oracle::pi)).epsilon(1e-9));
        for (double o : resonance_offsets(mode, {{0, 0}, {1, 1}, {4, 3}, {10, 10}}))
        {
            CHECK(o >= 0.0);
            CHECK(o < mode.fsr);
        }
        // Negative branch (both g < 0): the increment exceeds pi / 2.
        const auto concentric = solve_mode(geometry(1200 * um, 700 * um, 700 * um));
        CHECK(concentric.gouy_increment > oracle::pi / 2);
        const auto cref = oracle::cavity_round_trip(1200 * um, 700 * um, 700 * um, lambda);
        CHECK(2 * concentric.gouy_increment == doctest::Approx(cref.gouy).epsilon(1e-9));
    }

    TEST_CASE("clipping loss")
    {
        const double w = 10 * um;
        CHECK(clipping_loss({0, 0}, w, w) == doctest::Approx(std::exp(-2.0)).epsilon(1e-6));
        for (double a : {0.3, 0.8, 1.5, 2.5})
            CHECK(clipping_loss({0, 0}, w, a * w) == doctest::Approx(std::exp(-2 * a * a)).epsilon(1e-6));
        CHECK(clipping_loss({0, 0}, w, 10 * w) == 0.0);

        for (auto [n, m] : {std::pair{1, 0}, std::pair{0, 3}, std::pair{2, 2}, std::pair{5, 1}})
            for (double a : {1.0, 2.0})
                CHECK(clipping_loss({n, m}, w, a * w) == doctest::Approx(hg_outside(n, m, w, a * w)).epsilon(1e-6));

        // Once the aperture holds most of the power, raising either index never
        // reduces the loss. Under heavy clipping outer lobes can fall outside
        // while the centre stays in, so the ordering breaks down there.
        CHECK(clipping_loss({6, 0}, w, 1.6 * w) < clipping_loss({5, 0}, w, 1.6 * w));
        for (double a : {2.0, 2.4, 3.0})
            for (int N = 0; N < 6; ++N)
                for (int n = 0; n <= N; ++n)
                {
                    const double here = clipping_loss({n, N - n}, w, a * w);
                    CHECK(clipping_loss({n + 1, N - n}, w, a * w) >= here);
                    CHECK(clipping_loss({n, N - n + 1}, w, a * w) >= here);
                }
        CHECK_THROWS_AS(clipping_loss({0, 0}, 0.0, w), ValidationError);
        CHECK_THROWS_AS(clipping_loss({-1, 0}, w, w), ValidationError);
    }

    TEST_CASE("finesse from the loss budget")
    {
        auto geom = geometry(300 * um, 700 * um, 540 * um);
        geom.aperture1 = geom.aperture2 = 1e-3;
        const auto mode = solve_mode(geom);
        auto f = finesse(geom, mode);
        CHECK(f.finesse == doctest::Approx(2 * oracle::pi / 1e-4).epsilon(1e-12));
        CHECK(f.finesse == doctest::Approx(62832).epsilon(1e-5));
        CHECK(mode.fsr / f.linewidth == doctest::Approx(f.finesse).epsilon(1e-12));

        geom.loss1 = geom.loss2 = 20e-6;
        f = finesse(geom, mode);
        CHECK(f.finesse == doctest::Approx(44880).epsilon(1e-4));

        // Any extra loss lowers the finesse.
        double last = f.finesse;
        for (double l : {30e-6, 100e-6, 1e-3, 0.1})
        {
            geom.loss2 = l;
            const double now = finesse(geom, mode).finesse;
            CHECK(now < last);
            last = now;
        }
        geom.transmission1 = 0.6;
        geom.loss1 = 0.5;
        CHECK_THROWS_AS(finesse(geom, mode), OverdampedError);
    }

    TEST_CASE("finesse collapses at the stability edge")
    {
        const auto base = geometry(0, 700 * um, 540 * um);
        auto at = [&](double L) {
            const auto g = base.with_length(L);
            return finesse(g, solve_mode(g)).finesse;
        };
        const double plateau = at(300 * um);
        CHECK(plateau == doctest::Approx(2 * oracle::pi / 1e-4).epsilon(1e-3));
        CHECK(at(460 * um) > 0.9 * plateau);
        CHECK(at(530 * um) < 0.1 * plateau);
        CHECK(at(536 * um) < at(530 * um));
        // Higher orders are damped first.
        const auto g = base.with_length(500 * um);
        const auto mode = solve_mode(g);
        CHECK(finesse(g, mode, {2, 0}).finesse < finesse(g, mode, {0, 0}).finesse);
    }
}
