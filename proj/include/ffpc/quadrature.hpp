#ifndef FFPC_QUADRATURE_HPP
#define FFPC_QUADRATURE_HPP

// Adaptive 7/15-point Gauss-Kronrod quadrature on finite and semi-infinite
// intervals, for real- or complex-valued integrands.

#include <array>
#include <cmath>
#include <complex>
#include <cstddef>
#include <limits>
#include <numbers>
#include <queue>
#include <string>
#include <type_traits>
#include <vector>

#include "ffpc/errors.hpp"

namespace ffpc::quad
{
struct Options
{
    double abs_tol = 1e-10;
    double rel_tol = 1e-12;
    std::size_t max_intervals = 4000;
};

template <typename T>
struct Result
{
    T value{};
    double error = 0.0;
    std::size_t intervals = 0;
};

namespace detail
{
inline constexpr std::array<double, 8> kXgk = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.000000000000000000000000000000000};
inline constexpr std::array<double, 8> kWgk = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
inline constexpr std::array<double, 4> kWg = {
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

inline double magnitude(double v) { return std::abs(v); }
inline double magnitude(const std::complex<double> &v) { return std::abs(v); }

template <typename T>
struct Segment
{
    double a, b;
    T value;
    double error;
    bool operator<(const Segment &o) const { return error < o.error; }
};

template <typename T, typename F>
Segment<T> kronrod15(F &f, double a, double b)
{
    const double c = 0.5 * (a + b);
    const double h = 0.5 * (b - a);
    const T fc = f(c);
    T kron = fc * kWgk[7];
    T gauss = fc * kWg[3];
    for (int j = 0; j < 7; ++j)
    {
        const double dx = h * kXgk[j];
        const T f1 = f(c - dx);
        const T f2 = f(c + dx);
        kron += (f1 + f2) * kWgk[j];
        if (j % 2 == 1)
            gauss += (f1 + f2) * kWg[j / 2];
    }
    kron *= h;
    gauss *= h;
    return {a, b, kron, magnitude(kron - gauss)};
}
} // namespace detail

/// Integrate f over [a, b] adaptively, bisecting the worst interval until the
/// summed error estimate meets max(abs_tol, rel_tol |I|).
template <typename F>
auto integrate(F &&f, double a, double b, const Options &opt = {})
{
    using T = std::decay_t<decltype(f(a))>;
    std::priority_queue<detail::Segment<T>> heap;
    auto first = detail::kronrod15<T>(f, a, b);
    T total = first.value;
    double err = first.error;
    heap.push(first);
    while (err > std::max(opt.abs_tol, opt.rel_tol * detail::magnitude(total)))
    {
        if (heap.size() >= opt.max_intervals)
            throw NumericalError("adaptive quadrature did not converge: " + std::to_string(heap.size()) +
                                 " intervals, error estimate " + std::to_string(err));
        auto worst = heap.top();
        heap.pop();
        const double mid = 0.5 * (worst.a + worst.b);
        auto left = detail::kronrod15<T>(f, worst.a, mid);
        auto right = detail::kronrod15<T>(f, mid, worst.b);
        total += left.value + right.value - worst.value;
        err += left.error + right.error - worst.error;
        heap.push(left);
        heap.push(right);
        if (mid <= worst.a || mid >= worst.b)
            throw NumericalError("adaptive quadrature interval underflow");
    }
    // Recompute the sum to shed accumulated cancellation from the running total.
    T sum{};
    double esum = 0.0;
    std::size_t n = heap.size();
    while (!heap.empty())
    {
        sum += heap.top().value;
        esum += heap.top().error;
        heap.pop();
    }
    return Result<T>{sum, esum, n};
}

/// Integrate f over [a, inf) via x = a + scale * t / (1 - t).
template <typename F>
auto integrate_to_infinity(F &&f, double a, double scale, const Options &opt = {})
{
    using T = std::decay_t<decltype(f(a))>;
    auto mapped = [&](double t) -> T {
        if (t >= 1.0)
            return T{};
        const double one_minus = 1.0 - t;
        const double x = a + scale * t / one_minus;
        const double jac = scale / (one_minus * one_minus);
        const T v = f(x);
        if (!std::isfinite(jac))
            return T{};
        return v * jac;
    };
    return integrate(mapped, 0.0, 1.0, opt);
}

/// Integrate over (-inf, inf) as the sum of two mapped half-lines around 0.
template <typename F>
auto integrate_real_line(F &&f, double scale, const Options &opt = {})
{
    auto right = integrate_to_infinity(f, 0.0, scale, opt);
    auto left = integrate_to_infinity([&](double x) { return f(-x); }, 0.0, scale, opt);
    using T = decltype(right.value);
    return Result<T>{right.value + left.value, right.error + left.error, right.intervals + left.intervals};
}

/// Gauss-Legendre nodes and weights on [-1, 1].
struct GaussLegendre
{
    std::vector<double> nodes;
    std::vector<double> weights;

    explicit GaussLegendre(std::size_t n)
        : nodes(n), weights(n)
    {
        for (std::size_t i = 0; i < (n + 1) / 2; ++i)
        {
            double x = std::cos(std::numbers::pi * (double(i) + 0.75) / (double(n) + 0.5));
            double dp = 0.0;
            for (int it = 0; it < 100; ++it)
            {
                double p0 = 1.0, p1 = x;
                for (std::size_t k = 2; k <= n; ++k)
                {
                    const double p2 = ((2.0 * double(k) - 1.0) * x * p1 - (double(k) - 1.0) * p0) / double(k);
                    p0 = p1;
                    p1 = p2;
                }
                dp = double(n) * (x * p1 - p0) / (x * x - 1.0);
                const double dx = p1 / dp;
                x -= dx;
                if (std::abs(dx) < 1e-16)
                    break;
            }
            double p0 = 1.0, p1 = x;
            for (std::size_t k = 2; k <= n; ++k)
            {
                const double p2 = ((2.0 * double(k) - 1.0) * x * p1 - (double(k) - 1.0) * p0) / double(k);
                p0 = p1;
                p1 = p2;
            }
            dp = double(n) * (x * p1 - p0) / (x * x - 1.0);
            const double w = 2.0 / ((1.0 - x * x) * dp * dp);
            nodes[i] = -x;
            nodes[n - 1 - i] = x;
            weights[i] = weights[n - 1 - i] = w;
        }
    }

    template <typename F>
    auto integrate(F &&f, double a, double b) const
    {
        using T = std::decay_t<decltype(f(a))>;
        const double c = 0.5 * (a + b), h = 0.5 * (b - a);
        T sum{};
        for (std::size_t i = 0; i < nodes.size(); ++i)
            sum += f(c + h * nodes[i]) * weights[i];
        return sum * h;
    }
};

} // namespace ffpc::quad

#endif // FFPC_QUADRATURE_HPP
