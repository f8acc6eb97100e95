#ifndef FFPC_HERMITE_HPP
#define FFPC_HERMITE_HPP

#include <cmath>
#include <numbers>
#include <vector>

namespace ffpc
{
/// Orthonormal Hermite functions psi_n(x) = H_n(x) exp(-x^2/2) / sqrt(2^n n! sqrt(pi)),
/// by the three-term recurrence (stable for large n and |x|).
inline double hermite_function(int n, double x)
{
    const double g = std::exp(-0.5 * x * x) / std::sqrt(std::sqrt(std::numbers::pi));
    if (n == 0)
        return g;
    double p0 = g;
    double p1 = std::sqrt(2.0) * x * g;
    for (int k = 1; k < n; ++k)
    {
        const double p2 = std::sqrt(2.0 / (k + 1)) * x * p1 - std::sqrt(double(k) / (k + 1)) * p0;
        p0 = p1;
        p1 = p2;
    }
    return p1;
}

/// psi_0 .. psi_nmax at x.
inline std::vector<double> hermite_functions(int nmax, double x)
{
    std::vector<double> out(std::size_t(nmax) + 1);
    out[0] = std::exp(-0.5 * x * x) / std::sqrt(std::sqrt(std::numbers::pi));
    if (nmax >= 1)
        out[1] = std::sqrt(2.0) * x * out[0];
    for (int k = 1; k < nmax; ++k)
        out[k + 1] = std::sqrt(2.0 / (k + 1)) * x * out[k] - std::sqrt(double(k) / (k + 1)) * out[k - 1];
    return out;
}

} // namespace ffpc

#endif // FFPC_HERMITE_HPP
