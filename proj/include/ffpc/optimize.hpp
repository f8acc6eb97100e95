#ifndef FFPC_OPTIMIZE_HPP
#define FFPC_OPTIMIZE_HPP

// Small dense optimisers used by the fitting and design code:
// Levenberg-Marquardt for least squares and Nelder-Mead for derivative-free
// minimisation. Both work on Eigen vectors of dynamic size.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <vector>

namespace ffpc::opt
{
using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

struct LmOptions
{
    std::size_t max_iterations = 200;
    double gradient_tol = 1e-14;
    double step_tol = 1e-13;
    double cost_tol = 1e-16;
    double initial_lambda = 1e-3;
};

struct LmResult
{
    Vector x;
    Vector residual;
    Matrix jacobian;
    double cost = 0.0; // 0.5 * |r|^2
    std::size_t iterations = 0;
    bool converged = false;
};

/// Central-difference Jacobian of a vector function.
template <typename Residual>
Matrix numeric_jacobian(Residual &&f, const Vector &x, const Vector &r0)
{
    Matrix J(r0.size(), x.size());
    for (Eigen::Index j = 0; j < x.size(); ++j)
    {
        const double h = 1e-6 * std::max(std::abs(x[j]), 1.0);
        Vector xp = x, xm = x;
        xp[j] += h;
        xm[j] -= h;
        J.col(j) = (f(xp) - f(xm)) / (xp[j] - xm[j]);
    }
    return J;
}

/// Minimise 0.5 |f(x)|^2. The Jacobian is taken by central differences, so
/// parameters should be scaled to order one by the caller.
template <typename Residual>
LmResult levenberg_marquardt(Residual &&f, Vector x, const LmOptions &opt = {})
{
    LmResult out;
    Vector r = f(x);
    double cost = 0.5 * r.squaredNorm();
    double lambda = opt.initial_lambda;
    Matrix J = numeric_jacobian(f, x, r);
    std::size_t it = 0;
    for (; it < opt.max_iterations; ++it)
    {
        const Matrix JtJ = J.transpose() * J;
        const Vector g = J.transpose() * r;
        if (g.lpNorm<Eigen::Infinity>() <= opt.gradient_tol)
        {
            out.converged = true;
            break;
        }
        bool accepted = false;
        for (int tries = 0; tries < 40; ++tries)
        {
            Matrix A = JtJ;
            for (Eigen::Index k = 0; k < A.rows(); ++k)
                A(k, k) += lambda * std::max(JtJ(k, k), 1e-30);
            const Vector step = A.ldlt().solve(-g);
            const Vector xn = x + step;
            const Vector rn = f(xn);
            const double cn = 0.5 * rn.squaredNorm();
            if (std::isfinite(cn) && cn < cost)
            {
                const double drop = cost - cn;
                const double step_norm = step.norm();
                x = xn;
                r = rn;
                lambda = std::max(lambda * 0.3, 1e-12);
                const bool small_step = step_norm <= opt.step_tol * (x.norm() + opt.step_tol);
                const bool small_drop = drop <= opt.cost_tol * std::max(cost, 1e-300);
                cost = cn;
                accepted = true;
                if (small_step || small_drop || cost == 0.0)
                    out.converged = true;
                break;
            }
            lambda *= 10.0;
        }
        if (!accepted)
        {
            // No descent possible at any damping: we are at a (numerical) minimum.
            out.converged = true;
            break;
        }
        J = numeric_jacobian(f, x, r);
        if (out.converged)
            break;
    }
    out.x = x;
    out.residual = r;
    out.jacobian = J;
    out.cost = cost;
    out.iterations = it;
    return out;
}

/// sigma^2 (J^T J)^-1 with sigma^2 estimated from the residual.
inline Matrix parameter_covariance(const LmResult &fit)
{
    const auto m = fit.residual.size();
    const auto n = fit.x.size();
    const double dof = double(std::max<Eigen::Index>(m - n, 1));
    const double sigma2 = fit.residual.squaredNorm() / dof;
    const Matrix JtJ = fit.jacobian.transpose() * fit.jacobian;
    return sigma2 * JtJ.completeOrthogonalDecomposition().pseudoInverse();
}

struct NelderMeadOptions
{
    std::size_t max_evaluations = 4000;
    double f_tol = 1e-14;
    double x_tol = 1e-12;
};

struct NelderMeadResult
{
    Vector x;
    double value = 0.0;
    std::size_t evaluations = 0;
};

/// Downhill simplex with the standard coefficients (1, 2, 0.5, 0.5).
template <typename Objective>
NelderMeadResult nelder_mead(Objective &&f, const Vector &x0, const Vector &initial_step,
                             const NelderMeadOptions &opt = {})
{
    const Eigen::Index n = x0.size();
    std::vector<Vector> pts(n + 1, x0);
    std::vector<double> vals(n + 1);
    for (Eigen::Index i = 0; i < n; ++i)
        pts[i + 1][i] += initial_step[i];
    std::size_t evals = 0;
    auto eval = [&](const Vector &x) {
        ++evals;
        const double v = f(x);
        return std::isfinite(v) ? v : std::numeric_limits<double>::max();
    };
    for (Eigen::Index i = 0; i <= n; ++i)
        vals[i] = eval(pts[i]);

    std::vector<std::size_t> order(n + 1);
    while (evals < opt.max_evaluations)
    {
        for (std::size_t i = 0; i < order.size(); ++i)
            order[i] = i;
        std::sort(order.begin(), order.end(), [&](auto a, auto b) { return vals[a] < vals[b]; });
        const auto best = order.front();
        const auto worst = order.back();
        const auto second = order[order.size() - 2];

        double spread = 0.0;
        for (Eigen::Index i = 0; i <= n; ++i)
            spread = std::max(spread, (pts[i] - pts[best]).lpNorm<Eigen::Infinity>());
        if (std::abs(vals[worst] - vals[best]) <= opt.f_tol * (std::abs(vals[best]) + opt.f_tol) &&
            spread <= opt.x_tol)
            break;
        if (spread <= opt.x_tol * 1e-3)
            break;

        Vector centroid = Vector::Zero(n);
        for (auto i : order)
            if (i != worst)
                centroid += pts[i];
        centroid /= double(n);

        const Vector xr = centroid + (centroid - pts[worst]);
        const double fr = eval(xr);
        if (fr < vals[best])
        {
            const Vector xe = centroid + 2.0 * (centroid - pts[worst]);
            const double fe = eval(xe);
            if (fe < fr)
                pts[worst] = xe, vals[worst] = fe;
            else
                pts[worst] = xr, vals[worst] = fr;
            continue;
        }
        if (fr < vals[second])
        {
            pts[worst] = xr, vals[worst] = fr;
            continue;
        }
        const bool outside = fr < vals[worst];
        const Vector xc = outside ? Vector(centroid + 0.5 * (xr - centroid))
                                  : Vector(centroid + 0.5 * (pts[worst] - centroid));
        const double fc = eval(xc);
        if (fc < (outside ? fr : vals[worst]))
        {
            pts[worst] = xc, vals[worst] = fc;
            continue;
        }
        for (Eigen::Index i = 0; i <= n; ++i)
        {
            if (std::size_t(i) == best)
                continue;
            pts[i] = pts[best] + 0.5 * (pts[i] - pts[best]);
            vals[i] = eval(pts[i]);
        }
    }
    const auto best = std::size_t(std::min_element(vals.begin(), vals.end()) - vals.begin());
    return {pts[best], vals[best], evals};
}

/// Brent root finder on a bracketing interval.
template <typename F>
double brent_root(F &&f, double a, double b, double fa, double fb, double tol = 1e-15,
                  std::size_t max_iter = 200)
{
    if (fa == 0.0)
        return a;
    if (fb == 0.0)
        return b;
    double c = a, fc = fa, d = b - a, e = d;
    for (std::size_t i = 0; i < max_iter; ++i)
    {
        if ((fb > 0) == (fc > 0))
        {
            c = a;
            fc = fa;
            d = e = b - a;
        }
        if (std::abs(fc) < std::abs(fb))
        {
            a = b, b = c, c = a;
            fa = fb, fb = fc, fc = fa;
        }
        const double tol1 = 2.0 * std::numeric_limits<double>::epsilon() * std::abs(b) + 0.5 * tol;
        const double xm = 0.5 * (c - b);
        if (std::abs(xm) <= tol1 || fb == 0.0)
            return b;
        if (std::abs(e) >= tol1 && std::abs(fa) > std::abs(fb))
        {
            double p, q, r;
            const double s = fb / fa;
            if (a == c)
            {
                p = 2.0 * xm * s;
                q = 1.0 - s;
            }
            else
            {
                q = fa / fc;
                r = fb / fc;
                p = s * (2.0 * xm * q * (q - r) - (b - a) * (r - 1.0));
                q = (q - 1.0) * (r - 1.0) * (s - 1.0);
            }
            if (p > 0)
                q = -q;
            p = std::abs(p);
            if (2.0 * p < std::min(3.0 * xm * q - std::abs(tol1 * q), std::abs(e * q)))
            {
                e = d;
                d = p / q;
            }
            else
            {
                d = xm;
                e = d;
            }
        }
        else
        {
            d = xm;
            e = d;
        }
        a = b;
        fa = fb;
        b += (std::abs(d) > tol1) ? d : (xm > 0 ? tol1 : -tol1);
        fb = f(b);
    }
    return b;
}

} // namespace ffpc::opt

#endif // FFPC_OPTIMIZE_HPP
