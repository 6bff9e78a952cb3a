#pragma once

#include <cmath>
#include <utility>

namespace equiv {

/// Derivative-free 1-D maximization on [lo, hi]: golden-section search with
/// successive parabolic interpolation (Brent's localmin applied to -f).
/// Returns the abscissa of the maximum to absolute tolerance xtol.
template <class F>
double maximize_scalar(F&& f, double lo, double hi, double xtol = 1e-12,
                       int max_iter = 300) {
    constexpr double golden = 0.3819660112501051;
    constexpr double eps = 2.220446049250313e-16;

    double a = lo, b = hi;
    double x = a + golden * (b - a);
    double w = x, v = x;
    double fx = -f(x);
    double fw = fx, fv = fx;
    double d = 0.0, e = 0.0;

    for (int iter = 0; iter < max_iter; ++iter) {
        const double m = 0.5 * (a + b);
        const double tol = eps * std::abs(x) + xtol;
        if (std::abs(x - m) <= 2.0 * tol - 0.5 * (b - a)) break;

        bool golden_step = true;
        if (std::abs(e) > tol) {
            // Try a parabola through x, v, w.
            const double r = (x - w) * (fx - fv);
            double q = (x - v) * (fx - fw);
            double p = (x - v) * q - (x - w) * r;
            q = 2.0 * (q - r);
            if (q > 0.0) p = -p;
            q = std::abs(q);
            const double e_prev = e;
            e = d;
            if (std::abs(p) < std::abs(0.5 * q * e_prev) && p > q * (a - x) &&
                p < q * (b - x)) {
                d = p / q;
                const double u = x + d;
                if (u - a < 2.0 * tol || b - u < 2.0 * tol)
                    d = (x < m) ? tol : -tol;
                golden_step = false;
            }
        }
        if (golden_step) {
            e = (x < m) ? b - x : a - x;
            d = golden * e;
        }

        const double u = (std::abs(d) >= tol) ? x + d : x + (d > 0.0 ? tol : -tol);
        const double fu = -f(u);
        if (fu <= fx) {
            if (u < x) b = x; else a = x;
            v = w; fv = fw;
            w = x; fw = fx;
            x = u; fx = fu;
        } else {
            if (u < x) a = u; else b = u;
            if (fu <= fw || w == x) {
                v = w; fv = fw;
                w = u; fw = fu;
            } else if (fu <= fv || v == x || v == w) {
                v = u; fv = fu;
            }
        }
    }
    // The bracket endpoints are never sampled; check them against the
    // interior best so boundary maxima (e.g. tau^2 = 0) are exact.
    const double flo = -f(lo), fhi = -f(hi);
    if (flo <= fx && flo <= fhi) return lo;
    if (fhi <= fx) return hi;
    return x;
}

}  // namespace equiv
