#pragma once

#include <cmath>
#include <utility>

namespace equiv {

namespace detail {

template <class F>
double adaptive_simpson(F& f, double a, double b, double fa, double fm, double fb,
                        double whole, double tol, int depth) {
    const double m = 0.5 * (a + b);
    const double lm = 0.5 * (a + m);
    const double rm = 0.5 * (m + b);
    const double flm = f(lm);
    const double frm = f(rm);
    const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    const double delta = left + right - whole;
    // Besides the requested tolerance, stop once the local estimate is at
    // the rounding floor of the function values involved: refining further
    // cannot improve it and may recurse without bound when tol is below
    // machine precision relative to the integrand's scale.
    const double round_floor =
        1e-15 * (b - a) * (std::abs(fa) + std::abs(fm) + std::abs(fb) +
                           std::abs(flm) + std::abs(frm));
    if (depth <= 0 || std::abs(delta) <= 15.0 * tol ||
        std::abs(delta) <= round_floor) {
        return left + right + delta / 15.0;
    }
    return adaptive_simpson(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1) +
           adaptive_simpson(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1);
}

}  // namespace detail

/// Adaptive quadrature of f on [a, b]: recursive interval bisection with a
/// Simpson local error estimate and Richardson correction.  The interval is
/// pre-split into panels so narrow features away from the midpoint are not
/// missed by the first coarse estimate.
template <class F>
double integrate(F&& f, double a, double b, double abs_tol = 1e-10,
                 int panels = 16, int max_depth = 52) {
    if (a == b) return 0.0;
    double sum = 0.0;
    const double h = (b - a) / panels;
    const double panel_tol = abs_tol / panels;
    for (int k = 0; k < panels; ++k) {
        const double lo = a + k * h;
        const double hi = (k + 1 == panels) ? b : a + (k + 1) * h;
        const double mid = 0.5 * (lo + hi);
        const double flo = f(lo);
        const double fmid = f(mid);
        const double fhi = f(hi);
        const double whole = (hi - lo) / 6.0 * (flo + 4.0 * fmid + fhi);
        sum += detail::adaptive_simpson(f, lo, hi, flo, fmid, fhi, whole,
                                        panel_tol, max_depth);
    }
    return sum;
}

}  // namespace equiv
