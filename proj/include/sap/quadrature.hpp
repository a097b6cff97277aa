#pragma once

// Adaptive Simpson quadrature with absolute/relative target, plus a
// breakpoint-aware driver for oscillatory integrands.

#include <cmath>
#include <functional>
#include <stdexcept>
#include <vector>

namespace sap {

namespace detail {

template <class F>
double simpson_step(F& f, double a, double fa, double b, double fb, double m,
                    double fm, double whole, double tol, int depth) {
    const double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
    const double flm = f(lm), frm = f(rm);
    const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    const double delta = left + right - whole;
    if (depth <= 0)
        throw std::runtime_error("adaptive quadrature failed to converge");
    if (std::fabs(delta) <= 15.0 * tol)
        return left + right + delta / 15.0;
    return simpson_step(f, a, fa, m, fm, lm, flm, left, 0.5 * tol, depth - 1) +
           simpson_step(f, m, fm, b, fb, rm, frm, right, 0.5 * tol, depth - 1);
}

} // namespace detail

template <class F>
double integrate(F&& f, double a, double b, double tol = 1e-12, int max_depth = 48) {
    if (a == b) return 0.0;
    const double fa = f(a), fb = f(b), m = 0.5 * (a + b), fm = f(m);
    const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    return detail::simpson_step(f, a, fa, b, fb, m, fm, whole, tol, max_depth);
}

// Integrates f over [a, b] split at the given interior breakpoints (sorted).
template <class F>
double integrate_piecewise(F&& f, double a, double b,
                           const std::vector<double>& breakpoints,
                           double tol = 1e-12) {
    double total = 0.0;
    double lo = a;
    for (double bp : breakpoints) {
        if (bp <= lo || bp >= b) continue;
        total += integrate(f, lo, bp, tol);
        lo = bp;
    }
    total += integrate(f, lo, b, tol);
    return total;
}

} // namespace sap
