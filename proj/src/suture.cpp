#include "sap/suture.hpp"

#include "sap/quadrature.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace sap {

double theta(const HshParams& p, double t) {
    return 0.5 * chirp_span(p) * t + chirp_phase(p, t);
}

namespace {

// Root of theta(t) = target on [lo, hi] by bisection; theta is monotone.
double solve_theta(const HshParams& p, double target, double lo, double hi) {
    double flo = theta(p, lo) - target;
    for (int i = 0; i < 200 && hi - lo > 1e-15 * p.tau(); ++i) {
        const double mid = 0.5 * (lo + hi);
        const double fmid = theta(p, mid) - target;
        if ((flo <= 0.0) == (fmid <= 0.0)) {
            lo = mid;
            flo = fmid;
        } else {
            hi = mid;
        }
    }
    return 0.5 * (lo + hi);
}

} // namespace

std::vector<double> crossing_times(const HshParams& p, int k_max) {
    if (k_max < 0) throw std::invalid_argument("k_max must be >= 0");
    const double pi = std::numbers::pi;
    const double theta_end = theta(p, p.tau());
    std::vector<double> roots;
    for (int k = 0; k <= k_max; ++k) {
        const double target = 0.5 * pi + k * pi;
        if (target > theta_end) break;
        const double lo = roots.empty() ? 0.0 : roots.back();
        roots.push_back(solve_theta(p, target, lo, p.tau()));
    }
    return roots;
}

double phi_numeric(const HshParams& p, double t, double tol) {
    if (!(t >= 0.0 && t <= p.tau()))
        throw std::domain_error("time outside pulse interval");
    if (t == 0.0) return 0.0;
    const double pi = std::numbers::pi;
    const int k_max = static_cast<int>(std::floor((theta(p, t) - 0.5 * pi) / pi));
    std::vector<double> breaks;
    if (k_max >= 0) breaks = crossing_times(p, k_max);
    auto f = [&p](double s) { return hsh_envelope(p, s) * std::cos(theta(p, s)); };
    return integrate_piecewise(f, 0.0, t, breaks, tol);
}

SutureSeries phi_series(const HshParams& p, int n_terms) {
    if (n_terms < 2) throw std::invalid_argument("n_terms must be >= 2");
    const double pi = std::numbers::pi;
    const double t1 = p.edge_duration_t1;
    const double theta_t1 = theta(p, t1);
    const double theta_end = theta(p, p.tau());
    // First crossing past the leading edge.
    const int k_first = std::max(0,
        static_cast<int>(std::ceil((theta_t1 - 0.5 * pi) / pi)));
    const double target = 0.5 * pi + k_first * pi;
    if (target > theta_end)
        throw std::runtime_error(
            "no phase crossing past t1: pulse too short or sweep too slow");

    SutureSeries s;
    s.t0 = solve_theta(p, target, t1, p.tau());
    s.a = p.linear_rate_r1 / (2.0 * p.edge_shape_T);
    s.b = (0.5 * chirp_span(p) + hsh_chirp(p, s.t0)) / (2.0 * s.a);
    s.phi_t0 = phi_numeric(p, s.t0);

    s.terms.reserve(n_terms);
    s.partial_sums.reserve(n_terms);
    double sum = s.phi_t0;
    double prev_root = std::sqrt(s.b * s.b);  // = b, k = 0
    for (int k = 1; k <= n_terms; ++k) {
        const double root = std::sqrt(s.b * s.b + k * pi / s.a);
        const double sign = (k % 2 == 0) ? 1.0 : -1.0;
        const double term = 0.5 * p.omega_max * sign * (root - prev_root);
        prev_root = root;
        s.terms.push_back(term);
        sum += term;
        s.partial_sums.push_back(sum);
    }
    return s;
}

double leibniz_tail_bound(const SutureSeries& s, int N) {
    if (N < 0 || N + 1 >= static_cast<int>(s.terms.size()))
        throw std::invalid_argument("N must satisfy 0 <= N < terms-1");
    return std::fabs(s.terms[static_cast<size_t>(N) + 1]);
}

} // namespace sap
