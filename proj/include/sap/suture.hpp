#pragma once

// Analytic treatment of the SAP2 suture point (delta = 0): phase
// accumulation theta(t), transfer phase phi(t), and the alternating
// triangle-lobe series with its Leibniz tail bound. The suture fidelity
// is sin^2(phi(tau)) exactly.

#include "sap/pulse.hpp"

#include <vector>

namespace sap {

// theta(t) = f t / 2 + chirp_phase(t) with f = chirp_span(p).
// Monotone increasing: dtheta/dt = f/2 + Delta(t) > 0 in the interior.
double theta(const HshParams& p, double t);

// phi(t) = integral of Ombar * cos(theta) over [0, t], by adaptive
// quadrature subdivided at the zero crossings of cos(theta).
double phi_numeric(const HshParams& p, double t, double tol = 1e-12);

// Solutions of theta(t) = pi/2 + k*pi for k = 0..k_max within [0, tau],
// strictly increasing (theta is monotone).
std::vector<double> crossing_times(const HshParams& p, int k_max);

struct SutureSeries {
    double a = 0.0;       // r1 / (2 T), curvature of theta in the linear segment
    double b = 0.0;       // (f/2 + Delta(t0)) / (2 a)
    double t0 = 0.0;      // first maximum of phi with t0 > t1
    double phi_t0 = 0.0;  // phi(t0), by quadrature
    std::vector<double> terms;         // alternating increments, first negative
    std::vector<double> partial_sums;  // phi_t0 + cumulative terms
    double estimate() const { return partial_sums.back(); }
};

// Triangle-lobe series for phi past its first maximum:
//   term_k = (Omega/2) (-1)^k [sqrt(b^2 + k pi/a) - sqrt(b^2 + (k-1) pi/a)]
// Terms alternate and shrink, so partial sums bracket the limit.
// Throws std::runtime_error if no crossing exists past t1.
SutureSeries phi_series(const HshParams& p, int n_terms);

// |term_{N+1}|, the Leibniz bound on |limit - partial_sums[N]| (N is a
// 0-based index into partial_sums).
double leibniz_tail_bound(const SutureSeries& s, int N);

} // namespace sap
