#pragma once

// Two-level Schrodinger propagator: i dpsi/dt = H(t) psi with H a 2x2
// Hermitian matrix supplied as a callable. Adaptive Dormand-Prince 5(4)
// by default, fixed-step classical RK4 as the oracle mode.

#include <algorithm>
#include <cmath>
#include <complex>
#include <stdexcept>
#include <string>

namespace sap {

using cplx = std::complex<double>;

struct QubitState {
    cplx amp_e{1.0, 0.0};
    cplx amp_s{0.0, 0.0};
    double norm2() const { return std::norm(amp_e) + std::norm(amp_s); }
};

struct SolverOptions {
    double rel_tol = 1e-10;
    double abs_tol = 1e-10;
    double max_step = 0.0;    // 0 => span/100
    bool fixed_step = false;  // classical RK4 oracle mode
    long fixed_steps = 200000;

    void validate() const {
        if (!(rel_tol > 0.0) || !(abs_tol > 0.0))
            throw std::invalid_argument("solver tolerances must be positive");
        if (fixed_step && fixed_steps < 1)
            throw std::invalid_argument("fixed_steps must be >= 1");
    }
};

// H(t) = [[ee, es], [conj(es), ss]].
struct Ham2 {
    double ee = 0.0;
    double ss = 0.0;
    cplx es{0.0, 0.0};
};

struct SolverError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct EvolveResult {
    QubitState state;
    double norm_drift = 0.0;  // | |psi|^2 - 1 | at the end, never renormalized away
    long steps = 0;
    long rejected = 0;
};

namespace detail {

template <class HFn>
inline void rhs(HFn& h, double t, const cplx ye, const cplx ys, cplx& de, cplx& ds) {
    const Ham2 H = h(t);
    const cplx mi(0.0, -1.0);
    de = mi * (H.ee * ye + H.es * ys);
    ds = mi * (std::conj(H.es) * ye + H.ss * ys);
}

} // namespace detail

// Propagates psi0 from t0 to t1. Throws SolverError on step-size underflow
// or norm drift beyond 1e-6; drift is reported, not hidden by renormalizing.
template <class HFn>
EvolveResult evolve_ode(HFn&& h, const QubitState& psi0, double t0, double t1,
                        const SolverOptions& opts) {
    opts.validate();
    const double span = t1 - t0;
    if (!(span > 0.0)) throw std::invalid_argument("t1 must exceed t0");

    EvolveResult res;
    cplx ye = psi0.amp_e, ys = psi0.amp_s;

    // Stage times can overshoot t1 by an ulp when the final step is clipped;
    // clamp so H is never sampled outside its domain.
    auto hc = [&h, t0, t1](double t) { return h(std::clamp(t, t0, t1)); };

    if (opts.fixed_step) {
        const long n = opts.fixed_steps;
        const double dt = span / static_cast<double>(n);
        cplx k1e, k1s, k2e, k2s, k3e, k3s, k4e, k4s;
        for (long i = 0; i < n; ++i) {
            const double t = t0 + dt * static_cast<double>(i);
            detail::rhs(hc, t, ye, ys, k1e, k1s);
            detail::rhs(hc, t + 0.5 * dt, ye + 0.5 * dt * k1e, ys + 0.5 * dt * k1s, k2e, k2s);
            detail::rhs(hc, t + 0.5 * dt, ye + 0.5 * dt * k2e, ys + 0.5 * dt * k2s, k3e, k3s);
            detail::rhs(hc, t + dt, ye + dt * k3e, ys + dt * k3s, k4e, k4s);
            ye += dt / 6.0 * (k1e + 2.0 * k2e + 2.0 * k3e + k4e);
            ys += dt / 6.0 * (k1s + 2.0 * k2s + 2.0 * k3s + k4s);
        }
        res.steps = n;
    } else {
        // Dormand-Prince 5(4), FSAL.
        static const double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
        static const double a21 = 1.0 / 5;
        static const double a31 = 3.0 / 40, a32 = 9.0 / 40;
        static const double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
        static const double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187,
                            a53 = 64448.0 / 6561, a54 = -212.0 / 729;
        static const double a61 = 9017.0 / 3168, a62 = -355.0 / 33,
                            a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                            a65 = -5103.0 / 18656;
        static const double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192,
                            b5 = -2187.0 / 6784, b6 = 11.0 / 84;
        static const double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920,
                            e5 = -17253.0 / 339200, e6 = 22.0 / 525, e7 = -1.0 / 40;

        const double hmax = opts.max_step > 0.0 ? std::min(opts.max_step, span)
                                                : span / 100.0;
        const double hmin = span * 1e-14;
        double t = t0;
        double dt = hmax;

        cplx k1e, k1s;
        detail::rhs(hc, t, ye, ys, k1e, k1s);

        while (t < t1) {
            if (t + dt > t1) dt = t1 - t;
            cplx k2e, k2s, k3e, k3s, k4e, k4s, k5e, k5s, k6e, k6s, k7e, k7s;
            detail::rhs(hc, t + c2 * dt, ye + dt * (a21 * k1e), ys + dt * (a21 * k1s), k2e, k2s);
            detail::rhs(hc, t + c3 * dt, ye + dt * (a31 * k1e + a32 * k2e),
                        ys + dt * (a31 * k1s + a32 * k2s), k3e, k3s);
            detail::rhs(hc, t + c4 * dt, ye + dt * (a41 * k1e + a42 * k2e + a43 * k3e),
                        ys + dt * (a41 * k1s + a42 * k2s + a43 * k3s), k4e, k4s);
            detail::rhs(hc, t + c5 * dt,
                        ye + dt * (a51 * k1e + a52 * k2e + a53 * k3e + a54 * k4e),
                        ys + dt * (a51 * k1s + a52 * k2s + a53 * k3s + a54 * k4s), k5e, k5s);
            detail::rhs(hc, t + dt,
                        ye + dt * (a61 * k1e + a62 * k2e + a63 * k3e + a64 * k4e + a65 * k5e),
                        ys + dt * (a61 * k1s + a62 * k2s + a63 * k3s + a64 * k4s + a65 * k5s),
                        k6e, k6s);
            const cplx ye5 = ye + dt * (b1 * k1e + b3 * k3e + b4 * k4e + b5 * k5e + b6 * k6e);
            const cplx ys5 = ys + dt * (b1 * k1s + b3 * k3s + b4 * k4s + b5 * k5s + b6 * k6s);
            detail::rhs(hc, t + dt, ye5, ys5, k7e, k7s);
            const cplx erre = dt * (e1 * k1e + e3 * k3e + e4 * k4e + e5 * k5e + e6 * k6e + e7 * k7e);
            const cplx errs = dt * (e1 * k1s + e3 * k3s + e4 * k4s + e5 * k5s + e6 * k6s + e7 * k7s);

            auto scale = [&](const cplx& y, const cplx& y5) {
                return opts.abs_tol + opts.rel_tol * std::max(std::abs(y), std::abs(y5));
            };
            const double we = std::abs(erre) / scale(ye, ye5);
            const double ws = std::abs(errs) / scale(ys, ys5);
            const double err = std::sqrt(0.5 * (we * we + ws * ws));

            if (err <= 1.0) {
                t += dt;
                ye = ye5;
                ys = ys5;
                k1e = k7e;  // FSAL
                k1s = k7s;
                ++res.steps;
            } else {
                ++res.rejected;
            }
            const double factor = err > 0.0
                ? std::clamp(0.9 * std::pow(err, -0.2), 0.2, 5.0) : 5.0;
            dt = std::min(dt * factor, hmax);
            if (dt < hmin && t < t1)
                throw SolverError("step size underflow at t = " + std::to_string(t));
        }
    }

    res.state = QubitState{ye, ys};
    res.norm_drift = std::fabs(res.state.norm2() - 1.0);
    if (res.norm_drift > 1e-6)
        throw SolverError("norm drift " + std::to_string(res.norm_drift) +
                          " exceeds 1e-6; tolerances too loose for this pulse");
    return res;
}

} // namespace sap
