#include "sap/pulse.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace sap {

namespace {

void check_domain(const HshParams& p, double t) {
    if (!(t >= 0.0 && t <= p.tau()))
        throw std::domain_error("time " + std::to_string(t) +
                                " outside pulse interval [0, " +
                                std::to_string(p.tau()) + "]");
}

} // namespace

void HshParams::validate() const {
    if (!(omega_max > 0.0)) throw std::invalid_argument("omega_max must be > 0");
    if (!(edge_shape_T > 0.0)) throw std::invalid_argument("edge_shape_T must be > 0");
    if (!(edge_rate_r > 0.0)) throw std::invalid_argument("edge_rate_r must be > 0");
    if (!(linear_rate_r1 > 0.0)) throw std::invalid_argument("linear_rate_r1 must be > 0");
    if (!(edge_duration_t1 > 0.0)) throw std::invalid_argument("edge_duration_t1 must be > 0");
    if (!(center_duration_t2 > 0.0)) throw std::invalid_argument("center_duration_t2 must be > 0");
}

double hsh_chirp(const HshParams& p, double t) {
    check_domain(p, t);
    const double t1 = p.edge_duration_t1, t2 = p.center_duration_t2;
    const double T = p.edge_shape_T, r = p.edge_rate_r, r1 = p.linear_rate_r1;
    const double lin_offset = r1 * t2 / (2.0 * T);
    if (t < t1)
        return r * std::tanh((t - t1) / T) - lin_offset;
    if (t <= t1 + t2)
        return r1 * (t - t1 - t2 / 2.0) / T;
    return r * std::tanh((t - t1 - t2) / T) + lin_offset;
}

double hsh_envelope(const HshParams& p, double t) {
    check_domain(p, t);
    const double t1 = p.edge_duration_t1, t2 = p.center_duration_t2;
    const double T = p.edge_shape_T;
    if (t < t1)
        return p.omega_max / std::cosh((t - t1) / T);
    if (t <= t1 + t2)
        return p.omega_max;
    return p.omega_max / std::cosh((t - t1 - t2) / T);
}

double chirp_phase(const HshParams& p, double t) {
    check_domain(p, t);
    const double t1 = p.edge_duration_t1, t2 = p.center_duration_t2;
    const double T = p.edge_shape_T, r = p.edge_rate_r, r1 = p.linear_rate_r1;
    const double lin_offset = r1 * t2 / (2.0 * T);
    // Use log(cosh) in a form that stays finite for large arguments.
    auto lncosh = [](double x) {
        x = std::fabs(x);
        return x + std::log1p(std::exp(-2.0 * x)) - std::log(2.0);
    };
    const double phi_t1 = -r * T * lncosh(t1 / T) - lin_offset * t1;
    if (t < t1)
        return r * T * (lncosh((t - t1) / T) - lncosh(t1 / T)) - lin_offset * t;
    if (t <= t1 + t2) {
        const double u = t - t1 - t2 / 2.0;
        return phi_t1 + (r1 / (2.0 * T)) * (u * u - t2 * t2 / 4.0);
    }
    return phi_t1 + r * T * lncosh((t - t1 - t2) / T) + lin_offset * (t - t1 - t2);
}

double chirp_span(const HshParams& p) {
    return 2.0 * p.edge_rate_r * std::tanh(p.edge_duration_t1 / p.edge_shape_T) +
           p.linear_rate_r1 * p.center_duration_t2 / p.edge_shape_T;
}

SapPulse build_sap(const HshParams& p, int n, double attenuation,
                   const std::vector<double>& phases, double delta_f,
                   bool same_chirp) {
    p.validate();
    if (n < 1) throw std::invalid_argument("n_components must be >= 1");
    if (!(attenuation > 0.0 && attenuation <= 1.0))
        throw std::invalid_argument("attenuation must be in (0, 1]");
    if (!phases.empty() && static_cast<int>(phases.size()) != n)
        throw std::invalid_argument("phase list length must equal n_components");

    SapPulse s;
    s.base = p;
    s.n_components = n;
    s.delta_f_shift = delta_f;
    s.window_width_f = chirp_span(p) + delta_f;
    s.tone_offsets.resize(n);
    s.chirp_signs.resize(n);
    s.amplitude_scales.resize(n);
    s.tone_phases = phases.empty() ? std::vector<double>(n, 0.0) : phases;
    double scale = 1.0;
    for (int m = 1; m <= n; ++m) {
        s.tone_offsets[m - 1] = ((n + 1) / 2.0 - m) * s.window_width_f;
        s.chirp_signs[m - 1] = same_chirp ? 1 : (m % 2 == 1 ? 1 : -1);
        s.amplitude_scales[m - 1] = scale;
        scale *= attenuation;
    }
    return s;
}

double suture_detuning(const SapPulse& pulse) {
    if (pulse.n_components < 2)
        throw std::invalid_argument("suture point requires n >= 2");
    return (pulse.n_components % 2 == 0) ? 0.0 : pulse.window_width_f / 2.0;
}

} // namespace sap
