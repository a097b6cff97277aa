#include "sap/dynamics.hpp"

#include <cmath>
#include <numbers>

namespace sap {

Ham2 hamiltonian_at(const RotatingFrameHamiltonian& h, double t) {
    const SapPulse& pulse = h.pulse;
    const double env = 0.5 * hsh_envelope(pulse.base, t) * (1.0 + h.rabi_error);
    const double phase = chirp_phase(pulse.base, t);
    cplx coupling{0.0, 0.0};
    for (int m = 0; m < pulse.n_components; ++m) {
        const double theta = pulse.tone_offsets[m] * t +
                             pulse.chirp_signs[m] * phase + pulse.tone_phases[m];
        coupling += pulse.amplitude_scales[m] * std::polar(1.0, -theta);
    }
    Ham2 H;
    H.ee = 0.5 * h.atom_detuning;
    H.ss = -0.5 * h.atom_detuning;
    H.es = env * coupling;
    return H;
}

double default_max_step(const SapPulse& pulse) {
    const double tau = pulse.base.tau();
    double cap = tau / 100.0;
    const double f = std::fabs(pulse.window_width_f);
    if (f > 0.0)
        cap = std::min(cap, 2.0 * std::numbers::pi /
                                (20.0 * pulse.n_components * f));
    return cap;
}

EvolveResult evolve(const RotatingFrameHamiltonian& h, const QubitState& psi0,
                    const SolverOptions& opts) {
    SolverOptions o = opts;
    if (o.max_step <= 0.0) o.max_step = default_max_step(h.pulse);
    return evolve_ode([&h](double t) { return hamiltonian_at(h, t); },
                      psi0, 0.0, h.pulse.base.tau(), o);
}

double transfer_fidelity(const SapPulse& pulse, double delta,
                         const SolverOptions& opts, double rabi_error) {
    const RotatingFrameHamiltonian h{pulse, delta, rabi_error};
    const EvolveResult r = evolve(h, QubitState{}, opts);
    const double f = std::norm(r.state.amp_s);
    return std::clamp(f, 0.0, 1.0);
}

double evolve_compact_sap2(const HshParams& p, double delta,
                           const SolverOptions& opts, double f_override) {
    p.validate();
    const double f = f_override > 0.0 ? f_override : chirp_span(p);
    SolverOptions o = opts;
    if (o.max_step <= 0.0)
        o.max_step = std::min(p.tau() / 100.0,
                              2.0 * std::numbers::pi / (40.0 * f));
    auto ham = [&p, f, delta](double t) {
        Ham2 H;
        H.ee = 0.5 * delta;
        H.ss = -0.5 * delta;
        H.es = hsh_envelope(p, t) * std::cos(0.5 * f * t + chirp_phase(p, t));
        return H;
    };
    const EvolveResult r = evolve_ode(ham, QubitState{}, 0.0, p.tau(), o);
    return std::clamp(std::norm(r.state.amp_s), 0.0, 1.0);
}

} // namespace sap
