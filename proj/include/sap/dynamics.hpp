#pragma once

// Rotating-frame dynamics of a detuned two-level atom driven by a suture
// pulse. The frame rotates at the band center omega_0, so every tone keeps
// an explicit time-dependent phase and delta = 0 is the SAP2 suture point.

#include "sap/ode.hpp"
#include "sap/pulse.hpp"

namespace sap {

struct RotatingFrameHamiltonian {
    SapPulse pulse;
    double atom_detuning = 0.0;  // delta, rad/us, offset from band center
    double rabi_error = 0.0;     // fractional amplitude error dOmega/Omega
};

// H(t) after the rotating-wave approximation:
//   (delta/2) sigma_z
//   + (Ombar(t)(1+eps)/2) sum_m a_m [e^{-i(theta_m(t)+phi_m)} sigma_+ + h.c.]
// with theta_m(t) = offset_m t + s_m * chirp_phase(t).
Ham2 hamiltonian_at(const RotatingFrameHamiltonian& h, double t);

// Propagates psi0 over the full pulse interval [0, tau].
EvolveResult evolve(const RotatingFrameHamiltonian& h, const QubitState& psi0,
                    const SolverOptions& opts);

// |<psi(tau)|s>|^2 starting from |e>, clamped to [0, 1].
double transfer_fidelity(const SapPulse& pulse, double delta,
                         const SolverOptions& opts, double rabi_error = 0.0);

// SAP2 compact form H = (delta/2) sigma_z + Ombar(t) cos(f t/2 + Phi(t)) sigma_x
// (no attenuation, phi_m = 0). Cross-validation path against the two-tone
// transfer_fidelity. f_override = 0 uses the seamless value chirp_span(p).
double evolve_compact_sap2(const HshParams& p, double delta,
                           const SolverOptions& opts, double f_override = 0.0);

// Step cap resolving the inter-tone beat: min(tau/100, 2*pi/(20 n f)).
double default_max_step(const SapPulse& pulse);

} // namespace sap
