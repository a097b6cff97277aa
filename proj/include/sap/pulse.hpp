#pragma once

// HSH pulse profiles and n-component suture pulse assembly.
// Unit convention: angular frequencies in rad/us, times in us (hbar = 1).

#include <cstdint>
#include <vector>

namespace sap {

struct HshParams {
    double omega_max;         // peak Rabi frequency
    double edge_shape_T;      // hyperbolic shape constant T
    double edge_rate_r;       // edge sweep amplitude r
    double linear_rate_r1;    // linear-part sweep scale r1 (slope r1/T)
    double edge_duration_t1;  // duration of each hyperbolic edge
    double center_duration_t2;// duration of the linear segment

    double tau() const { return 2.0 * edge_duration_t1 + center_duration_t2; }

    // Throws std::invalid_argument if any field is non-positive.
    void validate() const;
};

// Three-segment chirp profile: tanh edges, linear middle. Continuous at the
// segment seams; odd about the pulse midpoint.
double hsh_chirp(const HshParams& p, double t);

// Rabi envelope: sech edges, flat middle at omega_max. Even about midpoint.
double hsh_envelope(const HshParams& p, double t);

// Exact antiderivative of hsh_chirp on [0, tau], zero at t = 0.
double chirp_phase(const HshParams& p, double t);

// Total chirp excursion Delta(tau) - Delta(0) = 2 r tanh(t1/T) + r1 t2 / T.
// This is the frequency window covered by one pulse component; adjacent
// components of a suture pulse are spaced by exactly this amount so their
// chirps connect at the suture points.
double chirp_span(const HshParams& p);

struct SapPulse {
    HshParams base;
    int n_components = 1;
    double window_width_f = 0.0;         // effective inter-tone spacing (includes delta_f_shift)
    std::vector<double> tone_offsets;    // omega_m - omega_0, symmetric about 0
    std::vector<int> chirp_signs;        // sign multiplying the chirp phase per tone
    std::vector<double> amplitude_scales;// attenuation^(m-1)
    std::vector<double> tone_phases;     // phi_m, radians
    double delta_f_shift = 0.0;          // window-shift error, f -> f + delta_f
};

// Assembles an n-tone suture pulse from a shared HSH profile.
//   phases: one entry per tone; empty means all zero.
//   same_chirp: all tones chirp in the same direction (ablation mode);
//     default has adjacent tones chirped oppositely so windows tile seamlessly.
// Throws std::invalid_argument on n < 1, attenuation outside (0,1], or a
// phase list of the wrong length.
SapPulse build_sap(const HshParams& p, int n, double attenuation = 0.95,
                   const std::vector<double>& phases = {}, double delta_f = 0.0,
                   bool same_chirp = false);

// Detuning of the suture point nearest band center (n >= 2): 0 for even n,
// +f/2 for odd n.
double suture_detuning(const SapPulse& pulse);

} // namespace sap
