#pragma once

// Derivative-free optimization of the HSH shape parameters (T, r, r1)
// against fidelity objectives: coarse log-spaced scan followed by
// Nelder-Mead refinement. t1, t2 and Omega stay fixed.

#include "sap/analysis.hpp"

#include <array>
#include <cstdint>
#include <vector>

namespace sap {

enum class ObjectiveKind {
    suture_point,           // F at the suture detuning
    band_average,           // trapezoid-averaged F over [-W/2, W/2]
    bandwidth_at_threshold, // widest contiguous F >= threshold interval
    phase_averaged_band,    // band average, additionally phase-averaged
};

struct Objective {
    ObjectiveKind kind = ObjectiveKind::suture_point;
    double band_W = 0.0;    // target bandwidth; > 0 pins chirp_span to W/n
    double threshold = 0.95;
    int phase_samples = 4;
    int grid_points = 33;   // detuning grid for band objectives

    void validate() const;
};

// Pulse assembly knobs held fixed during optimization.
struct PulseTemplate {
    int n = 2;
    double attenuation = 1.0;
    double delta_f = 0.0;
    bool same_chirp = false;
    std::vector<double> phases;  // empty => zero
};

struct FixedParams {
    double omega_max;
    double edge_duration_t1;
    double center_duration_t2;
};

struct BoundsBox {
    std::array<double, 2> T;
    std::array<double, 2> r;
    std::array<double, 2> r1;

    void validate() const;
};

struct OptimizationResult {
    HshParams best_params{};
    double best_value = 0.0;
    long evaluations = 0;
    std::vector<std::pair<HshParams, double>> trace;  // accepted improvements
    bool converged = false;
};

// Maximizes the objective over the bounds box. When the objective pins the
// bandwidth (band_W > 0), r1 is derived from the seamless-connection
// constraint chirp_span = band_W / n and the scan runs over (T, r) only;
// derived r1 values outside the box are rejected. Deterministic given seed.
OptimizationResult optimize(const BoundsBox& box, const FixedParams& fixed,
                            const PulseTemplate& tmpl, const Objective& objective,
                            int budget, uint64_t seed, const SolverOptions& opts,
                            int coarse_per_dim = 11, int workers = 1);

// One optimization per condition value (applied as the pulse delta_f),
// with per-condition seeds derived from the master seed.
std::vector<OptimizationResult> reoptimize_per_condition(
    const std::vector<double>& delta_f_grid, const BoundsBox& box,
    const FixedParams& fixed, const PulseTemplate& tmpl, const Objective& objective,
    int budget, uint64_t master_seed, const SolverOptions& opts,
    int coarse_per_dim = 11, int workers = 1);

} // namespace sap
