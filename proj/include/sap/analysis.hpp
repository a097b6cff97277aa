#pragma once

// Fidelity maps over detuning and parameter grids, bandwidth extraction,
// and the robustness/ablation studies.

#include "sap/dynamics.hpp"

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace sap {

// Fidelity sampled over a detuning grid, optionally against a second axis.
// Failed grid points are stored as NaN and counted, never folded into
// averages as zeros.
struct FidelityMap {
    std::vector<double> detuning_grid;
    std::string secondary_name;         // "", "duration", "rabi", "rabi_error", "shift", "chirp"
    std::vector<double> secondary_grid; // empty => single row
    std::vector<double> values;         // row-major [secondary][detuning], NaN = failed
    long failed_points = 0;
    std::string metadata;               // RunConfig snapshot (JSON text)

    std::size_t rows() const { return secondary_grid.empty() ? 1 : secondary_grid.size(); }
    std::size_t cols() const { return detuning_grid.size(); }
    double at(std::size_t row, std::size_t col) const { return values[row * cols() + col]; }
};

std::vector<double> linspace(double lo, double hi, int points);

// One transfer_fidelity per grid point. Solver failures are recorded as
// NaN entries; the sweep itself never aborts.
FidelityMap detuning_sweep(const SapPulse& pulse, const std::vector<double>& deltas,
                           const SolverOptions& opts, int workers = 1,
                           double rabi_error = 0.0);

// Width of the maximal contiguous interval containing delta = 0 with
// F >= threshold, with linear interpolation at the edges; 0 if F(0) is
// below threshold. Expects a single-row map over a sorted grid.
double bandwidth_at_threshold(const FidelityMap& map, double threshold);

// Trapezoidal average of row `row` over detunings in [-W/2, W/2],
// skipping failed points.
double band_average(const FidelityMap& map, std::size_t row, double W);

// Direct band-averaged fidelity on a uniform grid of `points` detunings.
double band_average_fidelity(const SapPulse& pulse, double W, int points,
                             const SolverOptions& opts, int workers = 1,
                             double rabi_error = 0.0);

enum class ScanAxis { duration, rabi };

struct ScalingResult {
    FidelityMap map;                 // rows follow axis_grid
    std::vector<double> bandwidths;  // per axis value, at the given threshold
    double fit_slope = 0.0;          // duration: dW/dtau; rabi: dlogW/dlogOmega
};

// Bandwidth-scaling study. The duration axis scales t2 (tau = axis value);
// the rabi axis sets Omega = axis value with r = 0.3 Omega^2 and
// r1 = 0.15 Omega^2. Axis values violating tau >= 2 t1 are rejected.
ScalingResult scaling_study(const HshParams& base, int n, ScanAxis axis,
                            const std::vector<double>& axis_grid,
                            const std::vector<double>& delta_grid,
                            const SolverOptions& opts, double threshold = 0.95,
                            double attenuation = 1.0, int workers = 1);

// Sample mean and standard deviation of F over `samples` i.i.d. uniform
// tone-phase vectors.
std::pair<double, double> phase_average(const HshParams& p, int n,
                                        double attenuation, double delta,
                                        int samples, uint64_t seed,
                                        const SolverOptions& opts,
                                        int workers = 1);

// F(delta, dOmega/Omega) map; rows follow error_grid.
FidelityMap rabi_error_scan(const SapPulse& pulse,
                            const std::vector<double>& delta_grid,
                            const std::vector<double>& error_grid,
                            const SolverOptions& opts, int workers = 1);

// F(delta, delta_f) map; pulse_for_shift builds the pulse per shift value
// (with or without per-shift reoptimization).
FidelityMap freq_shift_scan(const std::function<SapPulse(double)>& pulse_for_shift,
                            const std::vector<double>& delta_grid,
                            const std::vector<double>& shift_grid,
                            const SolverOptions& opts, int workers = 1);

// Opposite-chirp vs same-chirp sweeps, identical otherwise.
std::pair<FidelityMap, FidelityMap> chirp_direction_comparison(
    const HshParams& p, int n, const std::vector<double>& delta_grid,
    const SolverOptions& opts, double attenuation = 1.0, int workers = 1);

struct BoundaryPoint {
    double axis1 = 0.0;
    std::optional<double> axis2;  // absent when no crossing in the grid
};

// Level set of cell_value(axis1, axis2) = threshold: per axis1 value, the
// largest axis2 where the value crosses the threshold, linearly
// interpolated between grid cells.
std::vector<BoundaryPoint> threshold_boundary(
    const std::vector<double>& axis1_grid, const std::vector<double>& axis2_grid,
    const std::function<double(double, double)>& cell_value, double threshold);

} // namespace sap
