#include "sap/analysis.hpp"

#include "sap/parallel.hpp"
#include "sap/rng.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace sap {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

// Fills map.values by evaluating cell(i) per flat index; failures => NaN.
void fill_map(FidelityMap& map, int workers,
              const std::function<double(std::size_t)>& cell) {
    const std::size_t n = map.rows() * map.cols();
    map.values.assign(n, kNaN);
    std::atomic<long> failed{0};
    parallel_for(n, workers, [&](std::size_t i) {
        try {
            map.values[i] = cell(i);
        } catch (const std::exception&) {
            ++failed;
        }
    });
    map.failed_points = failed.load();
}

double interp(double x0, double y0, double x1, double y1, double x) {
    return y0 + (y1 - y0) * (x - x0) / (x1 - x0);
}

} // namespace

std::vector<double> linspace(double lo, double hi, int points) {
    if (points < 1) throw std::invalid_argument("linspace needs >= 1 point");
    if (points == 1) return {lo};
    std::vector<double> g(points);
    for (int i = 0; i < points; ++i)
        g[i] = lo + (hi - lo) * static_cast<double>(i) / (points - 1);
    return g;
}

FidelityMap detuning_sweep(const SapPulse& pulse, const std::vector<double>& deltas,
                           const SolverOptions& opts, int workers,
                           double rabi_error) {
    if (deltas.empty()) throw std::invalid_argument("detuning grid is empty");
    if (!std::is_sorted(deltas.begin(), deltas.end()))
        throw std::invalid_argument("detuning grid must be sorted");
    FidelityMap map;
    map.detuning_grid = deltas;
    fill_map(map, workers, [&](std::size_t i) {
        return transfer_fidelity(pulse, deltas[i], opts, rabi_error);
    });
    return map;
}

double bandwidth_at_threshold(const FidelityMap& map, double threshold) {
    if (map.rows() != 1)
        throw std::invalid_argument("bandwidth_at_threshold expects a single-row map");
    const auto& g = map.detuning_grid;
    const auto& v = map.values;
    const std::size_t n = g.size();
    if (n < 2 || g.front() > 0.0 || g.back() < 0.0) return 0.0;

    // Index of the last grid point <= 0.
    std::size_t i0 = std::upper_bound(g.begin(), g.end(), 0.0) - g.begin();
    if (i0 > 0) --i0;
    auto ok = [&](std::size_t i) { return std::isfinite(v[i]) && v[i] >= threshold; };
    const std::size_t i1 = std::min(i0 + 1, n - 1);
    if (!ok(i0) || !ok(i1)) return 0.0;

    double right = g.back();
    for (std::size_t i = i1; i + 1 < n; ++i) {
        if (!ok(i + 1)) {
            right = std::isfinite(v[i + 1])
                ? interp(v[i], g[i], v[i + 1], g[i + 1], threshold)
                : g[i];
            break;
        }
    }
    double left = g.front();
    for (std::size_t i = i0; i > 0; --i) {
        if (!ok(i - 1)) {
            left = std::isfinite(v[i - 1])
                ? interp(v[i], g[i], v[i - 1], g[i - 1], threshold)
                : g[i];
            break;
        }
    }
    return right - left;
}

double band_average(const FidelityMap& map, std::size_t row, double W) {
    if (!(W > 0.0)) throw std::invalid_argument("band width must be positive");
    const auto& g = map.detuning_grid;
    double weight_sum = 0.0, value_sum = 0.0;
    for (std::size_t i = 0; i + 1 < g.size(); ++i) {
        if (g[i] < -0.5 * W || g[i + 1] > 0.5 * W) continue;
        const double va = map.at(row, i), vb = map.at(row, i + 1);
        if (!std::isfinite(va) || !std::isfinite(vb)) continue;
        const double h = g[i + 1] - g[i];
        weight_sum += h;
        value_sum += 0.5 * (va + vb) * h;
    }
    if (weight_sum == 0.0)
        throw std::runtime_error("no valid grid points inside the band");
    return value_sum / weight_sum;
}

double band_average_fidelity(const SapPulse& pulse, double W, int points,
                             const SolverOptions& opts, int workers,
                             double rabi_error) {
    const FidelityMap map = detuning_sweep(
        pulse, linspace(-0.5 * W, 0.5 * W, points), opts, workers, rabi_error);
    return band_average(map, 0, W);
}

ScalingResult scaling_study(const HshParams& base, int n, ScanAxis axis,
                            const std::vector<double>& axis_grid,
                            const std::vector<double>& delta_grid,
                            const SolverOptions& opts, double threshold,
                            double attenuation, int workers) {
    if (axis_grid.empty()) throw std::invalid_argument("axis grid is empty");
    ScalingResult res;
    res.map.detuning_grid = delta_grid;
    res.map.secondary_name = axis == ScanAxis::duration ? "duration" : "rabi";
    res.map.secondary_grid = axis_grid;

    std::vector<SapPulse> pulses;
    pulses.reserve(axis_grid.size());
    for (double x : axis_grid) {
        HshParams p = base;
        if (axis == ScanAxis::duration) {
            if (x < 2.0 * base.edge_duration_t1)
                throw std::invalid_argument("duration below 2*t1");
            p.center_duration_t2 = x - 2.0 * base.edge_duration_t1;
        } else {
            p.omega_max = x;
            p.edge_rate_r = 0.3 * x * x;
            p.linear_rate_r1 = 0.15 * x * x;
        }
        pulses.push_back(build_sap(p, n, attenuation));
    }

    const std::size_t cols = delta_grid.size();
    res.map.values.assign(axis_grid.size() * cols, kNaN);
    fill_map(res.map, workers, [&](std::size_t i) {
        return transfer_fidelity(pulses[i / cols], delta_grid[i % cols], opts);
    });

    res.bandwidths.resize(axis_grid.size());
    for (std::size_t r = 0; r < axis_grid.size(); ++r) {
        FidelityMap row;
        row.detuning_grid = delta_grid;
        row.values.assign(res.map.values.begin() + r * cols,
                          res.map.values.begin() + (r + 1) * cols);
        res.bandwidths[r] = bandwidth_at_threshold(row, threshold);
    }

    // Least-squares slope: W vs tau (duration) or log W vs log Omega (rabi).
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    std::size_t m = 0;
    for (std::size_t r = 0; r < axis_grid.size(); ++r) {
        double x = axis_grid[r], y = res.bandwidths[r];
        if (axis == ScanAxis::rabi) {
            if (!(y > 0.0)) continue;
            x = std::log(x);
            y = std::log(y);
        }
        sx += x; sy += y; sxx += x * x; sxy += x * y;
        ++m;
    }
    if (m >= 2) {
        const double denom = m * sxx - sx * sx;
        if (denom != 0.0) res.fit_slope = (m * sxy - sx * sy) / denom;
    }
    return res;
}

std::pair<double, double> phase_average(const HshParams& p, int n,
                                        double attenuation, double delta,
                                        int samples, uint64_t seed,
                                        const SolverOptions& opts, int workers) {
    if (samples < 2) throw std::invalid_argument("need at least 2 phase samples");
    SplitMix64 master(seed);
    std::vector<uint64_t> seeds(samples);
    for (auto& s : seeds) s = master.next();
    std::vector<double> f(samples);
    parallel_for(samples, workers, [&](std::size_t k) {
        const SapPulse pulse = build_sap(p, n, attenuation, random_phases(n, seeds[k]));
        f[k] = transfer_fidelity(pulse, delta, opts);
    });
    double mean = 0.0;
    for (double x : f) mean += x;
    mean /= samples;
    double var = 0.0;
    for (double x : f) var += (x - mean) * (x - mean);
    var /= (samples - 1);
    return {mean, std::sqrt(var)};
}

FidelityMap rabi_error_scan(const SapPulse& pulse,
                            const std::vector<double>& delta_grid,
                            const std::vector<double>& error_grid,
                            const SolverOptions& opts, int workers) {
    for (double e : error_grid)
        if (!(e > -1.0)) throw std::invalid_argument("fractional error must exceed -1");
    FidelityMap map;
    map.detuning_grid = delta_grid;
    map.secondary_name = "rabi_error";
    map.secondary_grid = error_grid;
    const std::size_t cols = delta_grid.size();
    fill_map(map, workers, [&](std::size_t i) {
        return transfer_fidelity(pulse, delta_grid[i % cols], opts,
                                 error_grid[i / cols]);
    });
    return map;
}

FidelityMap freq_shift_scan(const std::function<SapPulse(double)>& pulse_for_shift,
                            const std::vector<double>& delta_grid,
                            const std::vector<double>& shift_grid,
                            const SolverOptions& opts, int workers) {
    FidelityMap map;
    map.detuning_grid = delta_grid;
    map.secondary_name = "shift";
    map.secondary_grid = shift_grid;
    std::vector<SapPulse> pulses;
    pulses.reserve(shift_grid.size());
    for (double s : shift_grid) pulses.push_back(pulse_for_shift(s));
    const std::size_t cols = delta_grid.size();
    fill_map(map, workers, [&](std::size_t i) {
        return transfer_fidelity(pulses[i / cols], delta_grid[i % cols], opts);
    });
    return map;
}

std::pair<FidelityMap, FidelityMap> chirp_direction_comparison(
    const HshParams& p, int n, const std::vector<double>& delta_grid,
    const SolverOptions& opts, double attenuation, int workers) {
    const SapPulse opposite = build_sap(p, n, attenuation);
    const SapPulse same = build_sap(p, n, attenuation, {}, 0.0, true);
    auto a = detuning_sweep(opposite, delta_grid, opts, workers);
    auto b = detuning_sweep(same, delta_grid, opts, workers);
    a.secondary_name = "chirp";
    b.secondary_name = "chirp";
    return {std::move(a), std::move(b)};
}

std::vector<BoundaryPoint> threshold_boundary(
    const std::vector<double>& axis1_grid, const std::vector<double>& axis2_grid,
    const std::function<double(double, double)>& cell_value, double threshold) {
    if (axis2_grid.size() < 2)
        throw std::invalid_argument("axis2 grid needs >= 2 points");
    std::vector<BoundaryPoint> boundary;
    boundary.reserve(axis1_grid.size());
    for (double x1 : axis1_grid) {
        std::vector<double> vals(axis2_grid.size(), kNaN);
        for (std::size_t j = 0; j < axis2_grid.size(); ++j) {
            try {
                vals[j] = cell_value(x1, axis2_grid[j]);
            } catch (const std::exception&) {
            }
        }
        BoundaryPoint bp;
        bp.axis1 = x1;
        // Largest axis2 where the value crosses the threshold from above.
        for (std::size_t j = axis2_grid.size(); j-- > 1;) {
            const double va = vals[j - 1], vb = vals[j];
            if (!std::isfinite(va) || !std::isfinite(vb)) continue;
            if ((va >= threshold) != (vb >= threshold)) {
                bp.axis2 = interp(va, axis2_grid[j - 1], vb, axis2_grid[j], threshold);
                break;
            }
        }
        boundary.push_back(bp);
    }
    return boundary;
}

} // namespace sap
