#include "sap/optimize.hpp"

#include "sap/rng.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace sap {

namespace {

constexpr double kBad = -std::numeric_limits<double>::infinity();

struct Problem {
    const BoundsBox& box;
    const FixedParams& fixed;
    const PulseTemplate& tmpl;
    const Objective& objective;
    const SolverOptions& opts;
    int workers;
    uint64_t seed;
    bool constrained;      // r1 derived from chirp_span = band_W / n
    double span_target;    // per-component window when constrained

    int dims() const { return constrained ? 2 : 3; }

    // x holds log(T), log(r) [, log(r1)].
    bool make_params(const std::vector<double>& x, HshParams& p) const {
        p.omega_max = fixed.omega_max;
        p.edge_duration_t1 = fixed.edge_duration_t1;
        p.center_duration_t2 = fixed.center_duration_t2;
        p.edge_shape_T = std::exp(x[0]);
        p.edge_rate_r = std::exp(x[1]);
        if (constrained) {
            const double r1 = (span_target -
                               2.0 * p.edge_rate_r *
                                   std::tanh(p.edge_duration_t1 / p.edge_shape_T)) *
                              p.edge_shape_T / p.center_duration_t2;
            if (!(r1 >= box.r1[0] && r1 <= box.r1[1])) return false;
            p.linear_rate_r1 = r1;
        } else {
            p.linear_rate_r1 = std::exp(x[2]);
        }
        return true;
    }

    double value_of(const HshParams& p) const {
        const SapPulse pulse = build_sap(p, tmpl.n, tmpl.attenuation, tmpl.phases,
                                         tmpl.delta_f, tmpl.same_chirp);
        switch (objective.kind) {
            case ObjectiveKind::suture_point:
                return transfer_fidelity(pulse, suture_detuning(pulse), opts);
            case ObjectiveKind::band_average: {
                const double W = objective.band_W > 0.0
                    ? objective.band_W : tmpl.n * chirp_span(p);
                return band_average_fidelity(pulse, W, objective.grid_points,
                                             opts, workers);
            }
            case ObjectiveKind::bandwidth_at_threshold: {
                const double W = 1.5 * tmpl.n * chirp_span(p);
                const FidelityMap map = detuning_sweep(
                    pulse, linspace(-0.5 * W, 0.5 * W, objective.grid_points),
                    opts, workers);
                return bandwidth_at_threshold(map, objective.threshold);
            }
            case ObjectiveKind::phase_averaged_band: {
                const double W = objective.band_W > 0.0
                    ? objective.band_W : tmpl.n * chirp_span(p);
                SplitMix64 gen(seed ^ 0x9d2c5680u);
                double sum = 0.0;
                for (int k = 0; k < objective.phase_samples; ++k) {
                    const SapPulse sampled =
                        build_sap(p, tmpl.n, tmpl.attenuation,
                                  random_phases(tmpl.n, gen.next()), tmpl.delta_f,
                                  tmpl.same_chirp);
                    sum += band_average_fidelity(sampled, W, objective.grid_points,
                                                 opts, workers);
                }
                return sum / objective.phase_samples;
            }
        }
        return kBad;
    }
};

std::vector<double> log_grid(double lo, double hi, int points) {
    std::vector<double> g(points);
    if (points == 1 || lo == hi) {
        g.assign(points, std::log(lo));
        return g;
    }
    const double llo = std::log(lo), lhi = std::log(hi);
    for (int i = 0; i < points; ++i)
        g[i] = llo + (lhi - llo) * static_cast<double>(i) / (points - 1);
    return g;
}

} // namespace

void Objective::validate() const {
    if (!(threshold > 0.0 && threshold < 1.0))
        throw std::invalid_argument("threshold must be in (0, 1)");
    if (band_W < 0.0) throw std::invalid_argument("band_W must be >= 0");
    if (phase_samples < 1) throw std::invalid_argument("phase_samples must be >= 1");
    if (grid_points < 3) throw std::invalid_argument("grid_points must be >= 3");
}

void BoundsBox::validate() const {
    for (const auto& b : {T, r, r1})
        if (!(b[0] > 0.0) || !(b[1] >= b[0]))
            throw std::invalid_argument("bounds must be positive and ordered");
}

OptimizationResult optimize(const BoundsBox& box, const FixedParams& fixed,
                            const PulseTemplate& tmpl, const Objective& objective,
                            int budget, uint64_t seed, const SolverOptions& opts,
                            int coarse_per_dim, int workers) {
    box.validate();
    objective.validate();
    if (coarse_per_dim < 1) throw std::invalid_argument("coarse_per_dim must be >= 1");

    Problem prob{box, fixed, tmpl, objective, opts, workers, seed,
                 objective.band_W > 0.0 &&
                     objective.kind != ObjectiveKind::bandwidth_at_threshold,
                 objective.band_W / std::max(tmpl.n, 1)};
    const int dims = prob.dims();

    OptimizationResult res;
    res.best_value = kBad;

    auto evaluate = [&](const std::vector<double>& x) {
        ++res.evaluations;
        HshParams p;
        if (!prob.make_params(x, p)) return kBad;
        try {
            const double v = prob.value_of(p);
            if (v > res.best_value) {
                res.best_value = v;
                res.best_params = p;
                res.trace.emplace_back(p, v);
            }
            return v;
        } catch (const std::exception&) {
            return kBad;
        }
    };

    // Stage 1: coarse log-spaced scan.
    const std::vector<double> gT = log_grid(box.T[0], box.T[1], coarse_per_dim);
    const std::vector<double> gr = log_grid(box.r[0], box.r[1], coarse_per_dim);
    const std::vector<double> gr1 =
        dims == 3 ? log_grid(box.r1[0], box.r1[1], coarse_per_dim)
                  : std::vector<double>{0.0};
    const long coarse_count =
        static_cast<long>(gT.size()) * gr.size() * gr1.size();
    if (budget < coarse_count)
        throw std::invalid_argument("budget below coarse scan size");

    std::vector<double> best_x;
    double best_f = kBad;
    for (double xT : gT)
        for (double xr : gr)
            for (double xr1 : gr1) {
                std::vector<double> x = dims == 3
                    ? std::vector<double>{xT, xr, xr1}
                    : std::vector<double>{xT, xr};
                const double v = evaluate(x);
                if (v > best_f) {
                    best_f = v;
                    best_x = x;
                }
            }
    if (best_x.empty())
        throw std::runtime_error("no feasible point in the coarse scan");

    // Degenerate box: nothing to refine.
    const bool degenerate = box.T[0] == box.T[1] && box.r[0] == box.r[1] &&
                            (dims == 2 || box.r1[0] == box.r1[1]);
    if (degenerate) {
        res.converged = true;
        return res;
    }

    // Stage 2: Nelder-Mead in log-space, clamped to the box.
    const std::array<std::array<double, 2>, 3> lb{box.T, box.r, box.r1};
    auto clamp_x = [&](std::vector<double>& x) {
        for (int d = 0; d < dims; ++d)
            x[d] = std::clamp(x[d], std::log(lb[d][0]), std::log(lb[d][1]));
    };

    std::vector<std::vector<double>> simplex(dims + 1, best_x);
    for (int d = 0; d < dims; ++d) {
        simplex[d + 1][d] += 0.05;
        clamp_x(simplex[d + 1]);
        if (simplex[d + 1][d] == best_x[d]) simplex[d + 1][d] -= 0.05;
    }
    std::vector<double> fval(dims + 1);
    fval[0] = best_f;
    for (int i = 1; i <= dims && res.evaluations < budget; ++i)
        fval[i] = evaluate(simplex[i]);

    const double ftol = 1e-4;
    const double alpha = 1.0, gamma = 2.0, rho = 0.5, sigma = 0.5;
    while (res.evaluations < budget) {
        // Sort ascending by -value (we maximize; best first).
        std::vector<int> order(dims + 1);
        for (int i = 0; i <= dims; ++i) order[i] = i;
        std::sort(order.begin(), order.end(),
                  [&](int a, int b) { return fval[a] > fval[b]; });
        std::vector<std::vector<double>> sx(dims + 1);
        std::vector<double> sf(dims + 1);
        for (int i = 0; i <= dims; ++i) {
            sx[i] = simplex[order[i]];
            sf[i] = fval[order[i]];
        }
        simplex = sx;
        fval = sf;

        if (std::isfinite(fval[dims]) && fval[0] - fval[dims] < ftol) {
            res.converged = true;
            break;
        }

        std::vector<double> centroid(dims, 0.0);
        for (int i = 0; i < dims; ++i)
            for (int d = 0; d < dims; ++d) centroid[d] += simplex[i][d] / dims;

        auto blend = [&](const std::vector<double>& from, double coef) {
            std::vector<double> x(dims);
            for (int d = 0; d < dims; ++d)
                x[d] = centroid[d] + coef * (centroid[d] - from[d]);
            clamp_x(x);
            return x;
        };

        const auto xr = blend(simplex[dims], alpha);
        const double fr = evaluate(xr);
        if (fr > fval[0]) {
            const auto xe = blend(simplex[dims], gamma);
            const double fe = res.evaluations < budget ? evaluate(xe) : kBad;
            if (fe > fr) {
                simplex[dims] = xe;
                fval[dims] = fe;
            } else {
                simplex[dims] = xr;
                fval[dims] = fr;
            }
        } else if (fr > fval[dims - 1]) {
            simplex[dims] = xr;
            fval[dims] = fr;
        } else {
            const auto xc = blend(simplex[dims], -rho);
            const double fc = res.evaluations < budget ? evaluate(xc) : kBad;
            if (fc > fval[dims]) {
                simplex[dims] = xc;
                fval[dims] = fc;
            } else {
                for (int i = 1; i <= dims && res.evaluations < budget; ++i) {
                    for (int d = 0; d < dims; ++d)
                        simplex[i][d] = simplex[0][d] +
                                        sigma * (simplex[i][d] - simplex[0][d]);
                    fval[i] = evaluate(simplex[i]);
                }
            }
        }
    }
    return res;
}

std::vector<OptimizationResult> reoptimize_per_condition(
    const std::vector<double>& delta_f_grid, const BoundsBox& box,
    const FixedParams& fixed, const PulseTemplate& tmpl, const Objective& objective,
    int budget, uint64_t master_seed, const SolverOptions& opts,
    int coarse_per_dim, int workers) {
    SplitMix64 gen(master_seed);
    std::vector<uint64_t> seeds(delta_f_grid.size());
    for (auto& s : seeds) s = gen.next();
    std::vector<OptimizationResult> results;
    results.reserve(delta_f_grid.size());
    for (std::size_t i = 0; i < delta_f_grid.size(); ++i) {
        PulseTemplate t = tmpl;
        t.delta_f = delta_f_grid[i];
        results.push_back(optimize(box, fixed, t, objective, budget, seeds[i],
                                   opts, coarse_per_dim, workers));
    }
    return results;
}

} // namespace sap
