// Acceptance suite: one self-contained check per release criterion, each
// printed as a PASS/FAIL line. Exit code is the number of failed criteria.

#include "sap/analysis.hpp"
#include "sap/io.hpp"
#include "sap/optimize.hpp"
#include "sap/run.hpp"
#include "sap/suture.hpp"

#include "test_support.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

using namespace sap;
using sap::testing::random_params;
using sap::testing::strong_params;
using sap::testing::weak_params;

namespace {

constexpr double kPi = std::numbers::pi;
const SolverOptions kOpts{};

struct Criterion {
    std::string name;
    bool ok = true;
    std::ostringstream detail;

    void require(bool cond, const std::string& what) {
        if (!cond) {
            ok = false;
            detail << (detail.str().empty() ? "" : "; ") << what;
        }
    }
};

int report(Criterion& c, double seconds) {
    std::printf("%s %s (%.1f s)%s%s\n", c.ok ? "PASS" : "FAIL", c.name.c_str(),
                seconds, c.ok ? "" : " -- ", c.ok ? "" : c.detail.str().c_str());
    std::fflush(stdout);
    return c.ok ? 0 : 1;
}

std::string fmt(double x) {
    char buf[48];
    std::snprintf(buf, sizeof(buf), "%.6g", x);
    return buf;
}

// ------------------------------------------------------------------------

void c1_analytic_oracles(Criterion& c) {
    // Resonant constant drive: F = sin^2(Omega tau / 2).
    for (double x : {0.4, 1.3, kPi, 2.9, 5.0}) {
        auto ham = [](double) { return Ham2{0.0, 0.0, cplx(0.5, 0.0)}; };
        SolverOptions o;
        o.max_step = x / 200.0;
        const auto r = evolve_ode(ham, QubitState{}, 0.0, x, o);
        const double f = std::norm(r.state.amp_s);
        const double expected = std::sin(x / 2) * std::sin(x / 2);
        c.require(std::fabs(f - expected) < 1e-8,
                  "Rabi mismatch at Omega*tau = " + fmt(x) + ": " + fmt(f) +
                      " vs " + fmt(expected));
    }

    // Landau-Zener: Omega = 2, v = 4, sweep window +-20 (= +-10 Omega).
    // Finite-window correction: raw diabatic populations keep oscillating
    // at the instantaneous gap with O(Omega/W) amplitude, so the transfer
    // is prepared and read out in the adiabatic basis, where the residual
    // window error is O((Omega/W)^2) ~ 1e-4 here.
    const double omega = 2.0, v = 4.0, tau = 10.0;
    auto lz = [=](double t) {
        return Ham2{0.5 * v * (t - tau / 2), -0.5 * v * (t - tau / 2),
                    cplx(omega / 2, 0.0)};
    };
    auto lower_eigvec = [&](double d) {
        const double lam = -0.5 * std::hypot(d, omega);
        const double y = (2.0 * lam - d) / omega;
        const double n = std::sqrt(1.0 + y * y);
        return std::pair<double, double>{1.0 / n, y / n};
    };
    const auto [e0, s0] = lower_eigvec(-v * tau / 2);
    SolverOptions o;
    o.max_step = 0.01;
    const auto r =
        evolve_ode(lz, QubitState{cplx(e0, 0), cplx(s0, 0)}, 0.0, tau, o);
    const auto [e1, s1] = lower_eigvec(v * tau / 2);
    const double p = std::norm(e1 * r.state.amp_e + s1 * r.state.amp_s);
    const double expected = 1.0 - std::exp(-kPi * omega * omega / (2.0 * v));
    c.require(std::fabs(p - expected) < 1e-3,
              "LZ mismatch: " + fmt(p) + " vs " + fmt(expected));
}

void c2_compact_equivalence(Criterion& c) {
    const HshParams p = strong_params();
    const SapPulse pulse = build_sap(p, 2, 1.0);
    const double f = chirp_span(p);
    double worst = 0.0;
    for (double delta : linspace(-f, f, 101)) {
        const double full = transfer_fidelity(pulse, delta, kOpts);
        const double compact = evolve_compact_sap2(p, delta, kOpts);
        worst = std::max(worst, std::fabs(full - compact));
    }
    c.require(worst < 1e-6, "worst two-tone/compact gap " + fmt(worst));
}

void c3_suture_analytics(Criterion& c) {
    SplitMix64 gen(2026);
    int checked = 0;
    while (checked < 20) {
        const HshParams p = random_params(gen);
        SutureSeries s;
        try {
            s = phi_series(p, 40);
        } catch (const std::runtime_error&) {
            continue;  // sweep too slow for a crossing; draw another set
        }
        ++checked;

        const double phi = phi_numeric(p, p.tau());
        const double analytic = std::sin(phi) * std::sin(phi);
        const double compact = evolve_compact_sap2(p, 0.0, kOpts);
        c.require(std::fabs(analytic - compact) < 1e-6,
                  "set " + std::to_string(checked) + ": sin^2(phi) " +
                      fmt(analytic) + " vs compact " + fmt(compact));

        bool series_ok = true;
        for (std::size_t k = 0; k < s.terms.size(); ++k) {
            const double sign = (k % 2 == 0) ? -1.0 : 1.0;
            if (!(s.terms[k] * sign > 0.0)) series_ok = false;
            if (k > 0 && !(std::fabs(s.terms[k]) < std::fabs(s.terms[k - 1])))
                series_ok = false;
        }
        const SutureSeries deep = phi_series(p, 400);
        const double limit =
            0.5 * (deep.partial_sums[399] + deep.partial_sums[398]);
        for (int N = 0; N + 1 < static_cast<int>(s.terms.size()); ++N) {
            if (std::fabs(limit - s.partial_sums[N]) >
                leibniz_tail_bound(s, N) * (1.0 + 1e-12))
                series_ok = false;
            const double lo = std::min(s.partial_sums[N], s.partial_sums[N + 1]);
            const double hi = std::max(s.partial_sums[N], s.partial_sums[N + 1]);
            if (limit < lo - 1e-12 || limit > hi + 1e-12) series_ok = false;
        }
        c.require(series_ok,
                  "set " + std::to_string(checked) + ": series property violated");

        // Triangle-lobe model: the short partial sum estimates phi(tau)
        // within the first omitted term or the documented 15% model error.
        const double estimate = s.partial_sums[2];
        const double tol =
            std::max(std::fabs(s.terms[3]), 0.15 * std::fabs(phi));
        c.require(std::fabs(estimate - phi) <= tol,
                  "set " + std::to_string(checked) + ": estimate " +
                      fmt(estimate) + " vs phi(tau) " + fmt(phi) + " (tol " +
                      fmt(tol) + ")");
    }
}

void c4_bandwidth_scaling(Criterion& c) {
    const HshParams p = weak_params();
    const double f = chirp_span(p);

    // (a) SAP2 bandwidth / SAP1 bandwidth at the same profile.
    const FidelityMap m1 = detuning_sweep(build_sap(p, 1, 1.0),
                                          linspace(-f, f, 121), kOpts);
    const FidelityMap m2 = detuning_sweep(build_sap(p, 2, 0.95),
                                          linspace(-2 * f, 2 * f, 121), kOpts);
    const double w1 = bandwidth_at_threshold(m1, 0.95);
    const double w2 = bandwidth_at_threshold(m2, 0.95);
    const double ratio = w2 / w1;
    c.require(w1 > 0.0 && ratio > 1.6 && ratio < 2.4,
              "bandwidth ratio " + fmt(ratio) + " (W1 " + fmt(w1) + ", W2 " +
                  fmt(w2) + ")");

    // (b) dW/dtau fitted over tau in [4, 8].
    const std::vector<double> taus = linspace(4.0, 8.0, 5);
    const auto grid1 = linspace(-18.0, 18.0, 121);
    const ScalingResult d1 =
        scaling_study(p, 1, ScanAxis::duration, taus, grid1, kOpts, 0.95, 1.0);
    const auto grid2 = linspace(-18.0, 18.0, 121);
    const ScalingResult d2 =
        scaling_study(p, 2, ScanAxis::duration, taus, grid2, kOpts, 0.95, 0.95);
    const double slope_ratio = d2.fit_slope / d1.fit_slope;
    c.require(d1.fit_slope > 0.0 && slope_ratio > 1.6 && slope_ratio < 2.4,
              "dW/dtau ratio " + fmt(slope_ratio) + " (SAP1 " +
                  fmt(d1.fit_slope) + ", SAP2 " + fmt(d2.fit_slope) + ")");

    // (c) W vs Omega on a log-log fit: expect slope ~ 2.
    HshParams base = weak_params();
    base.edge_shape_T = 0.4;  // rabi-axis operating point, tau = 6
    const std::vector<double> omegas = linspace(2.0, 4.0, 5);
    const ScalingResult rb = scaling_study(base, 1, ScanAxis::rabi, omegas,
                                           linspace(-22.0, 22.0, 121), kOpts);
    c.require(rb.fit_slope > 1.6 && rb.fit_slope < 2.4,
              "log-log W(Omega) slope " + fmt(rb.fit_slope));
}

// Shared by criteria 5 and 7: the W = 20 suture-optimized SAP2 pulse.
OptimizationResult optimize_w20_sap2() {
    const FixedParams fixed{3.0, 0.5, 5.0};  // Omega = 3, t1 = 0.5, t2 = 5
    const BoundsBox box{{0.08, 1.0}, {0.3, 5.0}, {0.02, 8.0}};
    Objective obj;  // suture_point
    obj.band_W = 20.0;
    const PulseTemplate tmpl{2, 0.95};
    return optimize(box, fixed, tmpl, obj, 120, 11, kOpts, 7);
}

void c5_suture_recovery(Criterion& c, const OptimizationResult& res) {
    c.require(res.best_value > 0.95,
              "optimized suture fidelity " + fmt(res.best_value));
    c.require(chirp_span(res.best_params) > 9.99 &&
                  chirp_span(res.best_params) < 10.01,
              "pinned span " + fmt(chirp_span(res.best_params)));
}

void c6_chirp_ablation(Criterion& c) {
    const HshParams p = weak_params();
    const double W = 2.0 * chirp_span(p);
    const auto grid = linspace(-0.5 * W, 0.5 * W, 81);
    const auto [opposite, same] =
        chirp_direction_comparison(p, 2, grid, kOpts, 0.95);
    const double ba_opp = band_average(opposite, 0, W);
    const double ba_same = band_average(same, 0, W);
    c.require(ba_same < ba_opp, "band averages: same " + fmt(ba_same) +
                                    " vs opposite " + fmt(ba_opp));
    // The damage concentrates where the windows meet: the central quarter
    // deficit exceeds the whole-band deficit.
    const double center_opp = band_average(opposite, 0, 0.25 * W);
    const double center_same = band_average(same, 0, 0.25 * W);
    const double central_deficit = center_opp - center_same;
    const double full_deficit = ba_opp - ba_same;
    c.require(central_deficit > full_deficit,
              "central-quarter deficit " + fmt(central_deficit) +
                  " vs full-band " + fmt(full_deficit));
}

void c7_robustness(Criterion& c, const OptimizationResult& res) {
    const HshParams p = res.best_params;
    const double W = 20.0;
    const int points = 41;

    const SapPulse pulse = build_sap(p, 2, 0.95);
    const double ba0 = band_average_fidelity(pulse, W, points, kOpts);
    for (double eps : {-0.1, 0.1}) {
        const double ba = band_average_fidelity(pulse, W, points, kOpts, 1, eps);
        c.require(std::fabs(ba0 - ba) < 0.05,
                  "rabi-error drop " + fmt(ba0 - ba) + " at eps " + fmt(eps));
    }

    // Window-shift scan without reoptimization.
    auto shifted = [&](double s) { return build_sap(p, 2, 0.95, {}, s); };
    auto band_at = [&](double s) {
        return band_average_fidelity(shifted(s), W, points, kOpts);
    };
    auto suture_at = [&](double s) {
        const SapPulse q = shifted(s);
        return transfer_fidelity(q, suture_detuning(q), kOpts);
    };
    const double suture0 = suture_at(0.0);
    double worst_band_drop = 0.0, worst_suture_drop = 0.0;
    for (double s : {-1.0, -0.5, 0.5, 1.0}) {
        worst_band_drop = std::max(worst_band_drop, ba0 - band_at(s));
        worst_suture_drop = std::max(worst_suture_drop, suture0 - suture_at(s));
    }
    c.require(worst_band_drop < 0.05,
              "band-average drop " + fmt(worst_band_drop) + " over |df| <= 1");
    c.require(worst_suture_drop > 0.05,
              "suture-point drop only " + fmt(worst_suture_drop));

    // Separated windows (df > 0) underperform overlapped ones (df < 0).
    c.require(band_at(1.0) < band_at(-1.0),
              "separated " + fmt(band_at(1.0)) + " !< overlapped " +
                  fmt(band_at(-1.0)));
}

void c8_property_suite(Criterion& c) {
    // Adaptive vs fixed-step overlap and norm drift on random configs.
    SplitMix64 gen(4242);
    for (int trial = 0; trial < 20; ++trial) {
        const HshParams p = random_params(gen);
        const double delta = gen.uniform(-3.0, 3.0);
        const RotatingFrameHamiltonian h{build_sap(p, 2, 0.95), delta};
        const EvolveResult a = evolve(h, QubitState{}, kOpts);
        SolverOptions fo;
        fo.fixed_step = true;
        const EvolveResult b = evolve(h, QubitState{}, fo);
        const cplx overlap = std::conj(b.state.amp_e) * a.state.amp_e +
                             std::conj(b.state.amp_s) * a.state.amp_s;
        c.require(std::abs(overlap) >= 1.0 - 1e-8,
                  "overlap " + fmt(std::abs(overlap)) + " on trial " +
                      std::to_string(trial));
        c.require(a.norm_drift < 1e-6 && b.norm_drift < 1e-6, "norm drift");
    }

    // delta -> -delta symmetry of the symmetric SAP2 map.
    const SapPulse sym = build_sap(weak_params(), 2, 1.0);
    const auto grid = linspace(-4.0, 4.0, 9);
    const FidelityMap m = detuning_sweep(sym, grid, kOpts);
    for (std::size_t i = 0; i < 4; ++i)
        c.require(std::fabs(m.at(0, i) - m.at(0, 8 - i)) < 1e-6,
                  "symmetry broken at delta " + fmt(grid[i]));

    // Determinism: identical config + seed => byte-identical artifacts.
    namespace fs = std::filesystem;
    const fs::path root = fs::temp_directory_path() / "sap_acceptance_det";
    fs::remove_all(root);
    fs::create_directories(root);
    const nlohmann::json cfg{
        {"command", "phase-average"},
        {"pulse", {{"omega_max", 2.0}, {"T", 0.35}, {"r", 1.2}, {"r1", 0.7},
                   {"t1", 1.0}, {"t2", 4.0}, {"n", 2}, {"attenuation", 0.95}}},
        {"grid", {{"min", -2.0}, {"max", 2.0}, {"points", 3}}},
        {"samples", 4},
        {"seed", 17},
    };
    write_text_file((root / "config.json").string(), cfg.dump(2));
    RunOptions ro;
    ro.config_path = (root / "config.json").string();
    std::string first_csv, first_json;
    for (int run_idx = 0; run_idx < 2; ++run_idx) {
        ro.out_dir = (root / ("out" + std::to_string(run_idx))).string();
        c.require(run(ro) == kOk, "deterministic run failed");
        const std::string csv = read_text_file(ro.out_dir + "/result.csv");
        const std::string js = read_text_file(ro.out_dir + "/result.json");
        if (run_idx == 0) {
            first_csv = csv;
            first_json = js;
        } else {
            c.require(csv == first_csv && js == first_json,
                      "rerun artifacts differ");
        }
    }
    fs::remove_all(root);

    // Pulse-core invariants on 1000 random parameter sets.
    SplitMix64 pg(31415);
    bool core_ok = true;
    for (int trial = 0; trial < 1000 && core_ok; ++trial) {
        const HshParams p = random_params(pg);
        const double t1 = p.edge_duration_t1, t2 = p.center_duration_t2;
        const double tau = p.tau();
        auto near = [](double x, double y, double tol) {
            return std::fabs(x - y) <= tol * std::max({1.0, std::fabs(x), std::fabs(y)});
        };
        // Seam continuity of chirp, envelope and phase.
        for (double seam : {t1, t1 + t2}) {
            const double e = 1e-9;
            if (!near(hsh_chirp(p, seam - e), hsh_chirp(p, seam + e), 1e-6)) core_ok = false;
            if (!near(hsh_envelope(p, seam - e), hsh_envelope(p, seam + e), 1e-6)) core_ok = false;
            if (!near(chirp_phase(p, seam - e), chirp_phase(p, seam + e), 1e-6)) core_ok = false;
        }
        // Odd chirp / even envelope about the midpoint; zero net phase.
        const double t = pg.uniform(0.0, tau);
        if (!near(hsh_chirp(p, t), -hsh_chirp(p, tau - t), 1e-9)) core_ok = false;
        if (!near(hsh_envelope(p, t), hsh_envelope(p, tau - t), 1e-9)) core_ok = false;
        if (std::fabs(chirp_phase(p, tau)) > 1e-9) core_ok = false;
        // Phase derivative equals the chirp (central difference).
        const double tc = pg.uniform(0.05 * tau, 0.95 * tau);
        const double h = 1e-6;
        const double deriv = (chirp_phase(p, tc + h) - chirp_phase(p, tc - h)) / (2 * h);
        if (!near(deriv, hsh_chirp(p, tc), 1e-4)) core_ok = false;
        // Span identity.
        if (!near(chirp_span(p), hsh_chirp(p, tau) - hsh_chirp(p, 0.0), 1e-12))
            core_ok = false;
    }
    c.require(core_ok, "pulse-core invariant violated");
}

void c9_boundary_ordering(Criterion& c) {
    const std::vector<double> taus = linspace(3.0, 7.0, 5);
    const BoundsBox box{{0.08, 1.0}, {0.3, 5.0}, {0.02, 8.0}};
    const double t1 = 0.5;

    auto boundary_for = [&](int n) {
        const std::vector<double> w_grid = linspace(2.0, 14.0, 7);  // per tone
        auto cell = [&](double tau, double w) {
            Objective obj;
            obj.kind = ObjectiveKind::band_average;
            obj.band_W = n * w;
            obj.grid_points = 21;
            const FixedParams fixed{3.0, t1, tau - 2.0 * t1};
            const PulseTemplate tmpl{n, 0.95};
            return optimize(box, fixed, tmpl, obj, 20, 5, kOpts, 3).best_value;
        };
        return threshold_boundary(taus, w_grid, cell, 0.95);
    };

    const auto b1 = boundary_for(1);
    const auto b3 = boundary_for(3);
    for (std::size_t i = 0; i < taus.size(); ++i) {
        if (!b1[i].axis2.has_value()) {
            c.require(false, "no SAP1 boundary at tau " + fmt(taus[i]));
            continue;
        }
        if (!b3[i].axis2.has_value()) {
            c.require(false, "no SAP3 boundary at tau " + fmt(taus[i]));
            continue;
        }
        const double W1 = 1.0 * *b1[i].axis2;
        const double W3 = 3.0 * *b3[i].axis2;
        c.require(W3 > W1, "tau " + fmt(taus[i]) + ": W3 " + fmt(W3) +
                               " !> W1 " + fmt(W1));
    }
}

template <class Fn>
int timed(const char* name, Fn&& fn) {
    Criterion c;
    c.name = name;
    const auto start = std::chrono::steady_clock::now();
    try {
        fn(c);
    } catch (const std::exception& e) {
        c.require(false, std::string("exception: ") + e.what());
    }
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
            .count();
    return report(c, secs);
}

} // namespace

int main() {
    int failures = 0;
    failures += timed("1. analytic solver oracles (Rabi, Landau-Zener)",
                      c1_analytic_oracles);
    failures += timed("2. two-tone vs compact SAP2 equivalence",
                      c2_compact_equivalence);
    failures += timed("3. suture-point analytics and alternating series",
                      c3_suture_analytics);
    failures += timed("4. bandwidth doubling and scaling laws",
                      c4_bandwidth_scaling);

    OptimizationResult w20;
    bool w20_ok = true;
    try {
        w20 = optimize_w20_sap2();
    } catch (const std::exception& e) {
        w20_ok = false;
        Criterion c;
        c.name = "5. suture-point recovery by optimization";
        c.require(false, std::string("optimizer exception: ") + e.what());
        failures += report(c, 0.0);
        Criterion c7;
        c7.name = "7. robustness to Rabi error and window shift";
        c7.require(false, "skipped: optimization unavailable");
        failures += report(c7, 0.0);
    }
    if (w20_ok) {
        failures += timed("5. suture-point recovery by optimization",
                          [&](Criterion& c) { c5_suture_recovery(c, w20); });
        failures += timed("7. robustness to Rabi error and window shift",
                          [&](Criterion& c) { c7_robustness(c, w20); });
    }

    failures += timed("6. chirp-direction ablation", c6_chirp_ablation);
    failures += timed("8. solver/property suite", c8_property_suite);
    failures += timed("9. bandwidth-duration boundary ordering (SAP3 vs SAP1)",
                      c9_boundary_ordering);

    if (failures == 0)
        std::printf("all acceptance criteria passed\n");
    else
        std::printf("%d acceptance criteria FAILED\n", failures);
    return failures;
}
