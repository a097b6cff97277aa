#include "sap/run.hpp"

#include "sap/io.hpp"
#include "sap/rng.hpp"

#include <nlohmann/json.hpp>

#include <chrono>
#include <cmath>
#include <filesystem>
#include <functional>
#include <map>
#include <set>
#include <sstream>

using nlohmann::json;

namespace sap {

namespace {

// ---------------------------------------------------------------- schema

void require_keys(const json& obj, const std::string& where,
                  const std::set<std::string>& allowed,
                  const std::set<std::string>& required) {
    if (!obj.is_object()) throw SchemaError(where + " must be an object");
    for (const auto& [key, _] : obj.items())
        if (!allowed.count(key))
            throw SchemaError("unknown key '" + key + "' in " + where);
    for (const auto& key : required)
        if (!obj.contains(key))
            throw SchemaError("missing key '" + key + "' in " + where);
}

double num(const json& obj, const std::string& key, double fallback) {
    if (!obj.contains(key)) return fallback;
    if (!obj.at(key).is_number())
        throw SchemaError("key '" + key + "' must be a number");
    return obj.at(key).get<double>();
}

long integer(const json& obj, const std::string& key, long fallback) {
    if (!obj.contains(key)) return fallback;
    if (!obj.at(key).is_number_integer())
        throw SchemaError("key '" + key + "' must be an integer");
    return obj.at(key).get<long>();
}

bool boolean(const json& obj, const std::string& key, bool fallback) {
    if (!obj.contains(key)) return fallback;
    if (!obj.at(key).is_boolean())
        throw SchemaError("key '" + key + "' must be a boolean");
    return obj.at(key).get<bool>();
}

std::vector<double> parse_grid(const json& cfg, const std::string& key) {
    if (!cfg.contains(key)) throw SchemaError("missing grid block '" + key + "'");
    const json& g = cfg.at(key);
    require_keys(g, key, {"min", "max", "points"}, {"min", "max", "points"});
    const double lo = num(g, "min", 0.0), hi = num(g, "max", 0.0);
    const long points = integer(g, "points", 0);
    if (points < 1) throw SchemaError(key + ".points must be >= 1");
    if (hi < lo) throw SchemaError(key + ".max must be >= min");
    return linspace(lo, hi, static_cast<int>(points));
}

// ----------------------------------------------------------------- blocks

struct PulseConfig {
    double omega_max = 0.0, t1 = 0.0, t2 = 0.0;
    std::optional<double> T, r, r1;
    int n = 1;
    double attenuation = 1.0;
    double delta_f = 0.0;
    bool same_chirp = false;
    bool random_phases_flag = false;
    uint64_t phase_seed = 0;

    HshParams shape() const {
        if (!T || !r || !r1)
            throw SchemaError("pulse block must specify T, r and r1 for this command");
        HshParams p{omega_max, *T, *r, *r1, t1, t2};
        p.validate();
        return p;
    }

    SapPulse pulse() const {
        const HshParams p = shape();
        const std::vector<double> phases =
            random_phases_flag ? random_phases(n, phase_seed) : std::vector<double>{};
        return build_sap(p, n, attenuation, phases, delta_f, same_chirp);
    }
};

PulseConfig parse_pulse(const json& cfg) {
    if (!cfg.contains("pulse")) throw SchemaError("missing 'pulse' block");
    const json& p = cfg.at("pulse");
    require_keys(p, "pulse",
                 {"omega_max", "T", "r", "r1", "t1", "t2", "tau", "n",
                  "attenuation", "delta_f", "same_chirp", "phases", "phase_seed"},
                 {"omega_max", "t1"});
    PulseConfig out;
    out.omega_max = num(p, "omega_max", 0.0);
    out.t1 = num(p, "t1", 0.0);
    if (p.contains("t2") && p.contains("tau"))
        throw SchemaError("specify pulse.t2 or pulse.tau, not both");
    if (p.contains("t2")) {
        out.t2 = num(p, "t2", 0.0);
    } else if (p.contains("tau")) {
        const double tau = num(p, "tau", 0.0);
        if (tau < 2.0 * out.t1)
            throw std::invalid_argument("tau must be >= 2*t1");
        out.t2 = tau - 2.0 * out.t1;
    } else {
        throw SchemaError("pulse block needs t2 or tau");
    }
    if (p.contains("T")) out.T = num(p, "T", 0.0);
    if (p.contains("r")) out.r = num(p, "r", 0.0);
    if (p.contains("r1")) out.r1 = num(p, "r1", 0.0);
    out.n = static_cast<int>(integer(p, "n", 1));
    out.attenuation = num(p, "attenuation", 1.0);
    out.delta_f = num(p, "delta_f", 0.0);
    out.same_chirp = boolean(p, "same_chirp", false);
    if (p.contains("phases")) {
        const std::string mode = p.at("phases").get<std::string>();
        if (mode == "random")
            out.random_phases_flag = true;
        else if (mode != "zero")
            throw SchemaError("pulse.phases must be 'zero' or 'random'");
    }
    out.phase_seed = static_cast<uint64_t>(integer(p, "phase_seed", 0));
    return out;
}

SolverOptions parse_solver(const json& cfg) {
    SolverOptions opts;
    if (!cfg.contains("solver")) return opts;
    const json& s = cfg.at("solver");
    require_keys(s, "solver",
                 {"rel_tol", "abs_tol", "max_step", "fixed_step", "fixed_steps"}, {});
    opts.rel_tol = num(s, "rel_tol", opts.rel_tol);
    opts.abs_tol = num(s, "abs_tol", opts.abs_tol);
    opts.max_step = num(s, "max_step", opts.max_step);
    opts.fixed_step = boolean(s, "fixed_step", false);
    opts.fixed_steps = integer(s, "fixed_steps", opts.fixed_steps);
    opts.validate();
    return opts;
}

Objective parse_objective(const json& cfg) {
    Objective obj;
    if (!cfg.contains("objective")) return obj;
    const json& o = cfg.at("objective");
    require_keys(o, "objective",
                 {"kind", "band", "threshold", "phase_samples", "grid_points"},
                 {"kind"});
    static const std::map<std::string, ObjectiveKind> kinds{
        {"suture_point", ObjectiveKind::suture_point},
        {"band_average", ObjectiveKind::band_average},
        {"bandwidth_at_threshold", ObjectiveKind::bandwidth_at_threshold},
        {"phase_averaged_band", ObjectiveKind::phase_averaged_band}};
    const std::string kind = o.at("kind").get<std::string>();
    const auto it = kinds.find(kind);
    if (it == kinds.end()) throw SchemaError("unknown objective.kind '" + kind + "'");
    obj.kind = it->second;
    obj.band_W = num(o, "band", 0.0);
    obj.threshold = num(o, "threshold", obj.threshold);
    obj.phase_samples = static_cast<int>(integer(o, "phase_samples", obj.phase_samples));
    obj.grid_points = static_cast<int>(integer(o, "grid_points", obj.grid_points));
    obj.validate();
    return obj;
}

BoundsBox parse_bounds(const json& cfg) {
    if (!cfg.contains("bounds")) throw SchemaError("missing 'bounds' block");
    const json& b = cfg.at("bounds");
    require_keys(b, "bounds", {"T", "r", "r1"}, {"T", "r", "r1"});
    auto pair = [&](const std::string& key) -> std::array<double, 2> {
        const json& v = b.at(key);
        if (!v.is_array() || v.size() != 2 || !v[0].is_number() || !v[1].is_number())
            throw SchemaError("bounds." + key + " must be [lo, hi]");
        return {v[0].get<double>(), v[1].get<double>()};
    };
    BoundsBox box{pair("T"), pair("r"), pair("r1")};
    box.validate();
    return box;
}

// ---------------------------------------------------------------- results

struct RunOutput {
    json result;
    std::string csv;
    long failed_points = 0;
};

json map_with_metadata(const FidelityMap& map, const json& cfg) {
    FidelityMap copy = map;
    copy.metadata = cfg.dump();
    return map_to_json(copy);
}

// ---------------------------------------------------------------- commands

RunOutput cmd_sweep(const json& cfg, const PulseConfig& pc,
                    const SolverOptions& opts, int workers) {
    const FidelityMap map =
        detuning_sweep(pc.pulse(), parse_grid(cfg, "grid"), opts, workers);
    return {map_with_metadata(map, cfg), map_to_csv(map), map.failed_points};
}

RunOutput cmd_scaling(const json& cfg, const PulseConfig& pc,
                      const SolverOptions& opts, int workers) {
    const json& a = cfg.at("axis");
    require_keys(a, "axis", {"name", "min", "max", "points"},
                 {"name", "min", "max", "points"});
    const std::string name = a.at("name").get<std::string>();
    ScanAxis axis;
    if (name == "duration")
        axis = ScanAxis::duration;
    else if (name == "rabi")
        axis = ScanAxis::rabi;
    else
        throw SchemaError("axis.name must be 'duration' or 'rabi'");
    const long axis_points = integer(a, "points", 0);
    if (axis_points < 1) throw SchemaError("axis.points must be >= 1");
    const std::vector<double> axis_grid =
        linspace(num(a, "min", 0.0), num(a, "max", 0.0),
                 static_cast<int>(axis_points));
    const ScalingResult res = scaling_study(
        pc.shape(), pc.n, axis, axis_grid, parse_grid(cfg, "grid"),
        opts, num(cfg, "threshold", 0.95), pc.attenuation, workers);
    json j = json{{"map", map_with_metadata(res.map, cfg)},
                  {"bandwidths", res.bandwidths},
                  {"fit_slope", res.fit_slope}};
    return {j, map_to_csv(res.map), res.map.failed_points};
}

RunOutput cmd_optimize(const json& cfg, const PulseConfig& pc,
                       const SolverOptions& opts, int workers, uint64_t seed) {
    const FixedParams fixed{pc.omega_max, pc.t1, pc.t2};
    const PulseTemplate tmpl{pc.n, pc.attenuation, pc.delta_f, pc.same_chirp, {}};
    const OptimizationResult res = optimize(
        parse_bounds(cfg), fixed, tmpl, parse_objective(cfg),
        static_cast<int>(integer(cfg, "budget", 1600)), seed, opts,
        static_cast<int>(integer(cfg, "coarse_per_dim", 11)), workers);
    json j = optimization_to_json(res);
    j["config"] = cfg;
    return {j, optimization_to_csv(res), 0};
}

RunOutput cmd_robustness_rabi(const json& cfg, const PulseConfig& pc,
                              const SolverOptions& opts, int workers) {
    const SapPulse pulse = pc.pulse();
    const FidelityMap map = rabi_error_scan(pulse, parse_grid(cfg, "grid"),
                                            parse_grid(cfg, "errors"), opts, workers);
    const double W = num(cfg, "band", pc.n * chirp_span(pc.shape()));
    json averages = json::array();
    for (std::size_t r = 0; r < map.rows(); ++r)
        averages.push_back(json{{"rabi_error", map.secondary_grid[r]},
                                {"band_average", band_average(map, r, W)}});
    json j{{"map", map_with_metadata(map, cfg)}, {"band_averages", averages}};
    return {j, map_to_csv(map), map.failed_points};
}

RunOutput cmd_robustness_shift(const json& cfg, const PulseConfig& pc,
                               const SolverOptions& opts, int workers,
                               uint64_t seed) {
    const std::vector<double> shifts = parse_grid(cfg, "shifts");
    const bool reoptimize = boolean(cfg, "reoptimize", false);

    std::function<SapPulse(double)> pulse_for_shift;
    if (reoptimize) {
        const FixedParams fixed{pc.omega_max, pc.t1, pc.t2};
        const PulseTemplate tmpl{pc.n, pc.attenuation, 0.0, pc.same_chirp, {}};
        const BoundsBox box = parse_bounds(cfg);
        const Objective obj = parse_objective(cfg);
        const auto results = reoptimize_per_condition(
            shifts, box, fixed, tmpl, obj,
            static_cast<int>(integer(cfg, "budget", 1600)), seed, opts,
            static_cast<int>(integer(cfg, "coarse_per_dim", 11)), workers);
        std::map<double, HshParams> per_shift;
        for (std::size_t i = 0; i < shifts.size(); ++i)
            per_shift.emplace(shifts[i], results[i].best_params);
        pulse_for_shift = [per_shift, pc](double s) {
            return build_sap(per_shift.at(s), pc.n, pc.attenuation, {}, s,
                             pc.same_chirp);
        };
    } else {
        const HshParams p = pc.shape();
        pulse_for_shift = [p, pc](double s) {
            return build_sap(p, pc.n, pc.attenuation, {}, s, pc.same_chirp);
        };
    }

    const FidelityMap map =
        freq_shift_scan(pulse_for_shift, parse_grid(cfg, "grid"), shifts, opts, workers);
    const double W = num(cfg, "band", pc.n * chirp_span(pc.shape()));
    json per_shift = json::array();
    for (std::size_t r = 0; r < map.rows(); ++r) {
        const SapPulse pulse = pulse_for_shift(shifts[r]);
        per_shift.push_back(
            json{{"shift", shifts[r]},
                 {"band_average", band_average(map, r, W)},
                 {"suture_fidelity",
                  transfer_fidelity(pulse, suture_detuning(pulse), opts)}});
    }
    json j{{"map", map_with_metadata(map, cfg)}, {"per_shift", per_shift}};
    return {j, map_to_csv(map), map.failed_points};
}

RunOutput cmd_chirp_compare(const json& cfg, const PulseConfig& pc,
                            const SolverOptions& opts, int workers) {
    const auto [opposite, same] = chirp_direction_comparison(
        pc.shape(), pc.n, parse_grid(cfg, "grid"), opts, pc.attenuation, workers);
    const double W = num(cfg, "band", pc.n * chirp_span(pc.shape()));
    FidelityMap combined;
    combined.detuning_grid = opposite.detuning_grid;
    combined.secondary_name = "chirp";  // 0 = opposite, 1 = same
    combined.secondary_grid = {0.0, 1.0};
    combined.values = opposite.values;
    combined.values.insert(combined.values.end(), same.values.begin(),
                           same.values.end());
    combined.failed_points = opposite.failed_points + same.failed_points;
    json j{{"map", map_with_metadata(combined, cfg)},
           {"band_average_opposite", band_average(opposite, 0, W)},
           {"band_average_same", band_average(same, 0, W)}};
    return {j, map_to_csv(combined), combined.failed_points};
}

RunOutput cmd_suture(const json& cfg, const PulseConfig& pc,
                     const SolverOptions& opts, int /*workers*/) {
    const HshParams p = pc.shape();
    const SutureSeries series =
        phi_series(p, static_cast<int>(integer(cfg, "n_terms", 30)));
    const double phi_tau = phi_numeric(p, p.tau());
    json j{{"series", series_to_json(series)},
           {"phi_tau_rad", phi_tau},
           {"fidelity_analytic", std::sin(phi_tau) * std::sin(phi_tau)},
           {"fidelity_compact", evolve_compact_sap2(p, 0.0, opts)},
           {"config", cfg}};
    return {j, series_to_csv(series), 0};
}

RunOutput cmd_phase_average(const json& cfg, const PulseConfig& pc,
                            const SolverOptions& opts, int workers, uint64_t seed) {
    const std::vector<double> deltas = parse_grid(cfg, "grid");
    const int samples = static_cast<int>(integer(cfg, "samples", 16));
    const HshParams p = pc.shape();
    std::ostringstream csv;
    csv << "delta_rad_per_us,mean_fidelity,std_fidelity\n";
    json rows = json::array();
    for (double d : deltas) {
        const auto [mean, sd] =
            phase_average(p, pc.n, pc.attenuation, d, samples, seed, opts, workers);
        rows.push_back(json{{"delta", d}, {"mean", mean}, {"std", sd}});
        csv << format_g17(d) << "," << format_g17(mean) << "," << format_g17(sd)
            << "\n";
    }
    return {json{{"phase_average", rows}, {"config", cfg}}, csv.str(), 0};
}

RunOutput cmd_boundary(const json& cfg, const PulseConfig& pc,
                       const SolverOptions& opts, int workers, uint64_t seed) {
    const std::vector<double> tau_grid = parse_grid(cfg, "tau_grid");
    const std::vector<double> w_grid = parse_grid(cfg, "w_grid");  // per component
    const double threshold = num(cfg, "threshold", 0.95);
    const BoundsBox box = parse_bounds(cfg);
    const int budget = static_cast<int>(integer(cfg, "budget", 400));
    const int coarse = static_cast<int>(integer(cfg, "coarse_per_dim", 7));
    const int grid_points = static_cast<int>(integer(cfg, "grid_points", 25));

    auto cell = [&](double tau, double w) {
        Objective obj;
        obj.kind = ObjectiveKind::band_average;
        obj.band_W = pc.n * w;
        obj.grid_points = grid_points;
        const FixedParams fixed{pc.omega_max, pc.t1, tau - 2.0 * pc.t1};
        const PulseTemplate tmpl{pc.n, pc.attenuation, 0.0, pc.same_chirp, {}};
        return optimize(box, fixed, tmpl, obj, budget, seed, opts, coarse, workers)
            .best_value;
    };
    const auto boundary = threshold_boundary(tau_grid, w_grid, cell, threshold);

    std::ostringstream csv;
    csv << "duration_us,bandwidth_rad_per_us\n";
    json rows = json::array();
    for (const auto& bp : boundary) {
        json row{{"duration", bp.axis1}};
        if (bp.axis2) {
            row["bandwidth"] = pc.n * *bp.axis2;
            csv << format_g17(bp.axis1) << "," << format_g17(pc.n * *bp.axis2) << "\n";
        } else {
            row["bandwidth"] = nullptr;
            csv << format_g17(bp.axis1) << ",\n";
        }
        rows.push_back(row);
    }
    return {json{{"boundary", rows}, {"config", cfg}}, csv.str(), 0};
}

// --------------------------------------------------------------- dispatch

const std::map<std::string, std::set<std::string>>& allowed_top_keys() {
    static const std::set<std::string> common{"command", "pulse", "solver",
                                              "seed", "workers", "output"};
    auto with = [](std::set<std::string> extra) {
        extra.insert(common.begin(), common.end());
        return extra;
    };
    static const std::map<std::string, std::set<std::string>> table{
        {"sweep", with({"grid"})},
        {"scaling", with({"axis", "grid", "threshold"})},
        {"optimize", with({"bounds", "objective", "budget", "coarse_per_dim"})},
        {"robustness-rabi", with({"grid", "errors", "band"})},
        {"robustness-shift", with({"grid", "shifts", "band", "reoptimize", "bounds",
                                   "objective", "budget", "coarse_per_dim"})},
        {"chirp-compare", with({"grid", "band"})},
        {"suture", with({"n_terms"})},
        {"phase-average", with({"grid", "samples"})},
        {"boundary", with({"tau_grid", "w_grid", "threshold", "bounds", "budget",
                           "coarse_per_dim", "grid_points"})},
    };
    return table;
}

void apply_override(json& cfg, const std::string& dotted, const std::string& value) {
    json* node = &cfg;
    std::string rest = dotted;
    for (std::size_t pos = rest.find('.'); pos != std::string::npos;
         pos = rest.find('.')) {
        node = &(*node)[rest.substr(0, pos)];
        rest = rest.substr(pos + 1);
    }
    json parsed = json::parse(value, nullptr, false);
    (*node)[rest] = parsed.is_discarded() ? json(value) : parsed;
}

} // namespace

int run(const RunOptions& options) {
    const auto start = std::chrono::steady_clock::now();
    RunManifest manifest;
    manifest.tool_version = kToolVersion;

    auto finish = [&](int code) {
        manifest.wall_clock_s =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
                .count();
        try {
            std::filesystem::create_directories(options.out_dir);
            if (code != kOk) {
                // A failed run leaves no data files, only the error manifest.
                std::error_code ec;
                std::filesystem::remove(options.out_dir + "/result.csv", ec);
                std::filesystem::remove(options.out_dir + "/result.json", ec);
            }
            write_text_file(options.out_dir + "/manifest.json",
                            manifest_to_json(manifest).dump(2) + "\n");
        } catch (const std::exception& e) {
            fprintf(stderr, "error: cannot write manifest: %s\n", e.what());
            return code == kOk ? 1 : code;
        }
        return code;
    };

    json cfg;
    try {
        cfg = json::parse(read_text_file(options.config_path));
        for (const auto& [key, value] : options.overrides)
            apply_override(cfg, key, value);
        if (options.seed) cfg["seed"] = *options.seed;
        if (options.workers) cfg["workers"] = *options.workers;
        manifest.config = cfg;

        if (!cfg.contains("command") || !cfg.at("command").is_string())
            throw SchemaError("config needs a string 'command'");
        const std::string command = cfg.at("command").get<std::string>();
        if (!options.expected_command.empty() && command != options.expected_command)
            throw SchemaError("config command '" + command +
                              "' does not match invoked subcommand '" +
                              options.expected_command + "'");
        const auto& table = allowed_top_keys();
        const auto it = table.find(command);
        if (it == table.end()) throw SchemaError("unknown command '" + command + "'");
        require_keys(cfg, "config", it->second, {"command", "pulse"});

        const PulseConfig pc = parse_pulse(cfg);
        const SolverOptions opts = parse_solver(cfg);
        const uint64_t seed = static_cast<uint64_t>(integer(cfg, "seed", 0));
        const int workers = static_cast<int>(integer(cfg, "workers", 1));
        std::string format = "both";
        if (cfg.contains("output")) {
            require_keys(cfg.at("output"), "output", {"format"}, {});
            format = cfg.at("output").value("format", "both");
            if (format != "csv" && format != "json" && format != "both")
                throw SchemaError("output.format must be csv, json or both");
        }

        RunOutput out;
        if (command == "sweep")
            out = cmd_sweep(cfg, pc, opts, workers);
        else if (command == "scaling")
            out = cmd_scaling(cfg, pc, opts, workers);
        else if (command == "optimize")
            out = cmd_optimize(cfg, pc, opts, workers, seed);
        else if (command == "robustness-rabi")
            out = cmd_robustness_rabi(cfg, pc, opts, workers);
        else if (command == "robustness-shift")
            out = cmd_robustness_shift(cfg, pc, opts, workers, seed);
        else if (command == "chirp-compare")
            out = cmd_chirp_compare(cfg, pc, opts, workers);
        else if (command == "suture")
            out = cmd_suture(cfg, pc, opts, workers);
        else if (command == "phase-average")
            out = cmd_phase_average(cfg, pc, opts, workers, seed);
        else
            out = cmd_boundary(cfg, pc, opts, workers, seed);

        manifest.failed_points = out.failed_points;
        std::filesystem::create_directories(options.out_dir);
        if (format == "csv" || format == "both") {
            write_text_file(options.out_dir + "/result.csv", out.csv);
            manifest.output_digests.emplace_back("result.csv", fnv1a64(out.csv));
        }
        if (format == "json" || format == "both") {
            const std::string text = out.result.dump(2) + "\n";
            write_text_file(options.out_dir + "/result.json", text);
            manifest.output_digests.emplace_back("result.json", fnv1a64(text));
        }
        return finish(kOk);
    } catch (const SchemaError& e) {
        manifest.error = std::string("schema: ") + e.what();
        fprintf(stderr, "config error: %s\n", e.what());
        return finish(kSchemaError);
    } catch (const json::exception& e) {
        manifest.error = std::string("schema: ") + e.what();
        fprintf(stderr, "config error: %s\n", e.what());
        return finish(kSchemaError);
    } catch (const SolverError& e) {
        manifest.error = std::string("solver: ") + e.what();
        fprintf(stderr, "solver failure: %s\n", e.what());
        return finish(kSolverFailure);
    } catch (const std::invalid_argument& e) {
        manifest.error = std::string("physics: ") + e.what();
        fprintf(stderr, "validation error: %s\n", e.what());
        return finish(kPhysicsError);
    } catch (const std::domain_error& e) {
        manifest.error = std::string("physics: ") + e.what();
        fprintf(stderr, "validation error: %s\n", e.what());
        return finish(kPhysicsError);
    } catch (const std::exception& e) {
        manifest.error = std::string("solver: ") + e.what();
        fprintf(stderr, "failure: %s\n", e.what());
        return finish(kSolverFailure);
    }
}

} // namespace sap
