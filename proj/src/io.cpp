#include "sap/io.hpp"

#include <nlohmann/json.hpp>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>

using nlohmann::json;

namespace sap {

std::string format_g17(double x) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", x);
    return buf;
}

std::string fnv1a64(const std::string& data) {
    uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : data) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

void write_text_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open for writing: " + path);
    out << content;
    if (!out) throw std::runtime_error("write failed: " + path);
}

std::string read_text_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open for reading: " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

json params_to_json(const HshParams& p) {
    return json{{"omega_max", p.omega_max},
                {"T", p.edge_shape_T},
                {"r", p.edge_rate_r},
                {"r1", p.linear_rate_r1},
                {"t1", p.edge_duration_t1},
                {"t2", p.center_duration_t2}};
}

HshParams params_from_json(const json& j) {
    HshParams p{j.at("omega_max").get<double>(), j.at("T").get<double>(),
                j.at("r").get<double>(),         j.at("r1").get<double>(),
                j.at("t1").get<double>(),        j.at("t2").get<double>()};
    p.validate();
    return p;
}

namespace {

json nan_safe(double v) {
    if (std::isfinite(v)) return v;
    return nullptr;  // JSON has no NaN; failed points serialize as null
}

double from_nan_safe(const json& j) {
    return j.is_null() ? std::numeric_limits<double>::quiet_NaN()
                       : j.get<double>();
}

} // namespace

json map_to_json(const FidelityMap& map) {
    json values = json::array();
    for (double v : map.values) values.push_back(nan_safe(v));
    json j{{"detuning_grid_rad_per_us", map.detuning_grid},
           {"secondary_name", map.secondary_name},
           {"secondary_grid", map.secondary_grid},
           {"values", values},
           {"failed_points", map.failed_points}};
    j["metadata"] = map.metadata.empty() ? json() : json::parse(map.metadata);
    return j;
}

FidelityMap map_from_json(const json& j) {
    FidelityMap map;
    map.detuning_grid = j.at("detuning_grid_rad_per_us").get<std::vector<double>>();
    map.secondary_name = j.at("secondary_name").get<std::string>();
    map.secondary_grid = j.at("secondary_grid").get<std::vector<double>>();
    for (const auto& v : j.at("values")) map.values.push_back(from_nan_safe(v));
    map.failed_points = j.at("failed_points").get<long>();
    if (!j.at("metadata").is_null()) map.metadata = j.at("metadata").dump();
    return map;
}

std::string map_to_csv(const FidelityMap& map) {
    std::ostringstream out;
    const bool has_secondary = !map.secondary_grid.empty();
    if (has_secondary)
        out << map.secondary_name << ",delta_rad_per_us,fidelity\n";
    else
        out << "delta_rad_per_us,fidelity\n";
    for (std::size_t r = 0; r < map.rows(); ++r)
        for (std::size_t c = 0; c < map.cols(); ++c) {
            if (has_secondary) out << format_g17(map.secondary_grid[r]) << ",";
            out << format_g17(map.detuning_grid[c]) << ",";
            const double v = map.at(r, c);
            out << (std::isfinite(v) ? format_g17(v) : "") << "\n";
        }
    return out.str();
}

json optimization_to_json(const OptimizationResult& r) {
    json trace = json::array();
    for (const auto& [p, v] : r.trace)
        trace.push_back(json{{"params", params_to_json(p)}, {"value", v}});
    return json{{"best_params", params_to_json(r.best_params)},
                {"best_value", r.best_value},
                {"evaluations", r.evaluations},
                {"converged", r.converged},
                {"trace", trace}};
}

std::string optimization_to_csv(const OptimizationResult& r) {
    std::ostringstream out;
    out << "T_us,r_rad_per_us,r1_rad_per_us,objective\n";
    for (const auto& [p, v] : r.trace)
        out << format_g17(p.edge_shape_T) << "," << format_g17(p.edge_rate_r)
            << "," << format_g17(p.linear_rate_r1) << "," << format_g17(v) << "\n";
    return out.str();
}

json series_to_json(const SutureSeries& s) {
    return json{{"a", s.a},
                {"b", s.b},
                {"t0", s.t0},
                {"phi_t0", s.phi_t0},
                {"terms", s.terms},
                {"partial_sums", s.partial_sums}};
}

std::string series_to_csv(const SutureSeries& s) {
    std::ostringstream out;
    out << "k,term_rad,partial_sum_rad\n";
    for (std::size_t k = 0; k < s.terms.size(); ++k)
        out << (k + 1) << "," << format_g17(s.terms[k]) << ","
            << format_g17(s.partial_sums[k]) << "\n";
    return out.str();
}

json manifest_to_json(const RunManifest& m) {
    json digests = json::object();
    for (const auto& [file, digest] : m.output_digests) digests[file] = digest;
    json j{{"config", m.config},
           {"tool_version", m.tool_version},
           {"wall_clock_s", m.wall_clock_s},
           {"failed_points", m.failed_points},
           {"output_digests", digests}};
    if (!m.error.empty()) j["error"] = m.error;
    return j;
}

} // namespace sap
