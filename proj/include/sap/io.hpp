#pragma once

// Serialization: CSV/JSON artifacts with 17-significant-digit numbers,
// plus the per-run manifest. CSV headers name the internal units
// (rad/us, us) to keep angular-frequency conventions explicit.

#include "sap/analysis.hpp"
#include "sap/optimize.hpp"
#include "sap/suture.hpp"

#include <nlohmann/json.hpp>
#include <string>

namespace sap {

std::string format_g17(double x);

// FNV-1a 64-bit content digest, hex encoded.
std::string fnv1a64(const std::string& data);

void write_text_file(const std::string& path, const std::string& content);
std::string read_text_file(const std::string& path);

nlohmann::json params_to_json(const HshParams& p);
HshParams params_from_json(const nlohmann::json& j);

nlohmann::json map_to_json(const FidelityMap& map);
FidelityMap map_from_json(const nlohmann::json& j);
std::string map_to_csv(const FidelityMap& map);

nlohmann::json optimization_to_json(const OptimizationResult& r);
std::string optimization_to_csv(const OptimizationResult& r);

nlohmann::json series_to_json(const SutureSeries& s);
std::string series_to_csv(const SutureSeries& s);

struct RunManifest {
    nlohmann::json config;       // full config snapshot, overrides applied
    std::string tool_version;
    double wall_clock_s = 0.0;
    long failed_points = 0;
    std::vector<std::pair<std::string, std::string>> output_digests;  // (file, digest)
    std::string error;           // non-empty on failed runs
};

nlohmann::json manifest_to_json(const RunManifest& m);

} // namespace sap
