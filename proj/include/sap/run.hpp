#pragma once

// Declarative job execution: config file in, deterministic CSV/JSON
// artifacts plus a run manifest out.

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace sap {

inline constexpr const char* kToolVersion = "0.1.0";

// Exit categories: 0 success, 2 config schema error, 3 physics validation
// error, 4 solver failure.
enum ExitCode { kOk = 0, kSchemaError = 2, kPhysicsError = 3, kSolverFailure = 4 };

struct SchemaError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct RunOptions {
    std::string config_path;
    std::vector<std::pair<std::string, std::string>> overrides;  // dotted key, value
    std::string out_dir = ".";
    std::optional<int> workers;
    std::optional<uint64_t> seed;
    std::string expected_command;  // when set, must match the config's command
};

// Executes the configured command. Writes result.csv / result.json and
// manifest.json into out_dir; on failure writes only an error manifest.
// Returns the exit code; never throws.
int run(const RunOptions& options);

} // namespace sap
