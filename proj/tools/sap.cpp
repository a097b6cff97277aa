// sap: suture-adiabatic-pulse simulation and design CLI.
//
//   sap <command> --config <path> [--set key=value]... [--workers N]
//       [--seed S] [--out DIR]
//
// The command must match the "command" field of the config file.

#include "sap/run.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <string>
#include <vector>

int main(int argc, char** argv) {
    CLI::App app{"Suture adiabatic pulse simulation and design toolkit"};
    app.require_subcommand(1);

    const std::vector<std::string> commands{
        "sweep",           "scaling",        "optimize",
        "robustness-rabi", "robustness-shift", "chirp-compare",
        "suture",          "phase-average",  "boundary"};

    sap::RunOptions options;
    std::vector<std::string> sets;
    int workers = 0;
    long long seed = 0;

    for (const auto& name : commands) {
        CLI::App* sub = app.add_subcommand(name);
        sub->add_option("--config", options.config_path, "job config file (JSON)")
            ->required();
        sub->add_option("--set", sets, "dotted-key override, key=value")
            ->take_all();
        CLI::Option* w = sub->add_option("--workers", workers, "worker thread cap");
        CLI::Option* s = sub->add_option("--seed", seed, "master RNG seed");
        sub->add_option("--out", options.out_dir, "output directory");
        sub->callback([&, name, w, s] {
            if (*w) options.workers = workers;
            if (*s) options.seed = static_cast<uint64_t>(seed);
            for (const auto& kv : sets) {
                const auto eq = kv.find('=');
                if (eq == std::string::npos) {
                    fprintf(stderr, "bad --set '%s': expected key=value\n",
                            kv.c_str());
                    std::exit(sap::kSchemaError);
                }
                options.overrides.emplace_back(kv.substr(0, eq), kv.substr(eq + 1));
            }
            // The subcommand must agree with the config's command field.
            options.expected_command = name;
        });
    }

    CLI11_PARSE(app, argc, argv);
    return sap::run(options);
}
