// jtcqed: run configs and bundled figure presets.
//
//   jtcqed run <config.json>
//   jtcqed preset <name> [--out DIR]
//   jtcqed presets
//
// Exit status: 0 success, 2 usage or configuration error, 3 numerical or
// runtime failure. Errors are reported on stderr as a one-line JSON object.

#include <CLI11.hpp>

#include <cstdio>
#include <exception>
#include <iostream>
#include <string>

#include "jtcqed/cli/config.hpp"
#include "jtcqed/cli/presets.hpp"
#include "jtcqed/cli/runner.hpp"

namespace {

constexpr int kUsageError = 2;
constexpr int kRuntimeError = 3;

std::string error_type(const std::exception& e) {
    using namespace jtcqed;
    if (dynamic_cast<const cli::ConfigError*>(&e)) return "ConfigError";
    if (dynamic_cast<const StiffnessError*>(&e)) return "StiffnessError";
    if (dynamic_cast<const DegenerateSteadyStateError*>(&e)) return "DegenerateSteadyStateError";
    if (dynamic_cast<const DegenerateModelError*>(&e)) return "DegenerateModelError";
    if (dynamic_cast<const UndefinedCoherenceError*>(&e)) return "UndefinedCoherenceError";
    if (dynamic_cast<const PreconditionError*>(&e)) return "PreconditionError";
    if (dynamic_cast<const ValidationError*>(&e)) return "ValidationError";
    if (dynamic_cast<const ArgumentError*>(&e)) return "ArgumentError";
    return "Error";
}

int report(const std::exception& e, int code) {
    const jtcqed::cli::json j = {{"status", code == kUsageError ? "usage_error" : "runtime_error"},
                                 {"exit_code", code},
                                 {"type", error_type(e)},
                                 {"message", e.what()}};
    std::cerr << j.dump() << "\n";
    return code;
}

void print_presets() {
    const auto all = jtcqed::cli::presets();
    std::printf("%-7s %-16s %s\n", "preset", "tasks", "parameters");
    for (const auto& p : all) std::printf("%-7s %-16s %s\n", p.name.c_str(), p.tasks.c_str(), p.summary.c_str());
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Two-resonator Jahn-Teller circuit-QED simulator"};
    app.require_subcommand(1);

    std::string config_path;
    auto* run = app.add_subcommand("run", "Run a JSON configuration");
    run->add_option("config", config_path, "Configuration file")->required();

    std::string preset_name, out_dir = ".";
    auto* preset = app.add_subcommand("preset", "Run a bundled figure preset");
    preset->add_option("name", preset_name, "Preset name (see `jtcqed presets`)")->required();
    preset->add_option("--out", out_dir, "Output directory");

    auto* list = app.add_subcommand("presets", "List bundled figure presets");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : kUsageError;
    }

    if (list->parsed()) {
        print_presets();
        return 0;
    }

    std::vector<jtcqed::cli::RunConfig> configs;
    std::filesystem::path base = ".";
    unsigned workers = 1;
    try {
        workers = jtcqed::cli::worker_count();
        if (run->parsed()) {
            configs.push_back(jtcqed::cli::load_config(config_path));
        } else {
            const auto all = jtcqed::cli::presets();
            const auto* p = jtcqed::cli::find_preset(all, preset_name);
            if (!p) throw jtcqed::cli::ConfigError("unknown preset '" + preset_name + "'");
            configs = p->runs;
            base = out_dir;
        }
    } catch (const std::exception& e) {
        return report(e, kUsageError);
    }

    try {
        for (const auto& c : configs) {
            const auto written = jtcqed::cli::run_and_write(c, base, workers);
            for (const auto& path : written.written) std::cout << path << "\n";
        }
    } catch (const jtcqed::cli::ConfigError& e) {
        return report(e, kUsageError);
    } catch (const std::exception& e) {
        return report(e, kRuntimeError);
    }
    return 0;
}
