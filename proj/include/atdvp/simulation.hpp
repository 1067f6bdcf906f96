#pragma once

#include "atdvp/config.hpp"

#include <filesystem>
#include <map>
#include <string>
#include <vector>

namespace atdvp {

inline constexpr const char* kVersion = "1.0.0";

struct RunManifest {
    std::map<std::string, std::string> resolved_config;
    std::string version = kVersion;
    int sites = 0;
    int steps = 0;
    double wall_total_s = 0.0;
    double wall_step_mean_s = 0.0;
    double wall_step_max_s = 0.0;
    std::vector<std::size_t> final_bonds;
    std::filesystem::path output_dir;
};

/// Build the model, run the time loop, and write timeseries.csv, bonds.csv,
/// chain_coeffs.csv and manifest.txt into the output directory. Fully
/// deterministic: identical configs produce identical CSV bytes. On an engine
/// error the partial outputs are flushed and the error is rethrown with the
/// failing step attached.
RunManifest run_simulation(const SimulationConfig& cfg);

}  // namespace atdvp
