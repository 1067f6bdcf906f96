#pragma once

#include "atdvp/model.hpp"

#include <filesystem>
#include <optional>
#include <string>

namespace atdvp {

/// Full description of one run. Parsed from a flat key=value document; every
/// field has the production default except d_max, which fixed mode requires.
struct SimulationConfig {
    enum class Mode { Adaptive, Fixed };

    double omega0 = 0.2;
    double alpha = 0.2;
    double omega_c = 1.0;
    Beta beta_a = Beta::finite(100.0);
    Beta beta_b = Beta::finite(1.0);
    int chain_len_a = 40;
    int chain_len_b = 40;
    int fock_dim = 15;
    double dt = 0.05;
    double t_max = 10.0;
    Mode mode = Mode::Adaptive;
    double precision = 1e-6;  // may be +infinity
    int d_lim = 60;
    std::optional<int> d_max;
    int trial_margin = 8;
    double krylov_tol = 1e-12;
    std::string output_dir = "out";
    int output_stride = 1;

    void validate() const;
    ModelParams model_params() const;
};

/// Parse a key=value document ('#' starts a comment, blank lines ignored).
/// Unknown keys are an error listing all of them; invalid values name the
/// field and the violated constraint.
SimulationConfig parse_config(const std::string& text);
SimulationConfig parse_config_file(const std::filesystem::path& path);

const char* mode_name(SimulationConfig::Mode mode);

}  // namespace atdvp
