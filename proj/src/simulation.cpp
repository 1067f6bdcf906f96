#include "atdvp/simulation.hpp"

#include "atdvp/adaptive.hpp"
#include "atdvp/observables.hpp"
#include "atdvp/tdvp.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <stdexcept>

namespace atdvp {

namespace {

std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::string beta_string(const Beta& b) { return b.infinite ? "inf" : fmt(b.value); }

std::map<std::string, std::string> echo_config(const SimulationConfig& cfg) {
    std::map<std::string, std::string> m;
    m["omega0"] = fmt(cfg.omega0);
    m["alpha"] = fmt(cfg.alpha);
    m["omega_c"] = fmt(cfg.omega_c);
    m["beta_a"] = beta_string(cfg.beta_a);
    m["beta_b"] = beta_string(cfg.beta_b);
    m["chain_len_a"] = std::to_string(cfg.chain_len_a);
    m["chain_len_b"] = std::to_string(cfg.chain_len_b);
    m["fock_dim"] = std::to_string(cfg.fock_dim);
    m["dt"] = fmt(cfg.dt);
    m["t_max"] = fmt(cfg.t_max);
    m["mode"] = mode_name(cfg.mode);
    m["precision"] = std::isinf(cfg.precision) ? "inf" : fmt(cfg.precision);
    m["d_lim"] = std::to_string(cfg.d_lim);
    if (cfg.d_max) m["d_max"] = std::to_string(*cfg.d_max);
    m["trial_margin"] = std::to_string(cfg.trial_margin);
    m["krylov_tol"] = fmt(cfg.krylov_tol);
    m["output_dir"] = cfg.output_dir;
    m["output_stride"] = std::to_string(cfg.output_stride);
    return m;
}

std::string bonds_row(double t, const std::vector<std::size_t>& dims) {
    std::string row = fmt(t);
    for (std::size_t d : dims) {
        row += ',';
        row += std::to_string(d);
    }
    return row;
}

}  // namespace

RunManifest run_simulation(const SimulationConfig& cfg) {
    cfg.validate();
    const auto t_start = std::chrono::steady_clock::now();

    std::filesystem::path out_dir(cfg.output_dir);
    std::filesystem::create_directories(out_dir);

    TwoBathModel model = build_two_bath_model(cfg.model_params());
    write_chain_coeffs_csv(out_dir / "chain_coeffs.csv", model.chain_a, model.chain_b);

    MPS psi = build_initial_state(cfg.model_params());
    if (cfg.mode == SimulationConfig::Mode::Fixed) psi = embed_bond_dimension(psi, *cfg.d_max);

    const int n_sites = psi.length();
    const int steps = static_cast<int>(std::llround(cfg.t_max / cfg.dt));
    if (steps < 1) throw std::invalid_argument("run_simulation: t_max/dt below one step");

    std::ofstream ts(out_dir / "timeseries.csv");
    std::ofstream bonds(out_dir / "bonds.csv");
    if (!ts || !bonds) throw std::runtime_error("run_simulation: cannot open output files");
    ts << timeseries_header() << "\n";
    bonds << "t";
    for (int b = 1; b < n_sites; ++b) bonds << ",D_" << b;
    bonds << "\n";

    KrylovOptions kopts;
    kopts.tol = cfg.krylov_tol;

    auto record = [&](double t) {
        ObservableSet o = measure_all(psi, model.mpo, model.spin_site, t);
        ts << timeseries_row(o) << "\n";
        bonds << bonds_row(t, psi.interior_bond_dims()) << "\n";
        ts.flush();
        bonds.flush();
    };

    RunManifest manifest;
    manifest.resolved_config = echo_config(cfg);
    manifest.sites = n_sites;
    manifest.steps = steps;
    manifest.output_dir = out_dir;

    record(0.0);
    double step_total = 0.0, step_max = 0.0;
    for (int k = 1; k <= steps; ++k) {
        const auto t0 = std::chrono::steady_clock::now();
        try {
            if (cfg.mode == SimulationConfig::Mode::Adaptive) {
                auto [next, plan] = bond_update_step(psi, model.mpo, cfg.precision, cfg.d_lim,
                                                     cfg.trial_margin);
                psi = std::move(next);
            }
            sweep_second_order(psi, model.mpo, cfg.dt, kopts);
        } catch (const std::exception& e) {
            ts.flush();
            bonds.flush();
            throw std::runtime_error("run_simulation: step " + std::to_string(k) + ": " + e.what());
        }
        const double wall =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        step_total += wall;
        step_max = std::max(step_max, wall);
        if (k % cfg.output_stride == 0 || k == steps) record(k * cfg.dt);
    }

    manifest.final_bonds = psi.interior_bond_dims();
    manifest.wall_step_mean_s = step_total / steps;
    manifest.wall_step_max_s = step_max;
    manifest.wall_total_s =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start).count();

    std::ofstream mf(out_dir / "manifest.txt");
    if (!mf) throw std::runtime_error("run_simulation: cannot open manifest");
    mf << "version=" << manifest.version << "\n";
    mf << "units_energy=omega_c\n";
    mf << "units_time=1/omega_c\n";
    for (const auto& [k, v] : manifest.resolved_config) mf << k << "=" << v << "\n";
    mf << "sites=" << manifest.sites << "\n";
    mf << "spin_site=" << model.spin_site + 1 << "\n";
    mf << "steps=" << manifest.steps << "\n";
    mf << "chain_quad_points_a=" << model.chain_a.quad_points << "\n";
    mf << "chain_quad_points_b=" << model.chain_b.quad_points << "\n";
    mf << "wall_total_s=" << fmt(manifest.wall_total_s) << "\n";
    mf << "wall_step_mean_s=" << fmt(manifest.wall_step_mean_s) << "\n";
    mf << "wall_step_max_s=" << fmt(manifest.wall_step_max_s) << "\n";
    mf << "final_bonds=";
    for (std::size_t b = 0; b < manifest.final_bonds.size(); ++b) {
        if (b) mf << ",";
        mf << manifest.final_bonds[b];
    }
    mf << "\n";
    return manifest;
}

}  // namespace atdvp
