#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "atdvp/config.hpp"
#include "atdvp/dense.hpp"
#include "atdvp/model.hpp"
#include "atdvp/simulation.hpp"

#include <cmath>
#include <cstdlib>
#include <fstream>
#include <sstream>

using namespace atdvp;

namespace {

std::string slurp(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    REQUIRE(in.good());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::filesystem::path fresh_dir(const std::string& name) {
    auto p = std::filesystem::temp_directory_path() / ("atdvp_test_" + name);
    std::filesystem::remove_all(p);
    return p;
}

// split a csv line
std::vector<std::string> fields(const std::string& line) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : line) {
        if (c == ',') {
            out.push_back(cur);
            cur.clear();
        } else {
            cur += c;
        }
    }
    out.push_back(cur);
    return out;
}

SimulationConfig tiny_ed_config() {
    SimulationConfig cfg;
    cfg.chain_len_a = 1;
    cfg.chain_len_b = 1;
    cfg.fock_dim = 3;
    cfg.beta_a = Beta::inf();
    cfg.beta_b = Beta::finite(1.0);
    cfg.dt = 0.01;
    cfg.t_max = 0.5;
    cfg.precision = 1e-8;
    return cfg;
}

}  // namespace

TEST_CASE("empty document yields the full production-default configuration") {
    SimulationConfig cfg = parse_config("");
    CHECK(cfg.omega0 == 0.2);
    CHECK(cfg.alpha == 0.2);
    CHECK(cfg.omega_c == 1.0);
    CHECK(!cfg.beta_a.infinite);
    CHECK(cfg.beta_a.value == 100.0);
    CHECK(cfg.beta_b.value == 1.0);
    CHECK(cfg.chain_len_a == 40);
    CHECK(cfg.chain_len_b == 40);
    CHECK(cfg.fock_dim == 15);
    CHECK(cfg.d_lim == 60);
    CHECK(cfg.mode == SimulationConfig::Mode::Adaptive);
    CHECK(cfg.trial_margin == 8);
    CHECK(cfg.krylov_tol == 1e-12);
}

TEST_CASE("comments, blank lines and overrides parse") {
    SimulationConfig cfg = parse_config(
        "# a comment\n"
        "\n"
        "omega0 = 0.4   # trailing comment\n"
        "beta_a = inf\n"
        "precision = inf\n"
        "mode = adaptive\n"
        "fock_dim=4\n");
    CHECK(cfg.omega0 == 0.4);
    CHECK(cfg.beta_a.infinite);
    CHECK(std::isinf(cfg.precision));
    CHECK(cfg.fock_dim == 4);
}

TEST_CASE("unknown keys are rejected and listed") {
    try {
        parse_config("omega0=0.2\nbogus_key=1\nanother_one=x\n");
        FAIL("expected a throw");
    } catch (const std::invalid_argument& e) {
        std::string msg = e.what();
        CHECK(msg.find("bogus_key") != std::string::npos);
        CHECK(msg.find("another_one") != std::string::npos);
    }
}

TEST_CASE("fixed mode without d_max is a validation error") {
    CHECK_THROWS_AS(parse_config("mode=fixed\n"), std::invalid_argument);
    CHECK_NOTHROW(parse_config("mode=fixed\nd_max=20\n"));
}

TEST_CASE("constraint violations name the field") {
    try {
        parse_config("dt=-0.1\n");
        FAIL("expected a throw");
    } catch (const std::invalid_argument& e) {
        CHECK(std::string(e.what()).find("dt") != std::string::npos);
    }
    CHECK_THROWS_AS(parse_config("t_max=0.01\ndt=0.05\n"), std::invalid_argument);
    CHECK_THROWS_AS(parse_config("fock_dim=1\n"), std::invalid_argument);
    CHECK_THROWS_AS(parse_config("beta_a=-2\n"), std::invalid_argument);
    CHECK_THROWS_AS(parse_config("alpha=-0.1\n"), std::invalid_argument);
}

TEST_CASE("decoupled run: sz stays 1, fluxes 0, bonds 1") {
    SimulationConfig cfg = tiny_ed_config();
    cfg.alpha = 0.0;
    cfg.chain_len_a = 3;
    cfg.chain_len_b = 3;
    cfg.t_max = 0.3;
    cfg.output_dir = fresh_dir("alpha0").string();
    RunManifest m = run_simulation(cfg);
    for (std::size_t d : m.final_bonds) CHECK(d == 1);

    std::ifstream ts(m.output_dir / "timeseries.csv");
    std::string line;
    std::getline(ts, line);  // header
    while (std::getline(ts, line)) {
        auto f = fields(line);
        REQUIRE(f.size() == 8);
        CHECK(std::abs(std::stod(f[1]) - 1.0) < 1e-12);  // sz
        CHECK(std::abs(std::stod(f[4])) < 1e-12);        // Ja
        CHECK(std::abs(std::stod(f[5])) < 1e-12);        // Jb
    }
    std::filesystem::remove_all(m.output_dir);
}

TEST_CASE("identical configs produce identical csv bytes") {
    SimulationConfig cfg = tiny_ed_config();
    cfg.t_max = 0.2;
    cfg.output_dir = fresh_dir("det1").string();
    run_simulation(cfg);
    SimulationConfig cfg2 = cfg;
    cfg2.output_dir = fresh_dir("det2").string();
    run_simulation(cfg2);
    for (const char* f : {"timeseries.csv", "bonds.csv", "chain_coeffs.csv"})
        CHECK(slurp(std::filesystem::path(cfg.output_dir) / f) ==
              slurp(std::filesystem::path(cfg2.output_dir) / f));
    std::filesystem::remove_all(cfg.output_dir);
    std::filesystem::remove_all(cfg2.output_dir);
}

TEST_CASE("fixed mode keeps every bond at the embedded dimension") {
    SimulationConfig cfg = tiny_ed_config();
    cfg.chain_len_a = 3;
    cfg.chain_len_b = 3;
    cfg.mode = SimulationConfig::Mode::Fixed;
    cfg.d_max = 4;
    cfg.t_max = 0.2;
    cfg.output_dir = fresh_dir("fixed").string();
    RunManifest m = run_simulation(cfg);
    std::ifstream bonds(m.output_dir / "bonds.csv");
    std::string header, first, line, last;
    std::getline(bonds, header);
    std::getline(bonds, first);
    last = first;
    while (std::getline(bonds, line))
        if (!line.empty()) last = line;
    auto f0 = fields(first), f1 = fields(last);
    REQUIRE(f0.size() == f1.size());
    for (std::size_t k = 1; k < f0.size(); ++k) CHECK(f0[k] == f1[k]);
    std::filesystem::remove_all(m.output_dir);
}

TEST_CASE("adaptive p=inf is bitwise identical to fixed mode at the same dims") {
    SimulationConfig cfg = tiny_ed_config();
    cfg.t_max = 0.2;
    cfg.precision = std::numeric_limits<double>::infinity();
    cfg.output_dir = fresh_dir("pinf").string();
    run_simulation(cfg);

    SimulationConfig fixed = tiny_ed_config();
    fixed.t_max = 0.2;
    fixed.mode = SimulationConfig::Mode::Fixed;
    fixed.d_max = 1;  // the product state's dimensions
    fixed.output_dir = fresh_dir("pinf_fixed").string();
    run_simulation(fixed);

    for (const char* f : {"timeseries.csv", "bonds.csv"})
        CHECK(slurp(std::filesystem::path(cfg.output_dir) / f) ==
              slurp(std::filesystem::path(fixed.output_dir) / f));
    std::filesystem::remove_all(cfg.output_dir);
    std::filesystem::remove_all(fixed.output_dir);
}

TEST_CASE("adaptive bond profile never decreases in time") {
    SimulationConfig cfg = tiny_ed_config();
    cfg.chain_len_a = 2;
    cfg.chain_len_b = 2;
    cfg.t_max = 0.3;
    cfg.precision = 1e-6;
    cfg.output_dir = fresh_dir("mono").string();
    RunManifest m = run_simulation(cfg);
    std::ifstream bonds(m.output_dir / "bonds.csv");
    std::string line;
    std::getline(bonds, line);
    std::vector<long> prev;
    while (std::getline(bonds, line)) {
        if (line.empty()) continue;
        auto f = fields(line);
        std::vector<long> cur;
        for (std::size_t k = 1; k < f.size(); ++k) cur.push_back(std::stol(f[k]));
        if (!prev.empty()) {
            REQUIRE(prev.size() == cur.size());
            for (std::size_t k = 0; k < cur.size(); ++k) CHECK(cur[k] >= prev[k]);
        }
        prev = std::move(cur);
    }
    std::filesystem::remove_all(m.output_dir);
}

TEST_CASE("tiny run tracks exact diagonalization through the full cli path") {
    SimulationConfig cfg = tiny_ed_config();  // t_max 0.5 at dt 0.01
    cfg.output_dir = fresh_dir("edcheck").string();
    RunManifest m = run_simulation(cfg);

    TwoBathModel model = build_two_bath_model(cfg.model_params());
    MPS psi0 = build_initial_state(cfg.model_params());
    DenseSystem sys(dense_from_mpo(model.mpo), dense_state(psi0));
    auto traj = ed_propagate(sys, cfg.dt, 50);
    Tensor sz_d = dense_site_operator(model.phys_dims, {{model.spin_site, pauli_z()}});

    std::ifstream ts(m.output_dir / "timeseries.csv");
    std::string line;
    std::getline(ts, line);
    int k = 0;
    double max_err = 0.0;
    while (std::getline(ts, line)) {
        if (line.empty()) continue;
        auto f = fields(line);
        double sz = std::stod(f[1]);
        double ref = std::real(dense_expectation(sz_d, traj[static_cast<std::size_t>(k)]));
        max_err = std::max(max_err, std::abs(sz - ref));
        ++k;
    }
    CHECK(k == 51);
    CHECK(max_err < 1e-4);
    std::filesystem::remove_all(m.output_dir);
}

TEST_CASE("the simulate binary runs end to end") {
#ifdef SIMULATE_BIN
    auto dir = fresh_dir("proc");
    std::filesystem::create_directories(dir);
    auto cfg_path = dir / "run.cfg";
    {
        std::ofstream cfg(cfg_path);
        cfg << "chain_len_a=1\nchain_len_b=1\nfock_dim=3\nbeta_a=inf\n"
            << "dt=0.05\nt_max=0.2\nprecision=1e-6\n";
    }
    std::string cmd = std::string(SIMULATE_BIN) + " --config " + cfg_path.string() + " --out " +
                      (dir / "out").string() + " > /dev/null 2>&1";
    CHECK(std::system(cmd.c_str()) == 0);
    CHECK(std::filesystem::exists(dir / "out" / "timeseries.csv"));
    CHECK(std::filesystem::exists(dir / "out" / "bonds.csv"));
    CHECK(std::filesystem::exists(dir / "out" / "chain_coeffs.csv"));
    CHECK(std::filesystem::exists(dir / "out" / "manifest.txt"));

    // bad config exits nonzero with a diagnostic
    {
        std::ofstream cfg(dir / "bad.cfg");
        cfg << "dt=-1\n";
    }
    std::string bad = std::string(SIMULATE_BIN) + " --config " + (dir / "bad.cfg").string() +
                      " > /dev/null 2>&1";
    CHECK(std::system(bad.c_str()) != 0);
    std::filesystem::remove_all(dir);
#endif
}
