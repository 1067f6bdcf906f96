#include "atdvp/config.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace atdvp {

namespace {

std::string trim(const std::string& s) {
    std::size_t b = 0, e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
    return s.substr(b, e - b);
}

[[noreturn]] void bad_value(const std::string& key, const std::string& constraint) {
    throw std::invalid_argument("config: field '" + key + "' " + constraint);
}

double parse_double(const std::string& key, const std::string& v) {
    try {
        std::size_t used = 0;
        double x = std::stod(v, &used);
        if (used != v.size()) throw std::invalid_argument("");
        return x;
    } catch (...) {
        bad_value(key, "must be a real number (got '" + v + "')");
    }
}

double parse_double_or_inf(const std::string& key, const std::string& v) {
    if (v == "inf" || v == "+inf" || v == "infinity")
        return std::numeric_limits<double>::infinity();
    return parse_double(key, v);
}

int parse_int(const std::string& key, const std::string& v) {
    int x = 0;
    auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), x);
    if (ec != std::errc() || p != v.data() + v.size())
        bad_value(key, "must be an integer (got '" + v + "')");
    return x;
}

Beta parse_beta(const std::string& key, const std::string& v) {
    if (v == "inf" || v == "+inf" || v == "infinity") return Beta::inf();
    const double x = parse_double(key, v);
    if (!(x > 0.0)) bad_value(key, "must be positive or 'inf'");
    return Beta::finite(x);
}

}  // namespace

void SimulationConfig::validate() const {
    if (!(omega_c > 0.0)) bad_value("omega_c", "must be positive");
    if (alpha < 0.0) bad_value("alpha", "must be non-negative");
    if (chain_len_a < 1) bad_value("chain_len_a", "must be >= 1");
    if (chain_len_b < 1) bad_value("chain_len_b", "must be >= 1");
    if (fock_dim < 2) bad_value("fock_dim", "must be >= 2");
    if (!(dt > 0.0)) bad_value("dt", "must be positive");
    if (!(t_max >= dt)) bad_value("t_max", "must be >= dt");
    if (!(precision > 0.0)) bad_value("precision", "must be positive (or 'inf')");
    if (d_lim < 1) bad_value("d_lim", "must be >= 1");
    if (mode == Mode::Fixed && !d_max)
        bad_value("d_max", "is required when mode=fixed");
    if (d_max && *d_max < 1) bad_value("d_max", "must be >= 1");
    if (trial_margin < 0) bad_value("trial_margin", "must be >= 0");
    if (!(krylov_tol > 0.0)) bad_value("krylov_tol", "must be positive");
    if (output_stride < 1) bad_value("output_stride", "must be >= 1");
    if (output_dir.empty()) bad_value("output_dir", "must not be empty");
}

ModelParams SimulationConfig::model_params() const {
    ModelParams p;
    p.omega0 = omega0;
    p.alpha = alpha;
    p.omega_c = omega_c;
    p.beta_a = beta_a;
    p.beta_b = beta_b;
    p.chain_len_a = chain_len_a;
    p.chain_len_b = chain_len_b;
    p.fock_dim = fock_dim;
    return p;
}

SimulationConfig parse_config(const std::string& text) {
    SimulationConfig cfg;
    std::vector<std::string> unknown;
    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const std::size_t hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        const std::size_t eq = line.find('=');
        if (eq == std::string::npos)
            throw std::invalid_argument("config: line " + std::to_string(lineno) +
                                        " is not of the form key=value");
        const std::string key = trim(line.substr(0, eq));
        const std::string val = trim(line.substr(eq + 1));
        if (key.empty()) throw std::invalid_argument("config: empty key on line " + std::to_string(lineno));

        if (key == "omega0") cfg.omega0 = parse_double(key, val);
        else if (key == "alpha") cfg.alpha = parse_double(key, val);
        else if (key == "omega_c") cfg.omega_c = parse_double(key, val);
        else if (key == "beta_a") cfg.beta_a = parse_beta(key, val);
        else if (key == "beta_b") cfg.beta_b = parse_beta(key, val);
        else if (key == "chain_len_a") cfg.chain_len_a = parse_int(key, val);
        else if (key == "chain_len_b") cfg.chain_len_b = parse_int(key, val);
        else if (key == "fock_dim") cfg.fock_dim = parse_int(key, val);
        else if (key == "dt") cfg.dt = parse_double(key, val);
        else if (key == "t_max") cfg.t_max = parse_double(key, val);
        else if (key == "mode") {
            if (val == "adaptive") cfg.mode = SimulationConfig::Mode::Adaptive;
            else if (val == "fixed") cfg.mode = SimulationConfig::Mode::Fixed;
            else bad_value(key, "must be 'adaptive' or 'fixed'");
        } else if (key == "precision") cfg.precision = parse_double_or_inf(key, val);
        else if (key == "d_lim") cfg.d_lim = parse_int(key, val);
        else if (key == "d_max") cfg.d_max = parse_int(key, val);
        else if (key == "trial_margin") cfg.trial_margin = parse_int(key, val);
        else if (key == "krylov_tol") cfg.krylov_tol = parse_double(key, val);
        else if (key == "output_dir") cfg.output_dir = val;
        else if (key == "output_stride") cfg.output_stride = parse_int(key, val);
        else unknown.push_back(key);
    }
    if (!unknown.empty()) {
        std::string msg = "config: unknown keys:";
        for (const auto& k : unknown) msg += " " + k;
        throw std::invalid_argument(msg);
    }
    cfg.validate();
    return cfg;
}

SimulationConfig parse_config_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("config: cannot open " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str());
}

const char* mode_name(SimulationConfig::Mode mode) {
    return mode == SimulationConfig::Mode::Adaptive ? "adaptive" : "fixed";
}

}  // namespace atdvp
