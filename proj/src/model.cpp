#include "atdvp/model.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>
#include <boost/math/constants/constants.hpp>
#include <boost/multiprecision/mpfr.hpp>
#include <stdexcept>
#include <string>

namespace atdvp {

namespace {
constexpr double kPi = std::numbers::pi;
}

Beta Beta::finite(double b) {
    if (!(b > 0.0)) throw std::invalid_argument("Beta: inverse temperature must be positive");
    return Beta{false, b};
}

SpectralDensity::SpectralDensity(double alpha_, double omega_c_) : alpha(alpha_), omega_c(omega_c_) {
    if (!(alpha > 0.0)) throw std::invalid_argument("SpectralDensity: alpha must be positive");
    if (!(omega_c > 0.0)) throw std::invalid_argument("SpectralDensity: omega_c must be positive");
}

double SpectralDensity::value(double w) const {
    if (w < 0.0 || w > omega_c) return 0.0;
    return 2.0 * kPi * alpha * w;
}

ThermalSpectralDensity thermal_spectral_density(const SpectralDensity& j, Beta beta) {
    if (!beta.infinite && !(beta.value > 0.0))
        throw std::invalid_argument("thermal_spectral_density: beta must be positive or infinite");
    return ThermalSpectralDensity{j, beta};
}

double ThermalSpectralDensity::value(double w) const {
    if (beta.infinite) return base.value(w);
    if (std::abs(w) > base.omega_c) return 0.0;
    // pi alpha w (1 + coth(beta w / 2)); the w coth term extends analytically
    // through w = 0 with value 2/beta.
    const double x = 0.5 * beta.value * w;
    double wcoth;
    if (std::abs(x) < 1e-8) {
        wcoth = 2.0 / beta.value + beta.value * w * w / 6.0;
    } else {
        wcoth = w / std::tanh(x);
    }
    return kPi * base.alpha * (w + wcoth);
}

namespace {

// The map from the thermal measure to high-order recurrence coefficients is
// exponentially ill-conditioned once the negative-frequency lobe gets small
// (cold baths): double or even quadruple precision cannot hold the tail
// coefficients stable. The whole quadrature + recurrence therefore runs in
// MPFR arbitrary precision, escalated until the grid refinement converges.
using mpreal = boost::multiprecision::mpfr_float;

struct PrecisionGuard {
    unsigned saved;
    explicit PrecisionGuard(unsigned digits) : saved(mpreal::default_precision()) {
        mpreal::default_precision(digits);
    }
    ~PrecisionGuard() { mpreal::default_precision(saved); }
};

unsigned default_digits(int n) { return std::max(60u, 30u + static_cast<unsigned>(n)); }

mpreal thermal_weight_mp(const ThermalSpectralDensity& tj, const mpreal& w) {
    const mpreal pi = boost::math::constants::pi<mpreal>();
    const mpreal wc(tj.base.omega_c);
    const mpreal al(tj.base.alpha);
    if (tj.beta.infinite) {
        if (w < 0 || w > wc) return mpreal(0);
        return 2 * pi * al * w;
    }
    if (abs(w) > wc) return mpreal(0);
    const mpreal beta(tj.beta.value);
    const mpreal x = beta * w / 2;
    mpreal wcoth;
    if (abs(x) < mpreal("1e-40")) {
        wcoth = 2 / beta + beta * w * w / 6;
    } else {
        wcoth = w / tanh(x);
    }
    return pi * al * (w + wcoth);
}

struct RawCoefficients {
    std::vector<double> a, t;
    double c0 = 0.0;
};

// Discretized Stieltjes on tanh-sinh panels. The support is split at zero for
// finite temperature so each lobe gets its own panel. Lanczos over the
// discrete measure with two rounds of reorthogonalization.
RawCoefficients stieltjes_mp(const ThermalSpectralDensity& tj, int n, std::size_t points) {
    const mpreal pi = boost::math::constants::pi<mpreal>();

    std::vector<std::pair<double, double>> panels;
    if (tj.beta.infinite) {
        panels.emplace_back(0.0, tj.base.omega_c);
    } else {
        panels.emplace_back(-tj.base.omega_c, 0.0);
        panels.emplace_back(0.0, tj.base.omega_c);
    }
    const std::size_t per_panel = points / panels.size();

    // Truncate the tanh-sinh variable where 1 - tanh((pi/2) sinh t) drops
    // below the working epsilon.
    const double prec_digits = static_cast<double>(mpreal::default_precision());
    const double smax = 1.2 * prec_digits * 2.303 / 2.0 + 2.0;
    const mpreal tmax(std::asinh(smax / (std::numbers::pi / 2.0)));

    std::vector<mpreal> x, wgt;
    x.reserve(points);
    wgt.reserve(points);
    mpreal mass(0);
    for (const auto& [a, b] : panels) {
        const mpreal mid = (mpreal(a) + mpreal(b)) / 2;
        const mpreal half = (mpreal(b) - mpreal(a)) / 2;
        const mpreal h = 2 * tmax / mpreal(static_cast<unsigned>(per_panel));
        for (std::size_t j = 0; j < per_panel; ++j) {
            const mpreal t = -tmax + (mpreal(static_cast<unsigned>(j)) + mpreal("0.5")) * h;
            const mpreal s = pi / 2 * sinh(t);
            const mpreal u = tanh(s);
            const mpreal ch = cosh(s);
            const mpreal du = pi / 2 * cosh(t) / (ch * ch);
            const mpreal xj = mid + half * u;
            const mpreal wj = half * h * du * thermal_weight_mp(tj, xj);
            x.push_back(xj);
            wgt.push_back(wj);
            mass += wj;
        }
    }
    if (!(mass > 0))
        throw std::invalid_argument("chain_coefficients: spectral measure has non-positive mass");

    const std::size_t m = x.size();
    std::vector<std::vector<mpreal>> basis;
    {
        std::vector<mpreal> v0(m);
        const mpreal inv = 1 / sqrt(mass);
        for (std::size_t j = 0; j < m; ++j)
            v0[j] = sqrt(wgt[j] < 0 ? mpreal(0) : wgt[j]) * inv;
        basis.push_back(std::move(v0));
    }

    RawCoefficients out;
    out.c0 = static_cast<double>(sqrt(mass / pi));
    std::vector<mpreal> y(m);
    mpreal last_hop(0);
    for (int k = 0; k < n; ++k) {
        const auto& vk = basis[static_cast<std::size_t>(k)];
        mpreal ak(0);
        for (std::size_t j = 0; j < m; ++j) {
            y[j] = x[j] * vk[j];
            ak += vk[j] * y[j];
        }
        out.a.push_back(static_cast<double>(ak));
        if (k == n - 1) break;

        for (std::size_t j = 0; j < m; ++j) y[j] -= ak * vk[j];
        if (k > 0) {
            const auto& vkm = basis[static_cast<std::size_t>(k - 1)];
            for (std::size_t j = 0; j < m; ++j) y[j] -= last_hop * vkm[j];
        }
        for (int round = 0; round < 2; ++round) {
            for (const auto& u : basis) {
                mpreal ip(0);
                for (std::size_t j = 0; j < m; ++j) ip += u[j] * y[j];
                for (std::size_t j = 0; j < m; ++j) y[j] -= ip * u[j];
            }
        }
        mpreal s(0);
        for (std::size_t j = 0; j < m; ++j) s += y[j] * y[j];
        s = sqrt(s);
        if (!(s > mpreal("1e-300")))
            throw std::runtime_error("chain_coefficients: recurrence broke down; measure support "
                                     "cannot sustain the requested chain length");
        last_hop = s;
        out.t.push_back(static_cast<double>(s));
        std::vector<mpreal> vnext(m);
        const mpreal inv = 1 / s;
        for (std::size_t j = 0; j < m; ++j) vnext[j] = y[j] * inv;
        basis.push_back(std::move(vnext));
    }
    return out;
}

}  // namespace

ChainCoefficients chain_coefficients_fixed_grid(const ThermalSpectralDensity& tj, int n,
                                                std::size_t points, unsigned digits) {
    if (n < 1) throw std::invalid_argument("chain_coefficients: chain length must be >= 1");
    if (points < 2 * static_cast<std::size_t>(n) + 2)
        throw std::invalid_argument("chain_coefficients: quadrature grid too small for chain length");
    if (digits == 0) digits = default_digits(n);
    PrecisionGuard guard(digits);
    RawCoefficients raw = stieltjes_mp(tj, n, points);
    ChainCoefficients out;
    out.site_energy = std::move(raw.a);
    out.hopping = std::move(raw.t);
    out.sys_coupling = raw.c0;
    out.quad_points = points;
    out.precision_digits = digits;
    return out;
}

namespace {

double max_rel_diff(const ChainCoefficients& a, const ChainCoefficients& b) {
    double m = 0.0;
    auto upd = [&m](double x, double y) {
        const double scale = std::max({std::abs(x), std::abs(y), 1e-300});
        m = std::max(m, std::abs(x - y) / scale);
    };
    for (std::size_t i = 0; i < a.site_energy.size(); ++i) upd(a.site_energy[i], b.site_energy[i]);
    for (std::size_t i = 0; i < a.hopping.size(); ++i) upd(a.hopping[i], b.hopping[i]);
    upd(a.sys_coupling, b.sys_coupling);
    return m;
}

}  // namespace

ChainCoefficients chain_coefficients(const ThermalSpectralDensity& tj, int n,
                                     const StieltjesOptions& opts) {
    const std::size_t first = std::max(opts.initial_points, 2 * static_cast<std::size_t>(n) + 2);
    unsigned digits = default_digits(n);
    for (int level = 0; level < 4; ++level) {
        std::size_t points = first;
        ChainCoefficients cur = chain_coefficients_fixed_grid(tj, n, points, digits);
        while (2 * points <= std::max(opts.max_points, 2 * first)) {
            ChainCoefficients refined = chain_coefficients_fixed_grid(tj, n, 2 * points, digits);
            if (max_rel_diff(cur, refined) < opts.rel_tol) return refined;
            cur = std::move(refined);
            points *= 2;
        }
        digits *= 2;
    }
    throw std::runtime_error("chain_coefficients: quadrature did not stabilize within the grid "
                             "and precision caps");
}

void ModelParams::validate() const {
    if (!(omega_c > 0.0)) throw std::invalid_argument("ModelParams: omega_c must be positive");
    if (alpha < 0.0) throw std::invalid_argument("ModelParams: alpha must be non-negative");
    if (chain_len_a < 1 || chain_len_b < 1)
        throw std::invalid_argument("ModelParams: chain lengths must be >= 1");
    if (fock_dim < 2) throw std::invalid_argument("ModelParams: fock_dim must be >= 2");
}

Tensor pauli_x() {
    Tensor t(std::vector<std::size_t>{2, 2});
    t.at(0, 1) = 1.0;
    t.at(1, 0) = 1.0;
    return t;
}

Tensor pauli_y() {
    Tensor t(std::vector<std::size_t>{2, 2});
    t.at(0, 1) = cplx(0.0, -1.0);
    t.at(1, 0) = cplx(0.0, 1.0);
    return t;
}

Tensor pauli_z() {
    Tensor t(std::vector<std::size_t>{2, 2});
    t.at(0, 0) = 1.0;
    t.at(1, 1) = -1.0;
    return t;
}

Tensor boson_annihilation(std::size_t levels) {
    Tensor t(std::vector<std::size_t>{levels, levels});
    for (std::size_t m = 1; m < levels; ++m) t.at(m - 1, m) = std::sqrt(static_cast<double>(m));
    return t;
}

Tensor boson_creation(std::size_t levels) {
    Tensor t(std::vector<std::size_t>{levels, levels});
    for (std::size_t m = 1; m < levels; ++m) t.at(m, m - 1) = std::sqrt(static_cast<double>(m));
    return t;
}

Tensor boson_number(std::size_t levels) {
    Tensor t(std::vector<std::size_t>{levels, levels});
    for (std::size_t m = 0; m < levels; ++m) t.at(m, m) = static_cast<double>(m);
    return t;
}

namespace {

struct BondChannels {
    Tensor x1, y1, x2, y2;  // bond term = x1 (x) y1 + x2 (x) y2 on (left site, right site)
};

Tensor scaled(const Tensor& t, double f) {
    Tensor o = t;
    o *= f;
    return o;
}

// Generic nearest-neighbor MPO: channels [pass, c1, c2, done].
MPO assemble_nn_mpo(const std::vector<Tensor>& onsite, const std::vector<BondChannels>& bonds) {
    const int n = static_cast<int>(onsite.size());
    MPO op;
    for (int i = 0; i < n; ++i) {
        const std::size_t d = onsite[static_cast<std::size_t>(i)].dim(0);
        const std::size_t dl = i == 0 ? 1 : 4;
        const std::size_t dr = i == n - 1 ? 1 : 4;
        Tensor w(std::vector<std::size_t>{dl, d, d, dr});
        auto put = [&](std::size_t row, std::size_t col, const Tensor& o) {
            for (std::size_t p = 0; p < d; ++p)
                for (std::size_t q = 0; q < d; ++q) w.at(row, p, q, col) += o.at(p, q);
        };
        Tensor id(std::vector<std::size_t>{d, d});
        for (std::size_t p = 0; p < d; ++p) id.at(p, p) = 1.0;

        const std::size_t done_col = dr == 1 ? 0 : 3;
        if (i < n - 1) {
            const auto& bc = bonds[static_cast<std::size_t>(i)];
            put(0, 0, id);  // nothing placed yet
            put(0, 1, bc.x1);
            put(0, 2, bc.x2);
        }
        put(0, done_col, onsite[static_cast<std::size_t>(i)]);
        if (i > 0) {
            const auto& bc = bonds[static_cast<std::size_t>(i - 1)];
            put(1, done_col, bc.y1);
            put(2, done_col, bc.y2);
            put(3, done_col, id);
        }
        op.sites.push_back(std::move(w));
    }
    return op;
}

}  // namespace

TwoBathModel build_two_bath_model(const ModelParams& p, const StieltjesOptions& opts) {
    p.validate();
    TwoBathModel model;
    model.spin_site = p.chain_len_a;

    // The recurrence coefficients are invariant under scaling of the measure,
    // so a decoupled model (alpha = 0) reuses the unit-coupling chain shape
    // with the system coupling set to zero; the chains then start and stay in
    // an eigenstate, so their energies never enter any observable.
    const double shape_alpha = p.alpha > 0.0 ? p.alpha : 1.0;
    SpectralDensity j(shape_alpha, p.omega_c);
    model.chain_a = chain_coefficients(thermal_spectral_density(j, p.beta_a), p.chain_len_a, opts);
    model.chain_b = chain_coefficients(thermal_spectral_density(j, p.beta_b), p.chain_len_b, opts);
    if (p.alpha == 0.0) {
        model.chain_a.sys_coupling = 0.0;
        model.chain_b.sys_coupling = 0.0;
    }

    const std::size_t f = static_cast<std::size_t>(p.fock_dim);
    const int n = p.chain_len_a + 1 + p.chain_len_b;
    for (int i = 0; i < n; ++i) model.phys_dims.push_back(i == model.spin_site ? 2 : f);

    const Tensor a_op = boson_annihilation(f);
    const Tensor adag = boson_creation(f);
    const Tensor num = boson_number(f);

    std::vector<Tensor> onsite;
    std::vector<BondChannels> bonds;
    const int s = model.spin_site;
    for (int i = 0; i < n; ++i) {
        if (i == s) {
            onsite.push_back(scaled(pauli_z(), 0.5 * p.omega0));
        } else {
            const int mode = i < s ? s - 1 - i : i - s - 1;
            const auto& chain = i < s ? model.chain_a : model.chain_b;
            onsite.push_back(scaled(num, chain.site_energy[static_cast<std::size_t>(mode)]));
        }
    }
    for (int i = 0; i + 1 < n; ++i) {
        BondChannels bc;
        if (i + 1 < s) {
            // within chain a (stored far-to-near): left site is mode m+1, right is mode m
            const int m = s - 2 - i;
            const double t = model.chain_a.hopping[static_cast<std::size_t>(m)];
            bc = {scaled(adag, t), a_op, scaled(a_op, t), adag};
        } else if (i + 1 == s) {
            bc = {scaled(a_op, model.chain_a.sys_coupling), pauli_x(),
                  scaled(adag, model.chain_a.sys_coupling), pauli_x()};
        } else if (i == s) {
            bc = {scaled(pauli_x(), model.chain_b.sys_coupling), a_op,
                  scaled(pauli_x(), model.chain_b.sys_coupling), adag};
        } else {
            const int m = i - s - 1;
            const double t = model.chain_b.hopping[static_cast<std::size_t>(m)];
            bc = {scaled(adag, t), a_op, scaled(a_op, t), adag};
        }
        bonds.push_back(std::move(bc));
    }
    model.mpo = assemble_nn_mpo(onsite, bonds);
    return model;
}

MPO build_two_bath_mpo(const ModelParams& p) { return build_two_bath_model(p).mpo; }

MPS build_initial_state(const ModelParams& p) {
    p.validate();
    const int n = p.chain_len_a + 1 + p.chain_len_b;
    std::vector<std::vector<cplx>> locals;
    for (int i = 0; i < n; ++i) {
        if (i == p.chain_len_a) {
            locals.push_back({cplx(1.0), cplx(0.0)});
        } else {
            std::vector<cplx> vac(static_cast<std::size_t>(p.fock_dim), cplx(0.0));
            vac[0] = 1.0;
            locals.push_back(std::move(vac));
        }
    }
    return product_state_mps(locals);
}

void write_chain_coeffs_csv(const std::filesystem::path& path, const ChainCoefficients& a,
                            const ChainCoefficients& b) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("write_chain_coeffs_csv: cannot open " + path.string());
    char buf[64];
    auto fmt = [&buf](double v) {
        std::snprintf(buf, sizeof buf, "%.17g", v);
        return std::string(buf);
    };
    out << "# c0_a = " << fmt(a.sys_coupling) << "\n";
    out << "# c0_b = " << fmt(b.sys_coupling) << "\n";
    out << "bath,n,omega_n,t_n\n";
    auto dump = [&](const char* name, const ChainCoefficients& c) {
        for (std::size_t i = 0; i < c.site_energy.size(); ++i) {
            out << name << ',' << i << ',' << fmt(c.site_energy[i]) << ',';
            if (i < c.hopping.size()) out << fmt(c.hopping[i]);
            out << "\n";
        }
    };
    dump("a", a);
    dump("b", b);
    if (!out) throw std::runtime_error("write_chain_coeffs_csv: write failed");
}

}  // namespace atdvp
