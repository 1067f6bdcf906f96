#pragma once

#include "atdvp/mps.hpp"
#include "atdvp/tensor.hpp"

#include <filesystem>
#include <vector>

namespace atdvp {

/// Inverse temperature with an explicit zero-temperature flag, so beta = inf
/// never enters floating-point expressions.
struct Beta {
    bool infinite = false;
    double value = 0.0;

    static Beta inf() { return Beta{true, 0.0}; }
    static Beta finite(double b);
};

/// Ohmic spectral density with a hard cutoff: J(w) = 2 pi alpha w for
/// 0 <= w <= omega_c, zero elsewhere.
struct SpectralDensity {
    double alpha = 0.0;
    double omega_c = 0.0;

    SpectralDensity(double alpha_, double omega_c_);
    double value(double w) const;
};

/// Effective spectral density of the zero-temperature proxy environment,
/// extended over negative frequencies:
///   J(w, beta) = sign(w) * J(|w|)/2 * (1 + coth(beta w / 2))   on [-w_c, w_c]
/// and J(w, inf) = J(w) theta(w). The form follows the thermalized-environment
/// construction of Tamascelli et al. (PRL 123, 090402 (2019)).
struct ThermalSpectralDensity {
    SpectralDensity base;
    Beta beta;

    double value(double w) const;
    double support_min() const { return beta.infinite ? 0.0 : -base.omega_c; }
    double support_max() const { return base.omega_c; }
};

ThermalSpectralDensity thermal_spectral_density(const SpectralDensity& j, Beta beta);

/// Tight-binding chain equivalent of a bath: recurrence coefficients of the
/// polynomials orthonormal under J(w, beta) dw.
struct ChainCoefficients {
    std::vector<double> site_energy;   // omega_n, n = 0..N-1
    std::vector<double> hopping;       // t_n, n = 0..N-2
    double sys_coupling = 0.0;         // c_0 = sqrt(integral of J / pi)
    std::size_t quad_points = 0;       // grid size that produced these values
    unsigned precision_digits = 0;     // working decimal digits used
};

struct StieltjesOptions {
    std::size_t initial_points = 2000;
    std::size_t max_points = 16000;   // per precision level
    double rel_tol = 1e-8;
};

/// Single fixed quadrature grid over the support: tanh-sinh panels (split at
/// zero for finite temperature) feeding a discretized Stieltjes/Lanczos
/// recurrence, all in MPFR arbitrary precision. The map from the measure to
/// high-order coefficients is exponentially ill-conditioned once a cold
/// bath's negative-frequency lobe becomes small; double precision loses the
/// tail coefficients entirely. digits = 0 picks max(60, 30 + n).
ChainCoefficients chain_coefficients_fixed_grid(const ThermalSpectralDensity& tj, int n,
                                                std::size_t points, unsigned digits = 0);

/// Refines the grid (x2) until every coefficient is stable to rel_tol,
/// escalating the working precision if the grid cap is hit.
ChainCoefficients chain_coefficients(const ThermalSpectralDensity& tj, int n,
                                     const StieltjesOptions& opts = {});

struct ModelParams {
    double omega0 = 0.2;
    double alpha = 0.2;
    double omega_c = 1.0;
    Beta beta_a = Beta::finite(100.0);
    Beta beta_b = Beta::finite(1.0);
    int chain_len_a = 40;
    int chain_len_b = 40;
    int fock_dim = 15;

    void validate() const;
};

/// Site layout: chain a stored far-to-near, then the spin, then chain b
/// near-to-far. The spin sits at index chain_len_a (0-based).
struct TwoBathModel {
    MPO mpo;
    ChainCoefficients chain_a, chain_b;
    int spin_site = 0;
    std::vector<std::size_t> phys_dims;
};

TwoBathModel build_two_bath_model(const ModelParams& p, const StieltjesOptions& opts = {});

/// Just the Hamiltonian MPO of the model.
MPO build_two_bath_mpo(const ModelParams& p);

/// |0>_a (x) |up_z> (x) |0>_b as a product MPS, all bond dimensions 1.
MPS build_initial_state(const ModelParams& p);

void write_chain_coeffs_csv(const std::filesystem::path& path, const ChainCoefficients& a,
                            const ChainCoefficients& b);

// Local operators used across the model and the observables.
Tensor pauli_x();
Tensor pauli_y();
Tensor pauli_z();
Tensor boson_annihilation(std::size_t levels);
Tensor boson_creation(std::size_t levels);
Tensor boson_number(std::size_t levels);

}  // namespace atdvp
