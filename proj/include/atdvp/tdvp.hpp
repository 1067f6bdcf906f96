#pragma once

#include "atdvp/mps.hpp"
#include "atdvp/tensor.hpp"

#include <functional>
#include <vector>

namespace atdvp {

/// Partial contractions of <psi|H|psi>. left[i] covers sites [0, i) and
/// right[i] covers sites [i, N); left[0] and right[N] are scalar-1 boundary
/// tensors. Index order of every environment tensor is [ket bond, mpo bond,
/// bra bond]. Environments are rebuilt rather than patched when tensor shapes
/// change (bond expansions); the validity markers track which entries are
/// current.
struct EnvironmentCache {
    std::vector<Tensor> left;
    std::vector<Tensor> right;
    std::vector<char> left_valid;
    std::vector<char> right_valid;

    int length() const { return static_cast<int>(left.size()) - 1; }

    /// Drop every environment that includes the given site.
    void invalidate_site(int site);
};

/// All left and right environments of the given (canonicalized) state.
EnvironmentCache build_environments(const MPS& m, const MPO& op);

/// H(i) acting on a center-site tensor: contraction of left[i], W_i,
/// right[i+1] with a_c.
Tensor apply_site_hamiltonian(const EnvironmentCache& env, const MPO& op, int i, const Tensor& a_c);

/// K(i) acting on a bond matrix between sites `bond` and `bond`+1:
/// contraction of left[bond+1] and right[bond+1] with c. No physical leg.
Tensor apply_bond_hamiltonian(const EnvironmentCache& env, int bond, const Tensor& c);

struct KrylovOptions {
    double tol = 1e-12;
    int max_iter = 30;
};

/// exp(z H) v for a hermitian operator given through its action. Lanczos with
/// full reorthogonalization; the subspace grows until the residual estimate
/// drops below tol (breakdown returns the exact subspace result). Throws if
/// max_iter is exhausted, with the residual in the message.
Tensor krylov_expm_apply(const std::function<Tensor(const Tensor&)>& apply_h, const Tensor& v,
                         cplx z, const KrylovOptions& opts = {}, int* iterations = nullptr);

struct SweepReport {
    double step_size = 0.0;
    double wall_seconds = 0.0;
    double norm_before = 0.0, norm_after = 0.0;
    double energy_before = 0.0, energy_after = 0.0;
    std::vector<int> krylov_iterations;  // one entry per local exponential, in sweep order
};

/// One full second-order step: left-to-right half sweep at dt/2 (forward
/// evolution of each center, backward evolution of each bond matrix) composed
/// with its right-to-left mirror. Bond dimensions are unchanged; the center
/// must be (and ends up) at site 0.
SweepReport sweep_second_order(MPS& m, const MPO& op, double dt, const KrylovOptions& opts = {});

namespace detail {
Tensor heff_apply(const Tensor& left, const Tensor& w, const Tensor& right, const Tensor& a);
Tensor keff_apply(const Tensor& left, const Tensor& right, const Tensor& c);
}  // namespace detail

}  // namespace atdvp
