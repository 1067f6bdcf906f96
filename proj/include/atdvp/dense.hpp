#pragma once

#include "atdvp/mps.hpp"
#include "atdvp/tensor.hpp"

#include <vector>

namespace atdvp {

/// Largest total Hilbert dimension the dense oracles accept.
inline constexpr std::size_t kDenseDimCap = 4096;

/// Contract an MPO to its full matrix. Row/column ordering matches
/// dense_state: site 0 is the fastest index.
Tensor dense_from_mpo(const MPO& op);

/// Operator acting as `ops` on the named sites and identity elsewhere.
Tensor dense_site_operator(const std::vector<std::size_t>& dims,
                           const std::vector<std::pair<int, Tensor>>& ops);

/// Small dense system for exact propagation; validates hermiticity and norm.
struct DenseSystem {
    std::size_t dim = 0;
    Tensor hamiltonian;  // dim x dim hermitian
    Tensor state;        // dim vector, unit norm

    DenseSystem(Tensor h, Tensor psi);
};

/// Exact unitary propagation via the eigendecomposition of H; each step is
/// exp(-i H dt). Returns the trajectory including the initial state, so the
/// result has steps+1 entries.
std::vector<Tensor> ed_propagate(const DenseSystem& sys, double dt, int steps);

/// <v|A|v> / <v|v> on dense vectors.
cplx dense_expectation(const Tensor& a, const Tensor& v);

}  // namespace atdvp
