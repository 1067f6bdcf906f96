#pragma once

#include "atdvp/tensor.hpp"

#include <vector>

namespace atdvp {

/// Matrix product state over open boundaries. Site tensors are rank 3 with
/// index order [left bond, physical, right bond]; the outer bonds have
/// dimension 1. The gauge is tracked explicitly: either one site holds the
/// orthogonality center, or an explicit bond matrix C sits between two sites.
/// Everything strictly left (right) of the center is left (right) orthogonal.
struct MPS {
    enum class Center { Site, Bond };

    std::vector<Tensor> sites;
    Center center_kind = Center::Site;
    int center = 0;   // site index, or for Bond the index of the bond (between center and center+1)
    Tensor bond_c;    // only meaningful in Bond gauge

    int length() const { return static_cast<int>(sites.size()); }
    std::size_t phys_dim(int i) const { return sites[static_cast<std::size_t>(i)].dim(1); }

    /// Dimension of bond i, the bond between sites i and i+1, for
    /// i in [-1, length()-1]; the outer bonds -1 and length()-1 are 1.
    std::size_t bond_dim(int i) const;

    /// Interior bond dimensions, bonds 0 .. N-2.
    std::vector<std::size_t> interior_bond_dims() const;

    /// Throws if shapes are inconsistent.
    void validate() const;
};

/// Operator analogue: rank-4 site tensors [left bond, phys out, phys in, right bond].
struct MPO {
    std::vector<Tensor> sites;
    int length() const { return static_cast<int>(sites.size()); }
    std::size_t phys_dim(int i) const { return sites[static_cast<std::size_t>(i)].dim(1); }
};

MPO identity_mpo(const std::vector<std::size_t>& phys_dims);

/// Product MPS (all bond dimensions 1) from one unit-norm local state per site.
/// Center at site 0.
MPS product_state_mps(const std::vector<std::vector<cplx>>& local_states);

/// Build a gauged MPS from raw site tensors with no prior orthogonality
/// claims. Sweeps both directions so every bond is trimmed to its structural
/// cap, then leaves the center at `target_center`.
MPS mps_from_tensors(std::vector<Tensor> sites, int target_center = 0);

/// Gauge the center to the given site without changing the represented state.
void canonicalize(MPS& m, int target_site);

/// Gauge to an explicit bond matrix between sites `bond` and `bond`+1.
void canonicalize_bond(MPS& m, int bond);

double mps_norm(const MPS& m);

/// <a|b> including norms (no normalization applied).
cplx mps_overlap(const MPS& a, const MPS& b);

/// Normalized single-site expectation <psi|op_site|psi> / <psi|psi>.
cplx expect_local(const MPS& m, const Tensor& op, int site);

/// Normalized two-site product-operator expectation, s1 < s2.
cplx expect_two_site(const MPS& m, const Tensor& op1, int s1, const Tensor& op2, int s2);

/// Normalized <psi|H|psi> / <psi|psi>.
cplx expect_mpo(const MPS& m, const MPO& op);

/// Full contraction to a dense state vector; site 0 is the fastest index.
/// Test/oracle helper, caller keeps the total dimension small.
Tensor dense_state(const MPS& m);

namespace detail {
/// L' = sum over (site, W, conj(site)) attached to L; tensors [ket, mpo, bra].
Tensor env_step_left(const Tensor& left, const Tensor& site, const Tensor& w);
Tensor env_step_right(const Tensor& right, const Tensor& site, const Tensor& w);
Tensor boundary_env();
}  // namespace detail

}  // namespace atdvp
