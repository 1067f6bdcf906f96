#pragma once

#include "atdvp/mps.hpp"
#include "atdvp/tensor.hpp"

#include <utility>
#include <vector>

namespace atdvp {

/// Convergence measure f of one bond, evaluated on consecutive trial
/// dimensions first_d .. first_d + values.size() - 1.
struct ConvergenceCurve {
    int bond = 0;
    int first_d = 0;
    int structural_cap = 0;
    std::vector<double> values;
};

struct BondPlan {
    int current_d = 0;
    int trial_max_d = 0;
    int chosen_d = 0;
};

struct ExpansionPlan {
    std::vector<BondPlan> bonds;
    double precision = 0.0;
    int d_lim = 0;

    bool grew() const {
        for (const auto& b : bonds)
            if (b.chosen_d > b.current_d) return true;
        return false;
    }
};

/// Largest dimension bond `bond` can take in one expansion:
/// min(d_i * D_{i-1}, d_{i+1} * D_{i+1}) at the current neighboring dims.
int structural_cap(const MPS& m, int bond);

/// Per-bond trial ceiling: min(current + margin, structural cap, d_lim),
/// never below the current dimension.
std::vector<int> trial_maxima(const MPS& m, int margin, int d_lim);

/// Grow bond `bond` to new_d without changing the represented state: the left
/// site's right index gains orthonormal-complement columns from the full QR
/// of its left unfolding, the right site's left index is zero-padded. All
/// orthogonality identities survive. Leaves the center at site bond+1.
MPS subspace_expand(MPS m, int bond, int new_d);

/// f for every interior bond at the given trial ceilings (one entry per
/// bond). The 2N-1 tensors H(i)A_C(i) and K(i)C(i) are computed once at the
/// maximal expansions during a single gauge sweep; each curve is read off by
/// truncating the stored tensors and summing the three squared norms in which
/// its bond appears.
std::vector<ConvergenceCurve> convergence_curves(const MPS& m, const MPO& op,
                                                 const std::vector<int>& trial_max);

/// Curve of a single bond.
ConvergenceCurve convergence_measure(const MPS& m, const MPO& op, int bond,
                                     const std::vector<int>& trial_max);

/// Smallest D with f(D+1)/f(D) - 1 <= precision per bond, clamped to d_lim
/// and never below the current dimension. f = 0 counts as converged. If no D
/// in the probed window satisfies the rule, the window's top is chosen.
ExpansionPlan select_bond_dims(const std::vector<ConvergenceCurve>& curves, double precision,
                               int d_lim);

/// A full bond-update step: compute all curves, select dimensions, and apply
/// the expansions with the exact complement vectors that produced the curves.
/// If nothing grows, the returned MPS is the untouched input. Otherwise the
/// result is canonicalized with the center at site 0.
std::pair<MPS, ExpansionPlan> bond_update_step(const MPS& m, const MPO& op, double precision,
                                               int d_lim, int trial_margin);

/// Repeated subspace expansions until every interior bond reaches
/// min(d_max, its structural cap). Used to embed a low-entanglement state in
/// a fixed-dimension manifold.
MPS embed_bond_dimension(MPS m, int d_max);

}  // namespace atdvp
