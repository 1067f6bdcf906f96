#include "atdvp/adaptive.hpp"

#include "atdvp/tdvp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace atdvp {

namespace {

// Append extra slices along one index; `index` must be 0 (left bond) or 2
// (right bond) of a rank-3 tensor.
Tensor concat(const Tensor& a, const Tensor& b, std::size_t index) {
    if (a.rank() != 3 || b.rank() != 3) throw std::logic_error("concat: rank-3 only");
    for (std::size_t k = 0; k < 3; ++k)
        if (k != index && a.dim(k) != b.dim(k)) throw std::logic_error("concat: shape mismatch");
    std::vector<std::size_t> dims = a.dims();
    dims[index] += b.dim(index);
    Tensor out(dims);
    if (index == 2) {
        std::copy(a.data(), a.data() + a.size(), out.data());
        std::copy(b.data(), b.data() + b.size(), out.data() + a.size());
        return out;
    }
    if (index != 0) throw std::logic_error("concat: unsupported index");
    const std::size_t la = a.dim(0), lb = b.dim(0);
    const std::size_t cols = a.dim(1) * a.dim(2);
    for (std::size_t c = 0; c < cols; ++c) {
        std::copy(a.data() + c * la, a.data() + (c + 1) * la, out.data() + c * (la + lb));
        std::copy(b.data() + c * lb, b.data() + (c + 1) * lb, out.data() + c * (la + lb) + la);
    }
    return out;
}

// Orthonormal-complement columns of the left unfolding of a site tensor,
// folded as [left, phys, extra]; empty tensor when the unfolding is square.
Tensor left_unfolding_q2(const Tensor& site) {
    const std::size_t l = site.dim(0), d = site.dim(1), r = site.dim(2);
    FullQR full = qr_full(site.reshape({l * d, r}));
    if (full.q2.empty()) return Tensor();
    return std::move(full.q2).reshape({l, d, full.q2.dim(1)});
}

struct CurveSweep {
    std::vector<ConvergenceCurve> curves;
    std::vector<Tensor> q2;  // per bond, folded [left, phys, extra]; may be empty
    MPS swept;               // gauge-swept working copy, center at the last site
};

// The single left-to-right sweep of the bond-update step: computes the
// expanded-space tensors H(i)A_C(i) and K(i)C(i) once at the trial ceilings
// and reads every f curve from prefix norms of those tensors.
CurveSweep run_curve_sweep(const MPS& m, const MPO& op, const std::vector<int>& trial_max) {
    const int n = m.length();
    if (op.length() != n) throw std::invalid_argument("convergence_curves: length mismatch");
    if (static_cast<int>(trial_max.size()) != std::max(n - 1, 0))
        throw std::invalid_argument("convergence_curves: need one trial ceiling per interior bond");

    CurveSweep cs;
    cs.swept = m;
    MPS& copy = cs.swept;
    canonicalize(copy, 0);

    std::vector<int> cur_d(static_cast<std::size_t>(std::max(n - 1, 0)));
    std::vector<int> top(static_cast<std::size_t>(std::max(n - 1, 0)));
    std::vector<int> cap(static_cast<std::size_t>(std::max(n - 1, 0)));
    for (int b = 0; b + 1 < n; ++b) {
        cur_d[static_cast<std::size_t>(b)] = static_cast<int>(copy.bond_dim(b));
        cap[static_cast<std::size_t>(b)] = structural_cap(copy, b);
        top[static_cast<std::size_t>(b)] =
            std::clamp(trial_max[static_cast<std::size_t>(b)], cur_d[static_cast<std::size_t>(b)],
                       cap[static_cast<std::size_t>(b)]);
    }
    auto top_of = [&](int bond) {
        // outer bonds are pinned at 1
        if (bond < 0 || bond + 1 >= n) return 1;
        return top[static_cast<std::size_t>(bond)];
    };

    // Right environments over the expanded right bases. Site i contributes the
    // orthonormal complement of its right unfolding as extra left-bond slots.
    std::vector<Tensor> renv(static_cast<std::size_t>(n) + 1);
    renv[static_cast<std::size_t>(n)] = detail::boundary_env();
    for (int i = n - 1; i >= 1; --i) {
        const Tensor& a = copy.sites[static_cast<std::size_t>(i)];
        const std::size_t l = a.dim(0), d = a.dim(1), r = a.dim(2);
        Tensor ar = a;
        const int extra = top_of(i - 1) - static_cast<int>(l);
        if (extra > 0) {
            // complement rows live in the adjoint of the right unfolding
            Tensor mh(std::vector<std::size_t>{d * r, l});
            const Tensor flat = a.reshape({l, d * r});
            for (std::size_t row = 0; row < l; ++row)
                for (std::size_t col = 0; col < d * r; ++col)
                    mh.at(col, row) = std::conj(flat.at(row, col));
            FullQR full = qr_full(mh);
            if (full.q2.empty() || static_cast<int>(full.q2.dim(1)) < extra)
                throw std::logic_error("run_curve_sweep: right complement smaller than trial");
            Tensor q2 = full.q2.slice(1, static_cast<std::size_t>(extra));
            Tensor rows(std::vector<std::size_t>{static_cast<std::size_t>(extra), d, r});
            for (std::size_t k = 0; k < static_cast<std::size_t>(extra); ++k)
                for (std::size_t col = 0; col < d * r; ++col)
                    rows[k + static_cast<std::size_t>(extra) * col] = std::conj(q2.at(col, k));
            ar = concat(a, rows, 0);
        }
        ar = ar.pad(2, static_cast<std::size_t>(top_of(i)));
        renv[static_cast<std::size_t>(i)] =
            detail::env_step_right(renv[static_cast<std::size_t>(i + 1)], ar,
                                   op.sites[static_cast<std::size_t>(i)]);
    }

    // Left-to-right gauge sweep collecting the expanded tensors.
    std::vector<Tensor> g(static_cast<std::size_t>(n));
    std::vector<Tensor> kc(static_cast<std::size_t>(std::max(n - 1, 0)));
    cs.q2.resize(static_cast<std::size_t>(std::max(n - 1, 0)));
    Tensor lenv = detail::boundary_env();
    for (int i = 0; i < n; ++i) {
        Tensor& a = copy.sites[static_cast<std::size_t>(i)];
        const std::size_t l = a.dim(0), d = a.dim(1), r = a.dim(2);
        g[static_cast<std::size_t>(i)] =
            detail::heff_apply(lenv.slice(0, l), op.sites[static_cast<std::size_t>(i)],
                               renv[static_cast<std::size_t>(i + 1)].slice(0, r), a);
        if (i == n - 1) break;

        FullQR full = qr_full(a.reshape({l * d, r}));
        const int extra = top_of(i) - static_cast<int>(r);
        Tensor al = full.q.reshape({l, d, r});
        if (extra > 0) {
            if (full.q2.empty() || static_cast<int>(full.q2.dim(1)) < extra)
                throw std::logic_error("run_curve_sweep: left complement smaller than trial");
            Tensor cols = full.q2.slice(1, static_cast<std::size_t>(extra));
            cs.q2[static_cast<std::size_t>(i)] =
                std::move(cols).reshape({l, d, static_cast<std::size_t>(extra)});
            al = concat(al, cs.q2[static_cast<std::size_t>(i)], 2);
        }
        lenv = detail::env_step_left(lenv, al.pad(0, lenv.dim(2)),
                                     op.sites[static_cast<std::size_t>(i)]);
        kc[static_cast<std::size_t>(i)] =
            detail::keff_apply(lenv.slice(0, r), renv[static_cast<std::size_t>(i + 1)].slice(0, r),
                               full.r);

        // physical gauge move at the current dimensions
        a = full.q.reshape({l, d, r});
        Tensor& b = copy.sites[static_cast<std::size_t>(i + 1)];
        b = contract(full.r, b, {{1, 0}});
        copy.center = i + 1;
    }

    // Read the curves off the stored tensors by prefix norms.
    for (int bond = 0; bond + 1 < n; ++bond) {
        ConvergenceCurve curve;
        curve.bond = bond;
        curve.first_d = cur_d[static_cast<std::size_t>(bond)];
        curve.structural_cap = cap[static_cast<std::size_t>(bond)];
        const int t = top[static_cast<std::size_t>(bond)];

        const Tensor& g1 = g[static_cast<std::size_t>(bond)];       // right leg = this bond
        const Tensor& g2 = g[static_cast<std::size_t>(bond + 1)];   // left leg = this bond
        const Tensor& kt = kc[static_cast<std::size_t>(bond)];
        // bucket every contribution by the smallest truncation that keeps it
        std::vector<double> bucket(static_cast<std::size_t>(t), 0.0);
        for (int v = 0; v < t; ++v)
            bucket[static_cast<std::size_t>(v)] = g1.slab_norm_sq(2, static_cast<std::size_t>(v)) +
                                                  g2.slab_norm_sq(0, static_cast<std::size_t>(v));
        for (int u = 0; u < t; ++u)
            for (int v = 0; v < t; ++v)
                bucket[static_cast<std::size_t>(std::max(u, v))] +=
                    std::norm(kt.at(static_cast<std::size_t>(u), static_cast<std::size_t>(v)));
        double run = 0.0;
        for (int v = 0; v < t; ++v) {
            run += bucket[static_cast<std::size_t>(v)];
            if (v + 1 >= curve.first_d) curve.values.push_back(run);
        }
        cs.curves.push_back(std::move(curve));
    }
    return cs;
}

}  // namespace

int structural_cap(const MPS& m, int bond) {
    if (bond < 0 || bond + 1 >= m.length()) throw std::out_of_range("structural_cap: bad bond");
    const std::size_t left = m.phys_dim(bond) * m.bond_dim(bond - 1);
    const std::size_t right = m.phys_dim(bond + 1) * m.bond_dim(bond + 1);
    return static_cast<int>(std::min(left, right));
}

std::vector<int> trial_maxima(const MPS& m, int margin, int d_lim) {
    if (margin < 0) throw std::invalid_argument("trial_maxima: margin must be non-negative");
    if (d_lim < 1) throw std::invalid_argument("trial_maxima: d_lim must be positive");
    std::vector<int> t;
    for (int b = 0; b + 1 < m.length(); ++b) {
        const int cur = static_cast<int>(m.bond_dim(b));
        const int cap = structural_cap(m, b);
        t.push_back(std::max(cur, std::min({cur + margin, cap, d_lim})));
    }
    return t;
}

MPS subspace_expand(MPS m, int bond, int new_d) {
    if (bond < 0 || bond + 1 >= m.length()) throw std::out_of_range("subspace_expand: bad bond");
    canonicalize(m, bond + 1);
    const int cur = static_cast<int>(m.bond_dim(bond));
    const int cap = structural_cap(m, bond);
    if (new_d < cur || new_d > cap)
        throw std::invalid_argument("subspace_expand: target " + std::to_string(new_d) +
                                    " outside [" + std::to_string(cur) + ", " +
                                    std::to_string(cap) + "]");
    if (new_d == cur) return m;

    Tensor q2 = left_unfolding_q2(m.sites[static_cast<std::size_t>(bond)]);
    if (q2.empty() || static_cast<int>(q2.dim(2)) < new_d - cur)
        throw std::logic_error("subspace_expand: complement smaller than requested growth");
    m.sites[static_cast<std::size_t>(bond)] =
        concat(m.sites[static_cast<std::size_t>(bond)],
               q2.slice(2, static_cast<std::size_t>(new_d - cur)), 2);
    m.sites[static_cast<std::size_t>(bond + 1)] =
        m.sites[static_cast<std::size_t>(bond + 1)].pad(0, static_cast<std::size_t>(new_d));
    return m;
}

std::vector<ConvergenceCurve> convergence_curves(const MPS& m, const MPO& op,
                                                 const std::vector<int>& trial_max) {
    return run_curve_sweep(m, op, trial_max).curves;
}

ConvergenceCurve convergence_measure(const MPS& m, const MPO& op, int bond,
                                     const std::vector<int>& trial_max) {
    if (bond < 0 || bond + 1 >= m.length()) throw std::out_of_range("convergence_measure: bad bond");
    return run_curve_sweep(m, op, trial_max).curves[static_cast<std::size_t>(bond)];
}

ExpansionPlan select_bond_dims(const std::vector<ConvergenceCurve>& curves, double precision,
                               int d_lim) {
    ExpansionPlan plan;
    plan.precision = precision;
    plan.d_lim = d_lim;
    for (const auto& c : curves) {
        BondPlan bp;
        bp.current_d = c.first_d;
        const int last = c.first_d + static_cast<int>(c.values.size()) - 1;
        bp.trial_max_d = last;
        int chosen = last;
        for (int dcur = c.first_d; dcur <= last; ++dcur) {
            const std::size_t k = static_cast<std::size_t>(dcur - c.first_d);
            const double f = c.values[k];
            if (f == 0.0) {
                chosen = dcur;  // no projection error left to reduce
                break;
            }
            if (dcur == last) {
                chosen = dcur;
                break;
            }
            if (c.values[k + 1] / f - 1.0 <= precision) {
                chosen = dcur;
                break;
            }
        }
        bp.chosen_d = std::clamp(chosen, bp.current_d, std::max(d_lim, bp.current_d));
        plan.bonds.push_back(bp);
    }
    return plan;
}

std::pair<MPS, ExpansionPlan> bond_update_step(const MPS& m, const MPO& op, double precision,
                                               int d_lim, int trial_margin) {
    const int n = m.length();
    if (n <= 1) {
        ExpansionPlan plan;
        plan.precision = precision;
        plan.d_lim = d_lim;
        return {m, plan};
    }
    CurveSweep cs = run_curve_sweep(m, op, trial_maxima(m, trial_margin, d_lim));
    ExpansionPlan plan = select_bond_dims(cs.curves, precision, d_lim);
    if (!plan.grew()) return {m, plan};

    // Apply the expansions right to left on the swept copy, reusing the exact
    // complement vectors that produced the curves; the return gauge moves
    // leave the center back at site 0.
    MPS out = std::move(cs.swept);
    for (int bond = n - 2; bond >= 0; --bond) {
        const BondPlan& bp = plan.bonds[static_cast<std::size_t>(bond)];
        if (bp.chosen_d > bp.current_d) {
            const Tensor& q2 = cs.q2[static_cast<std::size_t>(bond)];
            out.sites[static_cast<std::size_t>(bond)] =
                concat(out.sites[static_cast<std::size_t>(bond)],
                       q2.slice(2, static_cast<std::size_t>(bp.chosen_d - bp.current_d)), 2);
            out.sites[static_cast<std::size_t>(bond + 1)] =
                out.sites[static_cast<std::size_t>(bond + 1)].pad(
                    0, static_cast<std::size_t>(bp.chosen_d));
        }
        // move the center from bond+1 to bond
        Tensor& b = out.sites[static_cast<std::size_t>(bond + 1)];
        const std::size_t l = b.dim(0), d = b.dim(1), r = b.dim(2);
        auto [q, c] = rq_reduced(std::move(b).reshape({l, d * r}));
        b = std::move(q).reshape({c.dim(1), d, r});
        Tensor& a = out.sites[static_cast<std::size_t>(bond)];
        a = contract(a, c, {{2, 0}});
        out.center = bond;
    }
    return {std::move(out), plan};
}

MPS embed_bond_dimension(MPS m, int d_max) {
    if (d_max < 1) throw std::invalid_argument("embed_bond_dimension: d_max must be positive");
    bool changed = true;
    while (changed) {
        changed = false;
        for (int bond = 0; bond + 1 < m.length(); ++bond) {
            const int cur = static_cast<int>(m.bond_dim(bond));
            const int target = std::min(d_max, structural_cap(m, bond));
            if (target > cur) {
                m = subspace_expand(std::move(m), bond, target);
                changed = true;
            }
        }
    }
    canonicalize(m, 0);
    return m;
}

}  // namespace atdvp
