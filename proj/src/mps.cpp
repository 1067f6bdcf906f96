#include "atdvp/mps.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace atdvp {

std::size_t MPS::bond_dim(int i) const {
    const int n = length();
    if (i < -1 || i >= n) throw std::out_of_range("MPS::bond_dim");
    if (i == -1) return sites.front().dim(0);
    if (center_kind == Center::Bond && i == center) return bond_c.dim(0);
    return sites[static_cast<std::size_t>(i)].dim(2);
}

std::vector<std::size_t> MPS::interior_bond_dims() const {
    std::vector<std::size_t> d;
    for (int i = 0; i + 1 < length(); ++i) d.push_back(bond_dim(i));
    return d;
}

void MPS::validate() const {
    const int n = length();
    if (n == 0) throw std::invalid_argument("MPS: empty");
    if (sites.front().dim(0) != 1 || sites.back().dim(2) != 1)
        throw std::invalid_argument("MPS: outer bonds must have dimension 1");
    for (int i = 0; i < n; ++i) {
        if (sites[static_cast<std::size_t>(i)].rank() != 3)
            throw std::invalid_argument("MPS: site tensors must be rank 3");
        if (i + 1 < n) {
            std::size_t r = sites[static_cast<std::size_t>(i)].dim(2);
            std::size_t l = sites[static_cast<std::size_t>(i + 1)].dim(0);
            if (center_kind == Center::Bond && center == i) {
                if (bond_c.rank() != 2 || bond_c.dim(0) != r || bond_c.dim(1) != l)
                    throw std::invalid_argument("MPS: bond matrix shape mismatch");
            } else if (r != l) {
                throw std::invalid_argument("MPS: bond dimension mismatch at bond " + std::to_string(i));
            }
        }
    }
    if (center_kind == Center::Site) {
        if (center < 0 || center >= n) throw std::invalid_argument("MPS: center out of range");
    } else {
        if (center < 0 || center + 1 >= n) throw std::invalid_argument("MPS: bond center out of range");
    }
}

MPO identity_mpo(const std::vector<std::size_t>& phys_dims) {
    MPO op;
    for (std::size_t d : phys_dims) {
        Tensor w(std::vector<std::size_t>{1, d, d, 1});
        for (std::size_t p = 0; p < d; ++p) w.at(0, p, p, 0) = 1.0;
        op.sites.push_back(std::move(w));
    }
    return op;
}

MPS product_state_mps(const std::vector<std::vector<cplx>>& local_states) {
    if (local_states.empty()) throw std::invalid_argument("product_state_mps: no sites");
    MPS m;
    for (const auto& v : local_states) {
        if (v.empty()) throw std::invalid_argument("product_state_mps: empty local state");
        double n2 = 0.0;
        for (const auto& x : v) n2 += std::norm(x);
        if (std::abs(n2 - 1.0) > 1e-10)
            throw std::invalid_argument("product_state_mps: local state is not unit norm");
        Tensor t = Tensor::from_data({1, v.size(), 1}, v);
        m.sites.push_back(std::move(t));
    }
    m.center_kind = MPS::Center::Site;
    m.center = 0;
    return m;
}

MPS mps_from_tensors(std::vector<Tensor> sites, int target_center) {
    MPS m;
    m.sites = std::move(sites);
    m.center_kind = MPS::Center::Site;
    // Claiming the center at an end makes the first full pass gauge every
    // other site regardless of what the input tensors looked like. The
    // round trip trims any bond exceeding its structural cap on both flanks.
    m.center = m.length() - 1;
    canonicalize(m, 0);
    canonicalize(m, m.length() - 1);
    canonicalize(m, target_center);
    m.validate();
    return m;
}

namespace {

// Split the center site to the right: site[c] -> A_L, absorb R into site[c+1].
void move_center_right(MPS& m) {
    const int c = m.center;
    Tensor& a = m.sites[static_cast<std::size_t>(c)];
    const std::size_t l = a.dim(0), d = a.dim(1), r = a.dim(2);
    auto [q, rr] = qr_reduced(std::move(a).reshape({l * d, r}));
    const std::size_t k = q.dim(1);
    a = std::move(q).reshape({l, d, k});
    Tensor& b = m.sites[static_cast<std::size_t>(c + 1)];
    b = contract(rr, b, {{1, 0}});
    m.center = c + 1;
}

// Mirror move: site[c] -> A_R, absorb C into site[c-1].
void move_center_left(MPS& m) {
    const int c = m.center;
    Tensor& a = m.sites[static_cast<std::size_t>(c)];
    const std::size_t l = a.dim(0), d = a.dim(1), r = a.dim(2);
    auto [q, cc] = rq_reduced(std::move(a).reshape({l, d * r}));
    const std::size_t k = q.dim(0);
    a = std::move(q).reshape({k, d, r});
    Tensor& b = m.sites[static_cast<std::size_t>(c - 1)];
    b = contract(b, cc, {{2, 0}});
    m.center = c - 1;
}

// Absorb an explicit bond matrix into the neighbor toward `target`.
void absorb_bond(MPS& m, int target) {
    const int b = m.center;
    if (target > b) {
        Tensor& s = m.sites[static_cast<std::size_t>(b + 1)];
        s = contract(m.bond_c, s, {{1, 0}});
        m.center = b + 1;
    } else {
        Tensor& s = m.sites[static_cast<std::size_t>(b)];
        s = contract(s, m.bond_c, {{2, 0}});
        m.center = b;
    }
    m.center_kind = MPS::Center::Site;
    m.bond_c = Tensor();
}

}  // namespace

void canonicalize(MPS& m, int target_site) {
    if (target_site < 0 || target_site >= m.length())
        throw std::out_of_range("canonicalize: target out of range");
    if (m.center_kind == MPS::Center::Bond) absorb_bond(m, target_site);
    while (m.center < target_site) move_center_right(m);
    while (m.center > target_site) move_center_left(m);
}

void canonicalize_bond(MPS& m, int bond) {
    if (bond < 0 || bond + 1 >= m.length()) throw std::out_of_range("canonicalize_bond: bad bond");
    canonicalize(m, bond);
    Tensor& a = m.sites[static_cast<std::size_t>(bond)];
    const std::size_t l = a.dim(0), d = a.dim(1), r = a.dim(2);
    auto [q, rr] = qr_reduced(std::move(a).reshape({l * d, r}));
    const std::size_t k = q.dim(1);
    a = std::move(q).reshape({l, d, k});
    m.bond_c = std::move(rr);
    m.center_kind = MPS::Center::Bond;
    m.center = bond;
}

double mps_norm(const MPS& m) {
    return std::sqrt(std::abs(mps_overlap(m, m).real()));
}

cplx mps_overlap(const MPS& a, const MPS& b) {
    if (a.length() != b.length()) throw std::invalid_argument("mps_overlap: length mismatch");
    // Work on center-site copies so any explicit bond matrix is absorbed.
    auto absorbed = [](const MPS& m) {
        if (m.center_kind == MPS::Center::Site) return m;
        MPS c = m;
        canonicalize(c, c.center);
        return c;
    };
    MPS ka = absorbed(a), kb = absorbed(b);
    // T[ket of b, bra of a]
    Tensor t(std::vector<std::size_t>{1, 1});
    t.at(0, 0) = 1.0;
    for (int i = 0; i < ka.length(); ++i) {
        const Tensor& sa = ka.sites[static_cast<std::size_t>(i)];
        const Tensor& sb = kb.sites[static_cast<std::size_t>(i)];
        if (sa.dim(1) != sb.dim(1)) throw std::invalid_argument("mps_overlap: physical dims differ");
        Tensor tb = contract(t, sb, {{0, 0}});          // [bra_a, p, ket_b]
        t = contract(tb, sa.conjugate(), {{0, 0}, {1, 1}});  // [ket_b, bra_a]
    }
    return t.scalar_value();
}

cplx expect_local(const MPS& m, const Tensor& op, int site) {
    if (site < 0 || site >= m.length()) throw std::out_of_range("expect_local: bad site");
    if (op.rank() != 2 || op.dim(0) != m.phys_dim(site) || op.dim(1) != m.phys_dim(site))
        throw std::invalid_argument("expect_local: operator dimension mismatch");
    MPS c = m;
    canonicalize(c, site);
    const Tensor& a = c.sites[static_cast<std::size_t>(site)];
    Tensor oa = contract(op, a, {{1, 1}});   // [p', l, r]
    cplx num = dot(a, oa.permute({1, 0, 2}));
    double den = a.norm_sq();
    return num / den;
}

cplx expect_two_site(const MPS& m, const Tensor& op1, int s1, const Tensor& op2, int s2) {
    if (!(0 <= s1 && s1 < s2 && s2 < m.length()))
        throw std::invalid_argument("expect_two_site: need 0 <= s1 < s2 < N");
    MPS c = m;
    canonicalize(c, s1);
    const Tensor& a1 = c.sites[static_cast<std::size_t>(s1)];
    // E[ket r, bra r'] across bond s1
    Tensor oa = contract(op1, a1, {{1, 1}});               // [p', l, r]
    Tensor e = contract(oa, a1.conjugate(), {{0, 1}, {1, 0}});  // [r, r']
    for (int s = s1 + 1; s < s2; ++s) {
        const Tensor& a = c.sites[static_cast<std::size_t>(s)];
        Tensor t = contract(e, a, {{0, 0}});               // [r', p, r]
        e = contract(t, a.conjugate(), {{0, 0}, {1, 1}});  // [r, r']
    }
    const Tensor& a2 = c.sites[static_cast<std::size_t>(s2)];
    Tensor t = contract(e, a2, {{0, 0}});                  // [r', p, r]
    Tensor ot = contract(op2, t, {{1, 1}});                // [p', r', r]
    cplx num = contract(ot, a2.conjugate(), {{0, 1}, {1, 0}, {2, 2}}).scalar_value();
    double den = c.sites[static_cast<std::size_t>(s1)].norm_sq();
    return num / den;
}

namespace detail {

Tensor boundary_env() {
    Tensor t(std::vector<std::size_t>{1, 1, 1});
    t.at(0, 0, 0) = 1.0;
    return t;
}

Tensor env_step_left(const Tensor& left, const Tensor& site, const Tensor& w) {
    // left [a(ket), m, a'(bra)], site [a, p, b], w [m, q, p, n]
    Tensor t = contract(left, site, {{0, 0}});              // [m, a', p, b]
    t = contract(t, w, {{0, 0}, {2, 2}});                   // [a', b, q, n]
    t = contract(t, site.conjugate(), {{0, 0}, {2, 1}});    // [b, n, b']
    return t;
}

Tensor env_step_right(const Tensor& right, const Tensor& site, const Tensor& w) {
    // right [b(ket), n, b'(bra)], site [a, p, b], w [m, q, p, n]
    Tensor t = contract(site, right, {{2, 0}});             // [a, p, n, b']
    t = contract(t, w, {{1, 2}, {2, 3}});                   // [a, b', m, q]
    t = contract(t, site.conjugate(), {{1, 2}, {3, 1}});    // [a, m, a']
    return t;
}

}  // namespace detail

cplx expect_mpo(const MPS& m, const MPO& op) {
    if (m.length() != op.length()) throw std::invalid_argument("expect_mpo: length mismatch");
    MPS c = m;
    if (c.center_kind == MPS::Center::Bond) canonicalize(c, c.center);
    Tensor f = detail::boundary_env();
    for (int i = 0; i < c.length(); ++i) {
        if (m.phys_dim(i) != op.phys_dim(i))
            throw std::invalid_argument("expect_mpo: physical dims differ at site " + std::to_string(i));
        f = detail::env_step_left(f, c.sites[static_cast<std::size_t>(i)],
                                  op.sites[static_cast<std::size_t>(i)]);
    }
    cplx num = f.scalar_value();
    cplx den = mps_overlap(c, c);
    return num / den;
}

Tensor dense_state(const MPS& m) {
    MPS c = m;
    if (c.center_kind == MPS::Center::Bond) canonicalize(c, c.center);
    Tensor acc = c.sites.front();  // [1, d0, r] -> treat as [d0.., r]
    std::size_t phys = acc.dim(1);
    acc = acc.reshape({phys, acc.dim(2)});
    for (int i = 1; i < c.length(); ++i) {
        const Tensor& s = c.sites[static_cast<std::size_t>(i)];
        acc = contract(acc, s, {{1, 0}});  // [P, d, r]
        phys *= s.dim(1);
        acc = std::move(acc).reshape({phys, s.dim(2)});
    }
    return std::move(acc).reshape({phys});
}

}  // namespace atdvp
