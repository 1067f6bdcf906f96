#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "atdvp/adaptive.hpp"
#include "atdvp/dense.hpp"
#include "atdvp/model.hpp"
#include "atdvp/tdvp.hpp"

#include <cmath>
#include <cstring>
#include <limits>
#include <random>

using namespace atdvp;

namespace {

std::mt19937 rng(5150);

cplx random_cplx() {
    std::normal_distribution<double> g(0.0, 1.0);
    return {g(rng), g(rng)};
}

MPS random_mps(const std::vector<std::size_t>& dims, std::size_t dmax) {
    std::vector<Tensor> sites;
    std::size_t left = 1;
    for (std::size_t i = 0; i < dims.size(); ++i) {
        std::size_t right = i + 1 == dims.size() ? 1 : dmax;
        Tensor t(std::vector<std::size_t>{left, dims[i], right});
        for (std::size_t k = 0; k < t.size(); ++k) t[k] = random_cplx();
        sites.push_back(std::move(t));
        left = right;
    }
    return mps_from_tensors(std::move(sites), 0);
}

ModelParams tiny_params() {
    ModelParams p;
    p.omega0 = 0.2;
    p.alpha = 0.2;
    p.beta_a = Beta::inf();
    p.beta_b = Beta::finite(1.0);
    p.chain_len_a = 1;
    p.chain_len_b = 1;
    p.fock_dim = 3;
    return p;
}

bool tensors_identical(const Tensor& a, const Tensor& b) {
    if (a.dims() != b.dims()) return false;
    return std::memcmp(a.data(), b.data(), a.size() * sizeof(cplx)) == 0;
}

bool mps_identical(const MPS& a, const MPS& b) {
    if (a.length() != b.length()) return false;
    for (int i = 0; i < a.length(); ++i)
        if (!tensors_identical(a.sites[static_cast<std::size_t>(i)],
                               b.sites[static_cast<std::size_t>(i)]))
            return false;
    return true;
}

double overlap_deviation(const MPS& a, const MPS& b) {
    cplx ov = mps_overlap(a, b);
    double na = mps_norm(a), nb = mps_norm(b);
    return std::abs(std::abs(ov) / (na * nb) - 1.0);
}

void check_orthogonality_identities(const MPS& m) {
    REQUIRE(m.center_kind == MPS::Center::Site);
    for (int i = 0; i < m.length(); ++i) {
        const Tensor& a = m.sites[static_cast<std::size_t>(i)];
        if (i < m.center) {
            Tensor g = contract(a.conjugate(), a, {{0, 0}, {1, 1}});
            for (std::size_t r = 0; r < g.dim(0); ++r)
                for (std::size_t c = 0; c < g.dim(1); ++c)
                    CHECK(std::abs(g.at(r, c) - (r == c ? cplx(1.0) : cplx(0.0))) < 1e-10);
        } else if (i > m.center) {
            Tensor g = contract(a, a.conjugate(), {{1, 1}, {2, 2}});
            for (std::size_t r = 0; r < g.dim(0); ++r)
                for (std::size_t c = 0; c < g.dim(1); ++c)
                    CHECK(std::abs(g.at(r, c) - (r == c ? cplx(1.0) : cplx(0.0))) < 1e-10);
        }
    }
}

}  // namespace

TEST_CASE("subspace_expand to the current dimension is the identity") {
    MPS m = random_mps({2, 2, 2}, 2);
    canonicalize(m, 2);
    MPS r = subspace_expand(m, 1, static_cast<int>(m.bond_dim(1)));
    CHECK(mps_identical(m, r));
}

TEST_CASE("expanding a product state leaves every observable unchanged") {
    MPS m = product_state_mps({{cplx(1.0), cplx(0.0)},
                               {cplx(0.0), cplx(1.0)},
                               {cplx(1.0), cplx(0.0)}});
    MPS r = subspace_expand(m, 1, 2);
    CHECK(r.bond_dim(1) == 2);
    CHECK(overlap_deviation(m, r) < 1e-14);
    for (int s = 0; s < 3; ++s) {
        cplx before = expect_local(m, pauli_z(), s);
        cplx after = expect_local(r, pauli_z(), s);
        CHECK(std::abs(before - after) < 1e-13);
    }
    check_orthogonality_identities(r);
}

TEST_CASE("subspace_expand preserves the dense state exactly") {
    MPS m = random_mps({2, 3, 2, 2}, 2);
    Tensor before = dense_state(m);
    MPS r = subspace_expand(m, 1, 4);
    Tensor after = dense_state(r);
    double diff = 0.0;
    for (std::size_t i = 0; i < before.size(); ++i)
        diff = std::max(diff, std::abs(before[i] - after[i]));
    CHECK(diff < 1e-12 * before.norm());
    check_orthogonality_identities(r);
}

TEST_CASE("subspace_expand rejects targets above the structural cap") {
    MPS m = product_state_mps({{cplx(1.0), cplx(0.0)}, {cplx(1.0), cplx(0.0)}});
    CHECK_THROWS_AS(subspace_expand(m, 0, 3), std::invalid_argument);
}

TEST_CASE("randomized state invariance of subspace_expand") {
    std::uniform_int_distribution<int> nsites(2, 6), dphys(2, 3), dbond(1, 3);
    for (int trial = 0; trial < 200; ++trial) {
        std::vector<std::size_t> dims;
        int n = nsites(rng);
        for (int i = 0; i < n; ++i) dims.push_back(static_cast<std::size_t>(dphys(rng)));
        MPS m = random_mps(dims, static_cast<std::size_t>(dbond(rng)));
        canonicalize(m, static_cast<int>(rng() % static_cast<unsigned>(n)));
        int bond = static_cast<int>(rng() % static_cast<unsigned>(n - 1));
        int cap = structural_cap(m, bond);
        int cur = static_cast<int>(m.bond_dim(bond));
        int target = cur + static_cast<int>(rng() % static_cast<unsigned>(cap - cur + 1));
        MPS r = subspace_expand(m, bond, target);
        CHECK(overlap_deviation(m, r) < 1e-12);
        CHECK(std::abs(mps_norm(r) - mps_norm(m)) < 1e-12 * mps_norm(m));
    }
}

TEST_CASE("identity MPO gives a flat curve equal to 3 |psi|^2") {
    MPS m = random_mps({2, 2, 2, 2}, 2);
    MPO id = identity_mpo({2, 2, 2, 2});
    std::vector<int> trials = trial_maxima(m, 8, 100);
    auto curves = convergence_curves(m, id, trials);
    const double n2 = mps_norm(m) * mps_norm(m);
    for (const auto& c : curves) {
        REQUIRE(!c.values.empty());
        for (double f : c.values) CHECK(f == doctest::Approx(3.0 * n2).epsilon(1e-10));
    }
}

TEST_CASE("decoupled model on a product state has flat curves everywhere") {
    ModelParams p = tiny_params();
    p.alpha = 0.0;
    p.chain_len_a = 2;
    p.chain_len_b = 2;
    TwoBathModel model = build_two_bath_model(p);
    MPS psi = build_initial_state(p);
    auto curves = convergence_curves(psi, model.mpo, trial_maxima(psi, 8, 60));
    for (const auto& c : curves) {
        for (std::size_t k = 1; k < c.values.size(); ++k)
            CHECK(std::abs(c.values[k] - c.values[0]) < 1e-12 * std::max(1.0, c.values[0]));
    }
}

TEST_CASE("curves are non-decreasing and saturate at the structural cap") {
    ModelParams p = tiny_params();
    TwoBathModel model = build_two_bath_model(p);
    MPS m = random_mps(model.phys_dims, 2);
    std::vector<int> full(static_cast<std::size_t>(m.length() - 1), 1000);
    auto curves = convergence_curves(m, model.mpo, full);
    for (const auto& c : curves) {
        CHECK(c.first_d + static_cast<int>(c.values.size()) - 1 == c.structural_cap);
        for (std::size_t k = 1; k < c.values.size(); ++k)
            CHECK(c.values[k] >= c.values[k - 1] - 1e-12 * std::max(1.0, c.values[k - 1]));
    }
    // requesting beyond the cap clamps and yields bit-identical values
    std::vector<int> beyond(static_cast<std::size_t>(m.length() - 1), 2000);
    auto curves2 = convergence_curves(m, model.mpo, beyond);
    for (std::size_t b = 0; b < curves.size(); ++b) {
        REQUIRE(curves[b].values.size() == curves2[b].values.size());
        for (std::size_t k = 0; k < curves[b].values.size(); ++k)
            CHECK(curves[b].values[k] == curves2[b].values[k]);
    }
}

TEST_CASE("selection rule on hand-built curves") {
    ConvergenceCurve c;
    c.bond = 0;
    c.first_d = 1;
    c.structural_cap = 3;
    c.values = {1.0, 2.0, 2.0000000001};
    auto plan = select_bond_dims({c}, 1e-6, 60);
    CHECK(plan.bonds[0].chosen_d == 2);

    ConvergenceCurve flat = c;
    flat.values = {5.0, 5.0, 5.0};
    CHECK(select_bond_dims({flat}, 1e-6, 60).bonds[0].chosen_d == 1);

    ConvergenceCurve zero = c;
    zero.values = {0.0, 0.0, 0.0};
    CHECK(select_bond_dims({zero}, 1e-6, 60).bonds[0].chosen_d == 1);

    // everything still rising: take the top of the window, clamped by d_lim
    ConvergenceCurve rising = c;
    rising.values = {1.0, 2.0, 4.0};
    CHECK(select_bond_dims({rising}, 1e-6, 60).bonds[0].chosen_d == 3);
    CHECK(select_bond_dims({rising}, 1e-6, 2).bonds[0].chosen_d == 2);

    CHECK(select_bond_dims({rising}, std::numeric_limits<double>::infinity(), 60)
              .bonds[0]
              .chosen_d == 1);
}

TEST_CASE("bond_update_step leaves a decoupled product state untouched") {
    ModelParams p = tiny_params();
    p.alpha = 0.0;
    TwoBathModel model = build_two_bath_model(p);
    MPS psi = build_initial_state(p);
    auto [out, plan] = bond_update_step(psi, model.mpo, 1e-8, 60, 8);
    for (const auto& b : plan.bonds) CHECK(b.chosen_d == 1);
    CHECK(mps_identical(psi, out));
}

TEST_CASE("bond_update_step with zero trial margin is a bitwise no-op") {
    ModelParams p = tiny_params();
    TwoBathModel model = build_two_bath_model(p);
    MPS psi = build_initial_state(p);
    auto [out, plan] = bond_update_step(psi, model.mpo, 1e-12, 60, 0);
    CHECK(!plan.grew());
    CHECK(mps_identical(psi, out));
}

TEST_CASE("bond_update_step grows bonds next to the spin first") {
    ModelParams p = tiny_params();
    p.chain_len_a = 4;
    p.chain_len_b = 4;
    TwoBathModel model = build_two_bath_model(p);
    MPS psi = build_initial_state(p);
    auto [out, plan] = bond_update_step(psi, model.mpo, 1e-8, 60, 8);
    const int s = model.spin_site;
    // bonds touching the spin grow
    CHECK(plan.bonds[static_cast<std::size_t>(s - 1)].chosen_d > 1);
    CHECK(plan.bonds[static_cast<std::size_t>(s)].chosen_d > 1);
    // distant bonds stay trivial
    CHECK(plan.bonds[0].chosen_d == 1);
    CHECK(plan.bonds[1].chosen_d == 1);
    CHECK(plan.bonds.back().chosen_d == 1);
    CHECK(plan.bonds[plan.bonds.size() - 2].chosen_d == 1);
    // the state itself is unchanged
    CHECK(overlap_deviation(psi, out) < 1e-12);
    CHECK(out.center == 0);
    check_orthogonality_identities(out);
}

TEST_CASE("bond_update_step preserves the dense state") {
    ModelParams p = tiny_params();
    TwoBathModel model = build_two_bath_model(p);
    MPS m = random_mps(model.phys_dims, 2);
    Tensor before = dense_state(m);
    auto [out, plan] = bond_update_step(m, model.mpo, 1e-10, 60, 8);
    CHECK(plan.grew());
    Tensor after = dense_state(out);
    double diff = 0.0;
    for (std::size_t i = 0; i < before.size(); ++i)
        diff = std::max(diff, std::abs(before[i] - after[i]));
    CHECK(diff < 1e-12 * before.norm());
}

TEST_CASE("vacuum light cone: untouched far bonds keep flat curves") {
    ModelParams p = tiny_params();
    p.chain_len_a = 5;
    p.chain_len_b = 5;
    TwoBathModel model = build_two_bath_model(p);
    MPS psi = build_initial_state(p);
    // evolve a couple of adaptive steps
    MPS state = psi;
    for (int step = 0; step < 2; ++step) {
        auto [next, plan] = bond_update_step(state, model.mpo, 1e-8, 60, 8);
        state = std::move(next);
        sweep_second_order(state, model.mpo, 0.05);
    }
    // the light cone moves by at most one bond per update
    auto dims = state.interior_bond_dims();
    const int s = model.spin_site;
    for (int b = 0; b + 1 < state.length(); ++b) {
        const int dist = b < s ? s - 1 - b : b - s;  // bonds adjacent to spin: dist 0
        if (dist > 2) CHECK(dims[static_cast<std::size_t>(b)] == 1);
    }
}

TEST_CASE("embed_bond_dimension reaches min(d_max, caps) and keeps the state") {
    ModelParams p = tiny_params();
    p.chain_len_a = 2;
    p.chain_len_b = 2;
    TwoBathModel model = build_two_bath_model(p);
    MPS psi = build_initial_state(p);
    Tensor before = dense_state(psi);
    MPS emb = embed_bond_dimension(psi, 5);
    auto dims = emb.interior_bond_dims();
    // caps for phys dims (3,3,2,3,3): [3, 5(9 capped), 5(6->cap is min(9*? ...)), ...]
    for (int b = 0; b + 1 < emb.length(); ++b) {
        const int want = std::min(5, structural_cap(emb, b));
        CHECK(static_cast<int>(dims[static_cast<std::size_t>(b)]) >= want);
        CHECK(static_cast<int>(dims[static_cast<std::size_t>(b)]) <= 5);
    }
    Tensor after = dense_state(emb);
    double diff = 0.0;
    for (std::size_t i = 0; i < before.size(); ++i)
        diff = std::max(diff, std::abs(before[i] - after[i]));
    CHECK(diff < 1e-12);
    check_orthogonality_identities(emb);
}

TEST_CASE("adaptive evolution tracks exact diagonalization on a tiny model") {
    ModelParams p = tiny_params();
    TwoBathModel model = build_two_bath_model(p);
    MPS psi = build_initial_state(p);

    Tensor h = dense_from_mpo(model.mpo);
    DenseSystem sys(h, dense_state(psi));
    const double dt = 0.02;
    const int steps = 25;
    auto traj = ed_propagate(sys, dt, steps);

    Tensor sz_d = dense_site_operator(model.phys_dims, {{model.spin_site, pauli_z()}});
    for (int s = 1; s <= steps; ++s) {
        auto [next, plan] = bond_update_step(psi, model.mpo, 1e-8, 60, 8);
        psi = std::move(next);
        sweep_second_order(psi, model.mpo, dt);
        cplx got = expect_local(psi, pauli_z(), model.spin_site);
        cplx expd = dense_expectation(sz_d, traj[static_cast<std::size_t>(s)]);
        CHECK(std::abs(got - expd) < 2e-4);
    }
}
