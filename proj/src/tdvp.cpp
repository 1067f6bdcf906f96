#include "atdvp/tdvp.hpp"

#include <Eigen/Dense>

#include <chrono>
#include <cmath>
#include <stdexcept>
#include <string>

namespace atdvp {

namespace detail {

Tensor heff_apply(const Tensor& left, const Tensor& w, const Tensor& right, const Tensor& a) {
    // left [a, m, a'], a [a, p, b], w [m, q, p, n], right [b, n, b']
    Tensor t = contract(left, a, {{0, 0}});        // [m, a', p, b]
    t = contract(t, w, {{0, 0}, {2, 2}});          // [a', b, q, n]
    t = contract(t, right, {{1, 0}, {3, 1}});      // [a', q, b']
    return t;
}

Tensor keff_apply(const Tensor& left, const Tensor& right, const Tensor& c) {
    // left [a, m, a'], c [a, b], right [b, m, b']
    Tensor t = contract(left, c, {{0, 0}});        // [m, a', b]
    t = contract(t, right, {{2, 0}, {0, 1}});      // [a', b']
    return t;
}

}  // namespace detail

void EnvironmentCache::invalidate_site(int site) {
    for (std::size_t i = static_cast<std::size_t>(site) + 1; i < left_valid.size(); ++i)
        left_valid[i] = 0;
    for (std::size_t i = 0; i <= static_cast<std::size_t>(site) && i < right_valid.size(); ++i)
        right_valid[i] = 0;
}

EnvironmentCache build_environments(const MPS& m, const MPO& op) {
    if (m.length() != op.length()) throw std::invalid_argument("build_environments: length mismatch");
    const int n = m.length();
    EnvironmentCache env;
    env.left.resize(static_cast<std::size_t>(n) + 1);
    env.right.resize(static_cast<std::size_t>(n) + 1);
    env.left[0] = detail::boundary_env();
    env.right[static_cast<std::size_t>(n)] = detail::boundary_env();
    for (int i = 0; i < n; ++i)
        env.left[static_cast<std::size_t>(i + 1)] =
            detail::env_step_left(env.left[static_cast<std::size_t>(i)],
                                  m.sites[static_cast<std::size_t>(i)],
                                  op.sites[static_cast<std::size_t>(i)]);
    for (int i = n - 1; i >= 0; --i)
        env.right[static_cast<std::size_t>(i)] =
            detail::env_step_right(env.right[static_cast<std::size_t>(i + 1)],
                                   m.sites[static_cast<std::size_t>(i)],
                                   op.sites[static_cast<std::size_t>(i)]);
    env.left_valid.assign(static_cast<std::size_t>(n) + 1, 1);
    env.right_valid.assign(static_cast<std::size_t>(n) + 1, 1);
    return env;
}

Tensor apply_site_hamiltonian(const EnvironmentCache& env, const MPO& op, int i, const Tensor& a_c) {
    if (i < 0 || i >= env.length()) throw std::out_of_range("apply_site_hamiltonian: bad site");
    if (!env.left_valid[static_cast<std::size_t>(i)] ||
        !env.right_valid[static_cast<std::size_t>(i + 1)])
        throw std::logic_error("apply_site_hamiltonian: stale environments");
    return detail::heff_apply(env.left[static_cast<std::size_t>(i)],
                              op.sites[static_cast<std::size_t>(i)],
                              env.right[static_cast<std::size_t>(i + 1)], a_c);
}

Tensor apply_bond_hamiltonian(const EnvironmentCache& env, int bond, const Tensor& c) {
    if (bond < 0 || bond + 1 >= env.length()) throw std::out_of_range("apply_bond_hamiltonian: bad bond");
    if (!env.left_valid[static_cast<std::size_t>(bond + 1)] ||
        !env.right_valid[static_cast<std::size_t>(bond + 1)])
        throw std::logic_error("apply_bond_hamiltonian: stale environments");
    return detail::keff_apply(env.left[static_cast<std::size_t>(bond + 1)],
                              env.right[static_cast<std::size_t>(bond + 1)], c);
}

namespace {

// exp(z T) e1 for the real symmetric tridiagonal T given by (alpha, beta).
std::vector<cplx> expm_tridiag_e1(const std::vector<double>& alpha, const std::vector<double>& beta,
                                  cplx z) {
    const int m = static_cast<int>(alpha.size());
    Eigen::MatrixXd t = Eigen::MatrixXd::Zero(m, m);
    for (int i = 0; i < m; ++i) {
        t(i, i) = alpha[static_cast<std::size_t>(i)];
        if (i + 1 < m) t(i, i + 1) = t(i + 1, i) = beta[static_cast<std::size_t>(i)];
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(t);
    Eigen::VectorXd u1 = es.eigenvectors().row(0);
    std::vector<cplx> phi(static_cast<std::size_t>(m), cplx(0.0));
    for (int k = 0; k < m; ++k) {
        const cplx ek = std::exp(z * es.eigenvalues()(k)) * u1(k);
        for (int i = 0; i < m; ++i) phi[static_cast<std::size_t>(i)] += es.eigenvectors()(i, k) * ek;
    }
    return phi;
}

}  // namespace

Tensor krylov_expm_apply(const std::function<Tensor(const Tensor&)>& apply_h, const Tensor& v,
                         cplx z, const KrylovOptions& opts, int* iterations) {
    const double nv = v.norm();
    if (nv == 0.0) throw std::invalid_argument("krylov_expm_apply: zero vector");

    std::vector<Tensor> basis;
    basis.push_back((1.0 / nv) * v);
    std::vector<double> alpha, beta;

    for (int m = 1; m <= opts.max_iter; ++m) {
        Tensor w = apply_h(basis.back());
        const double a = std::real(dot(basis.back(), w));
        alpha.push_back(a);
        w -= cplx(a) * basis.back();
        if (m > 1) w -= cplx(beta.back()) * basis[static_cast<std::size_t>(m - 2)];
        // one extra orthogonalization pass keeps the basis clean at these sizes
        for (const Tensor& u : basis) w -= dot(u, w) * u;
        const double b = w.norm();

        std::vector<cplx> phi = expm_tridiag_e1(alpha, beta, z);
        const double resid = b * std::abs(phi.back());
        if (resid <= opts.tol || b <= 1e-14) {
            Tensor out(v.dims());
            for (std::size_t j = 0; j < basis.size(); ++j) out += (nv * phi[j]) * basis[j];
            if (iterations) *iterations = m;
            return out;
        }
        beta.push_back(b);
        basis.push_back((1.0 / b) * w);
    }
    throw std::runtime_error("krylov_expm_apply: no convergence within max_iter; last residual " +
                             std::to_string(beta.empty() ? -1.0 : beta.back()));
}

SweepReport sweep_second_order(MPS& m, const MPO& op, double dt, const KrylovOptions& opts) {
    if (m.length() != op.length()) throw std::invalid_argument("sweep_second_order: length mismatch");
    const auto t_start = std::chrono::steady_clock::now();
    canonicalize(m, 0);

    SweepReport rep;
    rep.step_size = dt;
    rep.norm_before = m.sites[0].norm();
    rep.energy_before = std::real(expect_mpo(m, op));

    const int n = m.length();
    const cplx ih_fwd(0.0, -0.5 * dt);
    const cplx ih_bwd(0.0, +0.5 * dt);

    std::vector<Tensor> left(static_cast<std::size_t>(n) + 1);
    std::vector<Tensor> right(static_cast<std::size_t>(n) + 1);
    left[0] = detail::boundary_env();
    right[static_cast<std::size_t>(n)] = detail::boundary_env();
    for (int i = n - 1; i >= 1; --i)
        right[static_cast<std::size_t>(i)] =
            detail::env_step_right(right[static_cast<std::size_t>(i + 1)],
                                   m.sites[static_cast<std::size_t>(i)],
                                   op.sites[static_cast<std::size_t>(i)]);

    auto evolve_site = [&](int i, cplx z) {
        int iters = 0;
        Tensor& a = m.sites[static_cast<std::size_t>(i)];
        a = krylov_expm_apply(
            [&](const Tensor& x) {
                return detail::heff_apply(left[static_cast<std::size_t>(i)],
                                          op.sites[static_cast<std::size_t>(i)],
                                          right[static_cast<std::size_t>(i + 1)], x);
            },
            a, z, opts, &iters);
        rep.krylov_iterations.push_back(iters);
    };
    auto evolve_bond = [&](int bond, Tensor c, cplx z) {
        int iters = 0;
        c = krylov_expm_apply(
            [&](const Tensor& x) {
                return detail::keff_apply(left[static_cast<std::size_t>(bond + 1)],
                                          right[static_cast<std::size_t>(bond + 1)], x);
            },
            c, z, opts, &iters);
        rep.krylov_iterations.push_back(iters);
        return c;
    };

    try {
        // left-to-right half step
        for (int i = 0; i < n; ++i) {
            evolve_site(i, ih_fwd);
            if (i == n - 1) break;
            Tensor& a = m.sites[static_cast<std::size_t>(i)];
            const std::size_t l = a.dim(0), d = a.dim(1), r = a.dim(2);
            auto [q, c] = qr_reduced(std::move(a).reshape({l * d, r}));
            a = std::move(q).reshape({l, d, c.dim(0)});
            left[static_cast<std::size_t>(i + 1)] =
                detail::env_step_left(left[static_cast<std::size_t>(i)], a,
                                      op.sites[static_cast<std::size_t>(i)]);
            c = evolve_bond(i, std::move(c), ih_bwd);
            Tensor& b = m.sites[static_cast<std::size_t>(i + 1)];
            b = contract(c, b, {{1, 0}});
            m.center = i + 1;
        }
        // right-to-left half step
        for (int i = n - 1; i >= 0; --i) {
            evolve_site(i, ih_fwd);
            if (i == 0) break;
            Tensor& a = m.sites[static_cast<std::size_t>(i)];
            const std::size_t l = a.dim(0), d = a.dim(1), r = a.dim(2);
            auto [q, c] = rq_reduced(std::move(a).reshape({l, d * r}));
            a = std::move(q).reshape({c.dim(1), d, r});
            right[static_cast<std::size_t>(i)] =
                detail::env_step_right(right[static_cast<std::size_t>(i + 1)], a,
                                       op.sites[static_cast<std::size_t>(i)]);
            c = evolve_bond(i - 1, std::move(c), ih_bwd);
            Tensor& b = m.sites[static_cast<std::size_t>(i - 1)];
            b = contract(b, c, {{2, 0}});
            m.center = i - 1;
        }
    } catch (const std::exception& e) {
        throw std::runtime_error("sweep_second_order: site " + std::to_string(m.center) + ": " +
                                 e.what());
    }

    rep.norm_after = m.sites[0].norm();
    rep.energy_after = std::real(expect_mpo(m, op));
    rep.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start).count();
    if (!std::isfinite(rep.norm_after) || !std::isfinite(rep.energy_after))
        throw std::runtime_error("sweep_second_order: non-finite state after sweep");
    return rep;
}

}  // namespace atdvp
