#include "atdvp/dense.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <stdexcept>

namespace atdvp {

namespace {

using EMatrix = Eigen::Matrix<cplx, Eigen::Dynamic, Eigen::Dynamic>;
using EVector = Eigen::Matrix<cplx, Eigen::Dynamic, 1>;

}  // namespace

Tensor dense_from_mpo(const MPO& op) {
    if (op.length() == 0) throw std::invalid_argument("dense_from_mpo: empty MPO");
    std::size_t dim = 1;
    for (int i = 0; i < op.length(); ++i) {
        dim *= op.phys_dim(i);
        if (dim > kDenseDimCap) throw std::invalid_argument("dense_from_mpo: dimension cap exceeded");
    }
    // Accumulator [out, in, bond]; site 0 ends up fastest in both out and in.
    Tensor acc(std::vector<std::size_t>{1, 1, 1});
    acc.at(0, 0, 0) = 1.0;
    std::size_t outd = 1;
    for (int i = 0; i < op.length(); ++i) {
        const Tensor& w = op.sites[static_cast<std::size_t>(i)];  // [l, q, p, r]
        Tensor t = contract(acc, w, {{2, 0}});  // [out, in, q, p, r]
        t = t.permute({0, 2, 1, 3, 4});         // [out, q, in, p, r]
        outd *= w.dim(1);
        acc = std::move(t).reshape({outd, outd, w.dim(3)});
    }
    return acc.reshape({outd, outd});
}

Tensor dense_site_operator(const std::vector<std::size_t>& dims,
                           const std::vector<std::pair<int, Tensor>>& ops) {
    std::size_t dim = 1;
    for (std::size_t d : dims) {
        dim *= d;
        if (dim > kDenseDimCap) throw std::invalid_argument("dense_site_operator: dimension cap exceeded");
    }
    std::vector<std::size_t> strides(dims.size());
    std::size_t s = 1;
    for (std::size_t k = 0; k < dims.size(); ++k) {
        strides[k] = s;
        s *= dims[k];
    }
    for (const auto& [site, o] : ops) {
        if (site < 0 || static_cast<std::size_t>(site) >= dims.size())
            throw std::invalid_argument("dense_site_operator: site out of range");
        if (o.rank() != 2 || o.dim(0) != dims[static_cast<std::size_t>(site)] ||
            o.dim(1) != dims[static_cast<std::size_t>(site)])
            throw std::invalid_argument("dense_site_operator: operator shape mismatch");
    }

    Tensor out(std::vector<std::size_t>{dim, dim});
    // walk columns; for each column expand the non-identity sites
    std::vector<std::size_t> col_idx(dims.size());
    for (std::size_t col = 0; col < dim; ++col) {
        std::size_t rest = col;
        for (std::size_t k = 0; k < dims.size(); ++k) {
            col_idx[k] = rest % dims[k];
            rest /= dims[k];
        }
        // enumerate the row indices that differ only on the operator sites
        std::vector<std::size_t> cursor(ops.size(), 0);
        while (true) {
            cplx val(1.0, 0.0);
            std::ptrdiff_t row = static_cast<std::ptrdiff_t>(col);
            for (std::size_t t = 0; t < ops.size(); ++t) {
                const auto& [site, o] = ops[t];
                const std::size_t ci = col_idx[static_cast<std::size_t>(site)];
                val *= o.at(cursor[t], ci);
                row += (static_cast<std::ptrdiff_t>(cursor[t]) - static_cast<std::ptrdiff_t>(ci)) *
                       static_cast<std::ptrdiff_t>(strides[static_cast<std::size_t>(site)]);
            }
            if (val != cplx(0.0, 0.0)) out.at(static_cast<std::size_t>(row), col) += val;
            // odometer over cursor
            std::size_t t = 0;
            for (; t < ops.size(); ++t) {
                if (++cursor[t] < dims[static_cast<std::size_t>(ops[t].first)]) break;
                cursor[t] = 0;
            }
            if (t == ops.size()) break;
        }
    }
    return out;
}

DenseSystem::DenseSystem(Tensor h, Tensor psi) {
    if (h.rank() != 2 || h.dim(0) != h.dim(1)) throw std::invalid_argument("DenseSystem: H must be square");
    dim = h.dim(0);
    if (dim > kDenseDimCap) throw std::invalid_argument("DenseSystem: dimension cap exceeded");
    if (psi.size() != dim) throw std::invalid_argument("DenseSystem: state dimension mismatch");
    double herm = 0.0;
    for (std::size_t r = 0; r < dim; ++r)
        for (std::size_t c = 0; c < dim; ++c)
            herm = std::max(herm, std::abs(h.at(r, c) - std::conj(h.at(c, r))));
    if (herm > 1e-12 * std::max(1.0, h.norm()))
        throw std::invalid_argument("DenseSystem: Hamiltonian is not hermitian");
    if (std::abs(psi.norm() - 1.0) > 1e-10)
        throw std::invalid_argument("DenseSystem: state is not unit norm");
    hamiltonian = std::move(h);
    state = std::move(psi).reshape({dim});
}

std::vector<Tensor> ed_propagate(const DenseSystem& sys, double dt, int steps) {
    const auto n = static_cast<Eigen::Index>(sys.dim);
    Eigen::Map<const EMatrix> h(sys.hamiltonian.data(), n, n);
    Eigen::SelfAdjointEigenSolver<EMatrix> es(h);
    if (es.info() != Eigen::Success) throw std::runtime_error("ed_propagate: eigensolver failed");
    const EMatrix& u = es.eigenvectors();
    EVector phase(n);
    for (Eigen::Index k = 0; k < n; ++k)
        phase(k) = std::exp(cplx(0.0, -dt * es.eigenvalues()(k)));
    EMatrix ustep = u * phase.asDiagonal() * u.adjoint();

    std::vector<Tensor> traj;
    traj.reserve(static_cast<std::size_t>(steps) + 1);
    traj.push_back(sys.state);
    EVector v = Eigen::Map<const EVector>(sys.state.data(), n);
    for (int s = 0; s < steps; ++s) {
        v = ustep * v;
        Tensor t(std::vector<std::size_t>{sys.dim});
        Eigen::Map<EVector>(t.data(), n) = v;
        traj.push_back(std::move(t));
    }
    return traj;
}

cplx dense_expectation(const Tensor& a, const Tensor& v) {
    Tensor av = contract(a, v, {{1, 0}});
    return dot(v, av) / v.norm_sq();
}

}  // namespace atdvp
