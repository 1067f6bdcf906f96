#include "atdvp/tensor.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>

namespace atdvp {

namespace {

std::size_t product(const std::vector<std::size_t>& dims) {
    std::size_t p = 1;
    for (std::size_t d : dims) p *= d;
    return p;
}

using EMatrix = Eigen::Matrix<cplx, Eigen::Dynamic, Eigen::Dynamic>;
using EMap = Eigen::Map<EMatrix>;
using ECMap = Eigen::Map<const EMatrix>;

}  // namespace

Tensor::Tensor(std::vector<std::size_t> dims) : dims_(std::move(dims)) {
    for (std::size_t d : dims_)
        if (d == 0) throw std::invalid_argument("Tensor: zero dimension");
    data_.assign(product(dims_), cplx(0.0, 0.0));
}

Tensor Tensor::from_data(std::vector<std::size_t> dims, std::vector<cplx> data) {
    Tensor t;
    for (std::size_t d : dims)
        if (d == 0) throw std::invalid_argument("Tensor: zero dimension");
    if (product(dims) != data.size())
        throw std::invalid_argument("Tensor: data length does not match dimensions");
    t.dims_ = std::move(dims);
    t.data_ = std::move(data);
    return t;
}

Tensor Tensor::scalar(cplx value, std::size_t rank) {
    Tensor t(std::vector<std::size_t>(rank, 1));
    t.data_[0] = value;
    return t;
}

cplx Tensor::scalar_value() const {
    if (data_.size() != 1)
        throw std::logic_error("Tensor::scalar_value: tensor has more than one element");
    return data_[0];
}

std::size_t Tensor::offset(const std::size_t* idx, std::size_t n) const {
    if (n != dims_.size()) throw std::invalid_argument("Tensor: wrong index rank");
    std::size_t off = 0, stride = 1;
    for (std::size_t k = 0; k < n; ++k) {
        if (idx[k] >= dims_[k]) throw std::out_of_range("Tensor: index out of range");
        off += idx[k] * stride;
        stride *= dims_[k];
    }
    return off;
}

Tensor& Tensor::operator*=(cplx s) {
    for (auto& x : data_) x *= s;
    return *this;
}

Tensor& Tensor::operator+=(const Tensor& other) {
    if (dims_ != other.dims_) throw std::invalid_argument("Tensor +=: shape mismatch");
    for (std::size_t i = 0; i < data_.size(); ++i) data_[i] += other.data_[i];
    return *this;
}

Tensor& Tensor::operator-=(const Tensor& other) {
    if (dims_ != other.dims_) throw std::invalid_argument("Tensor -=: shape mismatch");
    for (std::size_t i = 0; i < data_.size(); ++i) data_[i] -= other.data_[i];
    return *this;
}

double Tensor::norm_sq() const {
    double s = 0.0;
    for (const auto& x : data_) s += std::norm(x);
    return s;
}

double Tensor::norm() const { return std::sqrt(norm_sq()); }

Tensor Tensor::conjugate() const {
    Tensor t = *this;
    for (auto& x : t.data_) x = std::conj(x);
    return t;
}

Tensor Tensor::reshape(std::vector<std::size_t> new_dims) const& {
    if (product(new_dims) != data_.size())
        throw std::invalid_argument("Tensor::reshape: element count mismatch");
    Tensor t = *this;
    t.dims_ = std::move(new_dims);
    return t;
}

Tensor Tensor::reshape(std::vector<std::size_t> new_dims) && {
    if (product(new_dims) != data_.size())
        throw std::invalid_argument("Tensor::reshape: element count mismatch");
    dims_ = std::move(new_dims);
    return std::move(*this);
}

Tensor Tensor::permute(const std::vector<std::size_t>& perm) const {
    const std::size_t r = rank();
    if (perm.size() != r) throw std::invalid_argument("Tensor::permute: wrong rank");
    std::vector<char> seen(r, 0);
    bool identity = true;
    for (std::size_t k = 0; k < r; ++k) {
        if (perm[k] >= r || seen[perm[k]]) throw std::invalid_argument("Tensor::permute: invalid permutation");
        seen[perm[k]] = 1;
        if (perm[k] != k) identity = false;
    }
    if (identity) return *this;

    std::vector<std::size_t> in_strides(r);
    std::size_t s = 1;
    for (std::size_t k = 0; k < r; ++k) {
        in_strides[k] = s;
        s *= dims_[k];
    }

    std::vector<std::size_t> out_dims(r), step(r);
    for (std::size_t k = 0; k < r; ++k) {
        out_dims[k] = dims_[perm[k]];
        step[k] = in_strides[perm[k]];
    }

    Tensor out;
    out.dims_ = out_dims;
    out.data_.resize(data_.size());

    // Odometer over the output multi-index; input offset advances by the
    // permuted strides so no divisions are needed.
    std::vector<std::size_t> idx(r, 0);
    std::size_t in_off = 0;
    const std::size_t total = data_.size();
    for (std::size_t lin = 0; lin < total; ++lin) {
        out.data_[lin] = data_[in_off];
        for (std::size_t k = 0; k < r; ++k) {
            in_off += step[k];
            if (++idx[k] < out_dims[k]) break;
            in_off -= step[k] * out_dims[k];
            idx[k] = 0;
        }
    }
    return out;
}

Tensor Tensor::slice(std::size_t index, std::size_t count) const {
    if (index >= rank()) throw std::invalid_argument("Tensor::slice: bad index");
    if (count == 0 || count > dims_[index]) throw std::invalid_argument("Tensor::slice: bad count");
    if (count == dims_[index]) return *this;

    std::size_t inner = 1, outer = 1;
    for (std::size_t k = 0; k < index; ++k) inner *= dims_[k];
    for (std::size_t k = index + 1; k < rank(); ++k) outer *= dims_[k];

    std::vector<std::size_t> nd = dims_;
    nd[index] = count;
    Tensor out;
    out.dims_ = std::move(nd);
    out.data_.resize(inner * count * outer);
    const std::size_t in_block = inner * dims_[index];
    const std::size_t out_block = inner * count;
    for (std::size_t o = 0; o < outer; ++o)
        std::copy(data_.begin() + o * in_block, data_.begin() + o * in_block + out_block,
                  out.data_.begin() + o * out_block);
    return out;
}

Tensor Tensor::pad(std::size_t index, std::size_t new_dim) const {
    if (index >= rank()) throw std::invalid_argument("Tensor::pad: bad index");
    if (new_dim < dims_[index]) throw std::invalid_argument("Tensor::pad: shrinking not allowed");
    if (new_dim == dims_[index]) return *this;

    std::size_t inner = 1, outer = 1;
    for (std::size_t k = 0; k < index; ++k) inner *= dims_[k];
    for (std::size_t k = index + 1; k < rank(); ++k) outer *= dims_[k];

    std::vector<std::size_t> nd = dims_;
    nd[index] = new_dim;
    Tensor out(nd);
    const std::size_t in_block = inner * dims_[index];
    const std::size_t out_block = inner * new_dim;
    for (std::size_t o = 0; o < outer; ++o)
        std::copy(data_.begin() + o * in_block, data_.begin() + (o + 1) * in_block,
                  out.data_.begin() + o * out_block);
    return out;
}

double Tensor::slab_norm_sq(std::size_t index, std::size_t value) const {
    if (index >= rank() || value >= dims_[index])
        throw std::invalid_argument("Tensor::slab_norm_sq: bad index");
    std::size_t inner = 1, outer = 1;
    for (std::size_t k = 0; k < index; ++k) inner *= dims_[k];
    for (std::size_t k = index + 1; k < rank(); ++k) outer *= dims_[k];
    double s = 0.0;
    const std::size_t block = inner * dims_[index];
    for (std::size_t o = 0; o < outer; ++o) {
        const cplx* p = data_.data() + o * block + value * inner;
        for (std::size_t i = 0; i < inner; ++i) s += std::norm(p[i]);
    }
    return s;
}

Tensor operator*(cplx s, const Tensor& t) {
    Tensor out = t;
    out *= s;
    return out;
}

cplx dot(const Tensor& a, const Tensor& b) {
    if (a.size() != b.size()) throw std::invalid_argument("dot: size mismatch");
    cplx s(0.0, 0.0);
    const cplx* pa = a.data();
    const cplx* pb = b.data();
    for (std::size_t i = 0; i < a.size(); ++i) s += std::conj(pa[i]) * pb[i];
    return s;
}

Tensor contract(const Tensor& a, const Tensor& b,
                const std::vector<std::pair<std::size_t, std::size_t>>& pairs) {
    const std::size_t ra = a.rank(), rb = b.rank();
    std::vector<char> ca(ra, 0), cb(rb, 0);
    std::size_t contracted = 1;
    for (const auto& [ia, ib] : pairs) {
        if (ia >= ra || ib >= rb) throw std::invalid_argument("contract: index out of range");
        if (ca[ia] || cb[ib]) throw std::invalid_argument("contract: repeated index in pairs");
        if (a.dim(ia) != b.dim(ib))
            throw std::invalid_argument("contract: dimension mismatch on pair (" +
                                        std::to_string(ia) + "," + std::to_string(ib) + ")");
        ca[ia] = 1;
        cb[ib] = 1;
        contracted *= a.dim(ia);
    }

    std::vector<std::size_t> free_a, free_b;
    for (std::size_t k = 0; k < ra; ++k)
        if (!ca[k]) free_a.push_back(k);
    for (std::size_t k = 0; k < rb; ++k)
        if (!cb[k]) free_b.push_back(k);

    std::vector<std::size_t> perm_a = free_a;
    for (const auto& p : pairs) perm_a.push_back(p.first);
    std::vector<std::size_t> perm_b;
    for (const auto& p : pairs) perm_b.push_back(p.second);
    for (std::size_t k : free_b) perm_b.push_back(k);

    Tensor a2 = a.permute(perm_a);
    Tensor b2 = b.permute(perm_b);

    std::size_t m = 1, n = 1;
    std::vector<std::size_t> out_dims;
    for (std::size_t k : free_a) {
        m *= a.dim(k);
        out_dims.push_back(a.dim(k));
    }
    for (std::size_t k : free_b) {
        n *= b.dim(k);
        out_dims.push_back(b.dim(k));
    }

    Tensor out(out_dims);  // rank 0 (single element) when everything is contracted

    ECMap ma(a2.data(), static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(contracted));
    ECMap mb(b2.data(), static_cast<Eigen::Index>(contracted), static_cast<Eigen::Index>(n));
    EMap mo(out.data(), static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(n));
    mo.noalias() = ma * mb;
    return out;
}

namespace {

void check_matrix(const Tensor& m, const char* who) {
    if (m.rank() != 2) throw std::invalid_argument(std::string(who) + ": input must be a matrix");
}

// Phase-normalize so that the diagonal of R is real non-negative.
void fix_phases(EMatrix& q, EMatrix& r) {
    const Eigen::Index k = std::min(r.rows(), r.cols());
    for (Eigen::Index j = 0; j < k; ++j) {
        const cplx d = r(j, j);
        const double ad = std::abs(d);
        if (ad > 0.0) {
            const cplx ph = d / ad;
            q.col(j) *= ph;
            r.row(j) *= std::conj(ph);
            r(j, j) = ad;  // kill the residual imaginary roundoff
        }
    }
}

Tensor to_tensor(const EMatrix& m) {
    Tensor t(std::vector<std::size_t>{static_cast<std::size_t>(m.rows()),
                                      static_cast<std::size_t>(m.cols())});
    EMap(t.data(), m.rows(), m.cols()) = m;
    return t;
}

}  // namespace

QRPair qr_reduced(const Tensor& m) {
    check_matrix(m, "qr_reduced");
    const Eigen::Index rows = static_cast<Eigen::Index>(m.dim(0));
    const Eigen::Index cols = static_cast<Eigen::Index>(m.dim(1));
    const Eigen::Index k = std::min(rows, cols);
    ECMap a(m.data(), rows, cols);
    Eigen::HouseholderQR<EMatrix> qr(a);
    EMatrix q = qr.householderQ() * EMatrix::Identity(rows, k);
    EMatrix r = qr.matrixQR().topRows(k).template triangularView<Eigen::Upper>();
    fix_phases(q, r);
    return {to_tensor(q), to_tensor(r)};
}

QRPair qr_thin(const Tensor& m) {
    check_matrix(m, "qr_thin");
    if (m.dim(0) < m.dim(1)) throw std::invalid_argument("qr_thin: requires rows >= cols");
    return qr_reduced(m);
}

FullQR qr_full(const Tensor& m) {
    check_matrix(m, "qr_full");
    const Eigen::Index rows = static_cast<Eigen::Index>(m.dim(0));
    const Eigen::Index cols = static_cast<Eigen::Index>(m.dim(1));
    if (rows < cols) throw std::invalid_argument("qr_full: requires rows >= cols");
    ECMap a(m.data(), rows, cols);
    Eigen::HouseholderQR<EMatrix> qr(a);
    EMatrix qall = qr.householderQ() * EMatrix::Identity(rows, rows);
    EMatrix q = qall.leftCols(cols);
    EMatrix r = qr.matrixQR().topRows(cols).template triangularView<Eigen::Upper>();
    fix_phases(q, r);
    FullQR out;
    out.q = to_tensor(q);
    out.r = to_tensor(r);
    // Square input has no complement; q2 stays empty.
    if (rows > cols) out.q2 = to_tensor(EMatrix(qall.rightCols(rows - cols)));
    return out;
}

QRPair rq_reduced(const Tensor& m) {
    check_matrix(m, "rq_reduced");
    // m = r * q with orthonormal rows of q: QR-factorize the adjoint.
    const std::size_t rows = m.dim(0), cols = m.dim(1);
    Tensor mh(std::vector<std::size_t>{cols, rows});
    for (std::size_t j = 0; j < cols; ++j)
        for (std::size_t i = 0; i < rows; ++i) mh.at(j, i) = std::conj(m.at(i, j));
    QRPair qr = qr_reduced(mh);
    const std::size_t k = qr.q.dim(1);
    Tensor q(std::vector<std::size_t>{k, cols});
    Tensor r(std::vector<std::size_t>{rows, k});
    for (std::size_t i = 0; i < k; ++i)
        for (std::size_t j = 0; j < cols; ++j) q.at(i, j) = std::conj(qr.q.at(j, i));
    for (std::size_t i = 0; i < rows; ++i)
        for (std::size_t j = 0; j < k; ++j) r.at(i, j) = std::conj(qr.r.at(j, i));
    return {std::move(q), std::move(r)};
}

}  // namespace atdvp
