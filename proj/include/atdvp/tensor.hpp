#pragma once

#include <complex>
#include <cstddef>
#include <initializer_list>
#include <utility>
#include <vector>

namespace atdvp {

using cplx = std::complex<double>;

/// Dense complex tensor with column-major storage: the first index is the
/// fastest-running one, so a rank-2 tensor maps directly onto a column-major
/// matrix and merging/splitting adjacent indices is a pure metadata change.
class Tensor {
public:
    Tensor() = default;

    /// Zero-filled tensor. Every dimension must be >= 1.
    explicit Tensor(std::vector<std::size_t> dims);

    static Tensor from_data(std::vector<std::size_t> dims, std::vector<cplx> data);

    /// 1x1...x1 tensor holding a single value.
    static Tensor scalar(cplx value, std::size_t rank = 1);

    std::size_t rank() const { return dims_.size(); }
    std::size_t dim(std::size_t k) const { return dims_[k]; }
    const std::vector<std::size_t>& dims() const { return dims_; }
    std::size_t size() const { return data_.size(); }
    bool empty() const { return data_.empty(); }

    cplx* data() { return data_.data(); }
    const cplx* data() const { return data_.data(); }

    cplx& operator[](std::size_t linear) { return data_[linear]; }
    const cplx& operator[](std::size_t linear) const { return data_[linear]; }

    template <typename... Ix>
    cplx& at(Ix... ix) {
        const std::size_t idx[] = {static_cast<std::size_t>(ix)...};
        return data_[offset(idx, sizeof...(Ix))];
    }
    template <typename... Ix>
    const cplx& at(Ix... ix) const {
        const std::size_t idx[] = {static_cast<std::size_t>(ix)...};
        return data_[offset(idx, sizeof...(Ix))];
    }

    /// Value of a tensor with a single element, independent of its rank.
    cplx scalar_value() const;

    Tensor& operator*=(cplx s);
    Tensor& operator+=(const Tensor& other);
    Tensor& operator-=(const Tensor& other);

    /// Frobenius norm.
    double norm() const;
    double norm_sq() const;

    Tensor conjugate() const;

    /// Same data, new shape; products of dimensions must agree.
    Tensor reshape(std::vector<std::size_t> new_dims) const&;
    Tensor reshape(std::vector<std::size_t> new_dims) &&;

    /// Result index k is input index perm[k].
    Tensor permute(const std::vector<std::size_t>& perm) const;

    /// Keep the leading `count` values of one index.
    Tensor slice(std::size_t index, std::size_t count) const;

    /// Zero-pad one index at its end up to new_dim.
    Tensor pad(std::size_t index, std::size_t new_dim) const;

    /// Sum of |x|^2 over the slab where `index` takes value `value`.
    double slab_norm_sq(std::size_t index, std::size_t value) const;

private:
    std::size_t offset(const std::size_t* idx, std::size_t n) const;

    std::vector<std::size_t> dims_;
    std::vector<cplx> data_;
};

Tensor operator*(cplx s, const Tensor& t);

/// <a|b> = sum conj(a_i) b_i over flattened data; shapes must match in size.
cplx dot(const Tensor& a, const Tensor& b);

/// General pairwise contraction. `pairs` lists (index of a, index of b) to sum
/// over; result carries the unpaired indices of a followed by those of b.
/// Implemented as permute + matrix product.
Tensor contract(const Tensor& a, const Tensor& b,
                const std::vector<std::pair<std::size_t, std::size_t>>& pairs);

struct QRPair {
    Tensor q;  // m x k, orthonormal columns
    Tensor r;  // k x n, upper triangular with real non-negative diagonal
};

struct FullQR {
    Tensor q;   // m x n
    Tensor r;   // n x n
    Tensor q2;  // m x (m-n), orthonormal complement of range(q)
};

/// Thin (reduced) QR of an m x n matrix with m >= n. Householder based, no
/// pivoting: q has exactly orthonormal columns even for rank-deficient input.
/// The diagonal of r is fixed real non-negative for determinism.
QRPair qr_thin(const Tensor& m);

/// Thin QR plus the orthonormal complement q2 (m x (m-n)); [q | q2] is unitary.
FullQR qr_full(const Tensor& m);

/// QR for any shape: q is m x k, r is k x n with k = min(m, n). Used by gauge
/// moves that may shrink an oversized bond.
QRPair qr_reduced(const Tensor& m);

/// A = r * q with q (k x n) having orthonormal rows, r (m x k) lower
/// triangular, k = min(m, n). Mirror of qr_reduced via the adjoint.
QRPair rq_reduced(const Tensor& m);

}  // namespace atdvp
