// qmath.hpp
// Dense complex linear algebra for small dimensions (<= 8): tensor products,
// cyclic-Jacobi Hermitian eigendecomposition, unitarity checks, conjugation.

#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <initializer_list>
#include <numeric>
#include <string>
#include <utility>
#include <vector>

#include "belllab/errors.hpp"

namespace belllab::qmath {

using cplx = std::complex<double>;

inline constexpr double kDefaultTol = 1e-9;

inline bool is_finite(cplx z) {
    return std::isfinite(z.real()) && std::isfinite(z.imag());
}

class ComplexVector {
public:
    ComplexVector() = default;

    explicit ComplexVector(std::size_t dim) : entries_(dim, cplx{0.0, 0.0}) {}

    explicit ComplexVector(std::vector<cplx> entries) : entries_(std::move(entries)) {
        for (const cplx& z : entries_) {
            if (!is_finite(z)) throw std::invalid_argument("ComplexVector: non-finite entry");
        }
    }

    ComplexVector(std::initializer_list<cplx> entries)
        : ComplexVector(std::vector<cplx>(entries)) {}

    std::size_t dim() const { return entries_.size(); }

    cplx& operator[](std::size_t i) { return entries_[i]; }
    const cplx& operator[](std::size_t i) const { return entries_[i]; }

    const std::vector<cplx>& entries() const { return entries_; }

    double norm() const {
        double s = 0.0;
        for (const cplx& z : entries_) s += std::norm(z);
        return std::sqrt(s);
    }

    ComplexVector operator-(const ComplexVector& other) const {
        require_same_dim(other);
        ComplexVector out(dim());
        for (std::size_t i = 0; i < dim(); ++i) out[i] = entries_[i] - other[i];
        return out;
    }

    ComplexVector operator+(const ComplexVector& other) const {
        require_same_dim(other);
        ComplexVector out(dim());
        for (std::size_t i = 0; i < dim(); ++i) out[i] = entries_[i] + other[i];
        return out;
    }

    ComplexVector operator*(cplx s) const {
        ComplexVector out(dim());
        for (std::size_t i = 0; i < dim(); ++i) out[i] = entries_[i] * s;
        return out;
    }

    // <this|other>, conjugate-linear in *this.
    cplx inner(const ComplexVector& other) const {
        require_same_dim(other);
        cplx s{0.0, 0.0};
        for (std::size_t i = 0; i < dim(); ++i) s += std::conj(entries_[i]) * other[i];
        return s;
    }

private:
    void require_same_dim(const ComplexVector& other) const {
        if (dim() != other.dim()) throw dimension_mismatch("ComplexVector: dimension mismatch");
    }

    std::vector<cplx> entries_;
};

class ComplexMatrix {
public:
    ComplexMatrix() = default;

    ComplexMatrix(std::size_t rows, std::size_t cols)
        : rows_(rows), cols_(cols), a_(rows * cols, cplx{0.0, 0.0}) {}

    ComplexMatrix(std::size_t rows, std::size_t cols, std::vector<cplx> entries)
        : rows_(rows), cols_(cols), a_(std::move(entries)) {
        if (a_.size() != rows_ * cols_)
            throw std::invalid_argument("ComplexMatrix: entry count does not match shape");
        for (const cplx& z : a_) {
            if (!is_finite(z)) throw std::invalid_argument("ComplexMatrix: non-finite entry");
        }
    }

    ComplexMatrix(std::initializer_list<std::initializer_list<cplx>> rows) {
        rows_ = rows.size();
        cols_ = rows_ == 0 ? 0 : rows.begin()->size();
        a_.reserve(rows_ * cols_);
        for (const auto& r : rows) {
            if (r.size() != cols_)
                throw std::invalid_argument("ComplexMatrix: ragged initializer");
            for (const cplx& z : r) {
                if (!is_finite(z)) throw std::invalid_argument("ComplexMatrix: non-finite entry");
                a_.push_back(z);
            }
        }
    }

    static ComplexMatrix identity(std::size_t n) {
        ComplexMatrix m(n, n);
        for (std::size_t i = 0; i < n; ++i) m(i, i) = cplx{1.0, 0.0};
        return m;
    }

    static ComplexMatrix diagonal(std::initializer_list<double> values) {
        ComplexMatrix m(values.size(), values.size());
        std::size_t i = 0;
        for (double v : values) {
            m(i, i) = cplx{v, 0.0};
            ++i;
        }
        return m;
    }

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }
    bool is_square() const { return rows_ == cols_; }

    cplx& operator()(std::size_t i, std::size_t j) { return a_[i * cols_ + j]; }
    const cplx& operator()(std::size_t i, std::size_t j) const { return a_[i * cols_ + j]; }

    ComplexMatrix adjoint() const {
        ComplexMatrix out(cols_, rows_);
        for (std::size_t i = 0; i < rows_; ++i)
            for (std::size_t j = 0; j < cols_; ++j) out(j, i) = std::conj((*this)(i, j));
        return out;
    }

    cplx trace() const {
        if (!is_square()) throw dimension_mismatch("trace: matrix not square");
        cplx t{0.0, 0.0};
        for (std::size_t i = 0; i < rows_; ++i) t += (*this)(i, i);
        return t;
    }

    // max elementwise magnitude (Chebyshev norm)
    double max_abs() const {
        double m = 0.0;
        for (const cplx& z : a_) m = std::max(m, std::abs(z));
        return m;
    }

    double frobenius() const {
        double s = 0.0;
        for (const cplx& z : a_) s += std::norm(z);
        return std::sqrt(s);
    }

    double hermiticity_defect() const {
        if (!is_square()) throw dimension_mismatch("hermiticity_defect: matrix not square");
        double m = 0.0;
        for (std::size_t i = 0; i < rows_; ++i)
            for (std::size_t j = 0; j < cols_; ++j)
                m = std::max(m, std::abs((*this)(i, j) - std::conj((*this)(j, i))));
        return m;
    }

    bool is_hermitian(double tol = kDefaultTol) const {
        return is_square() && hermiticity_defect() <= tol;
    }

    ComplexMatrix operator+(const ComplexMatrix& other) const {
        require_same_shape(other);
        ComplexMatrix out(rows_, cols_);
        for (std::size_t k = 0; k < a_.size(); ++k) out.a_[k] = a_[k] + other.a_[k];
        return out;
    }

    ComplexMatrix operator-(const ComplexMatrix& other) const {
        require_same_shape(other);
        ComplexMatrix out(rows_, cols_);
        for (std::size_t k = 0; k < a_.size(); ++k) out.a_[k] = a_[k] - other.a_[k];
        return out;
    }

    ComplexMatrix operator*(const ComplexMatrix& other) const {
        if (cols_ != other.rows_) throw dimension_mismatch("matrix product: inner dimensions differ");
        ComplexMatrix out(rows_, other.cols_);
        for (std::size_t i = 0; i < rows_; ++i) {
            for (std::size_t k = 0; k < cols_; ++k) {
                const cplx aik = (*this)(i, k);
                if (aik == cplx{0.0, 0.0}) continue;
                for (std::size_t j = 0; j < other.cols_; ++j) out(i, j) += aik * other(k, j);
            }
        }
        return out;
    }

    ComplexVector operator*(const ComplexVector& v) const {
        if (cols_ != v.dim()) throw dimension_mismatch("matrix-vector product: dimensions differ");
        ComplexVector out(rows_);
        for (std::size_t i = 0; i < rows_; ++i) {
            cplx s{0.0, 0.0};
            for (std::size_t j = 0; j < cols_; ++j) s += (*this)(i, j) * v[j];
            out[i] = s;
        }
        return out;
    }

    friend ComplexMatrix operator*(cplx s, const ComplexMatrix& m) {
        ComplexMatrix out(m.rows_, m.cols_);
        for (std::size_t k = 0; k < m.a_.size(); ++k) out.a_[k] = s * m.a_[k];
        return out;
    }

    ComplexMatrix operator*(cplx s) const { return s * (*this); }

private:
    void require_same_shape(const ComplexMatrix& other) const {
        if (rows_ != other.rows_ || cols_ != other.cols_)
            throw dimension_mismatch("matrix sum: shapes differ");
    }

    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<cplx> a_;
};

// Kronecker product, A's index major.
inline ComplexMatrix tensor_product(const ComplexMatrix& a, const ComplexMatrix& b) {
    ComplexMatrix out(a.rows() * b.rows(), a.cols() * b.cols());
    for (std::size_t i = 0; i < a.rows(); ++i)
        for (std::size_t j = 0; j < a.cols(); ++j) {
            const cplx aij = a(i, j);
            for (std::size_t k = 0; k < b.rows(); ++k)
                for (std::size_t l = 0; l < b.cols(); ++l)
                    out(i * b.rows() + k, j * b.cols() + l) = aij * b(k, l);
        }
    return out;
}

struct Spectrum {
    std::vector<double> eigenvalues;          // ascending
    std::vector<ComplexVector> eigenvectors;  // same order, orthonormal

    ComplexMatrix eigenvector_matrix() const {
        const std::size_t n = eigenvalues.size();
        ComplexMatrix v(n, n);
        for (std::size_t j = 0; j < n; ++j)
            for (std::size_t i = 0; i < n; ++i) v(i, j) = eigenvectors[j][i];
        return v;
    }
};

namespace detail {

inline double offdiag_norm(const ComplexMatrix& a) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.rows(); ++i)
        for (std::size_t j = i + 1; j < a.cols(); ++j) s += 2.0 * std::norm(a(i, j));
    return std::sqrt(s);
}

// One complex Jacobi rotation zeroing a(p,q); accumulates the rotation into v.
inline void jacobi_rotate(ComplexMatrix& a, ComplexMatrix& v, std::size_t p, std::size_t q) {
    const cplx apq = a(p, q);
    const double absb = std::abs(apq);
    if (absb == 0.0) return;
    const cplx phase = apq / absb;

    const double app = a(p, p).real();
    const double aqq = a(q, q).real();
    const double tau = (aqq - app) / (2.0 * absb);
    const double t = (tau >= 0.0 ? 1.0 : -1.0) / (std::abs(tau) + std::sqrt(1.0 + tau * tau));
    const double c = 1.0 / std::sqrt(1.0 + t * t);
    const double s = t * c;

    const std::size_t n = a.rows();
    for (std::size_t k = 0; k < n; ++k) {
        if (k == p || k == q) continue;
        const cplx akp = a(k, p);
        const cplx akq = a(k, q);
        a(k, p) = akp * (phase * c) - akq * s;
        a(k, q) = akp * (phase * s) + akq * c;
        a(p, k) = std::conj(a(k, p));
        a(q, k) = std::conj(a(k, q));
    }
    a(p, p) = cplx{c * c * app - 2.0 * c * s * absb + s * s * aqq, 0.0};
    a(q, q) = cplx{s * s * app + 2.0 * c * s * absb + c * c * aqq, 0.0};
    a(p, q) = cplx{0.0, 0.0};
    a(q, p) = cplx{0.0, 0.0};

    for (std::size_t k = 0; k < n; ++k) {
        const cplx vkp = v(k, p);
        const cplx vkq = v(k, q);
        v(k, p) = vkp * (phase * c) - vkq * s;
        v(k, q) = vkp * (phase * s) + vkq * c;
    }
}

// Deterministic orthonormalization in index order; input is already near-orthonormal.
inline void modified_gram_schmidt(std::vector<ComplexVector>& vecs) {
    for (std::size_t i = 0; i < vecs.size(); ++i) {
        for (std::size_t j = 0; j < i; ++j) {
            const cplx proj = vecs[j].inner(vecs[i]);
            for (std::size_t k = 0; k < vecs[i].dim(); ++k) vecs[i][k] -= proj * vecs[j][k];
        }
        const double nrm = vecs[i].norm();
        if (nrm > 0.0)
            for (std::size_t k = 0; k < vecs[i].dim(); ++k) vecs[i][k] /= nrm;
    }
}

// Phase convention: the largest-magnitude component is made real positive.
inline void fix_phase(ComplexVector& v) {
    std::size_t imax = 0;
    double best = 0.0;
    for (std::size_t k = 0; k < v.dim(); ++k) {
        const double m = std::abs(v[k]);
        if (m > best) {
            best = m;
            imax = k;
        }
    }
    if (best == 0.0) return;
    const cplx rot = std::conj(v[imax]) / best;
    for (std::size_t k = 0; k < v.dim(); ++k) v[k] *= rot;
}

}  // namespace detail

// Full Hermitian eigendecomposition by cyclic Jacobi sweeps (dimension <= 8).
// Eigenvalues ascending; eigenvectors orthonormal with a deterministic phase.
inline Spectrum hermitian_eigen(const ComplexMatrix& m, double tol = kDefaultTol) {
    if (!m.is_square()) throw dimension_mismatch("hermitian_eigen: matrix not square");
    const std::size_t n = m.rows();
    if (n == 0 || n > 8)
        throw std::invalid_argument("hermitian_eigen: supported dimensions are 1..8");
    if (m.hermiticity_defect() > tol)
        throw not_hermitian("hermitian_eigen: matrix is not Hermitian within tolerance");

    // Work on the Hermitized average so tol-level asymmetry cannot leak through.
    ComplexMatrix a = (m + m.adjoint()) * cplx{0.5, 0.0};
    ComplexMatrix v = ComplexMatrix::identity(n);

    constexpr int kMaxSweeps = 100;
    constexpr double kOffDiagTol = 1e-12;
    const double stop = kOffDiagTol * std::max(1.0, a.frobenius());

    bool converged = false;
    for (int sweep = 0; sweep < kMaxSweeps; ++sweep) {
        if (detail::offdiag_norm(a) <= stop) {
            converged = true;
            break;
        }
        for (std::size_t p = 0; p + 1 < n; ++p)
            for (std::size_t q = p + 1; q < n; ++q) detail::jacobi_rotate(a, v, p, q);
    }
    if (!converged && detail::offdiag_norm(a) > stop)
        throw no_convergence("hermitian_eigen: sweep cap exceeded");

    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&a](std::size_t i, std::size_t j) {
        return a(i, i).real() < a(j, j).real();
    });

    Spectrum out;
    out.eigenvalues.reserve(n);
    out.eigenvectors.reserve(n);
    for (std::size_t idx : order) {
        out.eigenvalues.push_back(a(idx, idx).real());
        ComplexVector col(n);
        for (std::size_t i = 0; i < n; ++i) col[i] = v(i, idx);
        out.eigenvectors.push_back(std::move(col));
    }
    detail::modified_gram_schmidt(out.eigenvectors);
    for (ComplexVector& vec : out.eigenvectors) detail::fix_phase(vec);
    return out;
}

inline bool is_unitary(const ComplexMatrix& m, double tol = kDefaultTol) {
    if (!m.is_square()) throw dimension_mismatch("is_unitary: matrix not square");
    const ComplexMatrix g = m.adjoint() * m - ComplexMatrix::identity(m.rows());
    return g.max_abs() <= tol;
}

// W^dagger A W for unitary W.
inline ComplexMatrix unitary_conjugate(const ComplexMatrix& a, const ComplexMatrix& w,
                                       double tol = kDefaultTol) {
    if (!a.is_square() || !w.is_square() || a.rows() != w.rows())
        throw dimension_mismatch("unitary_conjugate: incompatible dimensions");
    if (!is_unitary(w, tol)) throw not_unitary("unitary_conjugate: W is not unitary");
    return w.adjoint() * a * w;
}

}  // namespace belllab::qmath
