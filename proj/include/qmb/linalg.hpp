#pragma once

// Small dense matrices over either coefficient ring, plus Cholesky-based numerics.

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "qmb/coeff.hpp"

namespace qmb {

template <class T>
class Matrix {
public:
    Matrix() = default;
    Matrix(int rows, int cols) : rows_(rows), cols_(cols), data_(static_cast<std::size_t>(rows) * cols, T(0)) {}

    static Matrix identity(int n) {
        Matrix m(n, n);
        for (int i = 0; i < n; ++i) m(i, i) = T(1);
        return m;
    }

    int rows() const { return rows_; }
    int cols() const { return cols_; }
    T& operator()(int i, int j) { return data_[static_cast<std::size_t>(i) * cols_ + j]; }
    const T& operator()(int i, int j) const { return data_[static_cast<std::size_t>(i) * cols_ + j]; }

    Matrix transpose() const {
        Matrix t(cols_, rows_);
        for (int i = 0; i < rows_; ++i)
            for (int j = 0; j < cols_; ++j) t(j, i) = (*this)(i, j);
        return t;
    }

    friend Matrix operator*(const Matrix& a, const Matrix& b) {
        if (a.cols_ != b.rows_) throw std::invalid_argument("matrix shape mismatch in product");
        Matrix c(a.rows_, b.cols_);
        for (int i = 0; i < a.rows_; ++i)
            for (int k = 0; k < a.cols_; ++k) {
                const T& aik = a(i, k);
                if (coeff_traits<T>::is_zero(aik)) continue;
                for (int j = 0; j < b.cols_; ++j) c(i, j) += aik * b(k, j);
            }
        return c;
    }
    friend Matrix operator-(const Matrix& a, const Matrix& b) {
        if (a.rows_ != b.rows_ || a.cols_ != b.cols_) throw std::invalid_argument("matrix shape mismatch");
        Matrix c = a;
        for (std::size_t i = 0; i < c.data_.size(); ++i) c.data_[i] -= b.data_[i];
        return c;
    }
    friend Matrix operator*(const T& s, const Matrix& a) {
        Matrix c = a;
        for (auto& x : c.data_) x = s * x;
        return c;
    }
    friend bool operator==(const Matrix& a, const Matrix& b) {
        return a.rows_ == b.rows_ && a.cols_ == b.cols_ && a.data_ == b.data_;
    }

    template <class F>
    auto map(F&& f) const {
        using D = std::decay_t<decltype(f(std::declval<const T&>()))>;
        Matrix<D> r(rows_, cols_);
        for (int i = 0; i < rows_; ++i)
            for (int j = 0; j < cols_; ++j) r(i, j) = f((*this)(i, j));
        return r;
    }

private:
    int rows_ = 0;
    int cols_ = 0;
    std::vector<T> data_;
};

/// Lower-triangular L with A = L L^T, or nullopt when A is not positive definite.
inline std::optional<Matrix<Real>> cholesky(const Matrix<Real>& a) {
    const int n = a.rows();
    if (a.cols() != n) throw std::invalid_argument("cholesky needs a square matrix");
    Matrix<Real> l(n, n);
    for (int j = 0; j < n; ++j) {
        Real d = a(j, j);
        for (int k = 0; k < j; ++k) d -= l(j, k) * l(j, k);
        if (!(d > 0)) return std::nullopt;
        Real ljj = sqrt(d);
        l(j, j) = ljj;
        for (int i = j + 1; i < n; ++i) {
            Real s = a(i, j);
            for (int k = 0; k < j; ++k) s -= l(i, k) * l(j, k);
            l(i, j) = s / ljj;
        }
    }
    return l;
}

/// Solves L L^T x = b given the Cholesky factor L.
inline std::vector<Real> cholesky_solve(const Matrix<Real>& l, std::vector<Real> b) {
    const int n = l.rows();
    for (int i = 0; i < n; ++i) {
        for (int k = 0; k < i; ++k) b[static_cast<std::size_t>(i)] -= l(i, k) * b[static_cast<std::size_t>(k)];
        b[static_cast<std::size_t>(i)] /= l(i, i);
    }
    for (int i = n - 1; i >= 0; --i) {
        for (int k = i + 1; k < n; ++k) b[static_cast<std::size_t>(i)] -= l(k, i) * b[static_cast<std::size_t>(k)];
        b[static_cast<std::size_t>(i)] /= l(i, i);
    }
    return b;
}

/// X = L^{-1} B for lower-triangular L.
inline Matrix<Real> lower_solve(const Matrix<Real>& l, const Matrix<Real>& b) {
    Matrix<Real> x = b;
    for (int c = 0; c < b.cols(); ++c)
        for (int i = 0; i < l.rows(); ++i) {
            Real s = x(i, c);
            for (int k = 0; k < i; ++k) s -= l(i, k) * x(k, c);
            x(i, c) = s / l(i, i);
        }
    return x;
}

/// Largest eigenvalue of a symmetric positive semidefinite matrix, bracketed by bisection
/// on the positive definiteness of t I - A. Returns the upper end of the final bracket.
inline Real psd_max_eigenvalue_upper(const Matrix<Real>& a, const Real& rel_tol) {
    const int n = a.rows();
    if (n == 0) return Real(0);
    Real hi = 0;
    for (int i = 0; i < n; ++i) {
        Real row = 0;
        for (int j = 0; j < n; ++j) row += abs(a(i, j));
        if (row > hi) hi = row;
    }
    hi = hi * Real("1.000001") + Real("1e-30");
    Real lo = 0;
    auto pd_shift = [&](const Real& t) {
        Matrix<Real> s = a;
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) s(i, j) = -s(i, j);
        for (int i = 0; i < n; ++i) s(i, i) += t;
        return cholesky(s).has_value();
    };
    while (hi - lo > rel_tol * hi) {
        Real mid = (lo + hi) / 2;
        if (pd_shift(mid))
            hi = mid;
        else
            lo = mid;
    }
    return hi;
}

}  // namespace qmb
