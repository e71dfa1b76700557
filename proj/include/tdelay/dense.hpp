#pragma once

#include <algorithm>
#include <cassert>
#include <cmath>
#include <complex>
#include <cstddef>
#include <initializer_list>
#include <span>
#include <utility>
#include <vector>

#include "error.hpp"

namespace tdelay {

using cplx = std::complex<double>;

/// Small dense row-major complex matrix. Sized for cluster blocks (a handful
/// of sites) and for test-scale Hamiltonians; not a general linear algebra
/// package.
class CMatrix {
public:
    CMatrix() = default;
    CMatrix(std::size_t rows, std::size_t cols) : rows_(rows), cols_(cols), data_(rows * cols) {}

    CMatrix(std::initializer_list<std::initializer_list<cplx>> rows) {
        rows_ = rows.size();
        cols_ = rows_ == 0 ? 0 : rows.begin()->size();
        data_.reserve(rows_ * cols_);
        for (const auto& r : rows) {
            if (r.size() != cols_) throw InvalidArgument("ragged matrix initializer");
            data_.insert(data_.end(), r.begin(), r.end());
        }
    }

    static CMatrix identity(std::size_t n) {
        CMatrix m(n, n);
        for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
        return m;
    }

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }
    bool square() const { return rows_ == cols_; }

    cplx& operator()(std::size_t i, std::size_t j) {
        assert(i < rows_ && j < cols_);
        return data_[i * cols_ + j];
    }
    const cplx& operator()(std::size_t i, std::size_t j) const {
        assert(i < rows_ && j < cols_);
        return data_[i * cols_ + j];
    }

    std::span<const cplx> row(std::size_t i) const { return {data_.data() + i * cols_, cols_}; }

    double max_abs() const {
        double m = 0.0;
        for (const auto& z : data_) m = std::max(m, std::abs(z));
        return m;
    }

    CMatrix operator*(const CMatrix& rhs) const {
        if (cols_ != rhs.rows_) throw InvalidArgument("matrix product shape mismatch");
        CMatrix out(rows_, rhs.cols_);
        for (std::size_t i = 0; i < rows_; ++i)
            for (std::size_t k = 0; k < cols_; ++k) {
                const cplx a = (*this)(i, k);
                for (std::size_t j = 0; j < rhs.cols_; ++j) out(i, j) += a * rhs(k, j);
            }
        return out;
    }

    std::vector<cplx> operator*(std::span<const cplx> v) const {
        if (v.size() != cols_) throw InvalidArgument("matrix-vector shape mismatch");
        std::vector<cplx> out(rows_);
        for (std::size_t i = 0; i < rows_; ++i) {
            cplx acc = 0.0;
            for (std::size_t j = 0; j < cols_; ++j) acc += (*this)(i, j) * v[j];
            out[i] = acc;
        }
        return out;
    }

    CMatrix operator-(const CMatrix& rhs) const {
        if (rows_ != rhs.rows_ || cols_ != rhs.cols_) throw InvalidArgument("matrix difference shape mismatch");
        CMatrix out = *this;
        for (std::size_t k = 0; k < data_.size(); ++k) out.data_[k] -= rhs.data_[k];
        return out;
    }

    /// Largest |a_ij - conj(a_ji)| and the (i, j) where it occurs.
    std::pair<double, std::pair<std::size_t, std::size_t>> hermitian_defect() const {
        double worst = 0.0;
        std::pair<std::size_t, std::size_t> where{0, 0};
        for (std::size_t i = 0; i < rows_; ++i)
            for (std::size_t j = i; j < cols_; ++j) {
                const double d = std::abs((*this)(i, j) - std::conj((*this)(j, i)));
                if (d > worst) {
                    worst = d;
                    where = {i, j};
                }
            }
        return {worst, where};
    }

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<cplx> data_;
};

/// LU factorization with partial pivoting of a square complex matrix.
///
/// Singular when any pivot falls below `pivot_ratio` times the largest entry
/// of the input, or when |det| underflows `det_floor`.
class LuDecomposition {
public:
    static constexpr double kPivotRatio = 1e-14;
    static constexpr double kDetFloor = 1e-300;

    /// Pivots are judged against max(|a|, reference_scale); pass the size of
    /// the terms `a` was formed from when it is a difference that can cancel.
    explicit LuDecomposition(CMatrix a, double reference_scale = 0.0) : lu_(std::move(a)), perm_(lu_.rows()) {
        if (!lu_.square()) throw InvalidArgument("LU needs a square matrix");
        const std::size_t n = lu_.rows();
        for (std::size_t i = 0; i < n; ++i) perm_[i] = i;
        const double scale = std::fmax(lu_.max_abs(), reference_scale);
        det_ = 1.0;
        if (n == 0) return;
        if (scale == 0.0) {
            singular_ = true;
            det_ = 0.0;
            return;
        }
        for (std::size_t k = 0; k < n; ++k) {
            std::size_t p = k;
            double best = std::abs(lu_(k, k));
            for (std::size_t i = k + 1; i < n; ++i) {
                const double v = std::abs(lu_(i, k));
                if (v > best) {
                    best = v;
                    p = i;
                }
            }
            if (best < kPivotRatio * scale) {
                singular_ = true;
                det_ = 0.0;
                return;
            }
            if (p != k) {
                for (std::size_t j = 0; j < n; ++j) std::swap(lu_(k, j), lu_(p, j));
                std::swap(perm_[k], perm_[p]);
                det_ = -det_;
            }
            const cplx pivot = lu_(k, k);
            det_ *= pivot;
            for (std::size_t i = k + 1; i < n; ++i) {
                const cplx f = lu_(i, k) / pivot;
                lu_(i, k) = f;
                if (f == 0.0) continue;
                for (std::size_t j = k + 1; j < n; ++j) lu_(i, j) -= f * lu_(k, j);
            }
        }
        if (std::abs(det_) < kDetFloor) singular_ = true;
    }

    bool singular() const { return singular_; }
    cplx determinant() const { return det_; }

    /// Solves A x = b.
    std::vector<cplx> solve(std::span<const cplx> b) const {
        if (singular_) throw SingularResolvent("LU solve on a singular matrix");
        const std::size_t n = lu_.rows();
        if (b.size() != n) throw InvalidArgument("LU solve shape mismatch");
        std::vector<cplx> x(n);
        for (std::size_t i = 0; i < n; ++i) x[i] = b[perm_[i]];
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < i; ++j) x[i] -= lu_(i, j) * x[j];
        for (std::size_t i = n; i-- > 0;) {
            for (std::size_t j = i + 1; j < n; ++j) x[i] -= lu_(i, j) * x[j];
            x[i] /= lu_(i, i);
        }
        return x;
    }

    CMatrix inverse() const {
        const std::size_t n = lu_.rows();
        CMatrix inv(n, n);
        std::vector<cplx> e(n);
        for (std::size_t j = 0; j < n; ++j) {
            std::fill(e.begin(), e.end(), cplx{});
            e[j] = 1.0;
            const auto col = solve(e);
            for (std::size_t i = 0; i < n; ++i) inv(i, j) = col[i];
        }
        return inv;
    }

private:
    CMatrix lu_;
    std::vector<std::size_t> perm_;
    cplx det_{1.0};
    bool singular_ = false;
};

}  // namespace tdelay
