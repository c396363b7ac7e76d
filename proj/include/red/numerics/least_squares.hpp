#pragma once

#include <algorithm>
#include <cmath>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include "red/error.hpp"

namespace red::numerics {

/// Dense N x K design matrix, row-major, with per-column max-abs scales used
/// to condition the factorization.
class DesignMatrix {
public:
    DesignMatrix(std::size_t rows, std::size_t cols, std::vector<double> entries)
        : rows_(rows), cols_(cols), entries_(std::move(entries)), scales_(cols, 1.0) {
        if (cols_ == 0) throw InvalidArgument("design matrix needs at least one column");
        if (rows_ < cols_)
            throw InvalidArgument("underdetermined design: " + std::to_string(rows_) + " rows < " +
                                  std::to_string(cols_) + " columns");
        if (entries_.size() != rows_ * cols_) throw InvalidArgument("design entry count does not match rows x cols");
        for (double v : entries_)
            if (!std::isfinite(v)) throw InvalidArgument("design matrix has a non-finite entry");
        for (std::size_t j = 0; j < cols_; ++j) {
            double m = 0.0;
            for (std::size_t i = 0; i < rows_; ++i) m = std::max(m, std::abs((*this)(i, j)));
            // An all-zero column keeps scale 1 and is caught as rank deficiency.
            scales_[j] = m > 0.0 ? m : 1.0;
        }
    }

    std::size_t rows() const noexcept { return rows_; }
    std::size_t cols() const noexcept { return cols_; }
    double operator()(std::size_t i, std::size_t j) const { return entries_[i * cols_ + j]; }
    std::span<const double> entries() const noexcept { return entries_; }
    std::span<const double> column_scales() const noexcept { return scales_; }

    std::vector<double> multiply(std::span<const double> x) const {
        std::vector<double> out(rows_, 0.0);
        for (std::size_t i = 0; i < rows_; ++i)
            for (std::size_t j = 0; j < cols_; ++j) out[i] += (*this)(i, j) * x[j];
        return out;
    }

private:
    std::size_t rows_;
    std::size_t cols_;
    std::vector<double> entries_;
    std::vector<double> scales_;
};

inline constexpr double kMaxConditionEstimate = 1e12;

/// Minimizes ||design * p - targets||_2 with a column-pivoted Householder QR
/// of the column-scaled design. Throws RankDeficient when the estimated
/// condition number (|R_00| / |R_kk| after pivoting) exceeds 1e12.
inline std::vector<double> solve_least_squares(const DesignMatrix& design, std::span<const double> targets) {
    const std::size_t n = design.rows();
    const std::size_t k = design.cols();
    if (targets.size() != n) throw InvalidArgument("target count does not match design rows");
    for (double t : targets)
        if (!std::isfinite(t)) throw InvalidArgument("non-finite least-squares target");

    // Column-major working copy of the scaled design.
    std::vector<std::vector<double>> a(k, std::vector<double>(n));
    const auto scales = design.column_scales();
    for (std::size_t j = 0; j < k; ++j)
        for (std::size_t i = 0; i < n; ++i) a[j][i] = design(i, j) / scales[j];
    std::vector<double> b(targets.begin(), targets.end());
    std::vector<std::size_t> perm(k);
    std::iota(perm.begin(), perm.end(), std::size_t{0});

    auto tail_norm2 = [&](std::size_t col, std::size_t from) {
        double s = 0.0;
        for (std::size_t i = from; i < n; ++i) s += a[col][i] * a[col][i];
        return s;
    };

    std::vector<double> diag(k, 0.0);
    for (std::size_t step = 0; step < k; ++step) {
        std::size_t best = step;
        double best_norm = tail_norm2(step, step);
        for (std::size_t j = step + 1; j < k; ++j) {
            const double nj = tail_norm2(j, step);
            if (nj > best_norm) {
                best = j;
                best_norm = nj;
            }
        }
        std::swap(a[step], a[best]);
        std::swap(perm[step], perm[best]);

        auto& v = a[step];
        const double norm = std::sqrt(best_norm);
        if (norm == 0.0) throw RankDeficient("design matrix is rank deficient (zero pivot)");
        const double alpha = v[step] > 0.0 ? -norm : norm;
        // Householder vector stored in place: v = x - alpha e1.
        v[step] -= alpha;
        double vnorm2 = 0.0;
        for (std::size_t i = step; i < n; ++i) vnorm2 += v[i] * v[i];
        auto reflect = [&](std::vector<double>& x) {
            double dot = 0.0;
            for (std::size_t i = step; i < n; ++i) dot += v[i] * x[i];
            const double f = 2.0 * dot / vnorm2;
            for (std::size_t i = step; i < n; ++i) x[i] -= f * v[i];
        };
        for (std::size_t j = step + 1; j < k; ++j) reflect(a[j]);
        reflect(b);
        diag[step] = alpha;
    }

    const double top = std::abs(diag[0]);
    for (std::size_t j = 0; j < k; ++j) {
        if (std::abs(diag[j]) * kMaxConditionEstimate < top || diag[j] == 0.0)
            throw RankDeficient("design matrix is rank deficient (condition estimate above 1e12)");
    }

    // Back substitution on R (strict upper part lives in a[j][i], i < j).
    std::vector<double> y(k, 0.0);
    for (std::size_t ii = k; ii-- > 0;) {
        double s = b[ii];
        for (std::size_t j = ii + 1; j < k; ++j) s -= a[j][ii] * y[j];
        y[ii] = s / diag[ii];
    }

    std::vector<double> coefficients(k, 0.0);
    for (std::size_t j = 0; j < k; ++j) coefficients[perm[j]] = y[j] / scales[perm[j]];
    return coefficients;
}

}  // namespace red::numerics
