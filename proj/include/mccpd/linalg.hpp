#pragma once

#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace mccpd {

inline constexpr double kDefaultPivotTol = 1e-12;

/// Dense n x n matrix, row-major.
class SmallMatrix {
public:
    SmallMatrix() = default;
    explicit SmallMatrix(std::size_t n, double fill = 0.0) : n_(n), data_(n * n, fill) {}

    static SmallMatrix identity(std::size_t n);

    [[nodiscard]] std::size_t size() const { return n_; }
    [[nodiscard]] double& operator()(std::size_t i, std::size_t j) { return data_[i * n_ + j]; }
    [[nodiscard]] double operator()(std::size_t i, std::size_t j) const { return data_[i * n_ + j]; }
    [[nodiscard]] std::span<double> row(std::size_t i) { return {data_.data() + i * n_, n_}; }
    [[nodiscard]] std::span<const double> row(std::size_t i) const {
        return {data_.data() + i * n_, n_};
    }
    [[nodiscard]] std::span<const double> data() const { return data_; }

    /// Largest absolute entry.
    [[nodiscard]] double max_abs() const;

    friend bool operator==(const SmallMatrix&, const SmallMatrix&) = default;

private:
    std::size_t n_ = 0;
    std::vector<double> data_;
};

/// Raised when elimination meets a pivot below the tolerance.
class SingularMatrixError : public std::runtime_error {
public:
    SingularMatrixError(std::size_t column, double pivot);
    /// 0-based column at which elimination failed.
    [[nodiscard]] std::size_t column() const { return column_; }
    [[nodiscard]] double pivot() const { return pivot_; }

private:
    std::size_t column_;
    double pivot_;
};

/// Gauss-Jordan inversion with partial (row) pivoting. Throws
/// SingularMatrixError when the largest available pivot in a column has
/// absolute value below pivot_tol.
[[nodiscard]] SmallMatrix gauss_jordan_invert(const SmallMatrix& m,
                                              double pivot_tol = kDefaultPivotTol);

[[nodiscard]] SmallMatrix multiply(const SmallMatrix& a, const SmallMatrix& b);
[[nodiscard]] std::vector<double> multiply(const SmallMatrix& a, std::span<const double> x);

/// Lower-triangular Cholesky factor; returns false if the matrix is not
/// numerically positive definite. Used as a definiteness certificate.
[[nodiscard]] bool cholesky(const SmallMatrix& m, SmallMatrix* lower = nullptr);

}  // namespace mccpd
