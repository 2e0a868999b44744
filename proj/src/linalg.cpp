#include "mccpd/linalg.hpp"

#include <cmath>
#include <cstdio>
#include <utility>

namespace mccpd {

namespace {

std::string singular_message(std::size_t column, double pivot) {
    char buf[128];
    std::snprintf(buf, sizeof(buf), "singular matrix: pivot %.3g in column %zu below tolerance",
                  pivot, column + 1);
    return buf;
}

}  // namespace

SingularMatrixError::SingularMatrixError(std::size_t column, double pivot)
    : std::runtime_error(singular_message(column, pivot)), column_(column), pivot_(pivot) {}

SmallMatrix SmallMatrix::identity(std::size_t n) {
    SmallMatrix m(n);
    for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
    return m;
}

double SmallMatrix::max_abs() const {
    double best = 0.0;
    for (double v : data_) best = std::max(best, std::abs(v));
    return best;
}

SmallMatrix gauss_jordan_invert(const SmallMatrix& m, double pivot_tol) {
    if (!(pivot_tol > 0.0)) throw std::invalid_argument("pivot_tol must be positive");
    const std::size_t n = m.size();
    if (n == 0) throw std::invalid_argument("cannot invert an empty matrix");

    SmallMatrix a = m;
    SmallMatrix inv = SmallMatrix::identity(n);

    for (std::size_t col = 0; col < n; ++col) {
        std::size_t pivot_row = col;
        double best = std::abs(a(col, col));
        for (std::size_t r = col + 1; r < n; ++r) {
            if (std::abs(a(r, col)) > best) {
                best = std::abs(a(r, col));
                pivot_row = r;
            }
        }
        if (!(best >= pivot_tol)) throw SingularMatrixError(col, best);

        if (pivot_row != col) {
            for (std::size_t j = 0; j < n; ++j) {
                std::swap(a(col, j), a(pivot_row, j));
                std::swap(inv(col, j), inv(pivot_row, j));
            }
        }

        const double scale = 1.0 / a(col, col);
        for (std::size_t j = 0; j < n; ++j) {
            a(col, j) *= scale;
            inv(col, j) *= scale;
        }
        a(col, col) = 1.0;

        for (std::size_t r = 0; r < n; ++r) {
            if (r == col) continue;
            const double factor = a(r, col);
            if (factor == 0.0) continue;
            for (std::size_t j = 0; j < n; ++j) {
                a(r, j) -= factor * a(col, j);
                inv(r, j) -= factor * inv(col, j);
            }
            a(r, col) = 0.0;
        }
    }
    return inv;
}

SmallMatrix multiply(const SmallMatrix& a, const SmallMatrix& b) {
    if (a.size() != b.size()) throw std::invalid_argument("matrix size mismatch");
    const std::size_t n = a.size();
    SmallMatrix c(n);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t k = 0; k < n; ++k) {
            const double aik = a(i, k);
            for (std::size_t j = 0; j < n; ++j) c(i, j) += aik * b(k, j);
        }
    }
    return c;
}

std::vector<double> multiply(const SmallMatrix& a, std::span<const double> x) {
    if (a.size() != x.size()) throw std::invalid_argument("matrix/vector size mismatch");
    std::vector<double> y(a.size(), 0.0);
    for (std::size_t i = 0; i < a.size(); ++i) {
        double sum = 0.0;
        for (std::size_t j = 0; j < a.size(); ++j) sum += a(i, j) * x[j];
        y[i] = sum;
    }
    return y;
}

bool cholesky(const SmallMatrix& m, SmallMatrix* lower) {
    const std::size_t n = m.size();
    SmallMatrix l(n);
    for (std::size_t j = 0; j < n; ++j) {
        double diag = m(j, j);
        for (std::size_t k = 0; k < j; ++k) diag -= l(j, k) * l(j, k);
        if (!(diag > 0.0)) return false;
        l(j, j) = std::sqrt(diag);
        for (std::size_t i = j + 1; i < n; ++i) {
            double v = m(i, j);
            for (std::size_t k = 0; k < j; ++k) v -= l(i, k) * l(j, k);
            l(i, j) = v / l(j, j);
        }
    }
    if (lower) *lower = std::move(l);
    return true;
}

}  // namespace mccpd
