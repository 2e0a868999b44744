#include "mccpd/linalg.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <random>

using namespace mccpd;

namespace {

SmallMatrix random_spd(std::size_t n, unsigned seed) {
    std::mt19937_64 eng(seed);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    SmallMatrix b(n);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) b(i, j) = u(eng);
    }
    SmallMatrix a(n);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            for (std::size_t k = 0; k < n; ++k) a(i, j) += b(i, k) * b(j, k);
        }
        a(i, i) += 0.5;
    }
    return a;
}

double identity_residual(const SmallMatrix& p) {
    double worst = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) {
        for (std::size_t j = 0; j < p.size(); ++j) {
            worst = std::max(worst, std::abs(p(i, j) - (i == j ? 1.0 : 0.0)));
        }
    }
    return worst;
}

}  // namespace

TEST(GaussJordan, Identity) {
    EXPECT_EQ(gauss_jordan_invert(SmallMatrix::identity(4)), SmallMatrix::identity(4));
}

TEST(GaussJordan, Diagonal) {
    SmallMatrix m(2);
    m(0, 0) = 2.0;
    m(1, 1) = 4.0;
    const SmallMatrix inv = gauss_jordan_invert(m);
    EXPECT_EQ(inv(0, 0), 0.5);
    EXPECT_EQ(inv(1, 1), 0.25);
    EXPECT_EQ(inv(0, 1), 0.0);
    EXPECT_EQ(inv(1, 0), 0.0);
}

TEST(GaussJordan, PermutationNeedsPivoting) {
    SmallMatrix m(2);
    m(0, 1) = 1.0;
    m(1, 0) = 1.0;
    EXPECT_EQ(gauss_jordan_invert(m), m);
}

TEST(GaussJordan, RandomSpd20) {
    for (unsigned seed = 1; seed <= 5; ++seed) {
        const SmallMatrix a = random_spd(20, seed);
        EXPECT_LT(identity_residual(multiply(a, gauss_jordan_invert(a))), 1e-9);
    }
}

TEST(GaussJordan, SingularNamesColumn) {
    SmallMatrix m(3);
    m(0, 0) = 1.0;
    m(1, 1) = 1.0;
    try {
        (void)gauss_jordan_invert(m);
        FAIL() << "expected SingularMatrixError";
    } catch (const SingularMatrixError& e) {
        EXPECT_EQ(e.column(), 2u);
        EXPECT_NE(std::string(e.what()).find("column 3"), std::string::npos);
    }
}

TEST(GaussJordan, PivotToleranceIsAbsolute) {
    SmallMatrix m = SmallMatrix::identity(2);
    m(1, 1) = 1e-13;
    EXPECT_THROW((void)gauss_jordan_invert(m), SingularMatrixError);
    EXPECT_NO_THROW((void)gauss_jordan_invert(m, 1e-14));
}

TEST(Cholesky, CertifiesDefiniteness) {
    SmallMatrix lower;
    const SmallMatrix a = random_spd(6, 9);
    ASSERT_TRUE(cholesky(a, &lower));
    for (std::size_t i = 0; i < 6; ++i) {
        for (std::size_t j = 0; j < 6; ++j) {
            double s = 0.0;
            for (std::size_t k = 0; k < 6; ++k) s += lower(i, k) * lower(j, k);
            EXPECT_NEAR(s, a(i, j), 1e-12);
        }
    }
    SmallMatrix indefinite = SmallMatrix::identity(2);
    indefinite(1, 1) = -1.0;
    EXPECT_FALSE(cholesky(indefinite));
}

TEST(Multiply, MatrixVector) {
    SmallMatrix a(2);
    a(0, 0) = 1.0;
    a(0, 1) = 2.0;
    a(1, 0) = 3.0;
    a(1, 1) = 4.0;
    const std::vector<double> x{1.0, -1.0};
    EXPECT_EQ(multiply(a, x), (std::vector<double>{-1.0, -1.0}));
}
