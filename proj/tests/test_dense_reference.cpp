#include "mccpd/dense_reference.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <random>

using namespace mccpd;

namespace {

struct Instance {
    CPModel model;
    TensorOracle oracle;
};

Instance random_instance(std::vector<std::size_t> dims, std::size_t rank, unsigned seed) {
    std::mt19937_64 eng(seed);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    CPModel m(dims, rank);
    for (std::size_t s = 0; s < m.order(); ++s) {
        for (double& q : m.core(s)) q = u(eng);
    }
    std::size_t count = 1;
    for (std::size_t n : dims) count *= n;
    std::vector<double> values(count);
    for (double& v : values) v = u(eng);
    return {m, TensorOracle::dense(dims, values)};
}

double triple_loop(const CPModel& m, const TensorOracle& f) {
    double sum = 0.0;
    for (std::size_t i = 0; i < m.dim(0); ++i) {
        for (std::size_t j = 0; j < m.dim(1); ++j) {
            for (std::size_t k = 0; k < m.dim(2); ++k) {
                double v = 0.0;
                for (std::size_t a = 0; a < m.rank(); ++a) {
                    v += m.at(0, a, i) * m.at(1, a, j) * m.at(2, a, k);
                }
                const double r = v - f(MultiIndex{i, j, k});
                sum += r * r;
            }
        }
    }
    return sum / (2.0 * static_cast<double>(m.dim(0) * m.dim(1) * m.dim(2)));
}

}  // namespace

TEST(DenseGlobal, ExactFitIsZero) {
    const auto inst = random_instance({3, 4, 2}, 2, 1);
    EXPECT_EQ(dense_global_discrepancy(inst.model, TensorOracle::cp_synthetic(inst.model)), 0.0);
}

TEST(DenseGlobal, SingleNode) {
    CPModel m({1, 1}, 1);
    m.at(0, 0, 0) = 2.0;
    m.at(1, 0, 0) = 3.0;
    EXPECT_EQ(dense_global_discrepancy(m, TensorOracle::dense({1, 1}, {4.0})), 2.0);
}

TEST(DenseGlobal, MatchesIndependentTripleLoop) {
    const auto inst = random_instance({4, 4, 4}, 2, 2);
    EXPECT_NEAR(dense_global_discrepancy(inst.model, inst.oracle), triple_loop(inst.model, inst.oracle),
                1e-14);
}

TEST(DenseGlobal, CapRefusal) {
    const auto inst = random_instance({4, 4, 4}, 1, 3);
    EXPECT_THROW((void)dense_global_discrepancy(inst.model, inst.oracle, 63), std::length_error);
}

TEST(DenseLocal, TwoNodeHandComputation) {
    CPModel m({1, 2}, 1);
    m.at(0, 0, 0) = 1.0;
    m.at(1, 0, 0) = 2.0;
    m.at(1, 0, 1) = 3.0;
    const auto f = TensorOracle::dense({1, 2}, {1.0, 1.0});
    // R_11 = 1, R_12 = 2.
    EXPECT_EQ(dense_local_discrepancy(m, f, 0, 0), (1.0 + 4.0) / 4.0);
}

TEST(DenseLocal, MeanOverNodesIsGlobal) {
    const auto inst = random_instance({3, 5, 4}, 3, 4);
    const double global = dense_global_discrepancy(inst.model, inst.oracle);
    for (std::size_t c = 0; c < 3; ++c) {
        double sum = 0.0;
        for (std::size_t i = 0; i < inst.model.dim(c); ++i) {
            const double local = dense_local_discrepancy(inst.model, inst.oracle, c, i);
            EXPECT_GE(local, 0.0);
            sum += local;
        }
        EXPECT_NEAR(sum / static_cast<double>(inst.model.dim(c)), global, 1e-12 * global);
    }
}

TEST(DenseLocalGradient, ExactFitAndSingleTerm) {
    const auto inst = random_instance({3, 3, 3}, 2, 5);
    const auto g = dense_local_gradient(inst.model, TensorOracle::cp_synthetic(inst.model), 1, 2);
    for (double v : g) EXPECT_EQ(v, 0.0);

    CPModel m({1, 1}, 1);
    m.at(0, 0, 0) = 2.0;
    m.at(1, 0, 0) = 3.0;
    const auto single = dense_local_gradient(m, TensorOracle::dense({1, 1}, {4.0}), 0, 0);
    EXPECT_EQ(single[0], 2.0 * 3.0);
}

TEST(DenseLocalGradient, FiniteDifferences) {
    const auto inst = random_instance({4, 4, 4}, 2, 6);
    const double h = 1e-6;
    for (std::size_t c = 0; c < 3; ++c) {
        const auto g = dense_local_gradient(inst.model, inst.oracle, c, 1);
        for (std::size_t a = 0; a < 2; ++a) {
            CPModel plus = inst.model;
            CPModel minus = inst.model;
            plus.at(c, a, 1) += h;
            minus.at(c, a, 1) -= h;
            const double fd = (dense_local_discrepancy(plus, inst.oracle, c, 1) -
                               dense_local_discrepancy(minus, inst.oracle, c, 1)) /
                              (2.0 * h);
            EXPECT_NEAR(g[a], fd, 1e-6 * std::abs(fd) + 1e-12);
        }
    }
}

TEST(DenseGlobalGradient, TimesNodeCountIsLocalGradient) {
    const auto inst = random_instance({4, 4, 4}, 3, 7);
    const CPModel grad = dense_global_gradient(inst.model, inst.oracle);
    for (std::size_t c = 0; c < 3; ++c) {
        for (std::size_t i = 0; i < 4; ++i) {
            const auto local = dense_local_gradient(inst.model, inst.oracle, c, i);
            for (std::size_t a = 0; a < 3; ++a) EXPECT_EQ(grad.at(c, a, i) * 4.0, local[a]);
        }
    }
}

TEST(DenseGlobalGradient, FiniteDifferencesAndExactFit) {
    const auto inst = random_instance({3, 4, 2}, 2, 8);
    const CPModel grad = dense_global_gradient(inst.model, inst.oracle);
    const double h = 1e-6;
    for (std::size_t c = 0; c < 3; ++c) {
        CPModel plus = inst.model;
        CPModel minus = inst.model;
        plus.at(c, 1, 0) += h;
        minus.at(c, 1, 0) -= h;
        const double fd = (dense_global_discrepancy(plus, inst.oracle) -
                           dense_global_discrepancy(minus, inst.oracle)) /
                          (2.0 * h);
        EXPECT_NEAR(grad.at(c, 1, 0), fd, 1e-6 * std::abs(fd) + 1e-12);
    }
    const CPModel zero = dense_global_gradient(inst.model, TensorOracle::cp_synthetic(inst.model));
    for (std::size_t s = 0; s < 3; ++s) {
        for (double v : zero.core(s)) EXPECT_EQ(v, 0.0);
    }
}

TEST(DenseLocalHessian, SymmetricPsd) {
    const auto inst = random_instance({3, 3, 3}, 3, 9);
    const SmallMatrix h = dense_local_hessian(inst.model, inst.oracle, 2, 0);
    SmallMatrix shifted = h;
    for (std::size_t a = 0; a < 3; ++a) {
        for (std::size_t b = 0; b < 3; ++b) EXPECT_EQ(h(a, b), h(b, a));
        shifted(a, a) += 1e-12;
    }
    EXPECT_TRUE(cholesky(shifted));
}

TEST(DenseReport, AgreesWithSeparateCalls) {
    const auto inst = random_instance({3, 2, 4}, 2, 10);
    const DenseReport rep = dense_report(inst.model, inst.oracle);
    EXPECT_NEAR(rep.eps_global, dense_global_discrepancy(inst.model, inst.oracle), 1e-15);
    for (std::size_t c = 0; c < 3; ++c) {
        ASSERT_EQ(rep.eps_local[c].size(), inst.model.dim(c));
        for (std::size_t i = 0; i < inst.model.dim(c); ++i) {
            EXPECT_NEAR(rep.eps_local[c][i], dense_local_discrepancy(inst.model, inst.oracle, c, i),
                        1e-14);
        }
    }
    const CPModel grad = dense_global_gradient(inst.model, inst.oracle);
    for (std::size_t s = 0; s < 3; ++s) {
        for (std::size_t k = 0; k < grad.core(s).size(); ++k) {
            EXPECT_NEAR(rep.grad.core(s)[k], grad.core(s)[k], 1e-14);
        }
    }
}
