#include "mccpd/dense_reference.hpp"
#include "mccpd/solvers.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <random>

using namespace mccpd;

namespace {

CPModel random_model(std::vector<std::size_t> dims, std::size_t rank, unsigned seed,
                     double lo = -1.0, double hi = 1.0) {
    std::mt19937_64 eng(seed);
    std::uniform_real_distribution<double> u(lo, hi);
    CPModel m(dims, rank);
    for (std::size_t s = 0; s < m.order(); ++s) {
        for (double& q : m.core(s)) q = u(eng);
    }
    return m;
}

SolverConfig small_config(std::size_t rank) {
    SolverConfig cfg;
    cfg.rank = rank;
    cfg.ens_size = 200;
    cfg.global_ens_size = 2000;
    cfg.eta = 1e-4;
    cfg.master_seed = 99;
    cfg.threads = 1;
    return cfg;
}

double max_diff(const CPModel& a, const CPModel& b) {
    double worst = 0.0;
    for (std::size_t s = 0; s < a.order(); ++s) {
        for (std::size_t k = 0; k < a.core(s).size(); ++k) {
            worst = std::max(worst, std::abs(a.core(s)[k] - b.core(s)[k]));
        }
    }
    return worst;
}

double quadratic_model(const LocalSystem& sys, std::span<const double> step) {
    const auto hs = multiply(sys.hess, step);
    double v = 0.0;
    for (std::size_t a = 0; a < step.size(); ++a) v += sys.grad[a] * step[a] + 0.5 * step[a] * hs[a];
    return v;
}

}  // namespace

TEST(SolverConfig, DefaultsAndValidation) {
    const SolverConfig cfg;
    EXPECT_EQ(cfg.rank, 20u);
    EXPECT_EQ(cfg.ens_size, 1000u);
    EXPECT_EQ(cfg.global_ens_size, 100000u);
    EXPECT_EQ(cfg.eta, 1e-5);
    EXPECT_EQ(cfg.sigma, 0.1);
    EXPECT_EQ(cfg.eps2, 1e-6);
    EXPECT_NO_THROW(cfg.validate());
    for (auto mutate : {+[](SolverConfig& c) { c.rank = 0; }, +[](SolverConfig& c) { c.ens_size = 0; },
                        +[](SolverConfig& c) { c.global_ens_size = 0; },
                        +[](SolverConfig& c) { c.eta = -1.0; }, +[](SolverConfig& c) { c.sigma = -0.1; },
                        +[](SolverConfig& c) { c.eps2 = 0.0; }, +[](SolverConfig& c) { c.max_sweeps = 0; }}) {
        SolverConfig bad;
        mutate(bad);
        EXPECT_THROW(bad.validate(), std::invalid_argument);
    }
}

TEST(Method, NamesRoundTrip) {
    for (Method m : {Method::newton, Method::steepest_descent, Method::als}) {
        EXPECT_EQ(parse_method(to_string(m)), m);
    }
    EXPECT_EQ(parse_method("sd"), Method::steepest_descent);
    EXPECT_THROW((void)parse_method("lbfgs"), std::invalid_argument);
}

TEST(InitRandomStart, SigmaZeroIsAllOnes) {
    const CPModel m = init_random_start({3, 4}, 2, 0.0, 1);
    for (std::size_t s = 0; s < 2; ++s) {
        for (double q : m.core(s)) EXPECT_EQ(q, 1.0);
    }
}

TEST(InitRandomStart, MomentsAndDeterminism) {
    const CPModel m = init_random_start({50000, 50000}, 1, 0.1, 5);
    double sum = 0.0;
    double sq = 0.0;
    std::size_t n = 0;
    for (std::size_t s = 0; s < 2; ++s) {
        for (double q : m.core(s)) {
            sum += q;
            sq += q * q;
            ++n;
        }
    }
    const double mean = sum / static_cast<double>(n);
    const double sd = std::sqrt(sq / static_cast<double>(n) - mean * mean);
    EXPECT_NEAR(mean, 1.0, 0.01);
    EXPECT_NEAR(sd, 0.1, 0.01);
    EXPECT_EQ(init_random_start({50000, 50000}, 1, 0.1, 5), m);
    EXPECT_NE(init_random_start({50000, 50000}, 1, 0.1, 6), m);
}

TEST(NewtonUpdate, QuadraticLanding) {
    const CPModel m = random_model({4, 4, 4}, 3, 1);
    const auto f = TensorOracle::cp_synthetic(random_model({4, 4, 4}, 2, 2));
    const auto ens = sample_hyperplane_ensemble(m.dims(), 1, 3, 150, hyperplane_seed(3, 1, 1, 3));
    const LocalSystem sys = mc_local_system(m, f, ens, 1e-3);
    CPModel moved = m;
    const auto next = newton_update(m.column(1, 3), sys, kDefaultPivotTol);
    std::copy(next.begin(), next.end(), moved.column(1, 3).begin());
    for (double g : mc_local_system(moved, f, ens, 1e-3).grad) EXPECT_LE(std::abs(g), 1e-10);
}

TEST(NewtonSweep, ExactFitWithoutRegularizationDoesNotMove) {
    const CPModel m = random_model({4, 3, 5}, 2, 3);
    SolverConfig cfg = small_config(2);
    cfg.eta = 0.0;
    CPModel updated = m;
    const SweepStats stats = newton_sweep(updated, TensorOracle::cp_synthetic(m), cfg, 1);
    EXPECT_EQ(stats.skipped_nodes, 0u);
    EXPECT_LE(max_diff(updated, m), 1e-12);
}

TEST(NewtonSweep, MatchesAlsSweep) {
    const CPModel m = random_model({5, 4, 6}, 3, 4);
    const auto f = TensorOracle::cp_synthetic(random_model({5, 4, 6}, 3, 5));
    const SolverConfig cfg = small_config(3);
    CPModel newton = m;
    CPModel als = m;
    for (std::size_t k = 1; k <= 3; ++k) {
        (void)newton_sweep(newton, f, cfg, k);
        (void)als_sweep(als, f, cfg, k);
        EXPECT_LE(max_diff(newton, als), 1e-10);
    }
}

TEST(NewtonSweep, SingularNodesAreSkipped) {
    CPModel m({3, 3, 3}, 2, 0.0);
    SolverConfig cfg = small_config(2);
    cfg.eta = 0.0;
    const SweepStats stats = newton_sweep(m, TensorOracle::f38({3, 3, 3}), cfg, 1);
    EXPECT_EQ(stats.skipped_nodes, 9u);
    for (std::size_t s = 0; s < 3; ++s) {
        for (double q : m.core(s)) EXPECT_EQ(q, 0.0);
    }
}

TEST(AlsSweep, ZeroOracleGivesZeroCores) {
    CPModel m = random_model({3, 4, 3}, 2, 6);
    const SolverConfig cfg = small_config(2);
    (void)als_sweep(m, TensorOracle::dense({3, 4, 3}, std::vector<double>(36, 0.0)), cfg, 1);
    for (std::size_t s = 0; s < 3; ++s) {
        for (double q : m.core(s)) EXPECT_EQ(q, 0.0);
    }
}

TEST(AlsSweep, RecoversRankOne) {
    const std::vector<std::size_t> dims{4, 4, 4};
    const auto f = TensorOracle::cp_synthetic(random_model(dims, 1, 7, 0.5, 1.5));
    SolverConfig cfg = small_config(1);
    cfg.eta = 1e-8;
    CPModel m = init_random_start(dims, 1, cfg.sigma, cfg.master_seed);
    double eps = 1.0;
    for (std::size_t k = 1; k <= 5 && eps >= 1e-10; ++k) {
        (void)als_sweep(m, f, cfg, k);
        eps = dense_global_discrepancy(m, f);
    }
    EXPECT_LT(eps, 1e-10);
}

TEST(SteepestDescent, QuadraticStepNeverIncreasesModel) {
    const CPModel m = random_model({4, 4, 4}, 3, 8);
    const auto f = TensorOracle::cp_synthetic(random_model({4, 4, 4}, 3, 9));
    for (std::size_t i = 0; i < 4; ++i) {
        const auto ens = sample_hyperplane_ensemble(m.dims(), 0, i, 100, hyperplane_seed(1, 1, 0, i));
        const LocalSystem sys = mc_local_system(m, f, ens, 1e-4);
        const auto tau = quadratic_step_length(sys);
        ASSERT_TRUE(tau.has_value());
        std::vector<double> step(3);
        for (std::size_t a = 0; a < 3; ++a) step[a] = -*tau * sys.grad[a];
        EXPECT_LE(quadratic_model(sys, step), 0.0);
    }
}

TEST(SteepestDescent, RankOneStepEqualsNewtonStep) {
    const CPModel m = random_model({4, 4, 4}, 1, 10);
    const auto f = TensorOracle::f38({4, 4, 4});
    SolverConfig cfg = small_config(1);
    CPModel sd = m;
    CPModel newton = m;
    (void)sd_sweep(sd, f, cfg, 1);
    (void)newton_sweep(newton, f, cfg, 1);
    EXPECT_LE(max_diff(sd, newton), 1e-12);
}

TEST(SteepestDescent, ExactFitDoesNotMove) {
    const CPModel m = random_model({3, 3, 3}, 2, 11);
    SolverConfig cfg = small_config(2);
    cfg.eta = 0.0;
    CPModel updated = m;
    (void)sd_sweep(updated, TensorOracle::cp_synthetic(m), cfg, 1);
    EXPECT_LE(max_diff(updated, m), 1e-12);
}

TEST(SteepestDescent, FixedStep) {
    const CPModel m = random_model({3, 3, 3}, 2, 12);
    const auto f = TensorOracle::f38({3, 3, 3});
    SolverConfig cfg = small_config(2);
    cfg.tau_mode = TauMode::fixed;
    cfg.tau = 0.05;
    CPModel updated = m;
    (void)sd_sweep(updated, f, cfg, 1);
    const auto ens = sample_hyperplane_ensemble(m.dims(), 0, 0, cfg.ens_size,
                                                hyperplane_seed(cfg.master_seed, 1, 0, 0));
    const LocalSystem sys = mc_local_system(m, f, ens, cfg.eta);
    for (std::size_t a = 0; a < 2; ++a) {
        EXPECT_NEAR(updated.at(0, a, 0), m.at(0, a, 0) - 0.05 * sys.grad[a], 1e-15);
    }
}

TEST(Run, StopsAfterOneSweepOnExactStart) {
    SolverConfig cfg = small_config(2);
    cfg.eta = 0.0;
    const CPModel start = init_random_start({4, 4, 4}, 2, cfg.sigma, cfg.master_seed);
    const RunResult res = run(TensorOracle::cp_synthetic(start), cfg);
    EXPECT_TRUE(res.converged);
    EXPECT_EQ(res.sweeps, 1u);
    ASSERT_EQ(res.history.size(), 1u);
    EXPECT_LE(res.history[0].eps_mc, 1e-20);
}

TEST(Run, HistoryAndInitialRecord) {
    SolverConfig cfg = small_config(2);
    cfg.max_sweeps = 3;
    cfg.eps2 = 1e-30;
    RunOptions opts;
    opts.record_initial = true;
    std::size_t callbacks = 0;
    opts.on_record = [&](const ConvergenceRecord&) { ++callbacks; };
    const RunResult res = run(TensorOracle::f38({5, 5, 5}), cfg, opts);
    EXPECT_FALSE(res.converged);
    EXPECT_EQ(res.sweeps, 3u);
    ASSERT_EQ(res.history.size(), 4u);
    EXPECT_EQ(callbacks, 4u);
    for (std::size_t k = 0; k < 4; ++k) {
        EXPECT_EQ(res.history[k].sweep, k);
        EXPECT_GE(res.history[k].eps_mc, 0.0);
    }
    EXPECT_LT(res.history.back().eps_mc, res.history.front().eps_mc);
}

TEST(Run, DeterministicAcrossThreadCounts) {
    SolverConfig cfg = small_config(3);
    cfg.max_sweeps = 3;
    cfg.eps2 = 1e-30;
    const auto f = TensorOracle::f38({6, 7, 8});
    cfg.threads = 1;
    const RunResult a = run(f, cfg);
    cfg.threads = 4;
    const RunResult b = run(f, cfg);
    EXPECT_EQ(a.model, b.model);
    ASSERT_EQ(a.history.size(), b.history.size());
    for (std::size_t k = 0; k < a.history.size(); ++k) {
        EXPECT_EQ(a.history[k].eps_mc, b.history[k].eps_mc);
        EXPECT_EQ(a.history[k].eps_grid_mean, b.history[k].eps_grid_mean);
        EXPECT_EQ(a.history[k].grad_norm, b.history[k].grad_norm);
    }
}

TEST(Run, RankThreeRecoveryWithLongerBudget) {
    const std::vector<std::size_t> dims(3, 6);
    const CPModel target = random_model(dims, 3, 13, -1.0, 1.5);
    const auto f = TensorOracle::cp_synthetic(target);
    SolverConfig cfg = small_config(3);
    cfg.ens_size = 500;
    cfg.global_ens_size = 5000;
    cfg.eta = 1e-8;
    cfg.sigma = 0.5;
    cfg.eps2 = 1e-14;
    cfg.max_sweeps = 400;
    const RunResult res = run(f, cfg);
    EXPECT_LT(dense_global_discrepancy(res.model, f), 1e-8);
}

TEST(ConvergenceCsv, HeaderAndPrecision) {
    EXPECT_EQ(convergence_csv_header(), "sweep,eps_mc,eps_grid_mean,grad_norm,wall_seconds");
    ConvergenceRecord rec;
    rec.sweep = 2;
    rec.eps_mc = 0.1;
    rec.eps_grid_mean = 1.0 / 3.0;
    rec.grad_norm = 2.5;
    rec.wall_seconds = 0.25;
    EXPECT_EQ(convergence_csv_row(rec), "2,0.10000000000000001,0.33333333333333331,2.5,0.25");
}
