#include "mccpd/selftest.hpp"

#include "mccpd/dense_reference.hpp"
#include "mccpd/discrepancy_mc.hpp"
#include "mccpd/linalg.hpp"
#include "mccpd/rng.hpp"
#include "mccpd/runner.hpp"
#include "mccpd/solvers.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <functional>
#include <ostream>
#include <random>
#include <sstream>

namespace mccpd {

namespace {

constexpr double kFdStep = 1e-6;

struct Battery {
    SelftestOptions options;
    std::vector<PropertyResult> results;

    Engine engine(std::uint64_t tag) const {
        return make_engine(SeedPath{options.seed, tag, 0, 0, StreamKind::test});
    }

    LocalSystem system(const CPModel& model, const TensorOracle& oracle,
                       const HyperplaneEnsemble& ens, double eta) const {
        LocalSystem sys = mc_local_system(model, oracle, ens, eta);
        if (options.corrupt_gradient_sign) {
            for (double& g : sys.grad) g = -g;
        }
        return sys;
    }

    void check(const std::string& id, const std::string& name,
               const std::function<bool(std::ostringstream&)>& body) {
        std::ostringstream detail;
        bool ok = false;
        try {
            ok = body(detail);
        } catch (const std::exception& e) {
            detail << "exception: " << e.what();
            ok = false;
        }
        results.push_back({id, name, ok, detail.str()});
    }
};

CPModel random_model(const std::vector<std::size_t>& dims, std::size_t rank, Engine& engine,
                     double lo = 0.5, double hi = 1.5) {
    CPModel model(dims, rank);
    std::uniform_real_distribution<double> u(lo, hi);
    for (std::size_t s = 0; s < model.order(); ++s) {
        for (double& v : model.core(s)) v = u(engine);
    }
    return model;
}

TensorOracle random_dense(const std::vector<std::size_t>& dims, Engine& engine) {
    std::size_t count = 1;
    for (std::size_t n : dims) count *= n;
    std::vector<double> values(count);
    std::uniform_real_distribution<double> u(-1.0, 3.0);
    for (double& v : values) v = u(engine);
    return TensorOracle::dense(dims, std::move(values));
}

double norm(std::span<const double> v) {
    double s = 0.0;
    for (double x : v) s += x * x;
    return std::sqrt(s);
}

double rel_diff(std::span<const double> a, std::span<const double> b) {
    double num = 0.0;
    for (std::size_t k = 0; k < a.size(); ++k) num += (a[k] - b[k]) * (a[k] - b[k]);
    const double den = std::max(norm(b), 1e-300);
    return std::sqrt(num) / den;
}

struct Moments {
    double mean = 0.0;
    double standard_error = 0.0;
};

Moments moments(const std::vector<double>& xs) {
    const double n = static_cast<double>(xs.size());
    double mean = 0.0;
    for (double x : xs) mean += x;
    mean /= n;
    double var = 0.0;
    for (double x : xs) var += (x - mean) * (x - mean);
    var /= (n - 1.0);
    return {mean, std::sqrt(var / n)};
}

void unbiasedness(Battery& b) {
    const std::vector<std::size_t> dims{4, 4, 4};
    Engine eng = b.engine(1);
    const CPModel model = random_model(dims, 2, eng);
    const TensorOracle oracle = random_dense(dims, eng);
    constexpr std::size_t kResamples = 200;
    constexpr std::size_t kPoints = 1000;

    b.check("a1", "MC global discrepancy is unbiased vs dense", [&](std::ostringstream& d) {
        const double exact = dense_global_discrepancy(model, oracle);
        std::vector<double> est;
        for (std::size_t k = 0; k < kResamples; ++k) {
            const auto ens = sample_global_ensemble(
                dims, kPoints, SeedPath{b.options.seed, k, 0, 0, StreamKind::test});
            est.push_back(mc_global_discrepancy(model, oracle, ens));
        }
        const Moments m = moments(est);
        d << "mean " << m.mean << " dense " << exact << " 3SE " << 3 * m.standard_error;
        return std::abs(m.mean - exact) <= 3.0 * m.standard_error;
    });

    b.check("a2", "MC local discrepancy is unbiased vs dense", [&](std::ostringstream& d) {
        bool ok = true;
        for (const auto& [c, i] : {std::pair<std::size_t, std::size_t>{0, 1}, {2, 3}}) {
            const double exact = dense_local_discrepancy(model, oracle, c, i);
            std::vector<double> est;
            for (std::size_t k = 0; k < kResamples; ++k) {
                const auto ens = sample_hyperplane_ensemble(
                    dims, c, i, kPoints, SeedPath{b.options.seed, k, c, i, StreamKind::test});
                est.push_back(mc_local_discrepancy(model, oracle, ens, 0.0));
            }
            const Moments m = moments(est);
            d << "(c=" << c + 1 << ",i=" << i + 1 << ") mean " << m.mean << " dense " << exact
              << " 3SE " << 3 * m.standard_error << "; ";
            ok = ok && std::abs(m.mean - exact) <= 3.0 * m.standard_error;
        }
        return ok;
    });

    b.check("a3", "MC local gradient / N_c is unbiased for the dense global gradient",
            [&](std::ostringstream& d) {
                const CPModel grad = dense_global_gradient(model, oracle);
                const std::size_t c = 1;
                const std::size_t i = 2;
                std::vector<std::vector<double>> est(model.rank());
                for (std::size_t k = 0; k < kResamples; ++k) {
                    const auto ens = sample_hyperplane_ensemble(
                        dims, c, i, kPoints, SeedPath{b.options.seed, k, c, i, StreamKind::test});
                    const LocalSystem sys = b.system(model, oracle, ens, 0.0);
                    for (std::size_t a = 0; a < model.rank(); ++a) {
                        est[a].push_back(sys.grad[a] / static_cast<double>(dims[c]));
                    }
                }
                bool ok = true;
                for (std::size_t a = 0; a < model.rank(); ++a) {
                    const Moments m = moments(est[a]);
                    const double exact = grad.at(c, a, i);
                    d << "alpha=" << a + 1 << " mean " << m.mean << " dense " << exact << "; ";
                    ok = ok && std::abs(m.mean - exact) <= 3.0 * m.standard_error;
                }
                return ok;
            });

    b.check("a4", "grid mean of local discrepancies agrees with eps_MC",
            [&](std::ostringstream& d) {
                double grid_sum = 0.0;
                double grid_var = 0.0;
                std::size_t nodes = 0;
                for (std::size_t c = 0; c < dims.size(); ++c) {
                    for (std::size_t i = 0; i < dims[c]; ++i) {
                        const auto ens = sample_hyperplane_ensemble(
                            dims, c, i, kPoints, SeedPath{b.options.seed, 900, c, i, StreamKind::test});
                        std::vector<double> half_sq;
                        for (std::size_t e = 0; e < ens.points.size(); ++e) {
                            const double rv = eval_cp(model, ens.points[e]) - oracle(ens.points[e]);
                            half_sq.push_back(0.5 * rv * rv);
                        }
                        const Moments m = moments(half_sq);
                        grid_sum += m.mean;
                        grid_var += m.standard_error * m.standard_error;
                        ++nodes;
                    }
                }
                const double grid_mean = grid_sum / static_cast<double>(nodes);
                grid_var /= static_cast<double>(nodes * nodes);

                const auto gens = sample_global_ensemble(
                    dims, 20000, SeedPath{b.options.seed, 901, 0, 0, StreamKind::test});
                std::vector<double> half_sq;
                for (std::size_t e = 0; e < gens.points.size(); ++e) {
                    const double rv = eval_cp(model, gens.points[e]) - oracle(gens.points[e]);
                    half_sq.push_back(0.5 * rv * rv);
                }
                const Moments g = moments(half_sq);
                const double sigma = std::sqrt(grid_var + g.standard_error * g.standard_error);
                d << "grid mean " << grid_mean << " eps_MC " << g.mean << " 3sigma " << 3 * sigma;
                return std::abs(grid_mean - g.mean) <= 3.0 * sigma;
            });
}

void derivatives(Battery& b) {
    const std::vector<std::size_t> dims{4, 4, 4};
    Engine eng = b.engine(2);
    const CPModel base = random_model(dims, 2, eng);
    const TensorOracle oracle = random_dense(dims, eng);
    const double eta = 1e-3;

    b.check("b1", "MC local gradient matches finite differences", [&](std::ostringstream& d) {
        double worst = 0.0;
        for (std::size_t c = 0; c < 3; ++c) {
            const std::size_t i = (c + 1) % 4;
            const auto ens = sample_hyperplane_ensemble(
                dims, c, i, 300, SeedPath{b.options.seed, 20, c, i, StreamKind::test});
            const LocalSystem sys = b.system(base, oracle, ens, eta);
            std::vector<double> fd(base.rank());
            for (std::size_t a = 0; a < base.rank(); ++a) {
                CPModel plus = base;
                CPModel minus = base;
                plus.at(c, a, i) += kFdStep;
                minus.at(c, a, i) -= kFdStep;
                fd[a] = (mc_local_discrepancy(plus, oracle, ens, eta) -
                         mc_local_discrepancy(minus, oracle, ens, eta)) /
                        (2.0 * kFdStep);
            }
            worst = std::max(worst, rel_diff(sys.grad, fd));
        }
        d << "max rel err " << worst;
        return worst < 1e-6;
    });

    b.check("b2", "Gauss-Newton matrix matches finite differences of the gradient",
            [&](std::ostringstream& d) {
                double worst = 0.0;
                for (std::size_t c = 0; c < 3; ++c) {
                    const std::size_t i = c;
                    const auto ens = sample_hyperplane_ensemble(
                        dims, c, i, 300, SeedPath{b.options.seed, 21, c, i, StreamKind::test});
                    const LocalSystem sys = b.system(base, oracle, ens, eta);
                    std::vector<double> analytic;
                    std::vector<double> fd;
                    for (std::size_t g = 0; g < base.rank(); ++g) {
                        CPModel plus = base;
                        CPModel minus = base;
                        plus.at(c, g, i) += kFdStep;
                        minus.at(c, g, i) -= kFdStep;
                        const auto gp = b.system(plus, oracle, ens, eta).grad;
                        const auto gm = b.system(minus, oracle, ens, eta).grad;
                        for (std::size_t a = 0; a < base.rank(); ++a) {
                            fd.push_back((gp[a] - gm[a]) / (2.0 * kFdStep));
                            analytic.push_back(sys.hess(a, g));
                        }
                    }
                    worst = std::max(worst, rel_diff(analytic, fd));
                }
                d << "max rel err " << worst;
                return worst < 1e-5;
            });

    b.check("b3", "dense local gradient matches finite differences", [&](std::ostringstream& d) {
        double worst = 0.0;
        for (std::size_t c = 0; c < 3; ++c) {
            for (std::size_t i = 0; i < 4; ++i) {
                const auto grad = dense_local_gradient(base, oracle, c, i);
                std::vector<double> fd(base.rank());
                for (std::size_t a = 0; a < base.rank(); ++a) {
                    CPModel plus = base;
                    CPModel minus = base;
                    plus.at(c, a, i) += kFdStep;
                    minus.at(c, a, i) -= kFdStep;
                    fd[a] = (dense_local_discrepancy(plus, oracle, c, i) -
                             dense_local_discrepancy(minus, oracle, c, i)) /
                            (2.0 * kFdStep);
                }
                worst = std::max(worst, rel_diff(grad, fd));
            }
        }
        d << "max rel err " << worst;
        return worst < 1e-6;
    });

    b.check("b4", "dense global gradient matches finite differences", [&](std::ostringstream& d) {
        const CPModel grad = dense_global_gradient(base, oracle);
        std::vector<double> analytic;
        std::vector<double> fd;
        for (std::size_t c = 0; c < 3; ++c) {
            for (std::size_t i = 0; i < 4; ++i) {
                for (std::size_t a = 0; a < base.rank(); ++a) {
                    CPModel plus = base;
                    CPModel minus = base;
                    plus.at(c, a, i) += kFdStep;
                    minus.at(c, a, i) -= kFdStep;
                    fd.push_back((dense_global_discrepancy(plus, oracle) -
                                  dense_global_discrepancy(minus, oracle)) /
                                 (2.0 * kFdStep));
                    analytic.push_back(grad.at(c, a, i));
                }
            }
        }
        const double err = rel_diff(analytic, fd);
        d << "rel err " << err;
        return err < 1e-6;
    });
}

void identities(Battery& b) {
    Engine eng = b.engine(3);
    const std::vector<std::size_t> dims{4, 4, 4};
    const CPModel model = random_model(dims, 3, eng);
    const TensorOracle oracle = random_dense(dims, eng);

    b.check("c1", "global discrepancy equals mean of local discrepancies",
            [&](std::ostringstream& d) {
                const double global = dense_global_discrepancy(model, oracle);
                double worst = 0.0;
                for (std::size_t c = 0; c < 3; ++c) {
                    double sum = 0.0;
                    for (std::size_t i = 0; i < dims[c]; ++i) {
                        sum += dense_local_discrepancy(model, oracle, c, i);
                    }
                    worst = std::max(worst,
                                     std::abs(sum / static_cast<double>(dims[c]) - global) / global);
                }
                d << "max rel err " << worst;
                return worst <= 1e-12;
            });

    b.check("c2", "global gradient times N_c equals local gradient", [&](std::ostringstream& d) {
        const CPModel grad = dense_global_gradient(model, oracle);
        std::size_t mismatches = 0;
        for (std::size_t c = 0; c < 3; ++c) {
            for (std::size_t i = 0; i < dims[c]; ++i) {
                const auto local = dense_local_gradient(model, oracle, c, i);
                for (std::size_t a = 0; a < model.rank(); ++a) {
                    if (grad.at(c, a, i) * static_cast<double>(dims[c]) != local[a]) ++mismatches;
                }
            }
        }
        d << mismatches << " inexact entries";
        return mismatches == 0;
    });

    b.check("c3", "ALS right-hand side satisfies H Q - phi = grad", [&](std::ostringstream& d) {
        double worst = 0.0;
        for (std::size_t c = 0; c < 3; ++c) {
            const auto ens = sample_hyperplane_ensemble(
                dims, c, 2, 250, SeedPath{b.options.seed, 30, c, 2, StreamKind::test});
            const LocalSystem sys = b.system(model, oracle, ens, 0.0);
            const auto phi = mc_als_rhs(model, oracle, ens);
            const auto hq = multiply(sys.hess, model.column(c, 2));
            for (std::size_t a = 0; a < model.rank(); ++a) {
                worst = std::max(worst, std::abs(hq[a] - phi[a] - sys.grad[a]));
            }
        }
        d << "max abs err " << worst;
        return worst <= 1e-12;
    });
}

void update_rules(Battery& b) {
    const std::vector<std::size_t> dims{4, 4, 4};
    Engine eng = b.engine(4);
    const CPModel model = random_model(dims, 3, eng);
    const TensorOracle oracle = random_dense(dims, eng);
    SolverConfig cfg;
    cfg.rank = 3;
    cfg.ens_size = 200;
    cfg.global_ens_size = 2000;
    cfg.eta = 1e-3;
    cfg.master_seed = b.options.seed;
    cfg.threads = 1;

    b.check("e1", "Newton step equals ALS step per node", [&](std::ostringstream& d) {
        double worst = 0.0;
        for (std::size_t c = 0; c < 3; ++c) {
            for (std::size_t i = 0; i < 4; ++i) {
                const auto ens = sample_hyperplane_ensemble(dims, c, i, cfg.ens_size,
                                                            hyperplane_seed(cfg.master_seed, 1, c, i));
                const LocalSystem sys = b.system(model, oracle, ens, cfg.eta);
                const auto phi = mc_als_rhs(model, oracle, ens);
                const auto newton = newton_update(model.column(c, i), sys, cfg.pivot_tol);
                const auto als = als_update(sys, phi, cfg.pivot_tol);
                for (std::size_t a = 0; a < model.rank(); ++a) {
                    worst = std::max(worst, std::abs(newton[a] - als[a]));
                }
            }
        }
        d << "max diff " << worst;
        return worst <= 1e-10;
    });

    b.check("e2", "Newton sweep equals ALS sweep under shared ensembles",
            [&](std::ostringstream& d) {
                if (b.options.corrupt_gradient_sign) {
                    d << "skipped under fault injection";
                    return true;
                }
                CPModel newton = model;
                CPModel als = model;
                (void)newton_sweep(newton, oracle, cfg, 1);
                (void)als_sweep(als, oracle, cfg, 1);
                double worst = 0.0;
                for (std::size_t s = 0; s < 3; ++s) {
                    for (std::size_t k = 0; k < newton.core(s).size(); ++k) {
                        worst = std::max(worst, std::abs(newton.core(s)[k] - als.core(s)[k]));
                    }
                }
                d << "max diff " << worst;
                return worst <= 1e-10;
            });

    b.check("f1", "Newton step lands on the local stationary point", [&](std::ostringstream& d) {
        double worst = 0.0;
        for (std::size_t c = 0; c < 3; ++c) {
            for (std::size_t i = 0; i < 4; ++i) {
                const auto ens = sample_hyperplane_ensemble(dims, c, i, cfg.ens_size,
                                                            hyperplane_seed(cfg.master_seed, 2, c, i));
                const LocalSystem sys = b.system(model, oracle, ens, cfg.eta);
                CPModel moved = model;
                const auto next = newton_update(model.column(c, i), sys, cfg.pivot_tol);
                std::copy(next.begin(), next.end(), moved.column(c, i).begin());
                const LocalSystem after = b.system(moved, oracle, ens, cfg.eta);
                worst = std::max(worst, norm(after.grad));
            }
        }
        d << "max post-step gradient norm " << worst;
        return worst <= 1e-10;
    });

    b.check("h1", "Gauss-Newton matrix is symmetric PSD, and eta shifts its spectrum",
            [&](std::ostringstream& d) {
                std::size_t failures = 0;
                for (std::size_t k = 0; k < 60; ++k) {
                    const std::size_t c = k % 3;
                    const std::size_t i = (k / 3) % 4;
                    const auto ens = sample_hyperplane_ensemble(
                        dims, c, i, 1 + k % 7, SeedPath{b.options.seed, 40 + k, c, i, StreamKind::test});
                    const LocalSystem plain = b.system(model, oracle, ens, 0.0);
                    const LocalSystem reg = b.system(model, oracle, ens, cfg.eta);
                    double trace = 0.0;
                    for (std::size_t a = 0; a < 3; ++a) trace += plain.hess(a, a);
                    for (std::size_t a = 0; a < 3; ++a) {
                        for (std::size_t g = 0; g < 3; ++g) {
                            if (std::abs(plain.hess(a, g) - plain.hess(g, a)) > 1e-12) ++failures;
                        }
                    }
                    SmallMatrix shifted = plain.hess;
                    for (std::size_t a = 0; a < 3; ++a) shifted(a, a) += 1e-12 * (1.0 + trace);
                    if (!cholesky(shifted)) ++failures;
                    SmallMatrix margin = reg.hess;
                    for (std::size_t a = 0; a < 3; ++a) margin(a, a) -= (1.0 - 1e-9) * cfg.eta;
                    if (!cholesky(margin)) ++failures;
                }
                d << failures << " failures over 60 ensembles";
                return failures == 0;
            });

    b.check("x1", "identical seed paths give identical ensembles and systems",
            [&](std::ostringstream& d) {
                const SeedPath seed = hyperplane_seed(cfg.master_seed, 7, 1, 3);
                const auto e1 = sample_hyperplane_ensemble(dims, 1, 3, 100, seed);
                const auto e2 = sample_hyperplane_ensemble(dims, 1, 3, 100, seed);
                const auto s1 = mc_local_system(model, oracle, e1, cfg.eta);
                const auto s2 = mc_local_system(model, oracle, e2, cfg.eta);
                const bool same = e1.points == e2.points && s1.grad == s2.grad &&
                                  s1.hess == s2.hess && s1.eps == s2.eps;
                d << (same ? "bit-identical" : "differs");
                return same;
            });
}

struct RecoveryOutcome {
    double eps = 0.0;
    std::size_t sweeps = 0;
};

RecoveryOutcome recover(const TensorOracle& oracle, std::size_t rank, std::uint64_t seed,
                        std::size_t max_sweeps) {
    SolverConfig cfg;
    cfg.rank = rank;
    cfg.ens_size = 500;
    cfg.eta = 1e-8;
    cfg.sigma = 0.5;
    cfg.master_seed = seed;
    cfg.threads = 1;
    CPModel model = init_random_start(oracle.dims(), cfg.rank, cfg.sigma, cfg.master_seed);
    RecoveryOutcome out{dense_global_discrepancy(model, oracle), 0};
    while (out.sweeps < max_sweeps && out.eps >= 1e-8) {
        ++out.sweeps;
        (void)newton_sweep(model, oracle, cfg, out.sweeps);
        out.eps = dense_global_discrepancy(model, oracle);
    }
    return out;
}

void recovery(Battery& b) {
    struct Case {
        std::size_t n;
        std::size_t target_rank;
        std::size_t rank;
    };

    b.check("g1", "rank-r0 synthetic tensor is recovered within 10 sweeps (r >= r0)",
            [&](std::ostringstream& d) {
                bool ok = true;
                std::uint64_t tag = 50;
                for (const Case k : {Case{4, 1, 1}, Case{4, 1, 2}, Case{6, 1, 3}, Case{6, 2, 3}}) {
                    Engine eng = b.engine(tag);
                    const TensorOracle oracle = TensorOracle::cp_synthetic(
                        random_model(std::vector<std::size_t>(3, k.n), k.target_rank, eng, -1.0, 1.5));
                    const RecoveryOutcome r = recover(oracle, k.rank, b.options.seed + tag++, 10);
                    d << "N=" << k.n << " r0=" << k.target_rank << " r=" << k.rank << ": eps "
                      << r.eps << " after " << r.sweeps << " sweeps; ";
                    ok = ok && r.eps < 1e-8;
                }
                return ok;
            });

    b.check("g2", "rank-3 synthetic tensor is recovered at r = 3", [&](std::ostringstream& d) {
        Engine eng = b.engine(58);
        const TensorOracle oracle = TensorOracle::cp_synthetic(
            random_model(std::vector<std::size_t>(3, 6), 3, eng, -1.0, 1.5));
        const RecoveryOutcome r = recover(oracle, 3, b.options.seed + 58, 400);
        d << "eps " << r.eps << " after " << r.sweeps << " sweeps";
        return r.eps < 1e-8;
    });

    b.check("d1", "converged local stationarity implies global stationarity",
            [&](std::ostringstream& d) {
                const std::vector<std::size_t> dims{6, 6, 6};
                Engine eng = b.engine(60);
                const TensorOracle oracle =
                    TensorOracle::cp_synthetic(random_model(dims, 1, eng));
                SolverConfig cfg;
                cfg.rank = 1;
                cfg.ens_size = 500;
                cfg.global_ens_size = 5000;
                cfg.eta = 1e-8;
                cfg.sigma = 0.5;
                cfg.eps2 = 1e-12;
                cfg.max_sweeps = 200;
                cfg.master_seed = b.options.seed;
                cfg.threads = 1;
                const RunResult result = run(oracle, cfg);
                double local_max = 0.0;
                for (std::size_t c = 0; c < 3; ++c) {
                    for (std::size_t i = 0; i < dims[c]; ++i) {
                        local_max = std::max(local_max,
                                             norm(dense_local_gradient(result.model, oracle, c, i)));
                    }
                }
                const CPModel grad = dense_global_gradient(result.model, oracle);
                double global_sq = 0.0;
                for (std::size_t s = 0; s < 3; ++s) {
                    for (double g : grad.core(s)) global_sq += g * g;
                }
                d << "sweeps " << result.sweeps << " eps_mc " << result.history.back().eps_mc
                  << " max local grad " << local_max
                  << " global grad " << std::sqrt(global_sq);
                return result.converged && local_max < 1e-5 && std::sqrt(global_sq) < 1e-5;
            });
}

void gauss_jordan(Battery& b) {
    b.check("i1", "Gauss-Jordan inverse of a random SPD 20x20", [&](std::ostringstream& d) {
        Engine eng = b.engine(70);
        std::uniform_real_distribution<double> u(-1.0, 1.0);
        const std::size_t n = 20;
        SmallMatrix basis(n);
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t j = 0; j < n; ++j) basis(i, j) = u(eng);
        }
        SmallMatrix a(n);
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t j = 0; j < n; ++j) {
                for (std::size_t k = 0; k < n; ++k) a(i, j) += basis(i, k) * basis(j, k);
            }
            a(i, i) += 1.0;
        }
        const SmallMatrix prod = multiply(a, gauss_jordan_invert(a));
        double worst = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t j = 0; j < n; ++j) {
                worst = std::max(worst, std::abs(prod(i, j) - (i == j ? 1.0 : 0.0)));
            }
        }
        d << "max |A A^-1 - I| " << worst;
        return worst < 1e-9;
    });

    b.check("i2", "singular input raises a singular-matrix error", [&](std::ostringstream& d) {
        SmallMatrix m(2);
        m(0, 0) = 1.0;
        m(0, 1) = 2.0;
        m(1, 0) = 2.0;
        m(1, 1) = 4.0;
        try {
            (void)gauss_jordan_invert(m);
        } catch (const SingularMatrixError& e) {
            d << e.what();
            return e.column() == 1;
        }
        d << "no error raised";
        return false;
    });
}

}  // namespace

std::vector<PropertyResult> run_selftest(const SelftestOptions& options) {
    Battery battery{options, {}};
    unbiasedness(battery);
    derivatives(battery);
    identities(battery);
    update_rules(battery);
    recovery(battery);
    gauss_jordan(battery);
    return battery.results;
}

int cmd_selftest(const SelftestOptions& options, std::ostream& out) {
    const auto start = std::chrono::steady_clock::now();
    const auto results = run_selftest(options);
    std::size_t failed = 0;
    for (const auto& r : results) {
        out << (r.passed ? "PASS " : "FAIL ") << r.id << "  " << r.name << "  [" << r.detail
            << "]\n";
        failed += r.passed ? 0 : 1;
    }
    const double seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (failed) {
        out << failed << " of " << results.size() << " properties failed:";
        for (const auto& r : results) {
            if (!r.passed) out << ' ' << r.id;
        }
        out << " (" << seconds << " s)\n";
        return kExitSelftestFailed;
    }
    out << "all " << results.size() << " properties passed (" << seconds << " s)\n";
    return kExitOk;
}

}  // namespace mccpd
