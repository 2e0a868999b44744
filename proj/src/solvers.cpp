#include "mccpd/solvers.hpp"

#include <chrono>
#include <cmath>
#include <random>
#include <stdexcept>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "mccpd/rng.hpp"

namespace mccpd {

std::string to_string(Method method) {
    switch (method) {
    case Method::newton: return "newton";
    case Method::steepest_descent: return "steepest-descent";
    case Method::als: return "als";
    }
    return "unknown";
}

Method parse_method(const std::string& text) {
    if (text == "newton") return Method::newton;
    if (text == "steepest-descent" || text == "sd") return Method::steepest_descent;
    if (text == "als") return Method::als;
    throw std::invalid_argument("unknown method '" + text +
                                "' (expected newton, steepest-descent or als)");
}

void SolverConfig::validate() const {
    auto fail = [](const std::string& what) { throw std::invalid_argument(what); };
    if (rank < 1) fail("r must be at least 1");
    if (ens_size < 1) fail("L_ens must be at least 1");
    if (global_ens_size < 1) fail("L_ens_t must be at least 1");
    if (!(eta >= 0.0) || !std::isfinite(eta)) fail("eta must be a finite non-negative number");
    if (!(sigma >= 0.0) || !std::isfinite(sigma)) fail("sigma must be a finite non-negative number");
    if (!(eps2 > 0.0)) fail("eps2 must be positive");
    if (max_sweeps < 1) fail("max_sweeps must be at least 1");
    if (!(tau > 0.0) || !std::isfinite(tau)) fail("tau must be a finite positive number");
    if (!(pivot_tol > 0.0)) fail("pivot_tol must be positive");
    if (threads < 0) fail("threads must be non-negative");
}

CPModel init_random_start(const std::vector<std::size_t>& dims, std::size_t rank, double sigma,
                          std::uint64_t master_seed) {
    if (!(sigma >= 0.0)) throw std::invalid_argument("sigma must be non-negative");
    CPModel model(dims, rank, 1.0);
    if (sigma == 0.0) return model;
    Engine engine = make_engine(SeedPath{master_seed, 0, 0, 0, StreamKind::init});
    std::normal_distribution<double> normal(0.0, sigma);
    for (std::size_t s = 0; s < model.order(); ++s) {
        for (double& v : model.core(s)) v = 1.0 + normal(engine);
    }
    return model;
}

SeedPath hyperplane_seed(std::uint64_t master, std::size_t sweep, std::size_t c, std::size_t i) {
    return SeedPath{master, sweep, c, i, StreamKind::hyperplane};
}

SeedPath global_seed(std::uint64_t master, std::size_t sweep) {
    return SeedPath{master, sweep, 0, 0, StreamKind::global};
}

std::vector<double> newton_update(std::span<const double> column, const LocalSystem& sys,
                                  double pivot_tol) {
    const std::vector<double> step = solve_local(sys, pivot_tol);
    std::vector<double> next(column.begin(), column.end());
    for (std::size_t a = 0; a < next.size(); ++a) next[a] -= step[a];
    return next;
}

std::vector<double> als_update(const LocalSystem& sys, std::span<const double> rhs,
                               double pivot_tol) {
    return multiply(gauss_jordan_invert(sys.hess, pivot_tol), rhs);
}

std::optional<double> quadratic_step_length(const LocalSystem& sys) {
    double gg = 0.0;
    for (double g : sys.grad) gg += g * g;
    if (gg == 0.0) return 0.0;
    const std::vector<double> hg = multiply(sys.hess, sys.grad);
    double ghg = 0.0;
    for (std::size_t a = 0; a < hg.size(); ++a) ghg += sys.grad[a] * hg[a];
    if (!(ghg > 0.0) || !std::isfinite(ghg)) return std::nullopt;
    return gg / ghg;
}

namespace {

int thread_count(const SolverConfig& cfg) {
#ifdef _OPENMP
    return cfg.threads > 0 ? cfg.threads : omp_get_max_threads();
#else
    (void)cfg;
    return 1;
#endif
}

void check_problem(const CPModel& model, const TensorOracle& oracle, const SolverConfig& cfg) {
    cfg.validate();
    if (model.dims() != oracle.dims()) {
        throw std::invalid_argument("model and oracle dimensions differ");
    }
}

struct NodeOutcome {
    double misfit = 0.0;
    double grad_sq = 0.0;
    bool skipped = false;
    bool fallback = false;
};

// Builds the local system of node (c, i) and, if update is set, writes the new
// column for the chosen method. Never throws.
NodeOutcome process_node(CPModel& model, const TensorOracle& oracle, const SolverConfig& cfg,
                         Method method, std::size_t sweep_no, std::size_t c, std::size_t i,
                         bool update) {
    NodeOutcome out;
    const SeedPath seed = hyperplane_seed(cfg.master_seed, sweep_no, c, i);
    const HyperplaneEnsemble ens =
        sample_hyperplane_ensemble(model.dims(), c, i, cfg.ens_size, seed);
    const LocalAccumulation acc = accumulate_local(model, oracle, ens);
    auto column = model.column(c, i);
    const LocalSystem sys = make_local_system(acc, column, cfg.eta, seed);
    out.misfit = sys.misfit;
    for (double g : sys.grad) out.grad_sq += g * g;
    if (!update) return out;

    std::vector<double> next;
    try {
        switch (method) {
        case Method::newton:
            next = newton_update(column, sys, cfg.pivot_tol);
            break;
        case Method::als:
            next = als_update(sys, acc.rhs, cfg.pivot_tol);
            break;
        case Method::steepest_descent: {
            double tau = cfg.tau;
            if (cfg.tau_mode == TauMode::auto_quadratic) {
                const auto step = quadratic_step_length(sys);
                if (step) {
                    tau = *step;
                } else {
                    out.fallback = true;
                }
            }
            next.assign(column.begin(), column.end());
            for (std::size_t a = 0; a < next.size(); ++a) next[a] -= tau * sys.grad[a];
            break;
        }
        }
    } catch (const SingularMatrixError&) {
        out.skipped = true;
        return out;
    }
    for (double v : next) {
        if (!std::isfinite(v)) {
            out.skipped = true;
            return out;
        }
    }
    std::copy(next.begin(), next.end(), column.begin());
    return out;
}

SweepStats sweep_impl(CPModel& model, const TensorOracle& oracle, const SolverConfig& cfg,
                      Method method, std::size_t sweep_no, bool update) {
    check_problem(model, oracle, cfg);
    const int threads = thread_count(cfg);
    std::size_t total_nodes = 0;
    double misfit_sum = 0.0;
    double grad_sq_sum = 0.0;
    SweepStats stats;

    for (std::size_t c = 0; c < model.order(); ++c) {
        const std::size_t n = model.dim(c);
        std::vector<NodeOutcome> outcomes(n);
        const auto count = static_cast<std::ptrdiff_t>(n);
#pragma omp parallel for schedule(dynamic) num_threads(threads)
        for (std::ptrdiff_t i = 0; i < count; ++i) {
            outcomes[static_cast<std::size_t>(i)] =
                process_node(model, oracle, cfg, method, sweep_no, c, static_cast<std::size_t>(i),
                             update);
        }
        for (const auto& o : outcomes) {
            misfit_sum += o.misfit;
            grad_sq_sum += o.grad_sq;
            stats.skipped_nodes += o.skipped ? 1 : 0;
            stats.tau_fallbacks += o.fallback ? 1 : 0;
        }
        total_nodes += n;
    }
    stats.eps_grid_mean = misfit_sum / static_cast<double>(total_nodes);
    stats.grad_norm = std::sqrt(grad_sq_sum / static_cast<double>(total_nodes));
    return stats;
}

double near_zero_fraction(const CPModel& model) {
    std::size_t zeros = 0;
    for (std::size_t s = 0; s < model.order(); ++s) {
        for (double v : model.core(s)) zeros += std::abs(v) < 1e-8 ? 1 : 0;
    }
    return static_cast<double>(zeros) / static_cast<double>(model.parameter_count());
}

}  // namespace

SweepStats newton_sweep(CPModel& model, const TensorOracle& oracle, const SolverConfig& cfg,
                        std::size_t sweep_no) {
    return sweep_impl(model, oracle, cfg, Method::newton, sweep_no, true);
}

SweepStats als_sweep(CPModel& model, const TensorOracle& oracle, const SolverConfig& cfg,
                     std::size_t sweep_no) {
    return sweep_impl(model, oracle, cfg, Method::als, sweep_no, true);
}

SweepStats sd_sweep(CPModel& model, const TensorOracle& oracle, const SolverConfig& cfg,
                    std::size_t sweep_no) {
    return sweep_impl(model, oracle, cfg, Method::steepest_descent, sweep_no, true);
}

SweepStats sweep(Method method, CPModel& model, const TensorOracle& oracle,
                 const SolverConfig& cfg, std::size_t sweep_no) {
    return sweep_impl(model, oracle, cfg, method, sweep_no, true);
}

SweepStats probe_sweep(const CPModel& model, const TensorOracle& oracle, const SolverConfig& cfg,
                       std::size_t sweep_no) {
    CPModel scratch = model;
    return sweep_impl(scratch, oracle, cfg, cfg.method, sweep_no, false);
}

double estimate_eps_mc(const CPModel& model, const TensorOracle& oracle, const SolverConfig& cfg,
                       std::size_t sweep_no) {
    check_problem(model, oracle, cfg);
    const GlobalEnsemble ens = sample_global_ensemble(model.dims(), cfg.global_ens_size,
                                                      global_seed(cfg.master_seed, sweep_no));
    const std::size_t count = ens.points.size();
    std::vector<double> sq(count);
    const int threads = thread_count(cfg);
    const auto n = static_cast<std::ptrdiff_t>(count);
#pragma omp parallel for schedule(static) num_threads(threads)
    for (std::ptrdiff_t e = 0; e < n; ++e) {
        const IndexView p = ens.points[static_cast<std::size_t>(e)];
        const double rv = eval_cp_unchecked(model, p) - oracle.value_unchecked(p);
        sq[static_cast<std::size_t>(e)] = rv * rv;
    }
    double sum = 0.0;
    for (double v : sq) sum += v;
    return sum / (2.0 * static_cast<double>(count));
}

RunResult run(const TensorOracle& oracle, const SolverConfig& cfg, const RunOptions& options) {
    cfg.validate();
    using Clock = std::chrono::steady_clock;

    RunResult result;
    if (options.initial) {
        result.model = *options.initial;
        if (result.model.dims() != oracle.dims()) {
            throw std::invalid_argument("initial model dimensions differ from the oracle");
        }
        if (result.model.rank() != cfg.rank) {
            throw std::invalid_argument("initial model rank differs from the configured rank");
        }
    } else {
        result.model = init_random_start(oracle.dims(), cfg.rank, cfg.sigma, cfg.master_seed);
    }

    auto emit = [&](ConvergenceRecord rec) {
        result.history.push_back(rec);
        if (options.on_record) options.on_record(rec);
    };

    if (options.record_initial) {
        const auto start = Clock::now();
        const SweepStats stats = probe_sweep(result.model, oracle, cfg, 0);
        ConvergenceRecord rec;
        rec.sweep = 0;
        rec.eps_mc = estimate_eps_mc(result.model, oracle, cfg, 0);
        rec.eps_grid_mean = stats.eps_grid_mean;
        rec.grad_norm = stats.grad_norm;
        rec.near_zero_fraction = near_zero_fraction(result.model);
        rec.wall_seconds = std::chrono::duration<double>(Clock::now() - start).count();
        emit(rec);
    }

    for (std::size_t s = 1; s <= cfg.max_sweeps; ++s) {
        const auto start = Clock::now();
        const SweepStats stats = sweep(cfg.method, result.model, oracle, cfg, s);
        ConvergenceRecord rec;
        rec.sweep = s;
        rec.eps_mc = estimate_eps_mc(result.model, oracle, cfg, s);
        rec.eps_grid_mean = stats.eps_grid_mean;
        rec.grad_norm = stats.grad_norm;
        rec.skipped_nodes = stats.skipped_nodes;
        rec.tau_fallbacks = stats.tau_fallbacks;
        rec.near_zero_fraction = near_zero_fraction(result.model);
        rec.wall_seconds = std::chrono::duration<double>(Clock::now() - start).count();
        emit(rec);
        result.sweeps = s;
        if (rec.eps_mc <= cfg.eps2) {
            result.converged = true;
            break;
        }
    }
    return result;
}

std::string convergence_csv_header() { return "sweep,eps_mc,eps_grid_mean,grad_norm,wall_seconds"; }

std::string convergence_csv_row(const ConvergenceRecord& rec) {
    return std::to_string(rec.sweep) + ',' + format_double(rec.eps_mc) + ',' +
           format_double(rec.eps_grid_mean) + ',' + format_double(rec.grad_norm) + ',' +
           format_double(rec.wall_seconds);
}

}  // namespace mccpd
