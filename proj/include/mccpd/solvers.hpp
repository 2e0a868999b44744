#pragma once

#include "mccpd/discrepancy_mc.hpp"
#include "mccpd/linalg.hpp"
#include "mccpd/model.hpp"
#include "mccpd/oracle.hpp"
#include "mccpd/rng.hpp"

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace mccpd {

enum class Method { newton, steepest_descent, als };
enum class TauMode { auto_quadratic, fixed };

[[nodiscard]] std::string to_string(Method method);
[[nodiscard]] Method parse_method(const std::string& text);

struct SolverConfig {
    Method method = Method::newton;
    std::size_t rank = 20;
    std::size_t ens_size = 1000;          ///< points per hyperplane ensemble
    std::size_t global_ens_size = 100000; ///< points for the eps_MC estimate
    double eta = 1e-5;                    ///< Tikhonov coefficient
    double sigma = 0.1;                   ///< random-start dispersion
    double eps2 = 1e-6;                   ///< stop once eps_MC <= eps2
    std::size_t max_sweeps = 50;
    TauMode tau_mode = TauMode::auto_quadratic;
    double tau = 0.1;                     ///< fixed step, also the fallback step
    std::uint64_t master_seed = kDefaultMasterSeed;
    F39Radius f39_rad = F39Radius::linear;
    double pivot_tol = kDefaultPivotTol;
    int threads = 0;                      ///< 0 = OpenMP default

    /// Throws std::invalid_argument on an out-of-range field.
    void validate() const;
};

struct ConvergenceRecord {
    std::size_t sweep = 0;
    double eps_mc = 0.0;
    double eps_grid_mean = 0.0;   ///< mean local misfit over all d * N nodes
    double grad_norm = 0.0;       ///< RMS of the local gradient norms
    double wall_seconds = 0.0;    ///< time spent on this sweep and its eps_MC
    std::size_t skipped_nodes = 0;
    std::size_t tau_fallbacks = 0;
    double near_zero_fraction = 0.0;  ///< share of core entries with |Q| < 1e-8
};

/// Per-sweep statistics gathered from the local systems before each update.
struct SweepStats {
    double eps_grid_mean = 0.0;
    double grad_norm = 0.0;
    std::size_t skipped_nodes = 0;
    std::size_t tau_fallbacks = 0;
};

/// Q = 1 + Normal(0, sigma^2) entrywise.
[[nodiscard]] CPModel init_random_start(const std::vector<std::size_t>& dims, std::size_t rank,
                                        double sigma, std::uint64_t master_seed);

/// Seed path of the ensemble used for node i of coordinate c in a sweep.
[[nodiscard]] SeedPath hyperplane_seed(std::uint64_t master, std::size_t sweep, std::size_t c,
                                       std::size_t i);
/// Seed path of the eps_MC ensemble evaluated after a sweep.
[[nodiscard]] SeedPath global_seed(std::uint64_t master, std::size_t sweep);

// One pass over all d * N nodes. Coordinates are processed in ascending order
// and each sees the updates of the previous ones; nodes within a coordinate
// read the same snapshot and may run concurrently.
SweepStats newton_sweep(CPModel& model, const TensorOracle& oracle, const SolverConfig& cfg,
                        std::size_t sweep_no);
SweepStats als_sweep(CPModel& model, const TensorOracle& oracle, const SolverConfig& cfg,
                     std::size_t sweep_no);
SweepStats sd_sweep(CPModel& model, const TensorOracle& oracle, const SolverConfig& cfg,
                    std::size_t sweep_no);
SweepStats sweep(Method method, CPModel& model, const TensorOracle& oracle,
                 const SolverConfig& cfg, std::size_t sweep_no);

/// Local statistics of the current model without updating it.
[[nodiscard]] SweepStats probe_sweep(const CPModel& model, const TensorOracle& oracle,
                                     const SolverConfig& cfg, std::size_t sweep_no);

/// Node update rules on an already-built local system.
[[nodiscard]] std::vector<double> newton_update(std::span<const double> column,
                                                const LocalSystem& sys, double pivot_tol);
[[nodiscard]] std::vector<double> als_update(const LocalSystem& sys, std::span<const double> rhs,
                                             double pivot_tol);
/// Exact minimiser of the local quadratic model along -grad, or nullopt when
/// the curvature g^T H g is not positive.
[[nodiscard]] std::optional<double> quadratic_step_length(const LocalSystem& sys);

/// eps_MC of the model on the ensemble reserved for the given sweep.
[[nodiscard]] double estimate_eps_mc(const CPModel& model, const TensorOracle& oracle,
                                     const SolverConfig& cfg, std::size_t sweep_no);

struct RunOptions {
    /// Start from this model instead of init_random_start.
    std::optional<CPModel> initial;
    /// Prepend a sweep-0 record describing the starting model.
    bool record_initial = false;
    std::function<void(const ConvergenceRecord&)> on_record;
};

struct RunResult {
    CPModel model;
    std::vector<ConvergenceRecord> history;
    bool converged = false;
    std::size_t sweeps = 0;
};

[[nodiscard]] RunResult run(const TensorOracle& oracle, const SolverConfig& cfg,
                            const RunOptions& options = {});

/// "sweep,eps_mc,eps_grid_mean,grad_norm,wall_seconds"
[[nodiscard]] std::string convergence_csv_header();
[[nodiscard]] std::string convergence_csv_row(const ConvergenceRecord& rec);

}  // namespace mccpd
