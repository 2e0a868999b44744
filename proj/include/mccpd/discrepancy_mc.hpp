#pragma once

#include "mccpd/linalg.hpp"
#include "mccpd/model.hpp"
#include "mccpd/oracle.hpp"
#include "mccpd/rng.hpp"

#include <cstddef>
#include <span>
#include <vector>

namespace mccpd {

/// Flat storage of L multi-indices of order d.
class PointSet {
public:
    PointSet() = default;
    PointSet(std::size_t order, std::size_t count) : order_(order), flat_(order * count) {}

    [[nodiscard]] std::size_t order() const { return order_; }
    [[nodiscard]] std::size_t size() const { return order_ ? flat_.size() / order_ : 0; }
    [[nodiscard]] IndexView operator[](std::size_t e) const {
        return {flat_.data() + e * order_, order_};
    }
    [[nodiscard]] std::span<std::size_t> mutable_point(std::size_t e) {
        return {flat_.data() + e * order_, order_};
    }

    friend bool operator==(const PointSet&, const PointSet&) = default;

private:
    std::size_t order_ = 0;
    std::vector<std::size_t> flat_;
};

/// L_ens uniform points on the hyperplane {p : p_coord = node}, drawn with
/// replacement.
struct HyperplaneEnsemble {
    std::size_t coord = 0;
    std::size_t node = 0;
    PointSet points;
    SeedPath seed;
};

/// L_ens_t unconstrained uniform points.
struct GlobalEnsemble {
    PointSet points;
    SeedPath seed;
};

/// Gradient and Gauss-Newton matrix of one regularized local discrepancy,
/// estimated on one hyperplane ensemble.
struct LocalSystem {
    std::vector<double> grad;  ///< d eps_{c,i} / d Q^c(alpha, i), including eta * Q
    SmallMatrix hess;          ///< Gauss-Newton matrix plus eta * I
    double eps = 0.0;          ///< sum R^2 / (2L) + eta |Q^c(., i)|^2 / 2
    double misfit = 0.0;       ///< sum R^2 / (2L), without the penalty
    SeedPath ensemble_id;
};

[[nodiscard]] HyperplaneEnsemble sample_hyperplane_ensemble(std::span<const std::size_t> dims,
                                                            std::size_t coord, std::size_t node,
                                                            std::size_t ens_size,
                                                            const SeedPath& seed);

[[nodiscard]] GlobalEnsemble sample_global_ensemble(std::span<const std::size_t> dims,
                                                    std::size_t ens_size, const SeedPath& seed);

/// eps_MC = sum_e R(p_e)^2 / (2 L_t).
[[nodiscard]] double mc_global_discrepancy(const CPModel& model, const TensorOracle& oracle,
                                           const GlobalEnsemble& ens);

[[nodiscard]] double mc_local_discrepancy(const CPModel& model, const TensorOracle& oracle,
                                          const HyperplaneEnsemble& ens, double eta);

[[nodiscard]] LocalSystem mc_local_system(const CPModel& model, const TensorOracle& oracle,
                                          const HyperplaneEnsemble& ens, double eta);

/// phi[gamma] = sum_e prod_{s != c} Q^s(gamma, p_e,s) * f(p_e) / L.
[[nodiscard]] std::vector<double> mc_als_rhs(const CPModel& model, const TensorOracle& oracle,
                                             const HyperplaneEnsemble& ens);

/// Everything one node update needs, accumulated in a single pass over the
/// ensemble. Penalty terms are not included.
struct LocalAccumulation {
    std::vector<double> grad;  ///< sum_e R_e * P_e / L
    SmallMatrix hess;          ///< sum_e P_e P_e^T / L
    std::vector<double> rhs;   ///< sum_e f_e * P_e / L
    double misfit = 0.0;       ///< sum_e R_e^2 / (2L)
};

[[nodiscard]] LocalAccumulation accumulate_local(const CPModel& model, const TensorOracle& oracle,
                                                 const HyperplaneEnsemble& ens);

/// Combines an accumulation with the Tikhonov terms for column Q^c(., i).
[[nodiscard]] LocalSystem make_local_system(const LocalAccumulation& acc,
                                            std::span<const double> column, double eta,
                                            const SeedPath& id);

/// Newton step hess^-1 * grad, computed through the explicit inverse.
[[nodiscard]] std::vector<double> solve_local(const LocalSystem& system,
                                              double pivot_tol = kDefaultPivotTol);

}  // namespace mccpd
