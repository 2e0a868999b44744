#pragma once

// Brute-force discrepancies, gradients and Gauss-Newton matrices summed over
// every node of the tensor. Only usable for small tensors (at most kDenseCap
// nodes); these routines are the reference for the Monte-Carlo estimators.

#include "mccpd/linalg.hpp"
#include "mccpd/model.hpp"
#include "mccpd/oracle.hpp"

#include <cstddef>
#include <vector>

namespace mccpd {

/// sum over all nodes of R^2 / (2 prod N_s).
[[nodiscard]] double dense_global_discrepancy(const CPModel& model, const TensorOracle& oracle,
                                              std::size_t cap = kDenseCap);

/// sum over the hyperplane p_c = i of R^2 / (2 prod_{s != c} N_s).
[[nodiscard]] double dense_local_discrepancy(const CPModel& model, const TensorOracle& oracle,
                                             std::size_t c, std::size_t i,
                                             std::size_t cap = kDenseCap);

/// d eps_{c,i} / d Q^c(alpha, i), length r.
[[nodiscard]] std::vector<double> dense_local_gradient(const CPModel& model,
                                                       const TensorOracle& oracle, std::size_t c,
                                                       std::size_t i, std::size_t cap = kDenseCap);

/// Gauss-Newton matrix of eps_{c,i} with respect to Q^c(., i).
[[nodiscard]] SmallMatrix dense_local_hessian(const CPModel& model, const TensorOracle& oracle,
                                              std::size_t c, std::size_t i,
                                              std::size_t cap = kDenseCap);

/// d eps_global / d Q^c(alpha, i) for every entry, stored in a model-shaped
/// container (entry (c, alpha, i) at gradient.at(c, alpha, i)).
[[nodiscard]] CPModel dense_global_gradient(const CPModel& model, const TensorOracle& oracle,
                                            std::size_t cap = kDenseCap);

struct DenseReport {
    double eps_global = 0.0;
    std::vector<std::vector<double>> eps_local;  ///< eps_local[c][i]
    CPModel grad;                                ///< global gradient
};

[[nodiscard]] DenseReport dense_report(const CPModel& model, const TensorOracle& oracle,
                                       std::size_t cap = kDenseCap);

}  // namespace mccpd
