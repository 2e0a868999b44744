#include "mccpd/discrepancy_mc.hpp"

#include <random>
#include <stdexcept>
#include <string>

namespace mccpd {

namespace {

void check_dims(std::span<const std::size_t> dims) {
    for (std::size_t n : dims) {
        if (n < 1) throw std::out_of_range("ensemble dimension must be at least 1");
    }
}

void check_compatible(const CPModel& model, const TensorOracle& oracle, std::size_t order) {
    if (model.dims() != oracle.dims()) {
        throw std::invalid_argument("model and oracle dimensions differ");
    }
    if (order != model.order()) {
        throw std::out_of_range("ensemble order does not match the model");
    }
}

// prod_{s != c} Q^s(alpha, p_s) for every alpha.
void partial_products(const CPModel& model, IndexView p, std::size_t c, std::span<double> out) {
    const std::size_t r = model.rank();
    for (std::size_t alpha = 0; alpha < r; ++alpha) out[alpha] = 1.0;
    for (std::size_t s = 0; s < model.order(); ++s) {
        if (s == c) continue;
        const auto col = model.column(s, p[s]);
        for (std::size_t alpha = 0; alpha < r; ++alpha) out[alpha] *= col[alpha];
    }
}

}  // namespace

HyperplaneEnsemble sample_hyperplane_ensemble(std::span<const std::size_t> dims,
                                              std::size_t coord, std::size_t node,
                                              std::size_t ens_size, const SeedPath& seed) {
    check_dims(dims);
    if (coord >= dims.size()) {
        throw std::out_of_range("coordinate " + std::to_string(coord + 1) + " outside 1.." +
                                std::to_string(dims.size()));
    }
    if (node >= dims[coord]) {
        throw std::out_of_range("node " + std::to_string(node + 1) + " outside 1.." +
                                std::to_string(dims[coord]));
    }
    if (ens_size < 1) throw std::invalid_argument("ensemble size must be at least 1");

    HyperplaneEnsemble ens{coord, node, PointSet(dims.size(), ens_size), seed};
    Engine engine = make_engine(seed);
    std::vector<std::uniform_int_distribution<std::size_t>> draw;
    draw.reserve(dims.size());
    for (std::size_t n : dims) draw.emplace_back(0, n - 1);

    for (std::size_t e = 0; e < ens_size; ++e) {
        auto p = ens.points.mutable_point(e);
        for (std::size_t s = 0; s < dims.size(); ++s) {
            p[s] = s == coord ? node : draw[s](engine);
        }
    }
    return ens;
}

GlobalEnsemble sample_global_ensemble(std::span<const std::size_t> dims, std::size_t ens_size,
                                      const SeedPath& seed) {
    check_dims(dims);
    if (ens_size < 1) throw std::invalid_argument("ensemble size must be at least 1");
    GlobalEnsemble ens{PointSet(dims.size(), ens_size), seed};
    Engine engine = make_engine(seed);
    std::vector<std::uniform_int_distribution<std::size_t>> draw;
    for (std::size_t n : dims) draw.emplace_back(0, n - 1);
    for (std::size_t e = 0; e < ens_size; ++e) {
        auto p = ens.points.mutable_point(e);
        for (std::size_t s = 0; s < dims.size(); ++s) p[s] = draw[s](engine);
    }
    return ens;
}

double mc_global_discrepancy(const CPModel& model, const TensorOracle& oracle,
                             const GlobalEnsemble& ens) {
    check_compatible(model, oracle, ens.points.order());
    const std::size_t count = ens.points.size();
    if (count == 0) throw std::invalid_argument("empty ensemble");
    double sum = 0.0;
    for (std::size_t e = 0; e < count; ++e) {
        const IndexView p = ens.points[e];
        const double residual = eval_cp_unchecked(model, p) - oracle.value_unchecked(p);
        sum += residual * residual;
    }
    return sum / (2.0 * static_cast<double>(count));
}

LocalAccumulation accumulate_local(const CPModel& model, const TensorOracle& oracle,
                                   const HyperplaneEnsemble& ens) {
    check_compatible(model, oracle, ens.points.order());
    const std::size_t r = model.rank();
    const std::size_t c = ens.coord;
    const std::size_t count = ens.points.size();
    if (count == 0) throw std::invalid_argument("empty ensemble");
    const auto q = model.column(c, ens.node);

    LocalAccumulation acc{std::vector<double>(r, 0.0), SmallMatrix(r), std::vector<double>(r, 0.0),
                          0.0};
    std::vector<double> prod(r);
    double sq_sum = 0.0;
    for (std::size_t e = 0; e < count; ++e) {
        const IndexView p = ens.points[e];
        partial_products(model, p, c, prod);
        double approx = 0.0;
        for (std::size_t alpha = 0; alpha < r; ++alpha) approx += q[alpha] * prod[alpha];
        const double target = oracle.value_unchecked(p);
        const double residual = approx - target;
        sq_sum += residual * residual;
        for (std::size_t beta = 0; beta < r; ++beta) {
            const double pb = prod[beta];
            acc.grad[beta] += residual * pb;
            acc.rhs[beta] += target * pb;
            auto row = acc.hess.row(beta);
            for (std::size_t gamma = beta; gamma < r; ++gamma) row[gamma] += pb * prod[gamma];
        }
    }

    const double inv = 1.0 / static_cast<double>(count);
    for (std::size_t beta = 0; beta < r; ++beta) {
        acc.grad[beta] *= inv;
        acc.rhs[beta] *= inv;
        for (std::size_t gamma = beta; gamma < r; ++gamma) {
            acc.hess(beta, gamma) *= inv;
            acc.hess(gamma, beta) = acc.hess(beta, gamma);
        }
    }
    acc.misfit = sq_sum * 0.5 * inv;
    return acc;
}

LocalSystem make_local_system(const LocalAccumulation& acc, std::span<const double> column,
                              double eta, const SeedPath& id) {
    if (eta < 0.0) throw std::invalid_argument("eta must be non-negative");
    const std::size_t r = acc.grad.size();
    LocalSystem sys{acc.grad, acc.hess, acc.misfit, acc.misfit, id};
    double penalty = 0.0;
    for (std::size_t alpha = 0; alpha < r; ++alpha) {
        sys.grad[alpha] += eta * column[alpha];
        sys.hess(alpha, alpha) += eta;
        penalty += column[alpha] * column[alpha];
    }
    sys.eps += 0.5 * eta * penalty;
    return sys;
}

double mc_local_discrepancy(const CPModel& model, const TensorOracle& oracle,
                            const HyperplaneEnsemble& ens, double eta) {
    if (eta < 0.0) throw std::invalid_argument("eta must be non-negative");
    check_compatible(model, oracle, ens.points.order());
    const std::size_t count = ens.points.size();
    if (count == 0) throw std::invalid_argument("empty ensemble");
    double sum = 0.0;
    for (std::size_t e = 0; e < count; ++e) {
        const IndexView p = ens.points[e];
        const double residual = eval_cp_unchecked(model, p) - oracle.value_unchecked(p);
        sum += residual * residual;
    }
    double penalty = 0.0;
    for (double v : model.column(ens.coord, ens.node)) penalty += v * v;
    return sum / (2.0 * static_cast<double>(count)) + 0.5 * eta * penalty;
}

LocalSystem mc_local_system(const CPModel& model, const TensorOracle& oracle,
                            const HyperplaneEnsemble& ens, double eta) {
    const LocalAccumulation acc = accumulate_local(model, oracle, ens);
    return make_local_system(acc, model.column(ens.coord, ens.node), eta, ens.seed);
}

std::vector<double> mc_als_rhs(const CPModel& model, const TensorOracle& oracle,
                               const HyperplaneEnsemble& ens) {
    check_compatible(model, oracle, ens.points.order());
    const std::size_t r = model.rank();
    const std::size_t count = ens.points.size();
    if (count == 0) throw std::invalid_argument("empty ensemble");
    std::vector<double> phi(r, 0.0);
    std::vector<double> prod(r);
    for (std::size_t e = 0; e < count; ++e) {
        const IndexView p = ens.points[e];
        partial_products(model, p, ens.coord, prod);
        const double target = oracle.value_unchecked(p);
        for (std::size_t gamma = 0; gamma < r; ++gamma) phi[gamma] += target * prod[gamma];
    }
    for (double& v : phi) v /= static_cast<double>(count);
    return phi;
}

std::vector<double> solve_local(const LocalSystem& system, double pivot_tol) {
    const SmallMatrix inverse = gauss_jordan_invert(system.hess, pivot_tol);
    return multiply(inverse, system.grad);
}

}  // namespace mccpd
