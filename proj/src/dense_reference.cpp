#include "mccpd/dense_reference.hpp"

#include <limits>
#include <stdexcept>
#include <string>

namespace mccpd {

namespace {

constexpr std::size_t kNoPin = std::numeric_limits<std::size_t>::max();

void check_inputs(const CPModel& model, const TensorOracle& oracle, std::size_t cap) {
    if (model.dims() != oracle.dims()) {
        throw std::invalid_argument("model and oracle dimensions differ");
    }
    (void)checked_node_count(model.dims(), cap);
}

void check_node(const CPModel& model, std::size_t c, std::size_t i) {
    if (c >= model.order()) {
        throw std::out_of_range("coordinate " + std::to_string(c + 1) + " outside 1.." +
                                std::to_string(model.order()));
    }
    if (i >= model.dim(c)) {
        throw std::out_of_range("node " + std::to_string(i + 1) + " outside 1.." +
                                std::to_string(model.dim(c)));
    }
}

// Visits nodes in lexicographic order (first index slowest). When pin_coord is
// set, only nodes with p[pin_coord] == pin_node are visited, in the same
// relative order as a full traversal.
template <typename Fn>
void for_each_node(const std::vector<std::size_t>& dims, std::size_t pin_coord,
                   std::size_t pin_node, Fn&& fn) {
    const std::size_t d = dims.size();
    MultiIndex p(d, 0);
    if (pin_coord != kNoPin) p[pin_coord] = pin_node;
    while (true) {
        fn(IndexView(p));
        std::size_t s = d;
        while (s-- > 0) {
            if (s == pin_coord) continue;
            if (++p[s] < dims[s]) break;
            p[s] = 0;
        }
        if (s == static_cast<std::size_t>(-1)) return;
    }
}

double product_except(const std::vector<std::size_t>& dims, std::size_t skip) {
    double total = 1.0;
    for (std::size_t s = 0; s < dims.size(); ++s) {
        if (s != skip) total *= static_cast<double>(dims[s]);
    }
    return total;
}

double residual(const CPModel& model, const TensorOracle& oracle, IndexView p) {
    return eval_cp_unchecked(model, p) - oracle.value_unchecked(p);
}

void partial_products(const CPModel& model, IndexView p, std::size_t c, std::vector<double>& out) {
    const std::size_t r = model.rank();
    out.assign(r, 1.0);
    for (std::size_t s = 0; s < model.order(); ++s) {
        if (s == c) continue;
        for (std::size_t alpha = 0; alpha < r; ++alpha) out[alpha] *= model.at(s, alpha, p[s]);
    }
}

}  // namespace

double dense_global_discrepancy(const CPModel& model, const TensorOracle& oracle, std::size_t cap) {
    check_inputs(model, oracle, cap);
    double sum = 0.0;
    for_each_node(model.dims(), kNoPin, 0, [&](IndexView p) {
        const double rv = residual(model, oracle, p);
        sum += rv * rv;
    });
    return sum / (2.0 * product_except(model.dims(), kNoPin));
}

double dense_local_discrepancy(const CPModel& model, const TensorOracle& oracle, std::size_t c,
                               std::size_t i, std::size_t cap) {
    check_inputs(model, oracle, cap);
    check_node(model, c, i);
    double sum = 0.0;
    for_each_node(model.dims(), c, i, [&](IndexView p) {
        const double rv = residual(model, oracle, p);
        sum += rv * rv;
    });
    return sum / (2.0 * product_except(model.dims(), c));
}

std::vector<double> dense_local_gradient(const CPModel& model, const TensorOracle& oracle,
                                         std::size_t c, std::size_t i, std::size_t cap) {
    check_inputs(model, oracle, cap);
    check_node(model, c, i);
    const std::size_t r = model.rank();
    std::vector<double> grad(r, 0.0);
    std::vector<double> prod;
    for_each_node(model.dims(), c, i, [&](IndexView p) {
        const double rv = residual(model, oracle, p);
        partial_products(model, p, c, prod);
        for (std::size_t alpha = 0; alpha < r; ++alpha) grad[alpha] += rv * prod[alpha];
    });
    const double divisor = product_except(model.dims(), c);
    for (double& g : grad) g /= divisor;
    return grad;
}

SmallMatrix dense_local_hessian(const CPModel& model, const TensorOracle& oracle, std::size_t c,
                                std::size_t i, std::size_t cap) {
    check_inputs(model, oracle, cap);
    check_node(model, c, i);
    const std::size_t r = model.rank();
    SmallMatrix hess(r);
    std::vector<double> prod;
    for_each_node(model.dims(), c, i, [&](IndexView p) {
        partial_products(model, p, c, prod);
        for (std::size_t b = 0; b < r; ++b) {
            for (std::size_t g = 0; g < r; ++g) hess(b, g) += prod[b] * prod[g];
        }
    });
    const double divisor = product_except(model.dims(), c);
    for (std::size_t b = 0; b < r; ++b) {
        for (std::size_t g = 0; g < r; ++g) hess(b, g) /= divisor;
    }
    return hess;
}

CPModel dense_global_gradient(const CPModel& model, const TensorOracle& oracle, std::size_t cap) {
    return dense_report(model, oracle, cap).grad;
}

DenseReport dense_report(const CPModel& model, const TensorOracle& oracle, std::size_t cap) {
    check_inputs(model, oracle, cap);
    const std::size_t d = model.order();
    const std::size_t r = model.rank();

    DenseReport report;
    report.grad = CPModel(model.dims(), r, 0.0);
    report.eps_local.resize(d);
    for (std::size_t c = 0; c < d; ++c) report.eps_local[c].assign(model.dim(c), 0.0);

    double sum = 0.0;
    std::vector<double> prod;
    // Each hyperplane sum is accumulated in the same order as the single-
    // hyperplane routines above, so the sums agree bit for bit.
    for_each_node(model.dims(), kNoPin, 0, [&](IndexView p) {
        const double rv = residual(model, oracle, p);
        sum += rv * rv;
        for (std::size_t c = 0; c < d; ++c) {
            report.eps_local[c][p[c]] += rv * rv;
            partial_products(model, p, c, prod);
            auto col = report.grad.column(c, p[c]);
            for (std::size_t alpha = 0; alpha < r; ++alpha) col[alpha] += rv * prod[alpha];
        }
    });

    const double total = product_except(model.dims(), kNoPin);
    report.eps_global = sum / (2.0 * total);
    for (std::size_t c = 0; c < d; ++c) {
        const double hyper = product_except(model.dims(), c);
        for (double& e : report.eps_local[c]) e /= 2.0 * hyper;
        for (double& g : report.grad.core(c)) g /= total;
    }
    return report;
}

}  // namespace mccpd
