#include "mccpd/oracle.hpp"

#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <stdexcept>

namespace mccpd {

std::string to_string(OracleKind kind) {
    switch (kind) {
    case OracleKind::f38: return "analytic-f38";
    case OracleKind::f39: return "analytic-f39";
    case OracleKind::dense_array: return "dense-array";
    case OracleKind::rank_one_product: return "rank-one-product";
    case OracleKind::cp_synthetic: return "cp-synthetic";
    }
    return "unknown";
}

std::string to_string(F39Radius mode) {
    return mode == F39Radius::linear ? "linear" : "squared";
}

F39Radius parse_f39_radius(const std::string& text) {
    if (text == "linear") return F39Radius::linear;
    if (text == "squared") return F39Radius::squared;
    throw std::invalid_argument("f39_rad must be 'linear' or 'squared', got '" + text + "'");
}

double eval_f38(IndexView p) {
    double sum = 0.0;
    for (std::size_t idx : p) {
        const double x = grid_coordinate(idx) / 5.0;
        sum += x * x;
    }
    return 1.0 / std::sqrt(sum);
}

double eval_f39(IndexView p, F39Radius mode) {
    double deviation = 0.0;
    double sines = 0.0;
    for (std::size_t idx : p) {
        const double dev = static_cast<double>(idx + 1) - 50.0;
        deviation += mode == F39Radius::linear ? dev : dev * dev;
        sines += std::sin(grid_coordinate(idx) / 5.0);
    }
    const double rad = 0.001 * deviation;
    return 5.0 * std::exp(-rad * rad) + sines;
}

std::size_t checked_node_count(std::span<const std::size_t> dims, std::size_t cap) {
    std::size_t total = 1;
    for (std::size_t n : dims) {
        if (n != 0 && total > cap / n) {
            throw std::length_error("tensor with " + std::to_string(dims.size()) +
                                    " coordinates exceeds the dense cap of " +
                                    std::to_string(cap) + " nodes");
        }
        total *= n;
    }
    if (total > cap) {
        throw std::length_error("tensor has " + std::to_string(total) +
                                " nodes, above the dense cap of " + std::to_string(cap));
    }
    return total;
}

namespace {

void check_dims(const std::vector<std::size_t>& dims) {
    if (dims.size() < 2) throw std::invalid_argument("oracle order must be at least 2");
    for (std::size_t n : dims) {
        if (n < 1) throw std::invalid_argument("oracle dimension must be at least 1");
    }
}

}  // namespace

TensorOracle::TensorOracle(std::vector<std::size_t> dims, Impl impl)
    : dims_(std::move(dims)), impl_(std::move(impl)) {
    check_dims(dims_);
}

TensorOracle TensorOracle::f38(std::vector<std::size_t> dims) {
    return TensorOracle(std::move(dims), F38{});
}

TensorOracle TensorOracle::f39(std::vector<std::size_t> dims, F39Radius mode) {
    return TensorOracle(std::move(dims), F39{mode});
}

TensorOracle TensorOracle::dense(std::vector<std::size_t> dims, std::vector<double> values,
                                 std::size_t cap) {
    check_dims(dims);
    const std::size_t count = checked_node_count(dims, cap);
    if (values.size() != count) {
        throw std::invalid_argument("dense oracle expects " + std::to_string(count) +
                                    " values, got " + std::to_string(values.size()));
    }
    for (double v : values) {
        if (!std::isfinite(v)) throw std::invalid_argument("dense oracle value is not finite");
    }
    std::vector<std::size_t> strides(dims.size());
    std::size_t stride = 1;
    for (std::size_t s = dims.size(); s-- > 0;) {
        strides[s] = stride;
        stride *= dims[s];
    }
    return TensorOracle(std::move(dims), Dense{std::move(strides), std::move(values)});
}

TensorOracle TensorOracle::rank_one_product(std::vector<std::vector<double>> factors) {
    std::vector<std::size_t> dims;
    dims.reserve(factors.size());
    for (const auto& f : factors) {
        for (double v : f) {
            if (!std::isfinite(v)) throw std::invalid_argument("rank-one factor is not finite");
        }
        dims.push_back(f.size());
    }
    return TensorOracle(std::move(dims), RankOne{std::move(factors)});
}

TensorOracle TensorOracle::cp_synthetic(CPModel model) {
    model.check_finite();
    auto dims = model.dims();
    return TensorOracle(std::move(dims), Synthetic{std::move(model)});
}

OracleKind TensorOracle::kind() const {
    switch (impl_.index()) {
    case 0: return OracleKind::f38;
    case 1: return OracleKind::f39;
    case 2: return OracleKind::dense_array;
    case 3: return OracleKind::rank_one_product;
    default: return OracleKind::cp_synthetic;
    }
}

double TensorOracle::operator()(IndexView p) const {
    check_index(dims_, p);
    return value_unchecked(p);
}

double TensorOracle::value_unchecked(IndexView p) const {
    struct Visitor {
        IndexView p;
        double operator()(const F38&) const { return eval_f38(p); }
        double operator()(const F39& f) const { return eval_f39(p, f.mode); }
        double operator()(const Dense& d) const {
            std::size_t offset = 0;
            for (std::size_t s = 0; s < p.size(); ++s) offset += p[s] * d.strides[s];
            return d.values[offset];
        }
        double operator()(const RankOne& r) const {
            double v = 1.0;
            for (std::size_t s = 0; s < p.size(); ++s) v *= r.factors[s][p[s]];
            return v;
        }
        double operator()(const Synthetic& m) const { return eval_cp_unchecked(m.model, p); }
    };
    return std::visit(Visitor{p}, impl_);
}

TensorOracle read_dense(std::istream& in, std::size_t cap) {
    std::string magic;
    long long d = 0;
    if (!(in >> magic) || magic != "DENSE1") throw std::runtime_error("DENSE1: missing magic header");
    if (!(in >> d) || d < 2) throw std::runtime_error("DENSE1: bad order");
    std::vector<std::size_t> dims(static_cast<std::size_t>(d));
    for (auto& n : dims) {
        long long v = 0;
        if (!(in >> v) || v < 1) throw std::runtime_error("DENSE1: bad dimension line");
        n = static_cast<std::size_t>(v);
    }
    const std::size_t count = checked_node_count(dims, cap);
    std::vector<double> values(count);
    std::string token;
    for (auto& v : values) {
        if (!(in >> token)) throw std::runtime_error("DENSE1: truncated data");
        char* end = nullptr;
        v = std::strtod(token.c_str(), &end);
        if (end != token.c_str() + token.size()) {
            throw std::runtime_error("DENSE1: malformed value '" + token + "'");
        }
    }
    if (in >> token) throw std::runtime_error("DENSE1: trailing data");
    return TensorOracle::dense(std::move(dims), std::move(values), cap);
}

TensorOracle load_dense(const std::string& path, std::size_t cap) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open '" + path + "'");
    return read_dense(in, cap);
}

void write_dense(std::ostream& out, const std::vector<std::size_t>& dims,
                 const std::vector<double>& values) {
    out << "DENSE1 " << dims.size() << '\n';
    for (std::size_t s = 0; s < dims.size(); ++s) out << (s ? " " : "") << dims[s];
    out << '\n';
    for (double v : values) out << format_double(v) << '\n';
}

double residual_at(const CPModel& model, const TensorOracle& oracle, IndexView p) {
    if (model.dims() != oracle.dims()) {
        throw std::invalid_argument("model and oracle dimensions differ");
    }
    return eval_cp(model, p) - oracle(p);
}

}  // namespace mccpd
