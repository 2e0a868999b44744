#include "mccpd/model.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>

namespace mccpd {

CPModel::CPModel(std::vector<std::size_t> dims, std::size_t rank, double fill)
    : dims_(std::move(dims)), rank_(rank) {
    if (dims_.size() < 2) {
        throw std::invalid_argument("CP model order must be at least 2, got " +
                                    std::to_string(dims_.size()));
    }
    if (rank_ < 1) {
        throw std::invalid_argument("CP model rank must be at least 1");
    }
    cores_.reserve(dims_.size());
    for (std::size_t s = 0; s < dims_.size(); ++s) {
        if (dims_[s] < 1) {
            throw std::invalid_argument("coordinate " + std::to_string(s + 1) +
                                        " has zero nodes");
        }
        cores_.emplace_back(dims_[s] * rank_, fill);
    }
}

std::size_t CPModel::parameter_count() const {
    std::size_t total = 0;
    for (const auto& c : cores_) total += c.size();
    return total;
}

void CPModel::check_finite() const {
    for (std::size_t s = 0; s < cores_.size(); ++s) {
        for (double v : cores_[s]) {
            if (!std::isfinite(v)) {
                throw std::invalid_argument("core " + std::to_string(s + 1) +
                                            " contains a non-finite entry");
            }
        }
    }
}

void CPModel::check_index(IndexView p) const { mccpd::check_index(dims_, p); }

void check_index(std::span<const std::size_t> dims, IndexView p) {
    if (p.size() != dims.size()) {
        throw std::out_of_range("multi-index has " + std::to_string(p.size()) +
                                " components, expected " + std::to_string(dims.size()));
    }
    for (std::size_t s = 0; s < dims.size(); ++s) {
        if (p[s] >= dims[s]) {
            throw std::out_of_range("index component " + std::to_string(s + 1) + " = " +
                                    std::to_string(p[s] + 1) + " outside 1.." +
                                    std::to_string(dims[s]));
        }
    }
}

MultiIndex from_one_based(std::span<const std::size_t> dims, std::span<const long long> nodes) {
    if (nodes.size() != dims.size()) {
        throw std::out_of_range("multi-index has " + std::to_string(nodes.size()) +
                                " components, expected " + std::to_string(dims.size()));
    }
    MultiIndex p(nodes.size());
    for (std::size_t s = 0; s < nodes.size(); ++s) {
        if (nodes[s] < 1 || static_cast<std::size_t>(nodes[s]) > dims[s]) {
            throw std::out_of_range("index component " + std::to_string(s + 1) + " = " +
                                    std::to_string(nodes[s]) + " outside 1.." +
                                    std::to_string(dims[s]));
        }
        p[s] = static_cast<std::size_t>(nodes[s] - 1);
    }
    return p;
}

double eval_cp_unchecked(const CPModel& model, IndexView p) {
    const std::size_t r = model.rank();
    double total = 0.0;
    for (std::size_t alpha = 0; alpha < r; ++alpha) {
        double term = 1.0;
        for (std::size_t s = 0; s < model.order(); ++s) {
            term *= model.at(s, alpha, p[s]);
        }
        total += term;
    }
    return total;
}

double eval_cp(const CPModel& model, IndexView p) {
    model.check_index(p);
    return eval_cp_unchecked(model, p);
}

std::string format_double(double value) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", value);
    return buf;
}

void write_cpd(std::ostream& out, const CPModel& model) {
    out << "CPD1 " << model.order() << ' ' << model.rank() << '\n';
    for (std::size_t s = 0; s < model.order(); ++s) {
        out << (s ? " " : "") << model.dim(s);
    }
    out << '\n';
    for (std::size_t s = 0; s < model.order(); ++s) {
        for (std::size_t alpha = 0; alpha < model.rank(); ++alpha) {
            for (std::size_t i = 0; i < model.dim(s); ++i) {
                out << (i ? " " : "") << format_double(model.at(s, alpha, i));
            }
            out << '\n';
        }
    }
}

namespace {

// Reads one whitespace-delimited token and parses it as a double with strtod so
// that values written by format_double round-trip exactly.
double read_value(std::istream& in, std::size_t s, std::size_t alpha) {
    std::string token;
    if (!(in >> token)) {
        throw std::runtime_error("CPD1: truncated data in core " + std::to_string(s + 1) +
                                 ", row " + std::to_string(alpha + 1));
    }
    char* end = nullptr;
    const double v = std::strtod(token.c_str(), &end);
    if (end != token.c_str() + token.size()) {
        throw std::runtime_error("CPD1: malformed value '" + token + "'");
    }
    return v;
}

}  // namespace

CPModel read_cpd(std::istream& in) {
    std::string magic;
    long long d = 0;
    long long r = 0;
    if (!(in >> magic) || magic != "CPD1") {
        throw std::runtime_error("CPD1: missing magic header");
    }
    if (!(in >> d >> r) || d < 2 || r < 1) {
        throw std::runtime_error("CPD1: bad order/rank header");
    }
    std::vector<std::size_t> dims(static_cast<std::size_t>(d));
    for (auto& n : dims) {
        long long v = 0;
        if (!(in >> v) || v < 1) throw std::runtime_error("CPD1: bad dimension line");
        n = static_cast<std::size_t>(v);
    }
    CPModel model(dims, static_cast<std::size_t>(r));
    for (std::size_t s = 0; s < model.order(); ++s) {
        for (std::size_t alpha = 0; alpha < model.rank(); ++alpha) {
            for (std::size_t i = 0; i < model.dim(s); ++i) {
                model.at(s, alpha, i) = read_value(in, s, alpha);
            }
        }
    }
    std::string extra;
    if (in >> extra) throw std::runtime_error("CPD1: trailing data after last core");
    model.check_finite();
    return model;
}

void save_cpd(const std::string& path, const CPModel& model) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open '" + path + "' for writing");
    write_cpd(out, model);
    if (!out) throw std::runtime_error("write to '" + path + "' failed");
}

CPModel load_cpd(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open '" + path + "'");
    return read_cpd(in);
}

}  // namespace mccpd
