#pragma once

#include <cstddef>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

namespace mccpd {

/// Multi-index into a d-way tensor. Components are 0-based in the C++ and
/// Python APIs; files and CLI output use 1-based node numbers.
using MultiIndex = std::vector<std::size_t>;
using IndexView = std::span<const std::size_t>;

/// Rank-r canonical (CP) model of a d-way tensor.
///
/// Core s holds Q^s(alpha, i) for alpha < r and i < N_s. Storage is
/// node-major: the r layer values belonging to node i of coordinate s are
/// contiguous, so a single node update touches one contiguous column.
class CPModel {
public:
    CPModel() = default;
    CPModel(std::vector<std::size_t> dims, std::size_t rank, double fill = 0.0);

    [[nodiscard]] std::size_t order() const { return dims_.size(); }
    [[nodiscard]] std::size_t rank() const { return rank_; }
    [[nodiscard]] const std::vector<std::size_t>& dims() const { return dims_; }
    [[nodiscard]] std::size_t dim(std::size_t s) const { return dims_[s]; }

    /// Q^s(alpha, i) for all alpha.
    [[nodiscard]] std::span<double> column(std::size_t s, std::size_t i) {
        return {cores_[s].data() + i * rank_, rank_};
    }
    [[nodiscard]] std::span<const double> column(std::size_t s, std::size_t i) const {
        return {cores_[s].data() + i * rank_, rank_};
    }

    [[nodiscard]] double& at(std::size_t s, std::size_t alpha, std::size_t i) {
        return cores_[s][i * rank_ + alpha];
    }
    [[nodiscard]] double at(std::size_t s, std::size_t alpha, std::size_t i) const {
        return cores_[s][i * rank_ + alpha];
    }

    /// Raw node-major storage of core s (N_s * r values).
    [[nodiscard]] std::span<double> core(std::size_t s) { return cores_[s]; }
    [[nodiscard]] std::span<const double> core(std::size_t s) const { return cores_[s]; }

    /// Total number of core parameters, r * sum(N_s).
    [[nodiscard]] std::size_t parameter_count() const;

    /// Throws std::invalid_argument if any entry is NaN or infinite.
    void check_finite() const;

    /// Throws std::out_of_range if p does not address a node of this model.
    void check_index(IndexView p) const;

    friend bool operator==(const CPModel&, const CPModel&) = default;

private:
    std::vector<std::size_t> dims_;
    std::size_t rank_ = 0;
    std::vector<std::vector<double>> cores_;
};

/// sum_alpha prod_s Q^s(alpha, p_s). Bounds-checked.
[[nodiscard]] double eval_cp(const CPModel& model, IndexView p);

/// Unchecked variant for hot loops where the index is already known valid.
[[nodiscard]] double eval_cp_unchecked(const CPModel& model, IndexView p);

/// Throws std::out_of_range unless p has dims.size() components, each below its bound.
void check_index(std::span<const std::size_t> dims, IndexView p);

/// Converts 1-based node numbers to a 0-based multi-index, validating bounds.
[[nodiscard]] MultiIndex from_one_based(std::span<const std::size_t> dims,
                                        std::span<const long long> nodes);

// CPD1 text format:
//   CPD1 <d> <r>
//   <N_1> ... <N_d>
//   then for each coordinate s, r lines of N_s values (row alpha of core s),
//   written with 17 significant digits.
void write_cpd(std::ostream& out, const CPModel& model);
[[nodiscard]] CPModel read_cpd(std::istream& in);
void save_cpd(const std::string& path, const CPModel& model);
[[nodiscard]] CPModel load_cpd(const std::string& path);

/// Formats a double with 17 significant digits (round-trip precision).
[[nodiscard]] std::string format_double(double value);

}  // namespace mccpd
