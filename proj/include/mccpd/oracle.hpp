#pragma once

#include "mccpd/model.hpp"

#include <cstddef>
#include <iosfwd>
#include <string>
#include <variant>
#include <vector>

namespace mccpd {

/// Largest dense array accepted by the dense oracle and the brute-force
/// reference routines.
inline constexpr std::size_t kDenseCap = 10'000'000;

enum class OracleKind { f38, f39, dense_array, rank_one_product, cp_synthetic };

/// How the Gaussian radius of the Gaussian-plus-sines test function is built
/// from the node deviations (i_s - 50).
///   linear:  rad = 0.001 * sum_s (i_s - 50)
///   squared: rad = 0.001 * sum_s (i_s - 50)^2
enum class F39Radius { linear, squared };

[[nodiscard]] std::string to_string(OracleKind kind);
[[nodiscard]] std::string to_string(F39Radius mode);
[[nodiscard]] F39Radius parse_f39_radius(const std::string& text);

/// Node i (0-based) sits at coordinate value x = i + 1.
[[nodiscard]] inline double grid_coordinate(std::size_t i) { return static_cast<double>(i + 1); }

/// 1 / sqrt(sum_s (x_s / 5)^2) on the grid x_s = i_s + 1.
[[nodiscard]] double eval_f38(IndexView p);

/// 5 exp(-rad^2) + sum_s sin(x_s / 5), sines in radians.
[[nodiscard]] double eval_f39(IndexView p, F39Radius mode = F39Radius::linear);

/// Exact tensor, evaluable lazily at any node.
class TensorOracle {
public:
    static TensorOracle f38(std::vector<std::size_t> dims);
    static TensorOracle f39(std::vector<std::size_t> dims, F39Radius mode = F39Radius::linear);

    /// Row-major values with the first index varying slowest.
    static TensorOracle dense(std::vector<std::size_t> dims, std::vector<double> values,
                              std::size_t cap = kDenseCap);

    /// prod_s factors[s][i_s].
    static TensorOracle rank_one_product(std::vector<std::vector<double>> factors);

    /// Tensor defined by an existing CP model.
    static TensorOracle cp_synthetic(CPModel model);

    [[nodiscard]] OracleKind kind() const;
    [[nodiscard]] const std::vector<std::size_t>& dims() const { return dims_; }
    [[nodiscard]] std::size_t order() const { return dims_.size(); }

    /// Bounds-checked evaluation.
    [[nodiscard]] double operator()(IndexView p) const;
    [[nodiscard]] double value_unchecked(IndexView p) const;

private:
    struct F38 {};
    struct F39 {
        F39Radius mode;
    };
    struct Dense {
        std::vector<std::size_t> strides;
        std::vector<double> values;
    };
    struct RankOne {
        std::vector<std::vector<double>> factors;
    };
    struct Synthetic {
        CPModel model;
    };
    using Impl = std::variant<F38, F39, Dense, RankOne, Synthetic>;

    TensorOracle(std::vector<std::size_t> dims, Impl impl);

    std::vector<std::size_t> dims_;
    Impl impl_;
};

/// eval_cp(model, p) - oracle(p), bounds-checked.
[[nodiscard]] double residual_at(const CPModel& model, const TensorOracle& oracle, IndexView p);

// DENSE1 text format:
//   DENSE1 <d>
//   <N_1> ... <N_d>
//   prod(N_s) values, whitespace separated, first index varying slowest.
[[nodiscard]] TensorOracle read_dense(std::istream& in, std::size_t cap = kDenseCap);
[[nodiscard]] TensorOracle load_dense(const std::string& path, std::size_t cap = kDenseCap);
void write_dense(std::ostream& out, const std::vector<std::size_t>& dims,
                 const std::vector<double>& values);

/// Product of dims, throwing std::length_error if it exceeds cap.
[[nodiscard]] std::size_t checked_node_count(std::span<const std::size_t> dims, std::size_t cap);

}  // namespace mccpd
