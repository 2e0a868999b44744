#pragma once

// Experiment configuration and the command implementations behind the mccpd
// CLI. Commands write to caller-supplied streams and return process exit codes
// so they can be exercised directly from tests.

#include "mccpd/oracle.hpp"
#include "mccpd/solvers.hpp"

#include <cstddef>
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>

namespace mccpd {

inline constexpr int kExitOk = 0;
inline constexpr int kExitError = 1;
inline constexpr int kExitNotConverged = 2;
inline constexpr int kExitSelftestFailed = 3;

class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct RunSpec {
    std::string oracle = "f38";  ///< f38 | f39 | cpd | dense
    std::size_t order = 6;
    std::size_t nodes = 100;
    std::string target;          ///< CPD1 or DENSE1 file for the cpd / dense oracles
    SolverConfig solver;
    std::string cores_out = "cores.cpd";
    std::string csv_out = "convergence.csv";
};

using KeyValues = std::map<std::string, std::string>;

/// Parses flat `key = value` lines. Blank lines and lines starting with '#'
/// are ignored.
[[nodiscard]] KeyValues read_key_values(std::istream& in);
[[nodiscard]] KeyValues load_key_values(const std::string& path);

/// Keys accepted by apply_key_values.
[[nodiscard]] std::span<const char* const> config_keys();

/// Applies values on top of spec. Unknown keys and unparsable values raise
/// ConfigError.
void apply_key_values(RunSpec& spec, const KeyValues& values);

/// Checks oracle selection, dimensions and solver fields.
void validate(const RunSpec& spec);

[[nodiscard]] TensorOracle make_oracle(const RunSpec& spec);

int cmd_decompose(const RunSpec& spec, std::ostream& out, std::ostream& log);

/// Runs newton, steepest-descent and als from the same initial model and
/// writes `method,sweep,eps_mc,eps_grid_mean,grad_norm,wall_seconds`.
int cmd_compare(const RunSpec& spec, const std::string& merged_csv, std::ostream& out,
                std::ostream& log);

struct SliceRequest {
    std::string cores_path;
    std::size_t c1 = 0;  ///< 0-based
    std::size_t c2 = 1;  ///< 0-based
    /// 1-based node used for every other coordinate; ceil(N_s / 2) if unset.
    std::optional<std::size_t> center;
    std::string out_prefix = "slice";
};

/// Writes <prefix>_oracle.csv and <prefix>_residual.csv, each N_c1 rows by
/// N_c2 columns.
int cmd_slice(const RunSpec& spec, const SliceRequest& request, std::ostream& out,
              std::ostream& log);

/// Prints eval_cp at the 1-based multi-index with 17 significant digits.
int cmd_eval(const std::string& cores_path, std::span<const long long> nodes, std::ostream& out,
             std::ostream& log);

}  // namespace mccpd
