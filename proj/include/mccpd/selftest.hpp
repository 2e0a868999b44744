#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace mccpd {

struct SelftestOptions {
    std::uint64_t seed = 12345;
    /// Flips the sign of every Monte-Carlo local gradient the battery
    /// inspects. Used to confirm the battery detects a broken estimator.
    bool corrupt_gradient_sign = false;
};

struct PropertyResult {
    std::string id;  ///< short tag, e.g. "b1"
    std::string name;
    bool passed = false;
    std::string detail;
};

/// Small-instance property battery (d = 3, N in {4, 6}, r <= 3) checking the
/// Monte-Carlo estimators against the dense reference, the derivative
/// identities, the node update rules and the Gauss-Jordan inverse.
[[nodiscard]] std::vector<PropertyResult> run_selftest(const SelftestOptions& options = {});

/// Prints one line per property; returns kExitOk or kExitSelftestFailed.
int cmd_selftest(const SelftestOptions& options, std::ostream& out);

}  // namespace mccpd
