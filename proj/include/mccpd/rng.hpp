#pragma once

#include <cstdint>
#include <random>

namespace mccpd {

/// Default master seed used when none is configured.
inline constexpr std::uint64_t kDefaultMasterSeed = 20240611;

/// What a derived random stream is used for. Part of the hashed key so that
/// streams for different purposes never coincide.
enum class StreamKind : std::uint64_t { hyperplane = 1, global = 2, init = 3, test = 4 };

/// Identifies one random stream: (master seed, sweep, coordinate, node).
/// The stream seed is a hash of the whole path, so any ensemble can be
/// regenerated independently of the order in which ensembles were drawn.
struct SeedPath {
    std::uint64_t master = kDefaultMasterSeed;
    std::uint64_t sweep = 0;
    std::uint64_t coord = 0;
    std::uint64_t node = 0;
    StreamKind kind = StreamKind::hyperplane;

    friend bool operator==(const SeedPath&, const SeedPath&) = default;
};

/// SplitMix64 finalizer.
[[nodiscard]] constexpr std::uint64_t mix64(std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

[[nodiscard]] constexpr std::uint64_t stream_seed(const SeedPath& path) {
    std::uint64_t h = mix64(path.master);
    h = mix64(h ^ static_cast<std::uint64_t>(path.kind));
    h = mix64(h ^ path.sweep);
    h = mix64(h ^ path.coord);
    h = mix64(h ^ path.node);
    return h;
}

using Engine = std::mt19937_64;

[[nodiscard]] inline Engine make_engine(const SeedPath& path) { return Engine(stream_seed(path)); }

}  // namespace mccpd
