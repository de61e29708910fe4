#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace hhcert {

// Default seed used by the CLI and library entry points when none is given.
inline constexpr std::uint64_t kDefaultSeed = 42;

// splitmix64 finalizer; used for seed derivation, never as the main generator.
inline std::uint64_t mix64(std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

/// Seeded random stream with deterministic substream derivation.
///
/// Substreams are derived from the root seed rather than the current state,
/// so fan-out across workers cannot depend on consumption order. Identical
/// seeds give bitwise-identical draw sequences.
class RandomStream {
public:
    explicit RandomStream(std::uint64_t seed) : seed_(seed), gen_(mix64(seed)) {}

    std::uint64_t seed() const { return seed_; }

    // Uniform on (0, 1]; never 0, so log() is safe.
    double uniform01() {
        return static_cast<double>((gen_() >> 11) + 1) * 0x1.0p-53;
    }

    // Standard exponential by inversion.
    double exponential() { return -std::log(uniform01()); }

    std::uint64_t next_u64() { return gen_(); }

    // Uniform integer in [0, bound); bound must be > 0. Modulo bias is
    // negligible for the small bounds used here.
    std::uint64_t next_below(std::uint64_t bound) { return gen_() % bound; }

    static std::uint64_t derive_seed(std::uint64_t root, std::uint64_t index) {
        return mix64(root ^ mix64(index + 0x632be59bd9b4e019ULL));
    }

    RandomStream substream(std::uint64_t index) const {
        return RandomStream(derive_seed(seed_, index));
    }

private:
    std::uint64_t seed_;
    std::mt19937_64 gen_;
};

}  // namespace hhcert
