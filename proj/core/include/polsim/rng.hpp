#pragma once

#include <cstdint>
#include <random>

namespace polsim {

// SplitMix64 finalizer. Used to whiten user seeds and to derive independent
// substream seeds so that stream i of seed s depends only on (s, i).
inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

inline std::uint64_t derive_seed(std::uint64_t base, std::uint64_t stream) {
    return splitmix64(base ^ splitmix64(stream + 0x9E3779B97F4A7C15ULL));
}

/// Deterministic random stream. All distribution transforms are implemented
/// here (not via std:: distributions, whose output is implementation-defined)
/// so that identical seeds give identical streams on every platform.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : seed_(seed), gen_(splitmix64(seed)) {}

    std::uint64_t seed() const { return seed_; }
    std::uint64_t next_u64() { return gen_(); }

    /// Uniform double in [0, 1).
    double uniform01() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }

    /// Uniform double in [a, b).
    double uniform(double a, double b) { return a + uniform01() * (b - a); }

    /// Unbiased uniform index in [0, n). n must be > 0.
    std::size_t uniform_index(std::size_t n) {
        const std::uint64_t bound = n;
        const std::uint64_t threshold = (0ULL - bound) % bound; // 2^64 mod n
        for (;;) {
            const std::uint64_t x = gen_();
            if (x >= threshold) return static_cast<std::size_t>(x % bound);
        }
    }

    bool bernoulli(double p) { return uniform01() < p; }

    /// Independent substream; depends only on (seed, stream).
    Rng substream(std::uint64_t stream) const { return Rng(derive_seed(seed_, stream)); }

private:
    std::uint64_t seed_;
    std::mt19937_64 gen_;
};

} // namespace polsim
