#pragma once

#include <cstdint>
#include <random>

namespace peermax {

/// SplitMix64 finalizer; used to spread seeds and derive sub-stream seeds.
inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

/// Seeded deterministic uniform stream. Sub-streams are derived from the
/// stream's seed (not its consumption state), so (seed, task index) fully
/// determines a parallel task's draws.
class RngStream {
public:
    explicit RngStream(std::uint64_t seed) : seed_(seed), gen_(splitmix64(seed)) {}

    std::uint64_t seed() const { return seed_; }

    std::uint64_t next_u64() { return gen_(); }

    /// Uniform in [0, 1) with 53 random bits; avoids the
    /// implementation-defined behavior of std::uniform_real_distribution.
    double next_double() {
        return static_cast<double>(gen_() >> 11) * 0x1.0p-53;
    }

    /// Integer uniform in [0, bound) by rejection-free scaling (bound << 2^64,
    /// bias is negligible and determinism is what matters here).
    std::uint64_t next_below(std::uint64_t bound) {
        return bound == 0 ? 0 : gen_() % bound;
    }

    /// Independent child stream identified by (seed, index).
    RngStream child(std::uint64_t index) const {
        return RngStream(splitmix64(seed_ ^ splitmix64(index + 0x51ed270b3a4c9b8dULL)));
    }

private:
    std::uint64_t seed_;
    std::mt19937_64 gen_;
};

}  // namespace peermax
