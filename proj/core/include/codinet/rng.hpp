#pragma once

#include <cmath>
#include <cstdint>

namespace codinet {

/// Counter-based deterministic random generator. Each draw is a pure
/// function of (seed, stream_id, counter), so sequences are bitwise
/// reproducible on every platform and independent stream ids give
/// independent sequences. Forking derives a new stream without touching
/// the parent, which lets every stochastic site (Gumbel noise, crop
/// offsets, flips, init) own its stream.
class Rng {
public:
    Rng() : Rng(0, 0) {}
    Rng(std::uint64_t seed, std::uint64_t stream_id = 0)
        : seed_(seed), stream_(stream_id), counter_(0) {}

    std::uint64_t seed() const noexcept { return seed_; }
    std::uint64_t stream_id() const noexcept { return stream_; }
    std::uint64_t counter() const noexcept { return counter_; }

    /// Independent generator derived from this one; the parent state is
    /// not advanced.
    Rng fork(std::uint64_t substream) const noexcept {
        return Rng(seed_, mix(stream_ + 0x9E3779B97F4A7C15ULL * (substream + 1)));
    }

    std::uint64_t next_u64() noexcept {
        std::uint64_t x = key_() + 0x9E3779B97F4A7C15ULL * ++counter_;
        return mix(x);
    }

    /// Uniform in [0, 1).
    double uniform() noexcept {
        return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    }

    /// Uniform strictly inside (0, 1); safe under log(-log(u)).
    double uniform_open() noexcept {
        return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
    }

    /// Integer uniform in [0, n); n must be > 0.
    std::uint64_t uniform_index(std::uint64_t n) noexcept {
        // Modulo bias is < 2^-53 for the desk-scale ranges used here.
        return next_u64() % n;
    }

    bool bernoulli(double p) noexcept { return uniform() < p; }

    /// Standard normal via Box-Muller; consumes exactly two counters.
    double normal() noexcept {
        double u1 = uniform_open();
        double u2 = uniform();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586476925287 * u2);
    }

    /// Standard Gumbel: -log(-log(U)), U ~ Uniform(0,1).
    double gumbel() noexcept { return -std::log(-std::log(uniform_open())); }

private:
    static std::uint64_t mix(std::uint64_t z) noexcept {
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
        return z ^ (z >> 31);
    }

    std::uint64_t key_() const noexcept { return mix(seed_ ^ mix(stream_ + 1)); }

    std::uint64_t seed_;
    std::uint64_t stream_;
    std::uint64_t counter_;
};

/// Stream ids for the stochastic sites of the artifact. Derived streams
/// fork further per batch / item as needed.
namespace streams {
inline constexpr std::uint64_t kInit = 1;
inline constexpr std::uint64_t kGumbel = 2;
inline constexpr std::uint64_t kAugment = 3;
inline constexpr std::uint64_t kBatch = 4;
inline constexpr std::uint64_t kData = 5;
inline constexpr std::uint64_t kProbe = 6;
inline constexpr std::uint64_t kPairs = 7;
} // namespace streams

} // namespace codinet
