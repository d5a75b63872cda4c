#pragma once

#include <cstdint>
#include <random>

namespace maelstrom {

/// Seeded, stream-splittable generator.
///
/// Backed by std::mt19937_64 seeded through std::seed_seq; both are specified
/// bit-exactly by the C++ standard, so draws are identical on every conforming
/// platform. Real-valued draws are derived from raw 64-bit outputs here rather
/// than through <random> distributions, whose algorithms are
/// implementation-defined.
class Rng {
  public:
    explicit Rng(std::uint64_t seed, std::uint64_t stream = 0);

    std::uint64_t seed() const noexcept { return seed_; }
    std::uint64_t stream() const noexcept { return stream_; }

    /// Independent generator for a sub-stream. Depends only on (seed, stream, child).
    Rng split(std::uint64_t child) const;

    std::uint64_t next_u64() { return engine_(); }

    /// Uniform in [0, 1) with 53 bits of resolution.
    double uniform();
    /// Uniform in [low, high).
    double uniform(double low, double high);
    bool bernoulli(double p) { return uniform() < p; }
    /// Fair coin as 0/1.
    int bit() { return static_cast<int>(next_u64() >> 63); }

  private:
    std::uint64_t seed_;
    std::uint64_t stream_;
    std::mt19937_64 engine_;
};

/// SplitMix64 finalizer; used to derive child stream ids.
std::uint64_t mix64(std::uint64_t x) noexcept;

}  // namespace maelstrom
