#pragma once

// Seed derivation for reproducible Monte-Carlo runs. One master seed is split
// into independent per-trial streams by hashing (master, purpose, index), so
// results do not depend on how trials are scheduled across threads.

#include "lowpapr/types.hpp"

#include <complex>
#include <cstdint>
#include <random>

namespace lowpapr {

using Rng = std::mt19937_64;

constexpr std::uint64_t splitmix64(std::uint64_t x)
{
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

/// Stream identifiers; keep values stable, they are part of the reproducibility contract.
enum class Stream : std::uint64_t {
    Bits = 1,
    Channel = 2,
    Noise = 3,
    Estimate = 4,
    Oracle = 5,
    Resample = 6,
};

constexpr std::uint64_t derive_seed(std::uint64_t master, Stream stream, std::uint64_t index)
{
    std::uint64_t h = splitmix64(master);
    h = splitmix64(h ^ static_cast<std::uint64_t>(stream));
    return splitmix64(h ^ index);
}

inline Rng make_rng(std::uint64_t master, Stream stream, std::uint64_t index)
{
    return Rng(derive_seed(master, stream, index));
}

inline BitBlock random_bits(Rng& rng, std::size_t n)
{
    BitBlock bits(n);
    std::uint64_t word = 0;
    for (std::size_t i = 0; i < n; ++i) {
        if (i % 64 == 0) word = rng();
        bits[i] = static_cast<std::uint8_t>((word >> (i % 64)) & 1U);
    }
    return bits;
}

/// Circularly-symmetric complex Gaussian with E|z|^2 = variance.
template <typename Scalar = double>
std::complex<Scalar> complex_gaussian(Rng& rng, Scalar variance = Scalar(1))
{
    std::normal_distribution<Scalar> n(Scalar(0), std::sqrt(variance / Scalar(2)));
    const Scalar re = n(rng);
    const Scalar im = n(rng);
    return {re, im};
}

}  // namespace lowpapr
