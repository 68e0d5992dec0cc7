#pragma once

// Bit-to-symbol mappers for the four QPSK-alphabet constellations, DFT
// precoding and the Hann weights describing the RO-QPSK subcarrier spectrum.
//
// Every mapper emits symbols from {(+-1 +- j)/sqrt(2)}. A bit b drives one
// I or Q amplitude alpha = (1 - 2b)/sqrt(2).

#include "lowpapr/dft.hpp"
#include "lowpapr/types.hpp"

#include <cmath>
#include <numbers>
#include <string>

namespace lowpapr {

namespace detail {

inline void check_bits(const BitBlock& bits)
{
    for (std::size_t i = 0; i < bits.size(); ++i) {
        if (bits[i] > 1) {
            throw DomainError("bit " + std::to_string(i) + " has value " +
                              std::to_string(bits[i]) + ", expected 0 or 1");
        }
    }
}

template <typename Scalar>
Scalar amplitude(std::uint8_t bit)
{
    return (bit ? Scalar(-1) : Scalar(1)) / std::numbers::sqrt2_v<Scalar>;
}

}  // namespace detail

/// Gray QPSK: x[m] = alpha_{2m} + j alpha_{2m+1}.
template <typename Scalar = double>
CVec<Scalar> map_qpsk(const BitBlock& bits)
{
    if (bits.empty() || bits.size() % 2 != 0) {
        throw LengthError("QPSK needs a non-empty even bit count, got " +
                          std::to_string(bits.size()));
    }
    detail::check_bits(bits);
    const auto n = static_cast<Eigen::Index>(bits.size() / 2);
    CVec<Scalar> x(n);
    for (Eigen::Index m = 0; m < n; ++m) {
        x[m] = {detail::amplitude<Scalar>(bits[2 * m]), detail::amplitude<Scalar>(bits[2 * m + 1])};
    }
    return x;
}

/// BPSK on the diagonal: x[m] = alpha_m (1 + j).
template <typename Scalar = double>
CVec<Scalar> map_bpsk(const BitBlock& bits)
{
    if (bits.empty()) throw LengthError("BPSK needs at least one bit");
    detail::check_bits(bits);
    const auto n = static_cast<Eigen::Index>(bits.size());
    CVec<Scalar> x(n);
    for (Eigen::Index m = 0; m < n; ++m) {
        const Scalar a = detail::amplitude<Scalar>(bits[m]);
        x[m] = {a, a};
    }
    return x;
}

/// pi/2-BPSK (NR convention): BPSK on even m, j * BPSK on odd m.
template <typename Scalar = double>
CVec<Scalar> map_pi2_bpsk(const BitBlock& bits)
{
    if (bits.empty() || bits.size() % 2 != 0) {
        throw LengthError("pi/2-BPSK needs a non-empty even bit count, got " +
                          std::to_string(bits.size()));
    }
    detail::check_bits(bits);
    const auto n = static_cast<Eigen::Index>(bits.size());
    CVec<Scalar> x(n);
    for (Eigen::Index m = 0; m < n; ++m) {
        const Scalar a = detail::amplitude<Scalar>(bits[m]);
        x[m] = (m % 2 == 0) ? std::complex<Scalar>(a, a) : std::complex<Scalar>(-a, a);
    }
    return x;
}

/// Repeated-and-offset QPSK.
///
/// Each bit drives the I (even index) or Q (odd index) branch of two
/// consecutive symbols, the second copy sign-flipped:
///   even m: x[m] = alpha_m - j alpha_{m-1}
///   odd m:  x[m] = -alpha_{m-1} + j alpha_m
/// with alpha_{-1} = alpha_{N-1} (cyclic indexing).
template <typename Scalar = double>
CVec<Scalar> map_ro_qpsk(const BitBlock& bits)
{
    if (bits.size() < 2 || bits.size() % 2 != 0) {
        throw LengthError("RO-QPSK needs an even bit count >= 2 (one bit per subcarrier), got " +
                          std::to_string(bits.size()));
    }
    detail::check_bits(bits);
    const auto n = static_cast<Eigen::Index>(bits.size());
    CVec<Scalar> x(n);
    for (Eigen::Index m = 0; m < n; ++m) {
        const Scalar cur = detail::amplitude<Scalar>(bits[m]);
        const Scalar prev = detail::amplitude<Scalar>(bits[(m + n - 1) % n]);
        x[m] = (m % 2 == 0) ? std::complex<Scalar>(cur, -prev) : std::complex<Scalar>(-prev, cur);
    }
    return x;
}

template <typename Scalar = double>
CVec<Scalar> map_bits(Scheme scheme, const BitBlock& bits)
{
    switch (scheme) {
    case Scheme::Qpsk: return map_qpsk<Scalar>(bits);
    case Scheme::Bpsk: return map_bpsk<Scalar>(bits);
    case Scheme::Pi2Bpsk: return map_pi2_bpsk<Scalar>(bits);
    case Scheme::RoQpsk: return map_ro_qpsk<Scalar>(bits);
    }
    throw DomainError("unknown scheme");
}

/// DFT precoding with unitary scaling.
template <typename Scalar>
CVec<Scalar> dft_precode(const CVec<Scalar>& symbols)
{
    if (symbols.size() == 0) throw LengthError("cannot precode an empty block");
    return dft(symbols);
}

/// w_k = 1 - cos(2 pi k / N). Sums to N.
template <typename Scalar = double>
RVec<Scalar> hann_weights(Eigen::Index n_sc)
{
    if (n_sc < 2 || n_sc % 2 != 0) {
        throw DomainError("Hann weights need an even subcarrier count >= 2, got " +
                          std::to_string(n_sc));
    }
    RVec<Scalar> w(n_sc);
    for (Eigen::Index k = 0; k < n_sc; ++k) {
        w[k] = Scalar(1) - std::cos(Scalar(2) * std::numbers::pi_v<Scalar> * Scalar(k) / Scalar(n_sc));
    }
    return w;
}

}  // namespace lowpapr
