#pragma once

#include <Eigen/Core>

#include <complex>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace lowpapr {

template <typename Scalar>
using CVec = Eigen::Matrix<std::complex<Scalar>, Eigen::Dynamic, 1>;

template <typename Scalar>
using RVec = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

using CVecd = CVec<double>;
using RVecd = RVec<double>;

/// Bits are kept one per byte, values 0 or 1.
using BitBlock = std::vector<std::uint8_t>;

enum class Scheme { Qpsk, Bpsk, Pi2Bpsk, RoQpsk };

enum class EqualizerKind { Mf, Zf, Mmse };

/// Raised when a block length does not satisfy the scheme's constraints.
class LengthError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Raised for out-of-domain parameters (bad bit values, positive ripple, ...).
class DomainError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

/// Raised by the zero-forcing equalizer on a (near-)null subcarrier.
class SingularChannelError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Internal consistency check failed (e.g. a clearly negative interference power).
class ConsistencyError : public std::logic_error {
public:
    using std::logic_error::logic_error;
};

std::string_view to_string(Scheme s);
std::string_view to_string(EqualizerKind k);
Scheme parse_scheme(std::string_view name);
EqualizerKind parse_equalizer(std::string_view name);

/// True for the schemes whose constellation symbols are mutually independent.
constexpr bool is_iid(Scheme s) { return s != Scheme::RoQpsk; }

/// Number of bits carried by one block of n_sc subcarriers.
constexpr std::size_t bits_per_block(Scheme s, std::size_t n_sc)
{
    return s == Scheme::Qpsk ? 2 * n_sc : n_sc;
}

}  // namespace lowpapr
