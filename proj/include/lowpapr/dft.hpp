#pragma once

// Unitary DFT pair on top of Eigen's FFT module.
//
// Forward: X_k = 1/sqrt(N) sum_m x[m] exp(-j 2 pi k m / N)
// Inverse: x[m] = 1/sqrt(N) sum_k X_k exp(+j 2 pi k m / N)
//
// Every transform in the library goes through these two functions so the
// sign and scaling convention lives in exactly one place.

#include "lowpapr/types.hpp"

#include <unsupported/Eigen/FFT>

#include <cmath>

namespace lowpapr {

namespace detail {

// Eigen::FFT caches twiddle tables per size and is not safe to share across
// threads, hence one engine per thread and scalar type.
template <typename Scalar>
Eigen::FFT<Scalar>& fft_engine()
{
    thread_local Eigen::FFT<Scalar> engine = [] {
        Eigen::FFT<Scalar> e;
        e.SetFlag(Eigen::FFT<Scalar>::Unscaled);
        return e;
    }();
    return engine;
}

}  // namespace detail

template <typename Scalar>
CVec<Scalar> dft(const CVec<Scalar>& x)
{
    const auto n = x.size();
    if (n <= 1) return x;
    CVec<Scalar> out(n);
    detail::fft_engine<Scalar>().fwd(out, x);
    out *= Scalar(1) / std::sqrt(static_cast<Scalar>(n));
    return out;
}

template <typename Scalar>
CVec<Scalar> idft(const CVec<Scalar>& x)
{
    const auto n = x.size();
    if (n <= 1) return x;
    CVec<Scalar> out(n);
    detail::fft_engine<Scalar>().inv(out, x);
    out *= Scalar(1) / std::sqrt(static_cast<Scalar>(n));
    return out;
}

}  // namespace lowpapr
