#pragma once

// Closed-form effective SINR of DFT-s-OFDM after one-tap equalization and
// de-spreading, for i.i.d. complex symbols, (pi/2-)BPSK and RO-QPSK, plus
// the semi-analytic BER and binary-input mutual information built on it.

#include "lowpapr/dft.hpp"
#include "lowpapr/equalizer.hpp"
#include "lowpapr/modem.hpp"
#include "lowpapr/types.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <string>

namespace lowpapr {

template <typename Scalar = double>
struct SinrReport {
    Scalar signal_power = 0;        // mu^2
    Scalar interference_power = 0;  // sigma^2_G, zeta^2_G or rho^2_{w,G}
    Scalar noise_power = 0;
    Scalar sinr_lin = 0;
    Scalar mu = 0;  // mu_G, or mu_{w,G} for RO-QPSK; the LLR scaling gain
};

enum class RoQpskMode { Exact, Approx };

namespace detail {

// Interference powers are differences of nearly equal moments; tiny negative
// values are round-off, anything larger means the inputs are inconsistent.
template <typename Scalar>
Scalar clip_interference(Scalar value, Scalar scale)
{
    const Scalar tol = Scalar(1e-10) * std::max(Scalar(1), std::abs(scale));
    if (value < -tol) {
        throw ConsistencyError("negative interference power " + std::to_string(static_cast<double>(value)));
    }
    return std::max(value, Scalar(0));
}

template <typename Scalar>
SinrReport<Scalar> make_report(Scalar mu, Scalar interference, Scalar noise)
{
    SinrReport<Scalar> r;
    r.mu = mu;
    r.signal_power = mu * mu;
    r.interference_power = interference;
    r.noise_power = noise;
    const Scalar denom = interference + noise;
    r.sinr_lin = denom > Scalar(0) ? r.signal_power / denom : std::numeric_limits<Scalar>::infinity();
    return r;
}

template <typename Scalar>
void require_even(const EqualizedGains<Scalar>& gains, const char* what)
{
    const auto n = gains.size();
    if (n < 2 || n % 2 != 0) {
        throw LengthError(std::string(what) + " needs an even subcarrier count, got " + std::to_string(n));
    }
}

}  // namespace detail

/// Time-domain taps of the equalized channel, g_m = 1/N sum_k G_k exp(j 2 pi k m / N).
template <typename Scalar>
CVec<Scalar> time_taps(const RVec<Scalar>& g)
{
    const auto n = static_cast<Scalar>(g.size());
    return idft<Scalar>(g.template cast<std::complex<Scalar>>()) / std::sqrt(n);
}

/// SINR with i.i.d. complex symbols: mu_G^2 / (sigma^2_G + mean |E|^2).
template <typename Scalar>
SinrReport<Scalar> sinr_iid(const EqualizedGains<Scalar>& gains)
{
    if (gains.size() == 0) throw LengthError("empty gains");
    const Scalar mu = gains.g.mean();
    const Scalar second = gains.g.squaredNorm() / static_cast<Scalar>(gains.size());
    const Scalar noise = gains.e.squaredNorm() / static_cast<Scalar>(gains.size());
    return detail::make_report(mu, detail::clip_interference(second - mu * mu, second), noise);
}

/// MMSE shortcut mu_G / (1 - mu_G). Only valid for MMSE gains.
template <typename Scalar>
Scalar sinr_mmse_identity(const EqualizedGains<Scalar>& gains)
{
    const Scalar mu = gains.g.mean();
    if (!(mu < Scalar(1))) throw DomainError("MMSE identity needs mu_G < 1");
    return mu / (Scalar(1) - mu);
}

/// SINR with i.i.d. BPSK or pi/2-BPSK symbols after de-rotation:
///   mu_G^2 / (zeta^2_G + mean |E|^2 / 2)
/// zeta^2_G = 1/(2N) sum_k G_k (G_p(k) + G_k) - mu_G^2 with partner
/// p(k) = -k (BPSK) or N/2 - k (pi/2-BPSK), modulo N.
template <typename Scalar>
SinrReport<Scalar> sinr_bpsk(const EqualizedGains<Scalar>& gains, Scheme variant)
{
    if (variant != Scheme::Bpsk && variant != Scheme::Pi2Bpsk) throw DomainError("sinr_bpsk needs a BPSK variant");
    detail::require_even(gains, "BPSK SINR");
    const Eigen::Index n = gains.size();
    const Eigen::Index shift = variant == Scheme::Bpsk ? 0 : n / 2;
    const Scalar mu = gains.g.mean();
    Scalar acc = 0;
    for (Eigen::Index k = 0; k < n; ++k) {
        const Eigen::Index p = ((shift - k) % n + n) % n;
        acc += gains.g[k] * (gains.g[p] + gains.g[k]);
    }
    const Scalar cross = acc / (Scalar(2) * static_cast<Scalar>(n));
    const Scalar noise = gains.e.squaredNorm() / static_cast<Scalar>(n) / Scalar(2);
    return detail::make_report(mu, detail::clip_interference(cross - mu * mu, cross), noise);
}

/// SINR of RO-QPSK after consecutive-symbol combining:
///   mu_{w,G}^2 / (rho^2_{w,G} + mu_{w,|E|^2} / 2), rho^2 = nu_{w,G} - mu_{w,G}^2.
/// Exact nu = 1/(2N) sum w_k G_k (w_k G_k + (2 - w_k) G_{N/2-k});
/// the approximation replaces it by the weighted second moment.
template <typename Scalar>
SinrReport<Scalar> sinr_roqpsk(const EqualizedGains<Scalar>& gains, RoQpskMode mode = RoQpskMode::Exact)
{
    detail::require_even(gains, "RO-QPSK SINR");
    const Eigen::Index n = gains.size();
    const Scalar nn = static_cast<Scalar>(n);
    const RVec<Scalar> w = hann_weights<Scalar>(n);
    const auto& g = gains.g;

    const Scalar mu_w = (w.array() * g.array()).sum() / nn;
    const Scalar noise = (w.array() * gains.e.array().abs2()).sum() / nn / Scalar(2);

    Scalar nu = 0;
    if (mode == RoQpskMode::Exact) {
        for (Eigen::Index k = 0; k < n; ++k) {
            const Eigen::Index p = ((n / 2 - k) % n + n) % n;
            nu += w[k] * g[k] * (w[k] * g[k] + (Scalar(2) - w[k]) * g[p]);
        }
        nu /= Scalar(2) * nn;
    } else {
        nu = (w.array() * g.array().square()).sum() / nn;
    }
    return detail::make_report(mu_w, detail::clip_interference(nu - mu_w * mu_w, nu), noise);
}

/// Effective SINR of the detector each scheme uses.
template <typename Scalar>
SinrReport<Scalar> sinr_for(Scheme scheme, const EqualizedGains<Scalar>& gains)
{
    switch (scheme) {
    case Scheme::Qpsk: return sinr_iid(gains);
    case Scheme::Bpsk:
    case Scheme::Pi2Bpsk: return sinr_bpsk(gains, scheme);
    case Scheme::RoQpsk: return sinr_roqpsk(gains, RoQpskMode::Exact);
    }
    throw DomainError("unknown scheme");
}

/// Gaussian tail probability.
template <typename Scalar>
Scalar q_function(Scalar x)
{
    return Scalar(0.5) * std::erfc(x / std::numbers::sqrt2_v<Scalar>);
}

/// Per-bit error probability assuming Gaussian interference. Every scheme's
/// detector sees a binary decision with SNR equal to its effective SINR:
/// per branch for QPSK and combined RO-QPSK, on the de-rotated real axis for
/// the BPSK variants.
template <typename Scalar>
Scalar ber_semi_analytic(Scheme /*scheme*/, const SinrReport<Scalar>& report)
{
    if (report.sinr_lin < Scalar(0)) throw DomainError("negative SINR");
    if (std::isinf(report.sinr_lin)) return Scalar(0);
    return q_function(std::sqrt(report.sinr_lin));
}

struct MiMethod {
    enum class Kind { GaussHermite, MonteCarlo } kind = Kind::GaussHermite;
    int n_points = 64;
    std::int64_t n_samples = 200000;
    std::uint64_t seed = 0;

    static MiMethod monte_carlo(std::int64_t samples, std::uint64_t seed)
    {
        MiMethod m;
        m.kind = Kind::MonteCarlo;
        m.n_samples = samples;
        m.seed = seed;
        return m;
    }
};

/// Gauss-Hermite nodes and weights for weight exp(-x^2) (Golub-Welsch).
struct GaussHermite {
    Eigen::VectorXd nodes;
    Eigen::VectorXd weights;
};
const GaussHermite& gauss_hermite(int n);

/// I(x; y | h) in bits for y = h x + n, x uniform on {+-amplitude}, n ~ N(0, noise_var).
double mutual_info_binary(double gain_h, double noise_var, double amplitude, const MiMethod& method = {});

/// Spectral efficiency (bits per subcarrier use) implied by an SINR report,
/// treating interference as Gaussian.
///   QPSK: two branches, x = +-1/sqrt(2), h = mu_G, sigma^2 = mu_G^2 / (2 SINR).
///   BPSK variants: one branch, x = +-1, h = mu_G, sigma^2 = mu_G^2 / SINR.
///   RO-QPSK: as QPSK on the combined symbols with h = mu_{w,G}, then halved.
double bits_per_channel_use(Scheme scheme, const SinrReport<double>& report, const MiMethod& method = {});

}  // namespace lowpapr
