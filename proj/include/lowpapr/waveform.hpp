#pragma once

// Transmit side after precoding: FDSS windowing, scheme-aware power
// normalization, CP-OFDM modulation, PAPR and the closed-form average PSD.

#include "lowpapr/dft.hpp"
#include "lowpapr/modem.hpp"
#include "lowpapr/types.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <span>
#include <string>
#include <vector>

namespace lowpapr {

struct OfdmConfig {
    Eigen::Index n_sc = 96;
    Eigen::Index n_fft = 2048;
    Eigen::Index n_cp = 144;
    double scs_hz = 15e3;

    double sample_rate_hz() const { return static_cast<double>(n_fft) * scs_hz; }
    /// CP-inclusive OFDM symbol duration.
    double symbol_duration_s() const { return static_cast<double>(n_fft + n_cp) / sample_rate_hz(); }

    void validate() const
    {
        if (n_sc <= 0 || n_fft <= 0 || n_cp < 0 || !(scs_hz > 0.0)) {
            throw DomainError("OFDM config needs positive n_sc, n_fft, scs and non-negative n_cp");
        }
        if (n_sc > n_fft) throw DomainError("n_sc must not exceed n_fft");
        if (n_cp >= n_fft) throw DomainError("n_cp must be smaller than n_fft");
    }
};

template <typename Scalar = double>
struct FdssWindow {
    RVec<Scalar> values;
    Scalar beta = 1;   // linear amplitude ripple, min F / max F
    Scalar omega = 1;  // normalization giving unit mean power

    Eigen::Index size() const { return values.size(); }
    Scalar mean_power() const { return values.squaredNorm() / static_cast<Scalar>(values.size()); }
};

/// Deformed Hann FDSS window
///   F_k = (1/omega) (1 - (1-beta)/(1+beta) cos((2 pi k + pi)/N)),
/// with beta = 10^(beta_db/20) the amplitude ripple and omega the RMS of the
/// unnormalized samples. For N >= 3 that equals
///   sqrt(1 + (1-beta)^2 / (2 (1+beta)^2)).
template <typename Scalar = double>
FdssWindow<Scalar> make_fdss(Scalar beta_db, Eigen::Index n_sc)
{
    if (beta_db > Scalar(0)) {
        throw DomainError("FDSS ripple must be <= 0 dB, got " + std::to_string(static_cast<double>(beta_db)));
    }
    if (n_sc < 1) throw LengthError("FDSS window needs n_sc >= 1");
    FdssWindow<Scalar> win;
    win.beta = std::pow(Scalar(10), beta_db / Scalar(20));
    const Scalar depth = (Scalar(1) - win.beta) / (Scalar(1) + win.beta);
    win.values.resize(n_sc);
    const Scalar pi = std::numbers::pi_v<Scalar>;
    for (Eigen::Index k = 0; k < n_sc; ++k) {
        const Scalar phase = (Scalar(2) * pi * Scalar(k) + pi) / Scalar(n_sc);
        win.values[k] = Scalar(1) - depth * std::cos(phase);
    }
    win.omega = std::sqrt(win.values.squaredNorm() / static_cast<Scalar>(n_sc));
    win.values /= win.omega;
    return win;
}

template <typename Scalar = double>
FdssWindow<Scalar> flat_window(Eigen::Index n_sc)
{
    return make_fdss<Scalar>(Scalar(0), n_sc);
}

/// Power normalization eta such that E|s[n]|^2 = N_sc/N_fft.
///
/// i.i.d. schemes: eta = 1/sqrt(mean F^2). RO-QPSK: the subcarrier powers
/// follow the Hann weights, so eta = 1/sqrt(mean w_k F_k^2).
template <typename Scalar>
Scalar power_norm(Scheme scheme, const FdssWindow<Scalar>& window)
{
    if (is_iid(scheme)) return Scalar(1) / std::sqrt(window.mean_power());
    const RVec<Scalar> w = hann_weights<Scalar>(window.size());
    const Scalar weighted =
        (w.array() * window.values.array().square()).sum() / static_cast<Scalar>(window.size());
    return Scalar(1) / std::sqrt(weighted);
}

/// CP-OFDM modulation of one DFT-s-OFDM symbol. Subcarriers occupy bins
/// 0..N_sc-1. Output has n_cp + n_fft samples, CP first.
template <typename Scalar>
CVec<Scalar> ofdm_modulate(const CVec<Scalar>& grid, const FdssWindow<Scalar>& window, Scalar eta,
                           const OfdmConfig& cfg)
{
    cfg.validate();
    if (grid.size() != cfg.n_sc || window.size() != cfg.n_sc) {
        throw LengthError("grid (" + std::to_string(grid.size()) + ") and window (" +
                          std::to_string(window.size()) + ") must both have n_sc = " +
                          std::to_string(cfg.n_sc) + " entries");
    }
    CVec<Scalar> bins = CVec<Scalar>::Zero(cfg.n_fft);
    bins.head(cfg.n_sc) = eta * (window.values.template cast<std::complex<Scalar>>().array() * grid.array()).matrix();
    const CVec<Scalar> body = idft(bins);

    CVec<Scalar> out(cfg.n_cp + cfg.n_fft);
    out.head(cfg.n_cp) = body.tail(cfg.n_cp);
    out.tail(cfg.n_fft) = body;
    return out;
}

/// PAPR in dB over the CP-free body, relative to the nominal average power
/// N_sc/N_fft.
template <typename Scalar>
Scalar papr_db(const CVec<Scalar>& sig, const OfdmConfig& cfg)
{
    if (sig.size() < cfg.n_cp + cfg.n_fft || cfg.n_fft == 0) {
        throw LengthError("signal shorter than one CP-OFDM symbol");
    }
    const Scalar peak = sig.segment(cfg.n_cp, cfg.n_fft).cwiseAbs2().maxCoeff();
    if (!(peak > Scalar(0))) throw DomainError("PAPR undefined for an all-zero signal");
    const Scalar ratio = static_cast<Scalar>(cfg.n_fft) / static_cast<Scalar>(cfg.n_sc) * peak;
    return Scalar(10) * std::log10(ratio);
}

/// Normalized sinc, sin(pi x)/(pi x).
template <typename Scalar>
Scalar sinc(Scalar x)
{
    const Scalar px = std::numbers::pi_v<Scalar> * x;
    if (std::abs(x) < Scalar(1e-8)) return Scalar(1) - px * px / Scalar(6);
    return std::sin(px) / px;
}

/// Closed-form average power spectrum of one CP-OFDM symbol train,
///   P(f) = eta^2 sum_k c_k F_k^2 sinc^2(T (f - k scs)),
/// with c_k = 1 for i.i.d. schemes and c_k = w_k for RO-QPSK, T = T_S + T_CP.
template <typename Scalar>
std::vector<Scalar> avg_psd(Scheme scheme, const FdssWindow<Scalar>& window, Scalar eta, const OfdmConfig& cfg,
                            std::span<const Scalar> f_grid_hz)
{
    cfg.validate();
    if (window.size() != cfg.n_sc) throw LengthError("window length must equal n_sc");
    if (f_grid_hz.empty()) throw LengthError("empty frequency grid");
    const Scalar period = static_cast<Scalar>(cfg.symbol_duration_s());
    const Scalar scs = static_cast<Scalar>(cfg.scs_hz);

    RVec<Scalar> weight = window.values.array().square();
    if (!is_iid(scheme)) weight.array() *= hann_weights<Scalar>(cfg.n_sc).array();
    weight *= eta * eta;

    std::vector<Scalar> out;
    out.reserve(f_grid_hz.size());
    for (const Scalar f : f_grid_hz) {
        Scalar acc = 0;
        for (Eigen::Index k = 0; k < cfg.n_sc; ++k) {
            const Scalar s = sinc(period * (f - scs * Scalar(k)));
            acc += weight[k] * s * s;
        }
        out.push_back(acc);
    }
    return out;
}

}  // namespace lowpapr
