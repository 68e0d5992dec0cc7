#pragma once

// Receive side: OFDM demodulation, one-tap equalization, DFT de-spreading,
// BPSK de-rotation, RO-QPSK consecutive-symbol combining and LLRs.

#include "lowpapr/dft.hpp"
#include "lowpapr/types.hpp"
#include "lowpapr/waveform.hpp"

#include <cmath>
#include <numbers>
#include <string>

namespace lowpapr {

/// Strip the CP and demodulate bins 0..N_sc-1 with the unitary FFT.
template <typename Scalar>
CVec<Scalar> ofdm_demodulate(const CVec<Scalar>& y, const OfdmConfig& cfg)
{
    cfg.validate();
    if (y.size() < cfg.n_cp + cfg.n_fft) {
        throw LengthError("received signal has " + std::to_string(y.size()) + " samples, need " +
                          std::to_string(cfg.n_cp + cfg.n_fft));
    }
    const CVec<Scalar> body = y.segment(cfg.n_cp, cfg.n_fft);
    return dft(body).head(cfg.n_sc);
}

/// Effective subcarrier channel H~_k = eta sqrt(snr) F_k H_k, the quantity the
/// equalizer is designed on.
template <typename Scalar>
CVec<Scalar> effective_channel(const CVec<Scalar>& h, const FdssWindow<Scalar>& window, Scalar eta, Scalar snr_lin)
{
    if (h.size() != window.size()) throw LengthError("channel and window lengths differ");
    const Scalar scale = eta * std::sqrt(snr_lin);
    return (scale * window.values.template cast<std::complex<Scalar>>().array() * h.array()).matrix();
}

template <typename Scalar = double>
struct EqualizedGains {
    CVec<Scalar> e;  // equalizer taps E_k
    RVec<Scalar> g;  // equalized gains G_k = E_k H~_k (real)

    Eigen::Index size() const { return g.size(); }
};

inline constexpr double kZfFloor = 1e-12;

template <typename Scalar>
EqualizedGains<Scalar> make_equalizer(const CVec<Scalar>& h_tilde, EqualizerKind kind)
{
    if (h_tilde.size() == 0) throw LengthError("empty channel");
    EqualizedGains<Scalar> out;
    const auto n = h_tilde.size();
    out.e.resize(n);
    out.g.resize(n);
    for (Eigen::Index k = 0; k < n; ++k) {
        const auto h = h_tilde[k];
        const Scalar p = std::norm(h);
        switch (kind) {
        case EqualizerKind::Mf:
            out.e[k] = std::conj(h);
            out.g[k] = p;
            break;
        case EqualizerKind::Zf:
            if (std::abs(h) < Scalar(kZfFloor)) {
                throw SingularChannelError("zero-forcing on a null subcarrier (k = " + std::to_string(k) + ")");
            }
            out.e[k] = Scalar(1) / h;
            out.g[k] = Scalar(1);
            break;
        case EqualizerKind::Mmse:
            out.e[k] = std::conj(h) / (p + Scalar(1));
            out.g[k] = p / (p + Scalar(1));
            break;
        }
    }
    return out;
}

/// Equalized gains as E_k H~_k computed directly, including any imaginary
/// residue. Used to check the realness of G.
template <typename Scalar>
CVec<Scalar> raw_gains(const EqualizedGains<Scalar>& eq, const CVec<Scalar>& h_tilde)
{
    return (eq.e.array() * h_tilde.array()).matrix();
}

template <typename Scalar>
CVec<Scalar> equalize(const CVec<Scalar>& y, const EqualizedGains<Scalar>& eq)
{
    if (y.size() != eq.size()) throw LengthError("received grid and equalizer lengths differ");
    return (eq.e.array() * y.array()).matrix();
}

/// Inverse DFT precoding of the equalized subcarriers.
template <typename Scalar>
CVec<Scalar> despread(const CVec<Scalar>& y_eq)
{
    if (y_eq.size() == 0) throw LengthError("cannot de-spread an empty block");
    return idft(y_eq);
}

/// Rotates BPSK / pi/2-BPSK symbols back onto the real axis.
template <typename Scalar>
RVec<Scalar> derotate(const CVec<Scalar>& r, Scheme scheme)
{
    if (scheme != Scheme::Bpsk && scheme != Scheme::Pi2Bpsk) {
        throw DomainError("de-rotation only applies to BPSK and pi/2-BPSK");
    }
    const Scalar c = std::numbers::sqrt2_v<Scalar> / Scalar(2);
    const std::complex<Scalar> even(c, -c);  // exp(-j pi/4)
    const std::complex<Scalar> odd(-c, -c);  // exp(-j 3pi/4)
    RVec<Scalar> out(r.size());
    for (Eigen::Index m = 0; m < r.size(); ++m) {
        const auto rot = (scheme == Scheme::Pi2Bpsk && m % 2 == 1) ? odd : even;
        out[m] = (rot * r[m]).real();
    }
    return out;
}

/// q~_l = Re{(r[2l] - r[2l+1])/2} + j Im{(r[2l+1] - r[2l+2])/2}, indices mod N.
template <typename Scalar>
CVec<Scalar> combine_roqpsk(const CVec<Scalar>& r)
{
    const auto n = r.size();
    if (n < 2 || n % 2 != 0) throw LengthError("RO-QPSK combining needs an even block length");
    CVec<Scalar> q(n / 2);
    for (Eigen::Index l = 0; l < n / 2; ++l) {
        const auto a = r[2 * l];
        const auto b = r[2 * l + 1];
        const auto c = r[(2 * l + 2) % n];
        q[l] = {(a.real() - b.real()) / Scalar(2), (b.imag() - c.imag()) / Scalar(2)};
    }
    return q;
}

// LLR convention: positive favours bit 0.

/// QPSK: (SINR/mu_G) 2 sqrt(2) [Re r, Im r] per symbol.
template <typename Scalar>
RVec<Scalar> llrs_from_iq(const CVec<Scalar>& r, Scalar sinr, Scalar gain)
{
    if (gain == Scalar(0)) throw DomainError("LLR scaling needs a non-zero gain");
    const Scalar scale = sinr / gain * Scalar(2) * std::numbers::sqrt2_v<Scalar>;
    RVec<Scalar> llr(2 * r.size());
    for (Eigen::Index m = 0; m < r.size(); ++m) {
        llr[2 * m] = scale * r[m].real();
        llr[2 * m + 1] = scale * r[m].imag();
    }
    return llr;
}

/// BPSK variants: (SINR/mu_G) 2 r_R.
template <typename Scalar>
RVec<Scalar> llrs_from_real(const RVec<Scalar>& r_r, Scalar sinr, Scalar gain)
{
    if (gain == Scalar(0)) throw DomainError("LLR scaling needs a non-zero gain");
    return (sinr / gain * Scalar(2)) * r_r;
}

/// Full soft demapping of a de-spread block. `gain` is mu_G, or mu_{w,G}
/// for RO-QPSK.
template <typename Scalar>
RVec<Scalar> compute_llrs(const CVec<Scalar>& r, Scheme scheme, Scalar sinr, Scalar gain)
{
    switch (scheme) {
    case Scheme::Qpsk: return llrs_from_iq(r, sinr, gain);
    case Scheme::Bpsk:
    case Scheme::Pi2Bpsk: return llrs_from_real(derotate(r, scheme), sinr, gain);
    case Scheme::RoQpsk: return llrs_from_iq(combine_roqpsk(r), sinr, gain);
    }
    throw DomainError("unknown scheme");
}

/// Hard decisions; a value of exactly zero maps to bit 0.
template <typename Scalar>
BitBlock hard_decisions(const RVec<Scalar>& soft)
{
    BitBlock bits(static_cast<std::size_t>(soft.size()));
    for (Eigen::Index i = 0; i < soft.size(); ++i) bits[static_cast<std::size_t>(i)] = soft[i] < Scalar(0) ? 1 : 0;
    return bits;
}

/// Hard-decision bits straight from a de-spread block (no SINR needed).
template <typename Scalar>
BitBlock detect_bits(const CVec<Scalar>& r, Scheme scheme)
{
    return hard_decisions<Scalar>(compute_llrs<Scalar>(r, scheme, Scalar(1), Scalar(1)));
}

}  // namespace lowpapr
