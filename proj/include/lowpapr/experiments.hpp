#pragma once

// Monte-Carlo drivers behind the CLI scenarios and the acceptance suite.
// Every trial draws from its own derived RNG stream, so results are
// identical for any thread count.

#include "lowpapr/analysis.hpp"
#include "lowpapr/channel.hpp"
#include "lowpapr/equalizer.hpp"
#include "lowpapr/rng.hpp"
#include "lowpapr/waveform.hpp"

#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <string>
#include <vector>

namespace lowpapr {

/// Runs body(i) for i in [0, n) on up to `threads` workers. Exceptions from
/// workers are rethrown on the caller's thread.
void parallel_for(std::size_t n, int threads, const std::function<void(std::size_t)>& body);

/// Transmit chain for one random block: bits -> symbols -> DFT -> FDSS -> CP-OFDM.
struct TxChain {
    Scheme scheme = Scheme::Qpsk;
    FdssWindow<double> window;
    double eta = 1.0;
    OfdmConfig cfg;

    static TxChain make(Scheme scheme, double beta_db, const OfdmConfig& cfg);

    std::size_t bits_per_symbol() const { return bits_per_block(scheme, static_cast<std::size_t>(cfg.n_sc)); }
    CVecd modulate(const BitBlock& bits) const;
};

// ---------------------------------------------------------------- PAPR

/// PAPR of n_trials independent symbols, sorted ascending.
std::vector<double> papr_samples(const TxChain& tx, std::size_t n_trials, std::uint64_t seed, int threads = 1);

struct CcdfPoint {
    double papr_db;
    double ccdf;  // P(PAPR > papr_db)
};

/// Empirical CCDF of sorted samples evaluated on a regular grid.
std::vector<CcdfPoint> ccdf_on_grid(const std::vector<double>& sorted, double lo_db, double hi_db, double step_db);

/// PAPR level exceeded with probability p, interpolated linearly between the
/// bracketing order statistics.
double ccdf_readout(const std::vector<double>& sorted, double p = 1e-3);

// ---------------------------------------------------------------- PSD

struct PsdPoint {
    double freq_sc;  // frequency in units of the subcarrier spacing
    double psd_db;   // 10 log10 of the closed-form average PSD
};

std::vector<PsdPoint> psd_curve(const TxChain& tx, double lo_sc, double hi_sc, double step_sc);

// ---------------------------------------------------------------- link

struct LinkConfig {
    TxChain tx;
    TapProfile profile;
    double doppler_hz = 0.0;
    EqualizerKind equalizer = EqualizerKind::Mmse;
    /// Channel-estimate error in dB; -inf means perfect CSI.
    double mse_db = -std::numeric_limits<double>::infinity();
};

struct BerOptions {
    Eigen::Index symbols_per_realization = 14;
    std::int64_t min_errors = 100;
    std::int64_t min_realizations = 64;
    std::int64_t max_realizations = 200000;
    std::int64_t batch = 64;
    /// Number of leading symbols of realization 0 whose LLRs are kept.
    Eigen::Index export_llr_symbols = 0;
};

struct LlrRecord {
    Eigen::Index symbol;
    Eigen::Index bit_index;
    int bit;
    double llr;
};

struct BerPoint {
    double snr_db = 0.0;
    std::int64_t bit_errors = 0;
    std::int64_t bits = 0;
    std::int64_t realizations = 0;
    std::int64_t singular_resamples = 0;
    double ber_mc = 0.0;
    /// Average semi-analytic BER over the same channel realizations (NaN with imperfect CSI).
    double ber_theory = 0.0;
    /// Standard error of the per-realization difference (MC - theory).
    double se_diff = 0.0;
    /// Standard error of ber_mc from realization-level variation.
    double se_mc = 0.0;
    std::vector<LlrRecord> llrs;
};

BerPoint ber_point(const LinkConfig& link, double snr_db, const BerOptions& opt, std::uint64_t seed, int threads = 1);

// ---------------------------------------------------------------- capacity and SINR

struct CurvePoint {
    double snr_db;
    double value;
};

/// Average bits per channel use over independent one-symbol block-fading realizations.
std::vector<CurvePoint> capacity_curve(const LinkConfig& link, const std::vector<double>& snr_db,
                                       std::int64_t n_realizations, std::uint64_t seed, int threads = 1,
                                       const MiMethod& method = {});

/// Average linear effective SINR over independent realizations.
std::vector<CurvePoint> sinr_curve(const LinkConfig& link, const std::vector<double>& snr_db,
                                   std::int64_t n_realizations, std::uint64_t seed, int threads = 1);

/// SNR (dB) at which a curve crosses `target`, interpolating log10 of the
/// value linearly. Empty if the curve never crosses.
std::optional<double> crossing_snr(const std::vector<CurvePoint>& curve, double target);

}  // namespace lowpapr
