#pragma once

// Block-fading tapped-delay-line channels.
//
// Taps are drawn once per OFDM symbol and held constant over it. The first
// tap may carry a Rician LOS component; all diffuse components follow a
// Jakes Doppler spectrum generated by a sum of sinusoids.

#include "lowpapr/types.hpp"
#include "lowpapr/waveform.hpp"

#include <Eigen/Core>

#include <cstdint>
#include <filesystem>
#include <limits>
#include <optional>
#include <string>
#include <vector>

namespace lowpapr {

struct TapProfile {
    std::string name;
    std::vector<double> delays_s;    // ascending
    std::vector<double> powers_lin;  // sums to 1
    /// Linear K-factor of tap 0. 0 = Rayleigh, +inf = pure LOS.
    double rician_k = 0.0;
    /// false freezes every tap at sqrt(power) with zero phase (AWGN profile).
    bool fading = true;
    /// Loader notes, e.g. re-normalized powers.
    std::vector<std::string> warnings;

    std::size_t size() const { return delays_s.size(); }
};

/// Built-in names: "NTN-TDL-A", "NTN-TDL-C", "TDL-C", "AWGN".
/// Anything else is treated as a path to a profile JSON file.
/// `delay_scaling_s` overrides the profile's default delay scaling.
TapProfile load_profile(const std::string& name_or_path, std::optional<double> delay_scaling_s = std::nullopt);

TapProfile load_profile_file(const std::filesystem::path& path, std::optional<double> delay_scaling_s = std::nullopt);

/// Parses the JSON profile format (see data/profiles/README.md). Unlike the built-in
/// tables, a file whose powers do not sum to 1 gets a warning.
TapProfile parse_profile_json(const std::string& text, std::optional<double> delay_scaling_s = std::nullopt);

std::vector<std::string> builtin_profile_names();

struct RealizeParams {
    double doppler_hz = 0.0;
    Eigen::Index n_symbols = 1;
    double symbol_duration_s = 0.0;
    double sample_rate_hz = 0.0;
    /// Delays must stay strictly below the CP; negative disables the check.
    Eigen::Index n_cp = -1;
    int n_rays = 64;

    static RealizeParams for_ofdm(const OfdmConfig& cfg, double doppler_hz, Eigen::Index n_symbols)
    {
        RealizeParams p;
        p.doppler_hz = doppler_hz;
        p.n_symbols = n_symbols;
        p.symbol_duration_s = cfg.symbol_duration_s();
        p.sample_rate_hz = cfg.sample_rate_hz();
        p.n_cp = cfg.n_cp;
        return p;
    }
};

struct ChannelRealization {
    Eigen::MatrixXcd taps;             // n_symbols x n_taps
    std::vector<Eigen::Index> delays;  // per-tap delay in samples

    Eigen::Index n_symbols() const { return taps.rows(); }
    Eigen::Index n_taps() const { return taps.cols(); }
    Eigen::Index max_delay() const;
};

ChannelRealization realize_channel(const TapProfile& profile, const RealizeParams& params, std::uint64_t seed);

/// y[n] = sqrt(snr) sum_l h_l s[n - l] + z[n] over the CP-prefixed symbol.
/// snr_lin = +inf gives the noiseless unit-gain output sum_l h_l s[n - l].
CVecd apply_channel(const CVecd& sig, const ChannelRealization& ch, Eigen::Index symbol_index, double snr_lin,
                    std::uint64_t seed);

/// H_k = sum_l h_l exp(-j 2 pi k d_l / N_fft), k = 0..n_bins-1.
CVecd freq_response(const ChannelRealization& ch, Eigen::Index symbol_index, Eigen::Index n_fft, Eigen::Index n_bins);

inline CVecd freq_response(const ChannelRealization& ch, Eigen::Index symbol_index, const OfdmConfig& cfg)
{
    return freq_response(ch, symbol_index, cfg.n_fft, cfg.n_sc);
}

/// Adds zero-mean circular Gaussian error with E|e|^2 = 10^(mse_db/10).
/// mse_db = -inf returns the input unchanged.
CVecd perturb_estimate(const CVecd& h_tilde, double mse_db, std::uint64_t seed);

}  // namespace lowpapr
