#include "lowpapr/channel.hpp"

#include "lowpapr/rng.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <numeric>
#include <sstream>

namespace lowpapr {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

struct ProfileTable {
    const char* name;
    double delay_scaling_s;
    std::vector<double> normalized_delays;
    std::vector<double> powers_db;
    std::optional<double> rician_k_db;
};

// Tap tables transcribed from 3GPP TR 38.811 (NTN-TDL) and TR 38.901 (TDL).
// For NTN-TDL-C the LOS (-0.394 dB) and Rayleigh (-10.618 dB) parts of the
// first tap are merged into one tap of total power with K = 10.224 dB.
const std::vector<ProfileTable>& builtin_tables()
{
    static const std::vector<ProfileTable> tables = {
        {"NTN-TDL-A", 100e-9, {0.0, 1.0811, 2.8416}, {0.0, -4.675, -6.482}, std::nullopt},
        {"NTN-TDL-C", 3.5e-9, {0.0, 14.8124}, {0.000034, -23.373}, 10.224},
        {"TDL-C",
         300e-9,
         {0.0,    0.2099, 0.2219, 0.2329, 0.2176, 0.6366, 0.6448, 0.6560, 0.6584, 0.7935, 0.8213, 0.9336,
          1.2285, 1.3083, 2.1704, 2.7105, 4.2589, 4.6003, 5.4902, 5.6077, 6.3065, 6.6374, 7.0427, 8.6523},
         {-4.4,  -1.2,  -3.5,  -5.2,  -2.5,  0.0,   -2.2,  -3.9,  -7.4,  -7.1,  -10.7, -11.1,
          -5.1,  -6.8,  -8.7,  -13.2, -13.9, -13.9, -15.8, -17.1, -16.0, -15.7, -21.6, -22.8},
         std::nullopt},
    };
    return tables;
}

TapProfile build_profile(const std::string& name, double delay_scaling_s, const std::vector<double>& delays,
                         const std::vector<double>& powers_db, std::optional<double> rician_k_db,
                         bool warn_on_rescale)
{
    if (delays.empty()) throw DomainError("profile '" + name + "' has no taps");
    if (delays.size() != powers_db.size()) {
        throw DomainError("profile '" + name + "': normalized_delays and powers_db differ in length");
    }
    if (!(delay_scaling_s >= 0.0) || !std::isfinite(delay_scaling_s)) {
        throw DomainError("profile '" + name + "': delay scaling must be finite and non-negative");
    }

    std::vector<std::size_t> order(delays.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) { return delays[a] < delays[b]; });

    TapProfile p;
    p.name = name;
    double total = 0.0;
    for (auto i : order) {
        if (!(delays[i] >= 0.0) || !std::isfinite(delays[i])) {
            throw DomainError("profile '" + name + "': delays must be finite and non-negative");
        }
        if (!std::isfinite(powers_db[i])) throw DomainError("profile '" + name + "': non-finite tap power");
        p.delays_s.push_back(delays[i] * delay_scaling_s);
        p.powers_lin.push_back(std::pow(10.0, powers_db[i] / 10.0));
        total += p.powers_lin.back();
    }
    if (!(total > 0.0) || !std::isfinite(total)) throw DomainError("profile '" + name + "' cannot be normalized");
    if (warn_on_rescale && std::abs(total - 1.0) > 1e-3) {
        std::ostringstream msg;
        msg << "tap powers summed to " << total << ", re-normalized to 1";
        p.warnings.push_back(msg.str());
    }
    for (auto& pw : p.powers_lin) pw /= total;

    if (rician_k_db) {
        if (order.front() != 0) {
            throw DomainError("profile '" + name + "': the Rician tap must be the earliest one");
        }
        p.rician_k = std::pow(10.0, *rician_k_db / 10.0);
    }
    return p;
}

}  // namespace

std::vector<std::string> builtin_profile_names()
{
    std::vector<std::string> names{"AWGN"};
    for (const auto& t : builtin_tables()) names.emplace_back(t.name);
    return names;
}

TapProfile parse_profile_json(const std::string& text, std::optional<double> delay_scaling_s)
{
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw DomainError(std::string("profile file is not valid JSON: ") + e.what());
    }
    try {
        const auto name = j.at("name").get<std::string>();
        const double scaling = delay_scaling_s.value_or(j.at("delay_scaling_s").get<double>());
        const auto delays = j.at("normalized_delays").get<std::vector<double>>();
        const auto powers = j.at("powers_db").get<std::vector<double>>();
        std::optional<double> k_db;
        if (j.contains("rician_k_db") && !j["rician_k_db"].is_null()) k_db = j["rician_k_db"].get<double>();
        return build_profile(name, scaling, delays, powers, k_db, true);
    } catch (const nlohmann::json::exception& e) {
        throw DomainError(std::string("malformed profile: ") + e.what());
    }
}

TapProfile load_profile_file(const std::filesystem::path& path, std::optional<double> delay_scaling_s)
{
    std::ifstream in(path);
    if (!in) throw DomainError("cannot open profile file '" + path.string() + "'");
    std::stringstream buf;
    buf << in.rdbuf();
    return parse_profile_json(buf.str(), delay_scaling_s);
}

TapProfile load_profile(const std::string& name_or_path, std::optional<double> delay_scaling_s)
{
    if (name_or_path == "AWGN") {
        TapProfile p;
        p.name = "AWGN";
        p.delays_s = {0.0};
        p.powers_lin = {1.0};
        p.rician_k = std::numeric_limits<double>::infinity();
        p.fading = false;
        return p;
    }
    for (const auto& t : builtin_tables()) {
        if (name_or_path == t.name) {
            return build_profile(t.name, delay_scaling_s.value_or(t.delay_scaling_s), t.normalized_delays,
                                 t.powers_db, t.rician_k_db, false);
        }
    }
    if (std::filesystem::exists(name_or_path)) return load_profile_file(name_or_path, delay_scaling_s);
    throw DomainError("unknown channel profile '" + name_or_path + "'");
}

Eigen::Index ChannelRealization::max_delay() const
{
    return delays.empty() ? 0 : *std::max_element(delays.begin(), delays.end());
}

ChannelRealization realize_channel(const TapProfile& profile, const RealizeParams& params, std::uint64_t seed)
{
    if (!(params.doppler_hz >= 0.0)) throw DomainError("Doppler frequency must be non-negative");
    if (params.n_symbols < 1) throw DomainError("need at least one OFDM symbol");
    if (params.n_rays < 1) throw DomainError("need at least one Doppler ray");
    if (profile.size() == 0) throw DomainError("empty tap profile");

    ChannelRealization ch;
    const auto n_taps = static_cast<Eigen::Index>(profile.size());
    ch.taps.resize(params.n_symbols, n_taps);
    for (const double d : profile.delays_s) {
        ch.delays.push_back(static_cast<Eigen::Index>(std::llround(d * params.sample_rate_hz)));
    }
    if (params.n_cp >= 0 && ch.max_delay() >= std::max<Eigen::Index>(params.n_cp, 1) && ch.max_delay() > 0) {
        throw DomainError("tap delay of " + std::to_string(ch.max_delay()) + " samples is not covered by a CP of " +
                          std::to_string(params.n_cp) + " samples");
    }

    Rng rng(seed);
    std::uniform_real_distribution<double> uni(0.0, kTwoPi);
    const double fd = params.doppler_hz;
    const double ts = params.symbol_duration_s;

    for (Eigen::Index l = 0; l < n_taps; ++l) {
        const double power = profile.powers_lin[static_cast<std::size_t>(l)];
        if (!profile.fading) {
            ch.taps.col(l).setConstant(std::sqrt(power));
            continue;
        }
        const double k = (l == 0) ? profile.rician_k : 0.0;
        const double los_power = std::isinf(k) ? 1.0 : k / (k + 1.0);
        const double diffuse_power = std::isinf(k) ? 0.0 : 1.0 / (k + 1.0);

        // Sum of sinusoids: random arrival angles and phases, equal power rays.
        std::vector<double> ray_freq(static_cast<std::size_t>(params.n_rays));
        std::vector<double> ray_phase(ray_freq.size());
        for (std::size_t r = 0; r < ray_freq.size(); ++r) {
            ray_freq[r] = fd * std::cos(uni(rng));
            ray_phase[r] = uni(rng);
        }
        const double los_freq = fd * std::cos(uni(rng));
        const double los_phase = uni(rng);
        const double ray_gain = std::sqrt(diffuse_power / static_cast<double>(params.n_rays));

        for (Eigen::Index i = 0; i < params.n_symbols; ++i) {
            const double t = static_cast<double>(i) * ts;
            std::complex<double> h{0.0, 0.0};
            if (diffuse_power > 0.0) {
                for (std::size_t r = 0; r < ray_freq.size(); ++r) {
                    h += std::polar(ray_gain, kTwoPi * ray_freq[r] * t + ray_phase[r]);
                }
            }
            if (los_power > 0.0) h += std::polar(std::sqrt(los_power), kTwoPi * los_freq * t + los_phase);
            ch.taps(i, l) = std::sqrt(power) * h;
        }
    }
    return ch;
}

CVecd apply_channel(const CVecd& sig, const ChannelRealization& ch, Eigen::Index symbol_index, double snr_lin,
                    std::uint64_t seed)
{
    if (symbol_index < 0 || symbol_index >= ch.n_symbols()) throw DomainError("symbol index out of range");
    if (!(snr_lin >= 0.0)) throw DomainError("SNR must be non-negative");

    const Eigen::Index n = sig.size();
    CVecd y = CVecd::Zero(n);
    for (Eigen::Index l = 0; l < ch.n_taps(); ++l) {
        const auto d = ch.delays[static_cast<std::size_t>(l)];
        if (d >= n) continue;
        y.tail(n - d) += ch.taps(symbol_index, l) * sig.head(n - d);
    }
    if (std::isinf(snr_lin)) return y;

    y *= std::sqrt(snr_lin);
    Rng rng(seed);
    for (Eigen::Index i = 0; i < n; ++i) y[i] += complex_gaussian(rng);
    return y;
}

CVecd freq_response(const ChannelRealization& ch, Eigen::Index symbol_index, Eigen::Index n_fft, Eigen::Index n_bins)
{
    if (symbol_index < 0 || symbol_index >= ch.n_symbols()) throw DomainError("symbol index out of range");
    CVecd h = CVecd::Zero(n_bins);
    for (Eigen::Index l = 0; l < ch.n_taps(); ++l) {
        const double d = static_cast<double>(ch.delays[static_cast<std::size_t>(l)]);
        const auto tap = ch.taps(symbol_index, l);
        for (Eigen::Index k = 0; k < n_bins; ++k) {
            // reduce k*d modulo n_fft before the trig call to keep the phase exact
            const auto kd = static_cast<double>((static_cast<long long>(k) * static_cast<long long>(d)) % n_fft);
            h[k] += tap * std::polar(1.0, -kTwoPi * kd / static_cast<double>(n_fft));
        }
    }
    return h;
}

CVecd perturb_estimate(const CVecd& h_tilde, double mse_db, std::uint64_t seed)
{
    if (std::isinf(mse_db) && mse_db < 0) return h_tilde;
    if (std::isnan(mse_db)) throw DomainError("MSE must be a number");
    const double var = std::pow(10.0, mse_db / 10.0);
    Rng rng(seed);
    CVecd out = h_tilde;
    for (Eigen::Index k = 0; k < out.size(); ++k) out[k] += complex_gaussian(rng, var);
    return out;
}

}  // namespace lowpapr
