#include "lowpapr/experiments.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <mutex>
#include <thread>

namespace lowpapr {

void parallel_for(std::size_t n, int threads, const std::function<void(std::size_t)>& body)
{
    const auto workers = static_cast<std::size_t>(std::max(1, threads));
    if (workers == 1 || n < 2) {
        for (std::size_t i = 0; i < n; ++i) body(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    auto worker = [&] {
        for (std::size_t i = next++; i < n; i = next++) {
            try {
                body(i);
            } catch (...) {
                std::lock_guard lock(failure_mutex);
                if (!failure) failure = std::current_exception();
                next = n;
            }
        }
    };
    std::vector<std::thread> pool;
    for (std::size_t t = 0; t < std::min(workers, n); ++t) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
    if (failure) std::rethrow_exception(failure);
}

TxChain TxChain::make(Scheme scheme, double beta_db, const OfdmConfig& cfg)
{
    cfg.validate();
    TxChain tx;
    tx.scheme = scheme;
    tx.cfg = cfg;
    tx.window = make_fdss<double>(beta_db, cfg.n_sc);
    tx.eta = power_norm(scheme, tx.window);
    return tx;
}

CVecd TxChain::modulate(const BitBlock& bits) const
{
    return ofdm_modulate(dft_precode(map_bits(scheme, bits)), window, eta, cfg);
}

std::vector<double> papr_samples(const TxChain& tx, std::size_t n_trials, std::uint64_t seed, int threads)
{
    std::vector<double> out(n_trials);
    parallel_for(n_trials, threads, [&](std::size_t i) {
        auto rng = make_rng(seed, Stream::Bits, i);
        out[i] = papr_db(tx.modulate(random_bits(rng, tx.bits_per_symbol())), tx.cfg);
    });
    std::sort(out.begin(), out.end());
    return out;
}

std::vector<CcdfPoint> ccdf_on_grid(const std::vector<double>& sorted, double lo_db, double hi_db, double step_db)
{
    if (sorted.empty()) throw LengthError("no PAPR samples");
    if (!(step_db > 0.0) || hi_db < lo_db) throw DomainError("invalid CCDF grid");
    std::vector<CcdfPoint> out;
    const auto n = static_cast<double>(sorted.size());
    const auto steps = static_cast<std::size_t>(std::floor((hi_db - lo_db) / step_db + 1e-9));
    for (std::size_t i = 0; i <= steps; ++i) {
        const double x = lo_db + static_cast<double>(i) * step_db;
        const auto above = sorted.end() - std::upper_bound(sorted.begin(), sorted.end(), x);
        out.push_back({x, static_cast<double>(above) / n});
    }
    return out;
}

double ccdf_readout(const std::vector<double>& sorted, double p)
{
    if (sorted.empty()) throw LengthError("no PAPR samples");
    if (!(p > 0.0 && p < 1.0)) throw DomainError("CCDF level must lie in (0, 1)");
    const auto n = sorted.size();
    // Order statistic i (0-based, ascending) is exceeded with probability (n - 1 - i) / n.
    auto level = [n](std::size_t i) { return static_cast<double>(n - 1 - i) / static_cast<double>(n); };
    if (level(0) <= p) return sorted.front();
    for (std::size_t i = 1; i < n; ++i) {
        if (level(i) <= p) {
            const double c0 = level(i - 1);
            const double c1 = level(i);
            const double t = (c0 - p) / (c0 - c1);
            return sorted[i - 1] + t * (sorted[i] - sorted[i - 1]);
        }
    }
    return sorted.back();
}

std::vector<PsdPoint> psd_curve(const TxChain& tx, double lo_sc, double hi_sc, double step_sc)
{
    if (!(step_sc > 0.0) || hi_sc < lo_sc) throw DomainError("invalid PSD grid");
    const auto steps = static_cast<std::size_t>(std::floor((hi_sc - lo_sc) / step_sc + 1e-9));
    std::vector<double> f_sc(steps + 1);
    std::vector<double> f_hz(steps + 1);
    for (std::size_t i = 0; i <= steps; ++i) {
        f_sc[i] = lo_sc + static_cast<double>(i) * step_sc;
        f_hz[i] = f_sc[i] * tx.cfg.scs_hz;
    }
    const auto p = avg_psd<double>(tx.scheme, tx.window, tx.eta, tx.cfg, f_hz);
    std::vector<PsdPoint> out;
    for (std::size_t i = 0; i <= steps; ++i) {
        out.push_back({f_sc[i], 10.0 * std::log10(std::max(p[i], 1e-300))});
    }
    return out;
}

namespace {

double db_to_lin(double db) { return std::pow(10.0, db / 10.0); }

struct RealizationTally {
    std::int64_t errors = 0;
    std::int64_t bits = 0;
    double theory = 0.0;  // mean semi-analytic BER over the realization's symbols
    std::int64_t resamples = 0;
    std::vector<LlrRecord> llrs;
};

// Equalizer designed on the (possibly perturbed) estimate, plus the gains the
// true channel produces with it.
struct Receiver {
    EqualizedGains<double> eq;
    bool perfect_csi;
};

Receiver design_receiver(const LinkConfig& link, const CVecd& h_tilde, std::uint64_t estimate_seed)
{
    const bool perfect = std::isinf(link.mse_db) && link.mse_db < 0;
    Receiver rx{make_equalizer(perturb_estimate(h_tilde, link.mse_db, estimate_seed), link.equalizer), perfect};
    return rx;
}

RealizationTally run_realization(const LinkConfig& link, double snr_lin, const BerOptions& opt, std::uint64_t seed,
                                 std::uint64_t r)
{
    const auto& tx = link.tx;
    const auto n_sym = opt.symbols_per_realization;
    const auto params = RealizeParams::for_ofdm(tx.cfg, link.doppler_hz, n_sym);

    RealizationTally tally;
    for (std::uint64_t attempt = 0;; ++attempt) {
        // Attempt 0 uses the plain realization index; resamples move to a separate stream.
        const std::uint64_t ch_seed =
            attempt == 0 ? derive_seed(seed, Stream::Channel, r) : derive_seed(seed ^ r, Stream::Resample, attempt);
        const auto ch = realize_channel(link.profile, params, ch_seed);

        RealizationTally t;
        t.resamples = tally.resamples;
        try {
            for (Eigen::Index i = 0; i < n_sym; ++i) {
                const std::uint64_t idx = r * static_cast<std::uint64_t>(n_sym) + static_cast<std::uint64_t>(i);
                auto bit_rng = make_rng(seed, Stream::Bits, idx);
                const auto bits = random_bits(bit_rng, tx.bits_per_symbol());

                const auto y = apply_channel(tx.modulate(bits), ch, i, snr_lin, derive_seed(seed, Stream::Noise, idx));
                const auto h_tilde = effective_channel(freq_response(ch, i, tx.cfg), tx.window, tx.eta, snr_lin);
                const auto rx = design_receiver(link, h_tilde, derive_seed(seed, Stream::Estimate, idx));

                const auto r_blk = despread(equalize(ofdm_demodulate(y, tx.cfg), rx.eq));

                double theory = std::numeric_limits<double>::quiet_NaN();
                double llr_sinr = 1.0;
                double llr_gain = 1.0;
                if (rx.perfect_csi) {
                    const auto report = sinr_for(tx.scheme, rx.eq);
                    theory = ber_semi_analytic(tx.scheme, report);
                    llr_sinr = report.sinr_lin;
                    llr_gain = report.mu;
                }
                const auto llr = compute_llrs(r_blk, tx.scheme, llr_sinr, llr_gain);
                const auto decided = hard_decisions<double>(llr);
                std::int64_t errs = 0;
                for (std::size_t b = 0; b < bits.size(); ++b) errs += decided[b] != bits[b];
                t.errors += errs;
                t.bits += static_cast<std::int64_t>(bits.size());
                t.theory += theory;

                if (r == 0 && i < opt.export_llr_symbols) {
                    for (Eigen::Index b = 0; b < llr.size(); ++b) {
                        t.llrs.push_back({i, b, bits[static_cast<std::size_t>(b)], llr[b]});
                    }
                }
            }
        } catch (const SingularChannelError&) {
            tally.resamples += 1;
            continue;
        }
        t.theory /= static_cast<double>(n_sym);
        return t;
    }
}

}  // namespace

BerPoint ber_point(const LinkConfig& link, double snr_db, const BerOptions& opt, std::uint64_t seed, int threads)
{
    if (opt.symbols_per_realization < 1 || opt.batch < 1 || opt.max_realizations < 1) {
        throw DomainError("BER options need positive symbol, batch and realization counts");
    }
    const double snr_lin = db_to_lin(snr_db);
    BerPoint pt;
    pt.snr_db = snr_db;

    double sum_d = 0.0;
    double sum_d2 = 0.0;
    double sum_p = 0.0;
    double sum_p2 = 0.0;
    double sum_theory = 0.0;

    std::int64_t done = 0;
    while (done < opt.max_realizations) {
        const auto count = static_cast<std::size_t>(std::min(opt.batch, opt.max_realizations - done));
        std::vector<RealizationTally> slots(count);
        parallel_for(count, threads, [&](std::size_t j) {
            slots[j] = run_realization(link, snr_lin, opt, seed, static_cast<std::uint64_t>(done) + j);
        });
        for (auto& t : slots) {
            const double p_hat = static_cast<double>(t.errors) / static_cast<double>(t.bits);
            const double d = p_hat - t.theory;
            pt.bit_errors += t.errors;
            pt.bits += t.bits;
            pt.singular_resamples += t.resamples;
            sum_p += p_hat;
            sum_p2 += p_hat * p_hat;
            sum_d += d;
            sum_d2 += d * d;
            sum_theory += t.theory;
            if (!t.llrs.empty()) pt.llrs = std::move(t.llrs);
        }
        done += static_cast<std::int64_t>(count);
        if (pt.bit_errors >= opt.min_errors && done >= opt.min_realizations) break;
    }

    const auto n = static_cast<double>(done);
    pt.realizations = done;
    pt.ber_mc = static_cast<double>(pt.bit_errors) / static_cast<double>(pt.bits);
    pt.ber_theory = sum_theory / n;
    auto std_error = [n](double s, double s2) {
        if (n < 2) return std::numeric_limits<double>::infinity();
        const double var = std::max(0.0, (s2 - s * s / n) / (n - 1.0));
        return std::sqrt(var / n);
    };
    pt.se_diff = std_error(sum_d, sum_d2);
    pt.se_mc = std_error(sum_p, sum_p2);
    return pt;
}

namespace {

template <typename Metric>
std::vector<CurvePoint> average_curve(const LinkConfig& link, const std::vector<double>& snr_db,
                                      std::int64_t n_realizations, std::uint64_t seed, int threads, Metric metric)
{
    if (n_realizations < 1) throw DomainError("need at least one realization");
    const auto& tx = link.tx;
    const auto params = RealizeParams::for_ofdm(tx.cfg, link.doppler_hz, 1);
    const auto n_real = static_cast<std::size_t>(n_realizations);

    // One slot per (snr, realization); channels are shared across SNR points.
    std::vector<double> slots(snr_db.size() * n_real);
    parallel_for(n_real, threads, [&](std::size_t r) {
        for (std::uint64_t attempt = 0;; ++attempt) {
            const std::uint64_t ch_seed = attempt == 0 ? derive_seed(seed, Stream::Channel, r)
                                                       : derive_seed(seed ^ r, Stream::Resample, attempt);
            const auto ch = realize_channel(link.profile, params, ch_seed);
            const auto h = freq_response(ch, 0, tx.cfg);
            try {
                for (std::size_t s = 0; s < snr_db.size(); ++s) {
                    const double snr_lin = db_to_lin(snr_db[s]);
                    const auto h_tilde = effective_channel(h, tx.window, tx.eta, snr_lin);
                    const auto eq = make_equalizer(h_tilde, link.equalizer);
                    slots[s * n_real + r] = metric(sinr_for(tx.scheme, eq), s, r);
                }
                return;
            } catch (const SingularChannelError&) {
                continue;
            }
        }
    });

    std::vector<CurvePoint> out;
    for (std::size_t s = 0; s < snr_db.size(); ++s) {
        double acc = 0.0;
        for (std::size_t r = 0; r < n_real; ++r) acc += slots[s * n_real + r];
        out.push_back({snr_db[s], acc / static_cast<double>(n_real)});
    }
    return out;
}

}  // namespace

std::vector<CurvePoint> capacity_curve(const LinkConfig& link, const std::vector<double>& snr_db,
                                       std::int64_t n_realizations, std::uint64_t seed, int threads,
                                       const MiMethod& method)
{
    const Scheme scheme = link.tx.scheme;
    return average_curve(link, snr_db, n_realizations, seed, threads,
                         [&](const SinrReport<double>& rep, std::size_t s, std::size_t r) {
                             MiMethod m = method;
                             m.seed = derive_seed(method.seed, Stream::Oracle, s * 0x100000000ULL + r);
                             return bits_per_channel_use(scheme, rep, m);
                         });
}

std::vector<CurvePoint> sinr_curve(const LinkConfig& link, const std::vector<double>& snr_db,
                                   std::int64_t n_realizations, std::uint64_t seed, int threads)
{
    return average_curve(link, snr_db, n_realizations, seed, threads,
                         [](const SinrReport<double>& rep, std::size_t, std::size_t) { return rep.sinr_lin; });
}

std::optional<double> crossing_snr(const std::vector<CurvePoint>& curve, double target)
{
    if (!(target > 0.0)) throw DomainError("crossing target must be positive");
    const double lt = std::log10(target);
    for (std::size_t i = 1; i < curve.size(); ++i) {
        const double a = curve[i - 1].value;
        const double b = curve[i].value;
        if (!(a > 0.0) || !(b > 0.0)) continue;
        const double la = std::log10(a);
        const double lb = std::log10(b);
        if ((la - lt) * (lb - lt) <= 0.0 && la != lb) {
            const double t = (lt - la) / (lb - la);
            return curve[i - 1].snr_db + t * (curve[i].snr_db - curve[i - 1].snr_db);
        }
    }
    return std::nullopt;
}

}  // namespace lowpapr
