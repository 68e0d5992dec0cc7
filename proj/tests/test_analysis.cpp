#include "lowpapr/analysis.hpp"
#include "lowpapr/channel.hpp"
#include "lowpapr/experiments.hpp"

#include "sinr_oracle.hpp"
#include "test_util.hpp"

#include <doctest.h>

#include <cmath>
#include <limits>
#include <numbers>

using namespace lowpapr;
using namespace testutil;

namespace {

const double kInf = std::numeric_limits<double>::infinity();

EqualizedGains<double> gains_of(std::initializer_list<double> g, std::initializer_list<double> e)
{
    EqualizedGains<double> out;
    out.g.resize(static_cast<Eigen::Index>(g.size()));
    out.e.resize(static_cast<Eigen::Index>(e.size()));
    Eigen::Index i = 0;
    for (double x : g) out.g[i++] = x;
    i = 0;
    for (double x : e) out.e[i++] = x;
    return out;
}

CVecd flat(Eigen::Index n, cd value) { return CVecd::Constant(n, value); }

// Q(x) by Simpson integration of the standard normal density on [x, x + 40].
double q_oracle(double x)
{
    const int n = 200000;
    const double h = 40.0 / n;
    auto pdf = [](double t) { return std::exp(-0.5 * t * t) / std::sqrt(2.0 * std::numbers::pi); };
    double acc = pdf(x) + pdf(x + 40.0);
    for (int i = 1; i < n; ++i) acc += (i % 2 ? 4.0 : 2.0) * pdf(x + i * h);
    return acc * h / 3.0;
}

// I(x; y) for y = h x + n, x = +-a, by trapezoid integration over y given x = +a.
double mi_trapezoid(double h, double noise_var, double a)
{
    const double sigma = std::sqrt(noise_var);
    const double lo = h * a - 14.0 * sigma;
    const double hi = h * a + 14.0 * sigma;
    const int n = 400000;
    const double dy = (hi - lo) / n;
    double acc = 0.0;
    for (int i = 0; i <= n; ++i) {
        const double y = lo + i * dy;
        const double pdf = std::exp(-(y - h * a) * (y - h * a) / (2 * noise_var)) / std::sqrt(2 * std::numbers::pi * noise_var);
        const double t = -2.0 * h * a * y / noise_var;
        const double penalty = t > 30 ? t / std::log(2.0) : std::log2(1.0 + std::exp(t));
        acc += (i == 0 || i == n ? 0.5 : 1.0) * pdf * penalty;
    }
    return 1.0 - acc * dy;
}

}  // namespace

TEST_CASE("i.i.d. SINR")
{
    SUBCASE("two-bin example and its interference oracle")
    {
        const auto g = gains_of({3, 1}, {1, 1});
        const auto rep = sinr_iid(g);
        CHECK(rep.mu == doctest::Approx(2.0));
        CHECK(rep.interference_power == doctest::Approx(1.0));
        CHECK(rep.noise_power == doctest::Approx(1.0));
        CHECK(rep.sinr_lin == doctest::Approx(2.0));

        const auto est = oracle::measure(Scheme::Qpsk, g.g, g.e, rep.mu, 1'000'000, 11);
        CHECK(est.interference.mean == doctest::Approx(1.0).epsilon(0.01));
        CHECK(est.noise.mean == doctest::Approx(1.0).epsilon(0.01));
    }
    SUBCASE("flat MMSE gives back the SNR")
    {
        for (double rho : {0.1, 1.0, 31.6}) {
            const auto eq = make_equalizer(flat(16, cd(0.6, 0.8) * std::sqrt(rho)), EqualizerKind::Mmse);
            CHECK(sinr_iid(eq).sinr_lin == doctest::Approx(rho).epsilon(1e-12));
            CHECK(sinr_mmse_identity(eq) == doctest::Approx(rho).epsilon(1e-12));
        }
    }
    SUBCASE("ZF SINR is N over the sum of inverse channel powers")
    {
        auto rng = make_rng(1, Stream::Oracle, 0);
        for (int t = 0; t < 20; ++t) {
            const auto h = random_complex(rng, 24, 4.0);
            const double expect = 24.0 / h.cwiseAbs2().cwiseInverse().sum();
            CHECK(sinr_iid(make_equalizer(h, EqualizerKind::Zf)).sinr_lin == doctest::Approx(expect).epsilon(1e-12));
        }
    }
    SUBCASE("MMSE shortcut matches the general formula")
    {
        auto rng = make_rng(2, Stream::Oracle, 0);
        for (int t = 0; t < 100; ++t) {
            const auto eq = make_equalizer(random_complex(rng, 12 + 4 * (t % 5), 5.0), EqualizerKind::Mmse);
            const double a = sinr_iid(eq).sinr_lin;
            CHECK(std::abs(sinr_mmse_identity(eq) - a) <= 1e-10 * a);
        }
        CHECK_THROWS_AS(sinr_mmse_identity(make_equalizer(flat(4, 1.0), EqualizerKind::Zf)), DomainError);
    }
}

TEST_CASE("BPSK SINR")
{
    SUBCASE("two bins: BPSK partner is the bin itself")
    {
        auto rng = make_rng(3, Stream::Oracle, 0);
        for (int t = 0; t < 10; ++t) {
            const auto eq = make_equalizer(random_complex(rng, 2), EqualizerKind::Mmse);
            CHECK(sinr_bpsk(eq, Scheme::Bpsk).interference_power ==
                  doctest::Approx(sinr_iid(eq).interference_power).epsilon(1e-12));
        }
    }
    SUBCASE("two bins, pi/2-BPSK, G = [3, 1] has no interference")
    {
        const auto g = gains_of({3, 1}, {1, 1});
        const auto rep = sinr_bpsk(g, Scheme::Pi2Bpsk);
        CHECK(std::abs(rep.interference_power) < 1e-12);
        CHECK(rep.noise_power == doctest::Approx(0.5));
        const auto est = oracle::measure(Scheme::Pi2Bpsk, g.g, g.e, rep.mu, 200'000, 12);
        CHECK(est.interference.mean < 1e-20);
        CHECK(est.noise.within(0.5, 3.0));
    }
    CHECK_THROWS_AS(sinr_bpsk(gains_of({1, 1, 1}, {1, 1, 1}), Scheme::Bpsk), LengthError);
    CHECK_THROWS_AS(sinr_bpsk(gains_of({1, 1}, {1, 1}), Scheme::Qpsk), DomainError);
}

TEST_CASE("RO-QPSK SINR")
{
    SUBCASE("four-bin MF example against the combining oracle")
    {
        const auto g = gains_of({1.0, 0.8, 0.6, 0.8}, {1.0, 0.8, 0.6, 0.8});
        const auto rep = sinr_roqpsk(g, RoQpskMode::Exact);
        REQUIRE(rep.interference_power > 0.0);
        const auto est = oracle::measure(Scheme::RoQpsk, g.g, g.e, rep.mu, 1'000'000, 13);
        CHECK(est.interference.mean == doctest::Approx(rep.interference_power).epsilon(0.01));
        CHECK(est.noise.mean == doctest::Approx(rep.noise_power).epsilon(0.01));
    }
    SUBCASE("cross-branch coefficient and weighted mean gain from the time-domain taps")
    {
        auto rng = make_rng(4, Stream::Oracle, 0);
        for (Eigen::Index n : {4, 8, 12}) {
            for (int t = 0; t < 5; ++t) {
                const auto d = oracle::random_draw(t, n, rng);
                const auto taps = time_taps(d.g);
                const double mu_w = (taps[0] - taps[n - 1]).real();
                const double kappa = 0.5 * (2.0 * taps[1] - taps[2 % n]).imag();
                CHECK(mu_w == doctest::Approx(sinr_roqpsk(EqualizedGains<double>{d.e, d.g}).mu).epsilon(1e-10));

                // Push a single unit bit-amplitude through map, channel and combiner.
                const auto c = oracle::circulant(d.g.cast<cd>());
                for (Eigen::Index m : {Eigen::Index(0), Eigen::Index(1)}) {
                    CVecd a = CVecd::Zero(n);
                    a[m] = m % 2 == 0 ? cd(1, 0) : cd(0, 1);
                    CVecd x = a;
                    x[(m + 1) % n] -= a[m];
                    const auto q = combine_roqpsk(CVecd(c * x));
                    const double own = m == 0 ? q[0].real() : q[0].imag();
                    const double cross = m == 0 ? q[0].imag() : q[0].real();
                    CAPTURE(n);
                    CAPTURE(m);
                    CHECK(own == doctest::Approx(mu_w).epsilon(1e-10));
                    CHECK(std::abs(cross - kappa) < 1e-10);
                }
            }
        }
    }
    SUBCASE("flat channel has zero interference")
    {
        for (double g : {0.3, 1.0, 2.5}) {
            EqualizedGains<double> eq{flat(12, 1.0), RVecd::Constant(12, g)};
            CHECK(std::abs(sinr_roqpsk(eq).interference_power) < 1e-10);
        }
    }
    CHECK_THROWS_AS(sinr_roqpsk(gains_of({1, 1, 1}, {1, 1, 1})), LengthError);
}

TEST_CASE("flat ZF: BPSK variants and RO-QPSK double the i.i.d. SINR")
{
    for (double rho : {0.5, 2.0, 100.0}) {
        for (Eigen::Index n : {2, 12, 96}) {
            const auto eq = make_equalizer(flat(n, cd(0, -1) * std::sqrt(rho)), EqualizerKind::Zf);
            const double iid = sinr_iid(eq).sinr_lin;
            CHECK(iid == doctest::Approx(rho).epsilon(1e-12));
            CHECK(sinr_bpsk(eq, Scheme::Bpsk).sinr_lin == doctest::Approx(2 * iid).epsilon(1e-12));
            CHECK(sinr_bpsk(eq, Scheme::Pi2Bpsk).sinr_lin == doctest::Approx(2 * iid).epsilon(1e-12));
            CHECK(sinr_roqpsk(eq).sinr_lin == doctest::Approx(2 * iid).epsilon(1e-12));
            CHECK(std::abs(sinr_roqpsk(eq).interference_power) <= 1e-10);
        }
    }
}

TEST_CASE("closed forms agree with the brute-force receiver on random draws")
{
    auto rng = make_rng(5, Stream::Oracle, 0);
    std::uint64_t seed = 100;
    for (Eigen::Index n : {2, 4, 8, 12}) {
        for (int t = 0; t < 4; ++t) {
            const auto d = oracle::random_draw(t, n, rng);
            for (auto s : {Scheme::Qpsk, Scheme::Bpsk, Scheme::Pi2Bpsk, Scheme::RoQpsk}) {
                const auto [interference, noise] = oracle::closed_form(s, d);
                const auto est = oracle::measure(s, d.g, d.e, oracle::signal_gain(s, d),
                                                 oracle::blocks_for(s, n, 200'000), ++seed);
                CAPTURE(n);
                CAPTURE(d.kind);
                CAPTURE(to_string(s));
                CAPTURE(est.interference.z(interference));
                CAPTURE(est.noise.z(noise));
                CHECK(est.interference.within(interference, 3.0));
                CHECK(est.noise.within(noise, 3.0));
            }
        }
    }
}

TEST_CASE("report invariants")
{
    auto rng = make_rng(6, Stream::Oracle, 0);
    for (int t = 0; t < 20; ++t) {
        const auto d = oracle::random_draw(t, 16, rng);
        EqualizedGains<double> eq{d.e, d.g};
        for (auto s : {Scheme::Qpsk, Scheme::Bpsk, Scheme::Pi2Bpsk, Scheme::RoQpsk}) {
            const auto r = sinr_for(s, eq);
            CHECK(r.interference_power >= 0.0);
            CHECK(r.signal_power == doctest::Approx(r.mu * r.mu));
            CHECK(r.sinr_lin == doctest::Approx(r.signal_power / (r.interference_power + r.noise_power)).epsilon(1e-12));
        }
    }
    CHECK(detail::clip_interference(-1e-12, 1.0) == 0.0);
    CHECK_THROWS_AS(detail::clip_interference(-1e-6, 1.0), ConsistencyError);
    EqualizedGains<double> noiseless{CVecd::Zero(4), RVecd::Constant(4, 1.0)};
    CHECK(std::isinf(sinr_iid(noiseless).sinr_lin));
}

TEST_CASE("equalized time-domain taps")
{
    auto rng = make_rng(7, Stream::Oracle, 0);
    for (Eigen::Index n : {2, 5, 12, 96}) {
        const auto d = oracle::random_draw(3, n, rng);
        const auto taps = time_taps(d.g);
        const double nn = static_cast<double>(n);
        CHECK(taps[0].real() == doctest::Approx(d.g.mean()).epsilon(1e-12));
        CHECK(taps.squaredNorm() == doctest::Approx(d.g.squaredNorm() / nn).epsilon(1e-12));
        if (n > 1) {
            const double ici = taps.tail(n - 1).squaredNorm();
            CHECK(ici == doctest::Approx(sinr_iid(EqualizedGains<double>{d.e, d.g}).interference_power).epsilon(1e-9));
        }
        for (Eigen::Index m = 1; m < n; ++m) CHECK(std::abs(taps[n - m] - std::conj(taps[m])) < 1e-12);
    }
}

TEST_CASE("approximate RO-QPSK interference on smooth channels")
{
    // Per-realization SINR from the exact and the approximate interference
    // power on NTN-TDL-C responses, whose delay spread is two samples.
    OfdmConfig cfg;
    cfg.n_sc = 96;
    cfg.n_fft = 1024;
    cfg.n_cp = 72;
    cfg.scs_hz = 30e3;
    const auto prof = load_profile("NTN-TDL-C");
    const auto params = RealizeParams::for_ofdm(cfg, 200.0, 1);
    const auto win = flat_window(96);
    const double eta = power_norm(Scheme::RoQpsk, win);
    for (auto kind : {EqualizerKind::Mf, EqualizerKind::Zf, EqualizerKind::Mmse}) {
        for (double snr_db : {0.0, 10.0, 20.0}) {
            std::vector<double> rel;
            for (int r = 0; r < 300; ++r) {
                const auto ch = realize_channel(prof, params, derive_seed(8, Stream::Channel, r));
                const auto h = effective_channel(freq_response(ch, 0, cfg), win, eta, std::pow(10.0, snr_db / 10));
                const auto eq = make_equalizer(h, kind);
                const double exact = sinr_roqpsk(eq, RoQpskMode::Exact).sinr_lin;
                const double approx = sinr_roqpsk(eq, RoQpskMode::Approx).sinr_lin;
                rel.push_back(std::abs(approx - exact) / exact);
            }
            std::sort(rel.begin(), rel.end());
            CAPTURE(to_string(kind));
            CAPTURE(snr_db);
            CHECK(rel[rel.size() / 2] <= 0.05);
            CHECK(rel[rel.size() * 9 / 10] <= 0.05);
        }
    }
}

TEST_CASE("semi-analytic BER")
{
    for (double x : {0.0, 0.5, 1.0, 2.0, 3.0, 4.5}) CHECK(q_function(x) == doctest::Approx(q_oracle(x)).epsilon(1e-9));

    SinrReport<double> rep;
    rep.sinr_lin = 0.0;
    CHECK(ber_semi_analytic(Scheme::Qpsk, rep) == doctest::Approx(0.5));
    rep.sinr_lin = kInf;
    CHECK(ber_semi_analytic(Scheme::RoQpsk, rep) == 0.0);
    rep.sinr_lin = 9.09;
    CHECK(ber_semi_analytic(Scheme::Qpsk, rep) == doctest::Approx(q_oracle(std::sqrt(9.09))).epsilon(1e-9));
    CHECK(ber_semi_analytic(Scheme::Qpsk, rep) == doctest::Approx(1.3e-3).epsilon(0.05));
    rep.sinr_lin = -1.0;
    CHECK_THROWS_AS(ber_semi_analytic(Scheme::Bpsk, rep), DomainError);
}

TEST_CASE("Gauss-Hermite rule")
{
    const auto& gh = gauss_hermite(64);
    REQUIRE(gh.nodes.size() == 64);
    for (int k = 0; k <= 15; ++k) {
        const double moment = (gh.weights.array() * gh.nodes.array().pow(2 * k)).sum();
        CHECK(moment == doctest::Approx(std::tgamma(k + 0.5)).epsilon(1e-10));
        const auto odd = (gh.weights.array() * gh.nodes.array().pow(2 * k + 1)).eval();
        CHECK(std::abs(odd.sum()) <= 1e-10 * odd.abs().sum());
    }
    CHECK(gh.weights.sum() == doctest::Approx(std::sqrt(std::numbers::pi)).epsilon(1e-13));
}

TEST_CASE("binary-input mutual information")
{
    CHECK(mutual_info_binary(1.0, 1.0, 1.0) == doctest::Approx(mi_trapezoid(1.0, 1.0, 1.0)).epsilon(1e-4));
    for (auto [h, v, a] : {std::tuple{0.5, 2.0, 1.0}, {2.0, 0.3, kInvSqrt2}, {0.1, 1.0, 1.0}, {1.0, 0.05, 1.0}}) {
        CAPTURE(h);
        CAPTURE(v);
        CHECK(std::abs(mutual_info_binary(h, v, a) - mi_trapezoid(h, v, a)) < 1e-4);
    }
    CHECK(mutual_info_binary(1.0, 1e9, 1.0) < 1e-8);
    CHECK(mutual_info_binary(1.0, kInf, 1.0) == 0.0);
    CHECK(mutual_info_binary(10.0, 0.01, 1.0) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK_THROWS_AS(mutual_info_binary(1.0, 0.0, 1.0), DomainError);
    CHECK_THROWS_AS(mutual_info_binary(1.0, -1.0, 1.0), DomainError);

    SUBCASE("Monte-Carlo agrees with quadrature")
    {
        for (double v : {0.25, 1.0, 4.0}) {
            const double gh = mutual_info_binary(1.0, v, 1.0);
            const double mc = mutual_info_binary(1.0, v, 1.0, MiMethod::monte_carlo(400000, 9));
            CHECK(std::abs(mc - gh) < 0.005);
        }
    }
    SUBCASE("monotone in SNR")
    {
        double prev = 0.0;
        for (double v = 100.0; v > 0.01; v /= 1.5) {
            const double i = mutual_info_binary(1.0, v, 1.0);
            CHECK(i >= prev);
            prev = i;
        }
    }
}

TEST_CASE("bits per channel use")
{
    SinrReport<double> rep;
    rep.mu = 0.8;
    rep.sinr_lin = 0.0;
    for (auto s : {Scheme::Qpsk, Scheme::Bpsk, Scheme::Pi2Bpsk, Scheme::RoQpsk}) CHECK(bits_per_channel_use(s, rep) == 0.0);
    rep.sinr_lin = kInf;
    CHECK(bits_per_channel_use(Scheme::Qpsk, rep) == 2.0);
    CHECK(bits_per_channel_use(Scheme::Pi2Bpsk, rep) == 1.0);
    CHECK(bits_per_channel_use(Scheme::RoQpsk, rep) == 1.0);

    SUBCASE("per-branch channel construction")
    {
        for (double s : {0.1, 1.0, 10.0}) {
            rep.sinr_lin = s;
            const double branch = mutual_info_binary(rep.mu, rep.mu * rep.mu / (2 * s), kInvSqrt2);
            CHECK(bits_per_channel_use(Scheme::Qpsk, rep) == doctest::Approx(2 * branch).epsilon(1e-12));
            CHECK(bits_per_channel_use(Scheme::RoQpsk, rep) == doctest::Approx(branch).epsilon(1e-12));
            CHECK(bits_per_channel_use(Scheme::Bpsk, rep) ==
                  doctest::Approx(mutual_info_binary(rep.mu, rep.mu * rep.mu / s, 1.0)).epsilon(1e-12));
            CHECK(bits_per_channel_use(Scheme::Qpsk, rep) == doctest::Approx(2 * bits_per_channel_use(Scheme::Bpsk, rep)).epsilon(1e-12));
        }
    }
    SUBCASE("independent of the gain scale")
    {
        rep.sinr_lin = 3.0;
        const double a = bits_per_channel_use(Scheme::Qpsk, rep);
        rep.mu = 17.0;
        CHECK(bits_per_channel_use(Scheme::Qpsk, rep) == doctest::Approx(a).epsilon(1e-12));
    }
    SUBCASE("low SNR slope is linear in SINR")
    {
        rep.sinr_lin = 1e-4;
        CHECK(bits_per_channel_use(Scheme::Qpsk, rep) == doctest::Approx(1e-4 / std::log(2.0)).epsilon(1e-3));
    }
}

TEST_CASE("SINR and capacity curves")
{
    OfdmConfig cfg;
    cfg.n_sc = 24;
    cfg.n_fft = 256;
    cfg.n_cp = 18;
    cfg.scs_hz = 30e3;

    SUBCASE("AWGN with ZF reproduces the SNR")
    {
        LinkConfig link{TxChain::make(Scheme::Qpsk, 0.0, cfg), load_profile("AWGN"), 0.0, EqualizerKind::Zf};
        const auto curve = sinr_curve(link, {-3.0, 0.0, 10.0}, 4, 1);
        CHECK(curve[0].value == doctest::Approx(std::pow(10.0, -0.3)).epsilon(1e-12));
        CHECK(curve[1].value == doctest::Approx(1.0).epsilon(1e-12));
        CHECK(curve[2].value == doctest::Approx(10.0).epsilon(1e-12));
        link.tx = TxChain::make(Scheme::RoQpsk, 0.0, cfg);
        CHECK(sinr_curve(link, {0.0}, 2, 1)[0].value == doctest::Approx(2.0).epsilon(1e-12));
    }
    SUBCASE("thread count does not change results")
    {
        LinkConfig link{TxChain::make(Scheme::Pi2Bpsk, -5.0, cfg), load_profile("TDL-C", 30e-9), 200.0,
                        EqualizerKind::Mmse};
        const auto a = capacity_curve(link, {-5.0, 5.0}, 40, 3, 1);
        const auto b = capacity_curve(link, {-5.0, 5.0}, 40, 3, 3);
        REQUIRE(a.size() == b.size());
        for (std::size_t i = 0; i < a.size(); ++i) CHECK(a[i].value == b[i].value);
        CHECK(a[0].value < a[1].value);
    }
    SUBCASE("crossing interpolates in log domain")
    {
        const std::vector<CurvePoint> c{{0.0, 1e-1}, {10.0, 1e-3}, {20.0, 1e-5}};
        CHECK(*crossing_snr(c, 1e-2) == doctest::Approx(5.0));
        CHECK(*crossing_snr(c, 1e-4) == doctest::Approx(15.0));
        CHECK_FALSE(crossing_snr(c, 1e-7).has_value());
    }
}
