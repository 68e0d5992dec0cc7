#include "lowpapr/analysis.hpp"

#include "lowpapr/rng.hpp"

#include <Eigen/Eigenvalues>

#include <map>
#include <memory>
#include <mutex>
#include <numbers>
#include <random>

namespace lowpapr {

namespace {

// log(1 + exp(z)) without overflow.
double softplus(double z)
{
    return z > 0.0 ? z + std::log1p(std::exp(-z)) : std::log1p(std::exp(z));
}

}  // namespace

const GaussHermite& gauss_hermite(int n)
{
    if (n < 1) throw DomainError("Gauss-Hermite order must be positive");
    static std::mutex mutex;
    static std::map<int, std::unique_ptr<GaussHermite>> cache;
    std::lock_guard lock(mutex);
    auto& slot = cache[n];
    if (!slot) {
        // Jacobi matrix of the physicists' Hermite recurrence.
        Eigen::MatrixXd jacobi = Eigen::MatrixXd::Zero(n, n);
        for (int i = 1; i < n; ++i) {
            jacobi(i, i - 1) = jacobi(i - 1, i) = std::sqrt(static_cast<double>(i) / 2.0);
        }
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(jacobi);
        auto rule = std::make_unique<GaussHermite>();
        rule->nodes = solver.eigenvalues();
        rule->weights = std::sqrt(std::numbers::pi) * solver.eigenvectors().row(0).transpose().array().square();
        slot = std::move(rule);
    }
    return *slot;
}

double mutual_info_binary(double gain_h, double noise_var, double amplitude, const MiMethod& method)
{
    if (!(noise_var > 0.0)) throw DomainError("mutual information needs a positive noise variance");
    if (std::isinf(noise_var)) return 0.0;

    const double sigma = std::sqrt(noise_var);
    const double ha = gain_h * amplitude;
    // Given x = +a (by symmetry), y = ha + n and the log-likelihood ratio
    // term reduces to log2(1 + exp(-2 ha y / sigma^2)).
    auto penalty = [&](double noise) { return softplus(-2.0 * ha * (ha + noise) / noise_var) / std::numbers::ln2; };

    double expected = 0.0;
    if (method.kind == MiMethod::Kind::GaussHermite) {
        const auto& rule = gauss_hermite(method.n_points);
        for (Eigen::Index i = 0; i < rule.nodes.size(); ++i) {
            expected += rule.weights[i] * penalty(std::numbers::sqrt2 * sigma * rule.nodes[i]);
        }
        expected /= std::sqrt(std::numbers::pi);
    } else {
        if (method.n_samples < 1) throw DomainError("Monte-Carlo mutual information needs samples");
        Rng rng(method.seed);
        std::normal_distribution<double> noise(0.0, sigma);
        std::bernoulli_distribution sign(0.5);
        for (std::int64_t i = 0; i < method.n_samples; ++i) {
            const double x = sign(rng) ? amplitude : -amplitude;
            const double y = gain_h * x + noise(rng);
            const double llr = 2.0 * gain_h * amplitude * y / noise_var;  // log p(y|+a)/p(y|-a)
            expected += softplus(x > 0 ? -llr : llr) / std::numbers::ln2;
        }
        expected /= static_cast<double>(method.n_samples);
    }
    return std::clamp(1.0 - expected, 0.0, 1.0);
}

double bits_per_channel_use(Scheme scheme, const SinrReport<double>& report, const MiMethod& method)
{
    if (!(report.sinr_lin > 0.0) || report.mu == 0.0) return 0.0;
    const double h = report.mu;
    const double mu2 = h * h;
    const double sinr = report.sinr_lin;
    const double branch_amp = 1.0 / std::numbers::sqrt2;

    auto branch = [&](double noise_var, double amplitude) {
        if (std::isinf(sinr)) return 1.0;
        return mutual_info_binary(h, noise_var, amplitude, method);
    };

    switch (scheme) {
    case Scheme::Qpsk: return 2.0 * branch(mu2 / (2.0 * sinr), branch_amp);
    case Scheme::Bpsk:
    case Scheme::Pi2Bpsk: return branch(mu2 / sinr, 1.0);
    case Scheme::RoQpsk:
        // Two branches per combined symbol, N/2 combined symbols per N uses.
        return 2.0 * branch(mu2 / (2.0 * sinr), branch_amp) / 2.0;
    }
    throw DomainError("unknown scheme");
}

}  // namespace lowpapr
