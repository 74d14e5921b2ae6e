#include "cover/mc_oracle.hpp"

#include <cmath>
#include <random>
#include <vector>

#include "cover/errors.hpp"
#include "cover/numerics.hpp"

namespace cover {

namespace {

constexpr std::size_t kChunk = 8192;
constexpr double kAutomaticPlainEdge = 0.75;
constexpr double kBridgeStretch = 1.25;

// Terminal prices after one exact lognormal step of length tau driven by the
// correlated shock `shock`.
Vector step_prices(const Market& market, const Vector& from, double tau, const Vector& shock) {
    const double sqrt_tau = std::sqrt(tau);
    Vector out(from.size());
    for (Eigen::Index i = 0; i < from.size(); ++i) {
        const double s = market.sigma()[i];
        out[i] = from[i] * std::exp((market.rate() - 0.5 * s * s) * tau + s * sqrt_tau * shock[i]);
    }
    return out;
}

}  // namespace

double gaussian_exp_quadratic_mean(double a, double b) {
    if (!(a < 0.5)) throw DomainError("E[exp(a X^2 + b X)] is infinite for a >= 1/2");
    const double spread = 1.0 - 2.0 * a;
    return std::exp(b * b / (2.0 * spread)) / std::sqrt(spread);
}

McEstimate mc_price(const Market& market, const Vector& prices, double t, double T, Mode mode,
                    std::size_t n_paths, std::uint64_t seed, McOptions options) {
    if (!(t >= 0.0) || !(t < T)) throw DomainError("Monte Carlo price needs 0 <= t < T");
    if (n_paths < 2) throw DomainError("need at least two paths");
    if (prices.size() != market.size()) throw DomainError("price vector has the wrong length");
    if (mode == Mode::unlevered && market.size() != 1) throw DomainError("unlevered mode is single-asset only");

    McEstimator estimator = options.estimator;
    if (mode == Mode::levered) {
        if (t == 0.0) throw DomainError("the levered claim has an infinite price at t = 0");
        const double ratio = t / T;
        if (estimator == McEstimator::plain && ratio <= kLeveredPlainVarianceEdge)
            throw DomainError("plain levered estimator has infinite variance for t/T <= 1/2; use the bridged estimator");
        if (estimator == McEstimator::automatic)
            estimator = ratio >= kAutomaticPlainEdge ? McEstimator::plain : McEstimator::bridged;
    } else {
        if (estimator == McEstimator::bridged) throw DomainError("the bridged estimator is for levered mode");
        estimator = McEstimator::plain;
    }

    const Eigen::Index n = market.size();
    const double r = market.rate();
    const double bridge = estimator == McEstimator::bridged ? std::min(kBridgeStretch * t, 0.5 * (t + T)) : T;
    const double tau = bridge - t;
    const double discount = std::exp(-r * (T - t));
    const Matrix& factor = market.corr_factor();

    // Value of one shock: discounted payoff (plain) or discounted conditional
    // expectation of the payoff given the bridge-time prices (bridged).
    auto evaluate = [&](const Vector& shock) {
        const Vector moved = step_prices(market, prices, tau, shock);
        const HindsightState state = z_score(market, moved, bridge);
        if (estimator == McEstimator::plain) return discount * std::exp(log_intrinsic_value(market, state, mode));
        // z_T = a z_b + c y with y ~ N(0, R); whitening by the correlation factor
        // makes the n coordinates independent.
        const double a = std::sqrt(bridge / T);
        const double c = std::sqrt(1.0 - bridge / T);
        const Vector w = factor.triangularView<Eigen::Lower>().solve(state.z);
        double log_value = r * t;
        for (Eigen::Index i = 0; i < n; ++i)
            log_value += 0.5 * a * a * w[i] * w[i] + std::log(gaussian_exp_quadratic_mean(0.5 * c * c, a * c * w[i]));
        return std::exp(log_value);
    };

    const std::size_t samples = options.antithetic ? (n_paths + 1) / 2 : n_paths;
    std::vector<double> values;
    values.reserve(samples);
    Vector eps(n);
    for (std::size_t begin = 0, chunk = 0; begin < samples; begin += kChunk, ++chunk) {
        std::mt19937_64 gen(derive_stream_seed(seed, chunk));
        std::normal_distribution<double> normal;
        const std::size_t end = std::min(samples, begin + kChunk);
        for (std::size_t s = begin; s < end; ++s) {
            for (Eigen::Index i = 0; i < n; ++i) eps[i] = normal(gen);
            const Vector shock = factor * eps;
            double value = evaluate(shock);
            if (options.antithetic) value = 0.5 * (value + evaluate(-shock));
            values.push_back(value);
        }
    }

    const double m = static_cast<double>(samples);
    McEstimate est;
    CompensatedSum sum;
    for (double v : values) sum.add(v);
    est.mean = sum.value() / m;
    CompensatedSum spread;
    for (double v : values) spread.add((v - est.mean) * (v - est.mean));
    const double var = spread.value() / (m - 1.0);
    est.std_error = std::sqrt(var / m);
    est.n_paths = options.antithetic ? 2 * samples : samples;
    est.seed = seed;
    est.estimator = estimator;
    est.bridge_time = bridge;
    return est;
}

}  // namespace cover
