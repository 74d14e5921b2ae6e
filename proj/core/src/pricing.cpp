#include "cover/pricing.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "cover/errors.hpp"

namespace cover {

namespace {

void require_window(double t, double T) {
    if (!(t > 0.0)) throw DomainError("price diverges as t -> 0+; need t > 0");
    if (!(t <= T)) throw DomainError("valuation time t must not exceed expiry T");
}

void require_single_asset(const Market& market) {
    if (market.size() != 1) throw DomainError("this operation is defined for a single asset only");
}

double log_levered_price(const Market& market, const HindsightState& state, double T) {
    const double n = static_cast<double>(market.size());
    return 0.5 * n * std::log(T / state.t) + log_intrinsic_value(market, state, Mode::levered);
}

}  // namespace

Quote price_levered(const Market& market, const Vector& prices, double t, double T) {
    require_window(t, T);
    const HindsightState state = z_score(market, prices, t);
    Quote q;
    q.mode = Mode::levered;
    q.t = t;
    q.T = T;
    const double log_intrinsic = log_intrinsic_value(market, state, Mode::levered);
    q.universality_factor = std::pow(T / t, 0.5 * static_cast<double>(market.size()));
    q.log_price = log_levered_price(market, state, T);
    q.intrinsic = std::exp(log_intrinsic);
    q.price = t == T ? q.intrinsic : std::exp(q.log_price);
    if (t == T) q.log_price = log_intrinsic;
    return q;
}

UnleveredTerms price_unlevered_terms(const Market& market, double price, double t, double T) {
    require_single_asset(market);
    if (!(t > 0.0)) throw DomainError("need t > 0");
    if (!(t < T)) throw DomainError("the unlevered decomposition needs t < T");
    const Vector s = Vector::Constant(1, price);
    const HindsightState state = z_score(market, s, t);
    const double z = state.z[0];
    const double sigma = market.sigma()[0];
    const double r = market.rate();
    const double tau = T - t;

    const double a = -z * std::sqrt(t / tau);
    const double b = a + sigma * T / std::sqrt(tau);
    const double scaled_a = a * std::sqrt(T / t);

    UnleveredTerms terms;
    terms.cash = std::exp(r * t) * normal_cdf(a);
    // The window probability and the levered price can sit at opposite ends of
    // the double range when |z| is large, so they are combined in log space.
    const double log_window = log_normal_interval(scaled_a, scaled_a + sigma * std::sqrt(t * T / tau));
    terms.interior = std::exp(log_levered_price(market, state, T) + log_window);
    terms.stock = price / market.s0()[0] * normal_cdf(sigma * std::sqrt(tau) - b);
    return terms;
}

Quote price_unlevered(const Market& market, const Vector& prices, double t, double T) {
    require_single_asset(market);
    require_window(t, T);
    Quote q;
    q.mode = Mode::unlevered;
    q.t = t;
    q.T = T;
    q.intrinsic = intrinsic_value(market, prices, t, Mode::unlevered);
    q.price = t == T ? q.intrinsic : price_unlevered_terms(market, prices[0], t, T).total();
    q.log_price = std::log(q.price);
    q.universality_factor = q.price / q.intrinsic;
    return q;
}

double price_time0_unlevered(double sigma, double T) {
    if (!(sigma > 0.0)) throw DomainError("volatility must be positive");
    if (!(T >= 0.0)) throw DomainError("horizon must be non-negative");
    return 1.0 + sigma * std::sqrt(T / (2.0 * std::numbers::pi));
}

GreeksReport greeks(const Market& market, double price, double t, double T) {
    require_single_asset(market);
    if (!(t > 0.0) || !(t < T)) throw DomainError("greeks need 0 < t < T");
    const double sigma = market.sigma()[0];
    const double r = market.rate();
    const double sqrt_t = std::sqrt(t);
    const double log_ret = std::log(price / market.s0()[0]);
    const double z = z_score(market, Vector::Constant(1, price), t).z[0];
    const double c = price_levered(market, Vector::Constant(1, price), t, T).price;

    const double dz_dt = -(log_ret + (r - 0.5 * sigma * sigma) * t) / (2.0 * sigma * t * sqrt_t);
    const double dz_dsigma = -(log_ret - r * t) / (sigma * sigma * sqrt_t) + 0.5 * sqrt_t;

    GreeksReport g;
    g.delta = c * z / (price * sigma * sqrt_t);
    g.gamma = c * (z * z + 1.0 - z * sigma * sqrt_t) / (price * price * sigma * sigma * t);
    g.theta = c * (r - 0.5 / t + z * dz_dt);
    g.vega = c * z * dz_dsigma;
    g.rho = c * t * (1.0 - z / (sigma * sqrt_t));
    return g;
}

Vector multi_delta(const Market& market, const Vector& prices, double t, double T) {
    require_window(t, T);
    const double c = price_levered(market, prices, t, T).price;
    const RebalancingRule rule = best_rule(market, prices, t, Mode::levered);
    return c * rule.b.cwiseQuotient(prices);
}

ImpliedVolRoots implied_vols(double observed_price, double price, double s0, double t, double T, double rate) {
    if (!(t > 0.0) || !(t <= T)) throw DomainError("implied volatility needs 0 < t <= T");
    if (!(price > 0.0) || !(s0 > 0.0)) throw DomainError("prices must be positive");
    ImpliedVolRoots out;
    out.minimum_price = std::sqrt(T / t) * std::exp(rate * t);
    if (!(observed_price >= out.minimum_price)) {
        out.status = ImpliedVolStatus::below_minimum;
        return out;
    }

    // z^2 = k from the price, and z^2 = (l + x t / 2)^2 / (x t) with x = sigma^2:
    // (t^2/4) x^2 + t (l - k) x + l^2 = 0.
    const double k = std::max(0.0, 2.0 * (std::log(observed_price) - rate * t) + std::log(t / T));
    const double l = std::log(price / s0) - rate * t;
    const double qa = 0.25 * t * t;
    const double qb = t * (l - k);
    const double qc = l * l;
    const double disc = t * t * k * (k - 2.0 * l);
    if (disc < 0.0) {
        out.status = ImpliedVolStatus::no_real_root;
        return out;
    }

    std::vector<double> variances;
    const double half = -0.5 * (qb + std::copysign(std::sqrt(disc), qb));
    if (half != 0.0) {
        variances.push_back(half / qa);
        if (disc > 0.0) variances.push_back(qc / half);
    }

    MarketSpec probe = MarketSpec::single(rate, 1.0, rate, s0);
    for (double x : variances) {
        if (!(x > 0.0) || !std::isfinite(x)) continue;
        const double vol = std::sqrt(x);
        probe.sigma[0] = vol;
        const double repriced = price_levered(Market(probe), Vector::Constant(1, price), t, T).price;
        if (std::abs(repriced - observed_price) <= 1e-8 * observed_price) out.roots.push_back(vol);
    }
    std::sort(out.roots.begin(), out.roots.end());
    // A price at the minimum is a double root that rounding can split in two.
    if (out.roots.size() == 2 && out.roots[1] - out.roots[0] <= 1e-7 * out.roots[1]) out.roots.pop_back();
    out.status = out.roots.empty() ? ImpliedVolStatus::no_real_root : ImpliedVolStatus::ok;
    return out;
}

double excess_growth_bound(const Market& market, const Vector& prices, double t, double T) {
    if (!(t > 0.0) || !(t < T)) throw DomainError("excess growth bound needs 0 < t < T");
    return price_levered(market, prices, t, T).log_price / (T - t);
}

double excess_growth_bound_time0_unlevered(double sigma, double T) {
    if (!(T > 0.0)) throw DomainError("horizon must be positive");
    return std::log(price_time0_unlevered(sigma, T)) / T;
}

double gaussian_integral(double alpha, double beta, double lower, double upper) {
    if (!(alpha > 0.0)) throw DomainError("gaussian integral needs alpha > 0");
    const double root = std::sqrt(2.0 * alpha);
    const double shift = beta / root;
    return std::sqrt(std::numbers::pi / alpha) * std::exp(beta * beta / (4.0 * alpha)) *
           normal_interval(lower * root - shift, upper * root - shift);
}

double gaussian_integral(const Matrix& a, const Vector& beta) {
    Eigen::LLT<Matrix> llt(a);
    if (llt.info() != Eigen::Success) throw DomainError("gaussian integral needs a positive definite matrix");
    const Matrix l = llt.matrixL();
    const double log_det = 2.0 * l.diagonal().array().log().sum();
    const double n = static_cast<double>(a.rows());
    const double quad = beta.dot(llt.solve(beta));
    return std::exp(0.5 * n * std::log(std::numbers::pi) - 0.5 * log_det + 0.25 * quad);
}

}  // namespace cover
