#include "cover/hindsight.hpp"

#include <algorithm>
#include <cmath>

#include "cover/errors.hpp"

namespace cover {

namespace {

void require_positive_time(double t) {
    if (!(t > 0.0)) throw DomainError("hindsight quantities need elapsed time t > 0");
}

void require_single_asset(const Market& market) {
    if (market.size() != 1) throw DomainError("unlevered hindsight optimization is only defined for a single asset");
}

}  // namespace

HindsightState z_score(const Market& market, const Vector& prices, double t) {
    require_positive_time(t);
    const Eigen::Index n = market.size();
    if (prices.size() != n) throw DomainError("price vector has the wrong length");
    HindsightState state{Vector(n), t};
    const double r = market.rate();
    const double sqrt_t = std::sqrt(t);
    for (Eigen::Index i = 0; i < n; ++i) {
        if (!(prices[i] > 0.0)) throw DomainError("prices must be positive");
        const double s = market.sigma()[i];
        state.z[i] = (std::log(prices[i] / market.s0()[i]) - (r - 0.5 * s * s) * t) / (s * sqrt_t);
    }
    return state;
}

RebalancingRule best_rule(const Market& market, const HindsightState& state, Mode mode) {
    require_positive_time(state.t);
    if (mode == Mode::unlevered) require_single_asset(market);
    Vector b = market.solve_corr(state.z).cwiseQuotient(market.sigma()) / std::sqrt(state.t);
    if (mode == Mode::unlevered) b[0] = std::clamp(b[0], 0.0, 1.0);
    return {std::move(b), mode};
}

RebalancingRule best_rule(const Market& market, const Vector& prices, double t, Mode mode) {
    return best_rule(market, z_score(market, prices, t), mode);
}

double log_wealth_of_rule(const Market& market, const HindsightState& state, const Vector& b) {
    require_positive_time(state.t);
    if (b.size() != market.size()) throw DomainError("rule has the wrong length");
    const Vector mb = market.sigma().cwiseProduct(b);
    const double quad = mb.dot(market.corr() * mb);
    return (market.rate() - 0.5 * quad) * state.t + std::sqrt(state.t) * state.z.dot(mb);
}

double wealth_of_rule(const Market& market, const Vector& prices, double t, const Vector& b) {
    return std::exp(log_wealth_of_rule(market, z_score(market, prices, t), b));
}

double log_intrinsic_value(const Market& market, const HindsightState& state, Mode mode) {
    require_positive_time(state.t);
    const double rt = market.rate() * state.t;
    if (mode == Mode::levered) return rt + 0.5 * market.corr_quadratic_form(state.z);

    require_single_asset(market);
    const double z = state.z[0];
    const double edge = market.sigma()[0] * std::sqrt(state.t);
    if (z <= 0.0) return rt;
    if (z <= edge) return rt + 0.5 * z * z;
    // log(S_t / S_0) written through z: rt - sigma^2 t / 2 + sigma sqrt(t) z.
    return rt - 0.5 * edge * edge + edge * z;
}

double intrinsic_value(const Market& market, const Vector& prices, double t, Mode mode) {
    return std::exp(log_intrinsic_value(market, z_score(market, prices, t), mode));
}

KellyResult kelly_rule(const Market& market) {
    const Eigen::Index n = market.size();
    const Vector excess = market.spec().mu - Vector::Constant(n, market.rate());
    // Sigma^{-1} x = M^{-1} R^{-1} M^{-1} x
    const Vector b = market.solve_corr(excess.cwiseQuotient(market.sigma())).cwiseQuotient(market.sigma());
    return {{b, Mode::levered}, market.rate() + 0.5 * excess.dot(b)};
}

}  // namespace cover
