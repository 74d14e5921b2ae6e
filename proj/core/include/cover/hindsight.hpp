#pragma once

#include "cover/market.hpp"
#include "cover/numerics.hpp"

namespace cover {

/// The z-score vector at elapsed time t. Unit normal with correlation R under
/// the martingale measure; every price here is a function of (z, t).
struct HindsightState {
    Vector z;
    double t = 0.0;
};

struct RebalancingRule {
    Vector b;  // wealth fraction per asset; the remainder 1 - sum(b) is cash
    Mode mode = Mode::levered;
};

HindsightState z_score(const Market& market, const Vector& prices, double t);

/// Best constant-rebalanced portfolio over [0, t]: b = M^{-1} R^{-1} z / sqrt(t),
/// or its clamp to [0, 1] in unlevered mode (single asset only).
RebalancingRule best_rule(const Market& market, const Vector& prices, double t, Mode mode);
RebalancingRule best_rule(const Market& market, const HindsightState& state, Mode mode);

/// Wealth multiple V_t(b) = exp{(r - b'Sigma b / 2) t + sqrt(t) z'M b}.
/// Computed from prices and time only; the drift is never read.
double wealth_of_rule(const Market& market, const Vector& prices, double t, const Vector& b);
double log_wealth_of_rule(const Market& market, const HindsightState& state, const Vector& b);

/// Wealth of the best rule in hindsight (the exercise value at t).
double intrinsic_value(const Market& market, const Vector& prices, double t, Mode mode);
double log_intrinsic_value(const Market& market, const HindsightState& state, Mode mode);

struct KellyResult {
    RebalancingRule rule;
    double growth_rate = 0.0;  // continuously compounded, per year
};

/// Log-optimal rule Sigma^{-1}(mu - r 1) and its growth rate r + (mu - r 1)'Sigma^{-1}(mu - r 1) / 2.
KellyResult kelly_rule(const Market& market);

}  // namespace cover
