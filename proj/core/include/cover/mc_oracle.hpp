#pragma once

#include <cstdint>

#include "cover/hindsight.hpp"

namespace cover {

enum class McEstimator {
    automatic,  // plain when its variance is well behaved, bridged otherwise
    plain,      // one exact lognormal step from t to T, payoff from intrinsic_value
    bridged,    // simulate to an intermediate time, integrate the rest exactly
};

struct McOptions {
    McEstimator estimator = McEstimator::automatic;
    bool antithetic = true;
};

struct McEstimate {
    double mean = 0.0;
    double std_error = 0.0;
    std::size_t n_paths = 0;
    std::uint64_t seed = 0;
    McEstimator estimator = McEstimator::plain;
    double bridge_time = 0.0;  // intermediate time of the bridged estimator
};

/// Risk-neutral Monte Carlo price of the hindsight claim at (S, t): the mean of
/// e^{-r(T - t)} V_T* with V_T* evaluated on simulated terminal prices.
/// t == 0 means "state S0 at time zero" and is only accepted in unlevered mode,
/// where the price is finite.
///
/// The levered payoff exp(z_T'R^{-1}z_T / 2) has a finite second moment under
/// the one-step estimator only when t / T > 1/2; `plain` refuses anything else.
/// `automatic` uses the plain estimator for t / T >= 3/4 (finite fourth moment,
/// so the reported standard error is itself reliable) and otherwise simulates
/// to t' = 5t/4 and integrates the remaining Gaussian step in closed form.
McEstimate mc_price(const Market& market, const Vector& prices, double t, double T, Mode mode,
                    std::size_t n_paths, std::uint64_t seed, McOptions options = {});

/// Largest t / T at which the plain levered estimator still has infinite variance.
inline constexpr double kLeveredPlainVarianceEdge = 0.5;

/// E[exp(a X^2 + b X)] for X ~ N(0, 1) and a < 1/2.
double gaussian_exp_quadratic_mean(double a, double b);

}  // namespace cover
