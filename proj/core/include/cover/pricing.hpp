#pragma once

#include <vector>

#include "cover/hindsight.hpp"

namespace cover {

/// Price of the claim paying the hindsight-optimal wealth at T, per $1 of
/// notional. All values are wealth multiples.
struct Quote {
    double price = 0.0;
    double log_price = 0.0;
    double intrinsic = 0.0;
    double universality_factor = 0.0;  // price / intrinsic
    Mode mode = Mode::levered;
    double t = 0.0;
    double T = 0.0;
};

struct GreeksReport {
    double delta = 0.0;
    double gamma = 0.0;
    double theta = 0.0;
    double vega = 0.0;
    double rho = 0.0;
};

/// The three pieces of the unlevered price: the all-cash, interior and
/// all-stock terminal events.
struct UnleveredTerms {
    double cash = 0.0;
    double interior = 0.0;
    double stock = 0.0;

    double total() const { return cash + interior + stock; }
};

enum class ImpliedVolStatus {
    ok,              // one or two roots returned
    below_minimum,   // observed price under sqrt(T/t) e^{rt}; no volatility can produce it
    no_real_root,    // price is rational but the variance quadratic has no positive root
};

struct ImpliedVolRoots {
    std::vector<double> roots;  // ascending volatilities
    ImpliedVolStatus status = ImpliedVolStatus::ok;
    double minimum_price = 0.0;
};

/// (T/t)^{n/2} exp(rt + z'R^{-1}z / 2); at t == T this is the payoff.
Quote price_levered(const Market& market, const Vector& prices, double t, double T);

/// Single-asset price under hindsight optimization restricted to b in [0, 1].
Quote price_unlevered(const Market& market, const Vector& prices, double t, double T);
UnleveredTerms price_unlevered_terms(const Market& market, double price, double t, double T);

/// Time-0 unlevered price 1 + sigma sqrt(T / (2 pi)); independent of the rate.
double price_time0_unlevered(double sigma, double T);

/// Single-asset sensitivities of the levered price, differentiated analytically.
GreeksReport greeks(const Market& market, double price, double t, double T);

/// dC/dS_i = C b_i(S, t) / S_i.
Vector multi_delta(const Market& market, const Vector& prices, double t, double T);

/// Single-asset volatilities that reproduce an observed levered price.
ImpliedVolRoots implied_vols(double observed_price, double price, double s0, double t, double T, double rate);

/// Upper bound on the excess continuously-compounded growth of the hindsight
/// optimum over a holder who buys at (S, t) and holds to T.
double excess_growth_bound(const Market& market, const Vector& prices, double t, double T);
/// Time-0 unlevered version: log(1 + sigma sqrt(T / 2 pi)) / T.
double excess_growth_bound_time0_unlevered(double sigma, double T);

/// Integral of exp(-alpha y^2 + beta y) over [lower, upper], alpha > 0; infinite limits allowed.
double gaussian_integral(double alpha, double beta, double lower, double upper);
/// Integral of exp(-y'Ay + beta'y) over R^n for symmetric positive definite A.
double gaussian_integral(const Matrix& a, const Vector& beta);

}  // namespace cover
