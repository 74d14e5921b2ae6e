#pragma once

#include <cstdint>
#include <vector>

#include "cover/numerics.hpp"

namespace cover {

/// Cox-Ross-Rubinstein binomial market: the stock moves by u or d per period,
/// cash grows by R = 1 + r_per.
struct LatticeSpec {
    double u = 2.0;
    double d = 0.5;
    double r_per = 0.0;
    long N = 1;

    double gross_rate() const { return 1.0 + r_per; }
    /// Risk-neutral up probability (R - d) / (u - d).
    double q() const { return (gross_rate() - d) / (u - d); }

    /// u = e^{sigma sqrt(T/N)}, d = 1/u, R = e^{rT/N}.
    static LatticeSpec crr(double sigma, double T, double rate, long N);
    /// u = 2, d = 1/2, R = 1.
    static LatticeSpec shannon(long N);
};

struct LatticeState {
    long k = 0;  // upticks so far
    long n = 0;  // steps elapsed
};

LatticeSpec validate_lattice(LatticeSpec spec);

/// Wealth of the constant rule b after j ups and N - j downs:
/// R^N [1 + b(u/R - 1)]^j [1 + b(d/R - 1)]^{N-j}.
double lattice_wealth(double b, long j, const LatticeSpec& spec);

/// Argmax of lattice_wealth over b: R / (N (u - d)) (j/q - (N - j)/(1 - q)).
double lattice_best_rule(long j, const LatticeSpec& spec);

/// Smallest real j at which the unconstrained best rule reaches 1, i.e. N q u / R.
double lattice_all_stock_threshold(const LatticeSpec& spec);

double lattice_log_payoff(long j, const LatticeSpec& spec, Mode mode);
double lattice_payoff(long j, const LatticeSpec& spec, Mode mode);

/// Closed-form price at a node: the risk-neutral discounted expectation of the
/// payoff over the remaining N - n steps, summed in log space.
double lattice_price(LatticeState state, const LatticeSpec& spec, Mode mode);
double lattice_log_price(LatticeState state, const LatticeSpec& spec, Mode mode);

/// Unlevered price split into the all-cash, interior and all-stock terminal events.
struct LatticeUnleveredTerms {
    double cash = 0.0;
    double interior = 0.0;
    double stock = 0.0;
    double total() const { return cash + interior + stock; }
};
LatticeUnleveredTerms lattice_unlevered_terms(LatticeState state, const LatticeSpec& spec);

/// Time-0 unlevered price in the three-sum form
/// P{j <= Nq} + sum binom (j/N)^j (1 - j/N)^{N-j} + R^{-N} sum binom (qu)^j ((1-q)d)^{N-j}.
double lattice_price_time0_unlevered(const LatticeSpec& spec);

/// Price at every node by backward induction C(k,n) = [q C(k+1,n+1) + (1-q) C(k,n+1)] / R.
/// Row n holds k = 0..n. Memory is O(N^2).
std::vector<std::vector<double>> backward_induction(const LatticeSpec& spec, Mode mode);

/// Shares held at a node: [C(k+1,n+1) - C(k,n+1)] / (S (u - d)).
double lattice_delta(LatticeState state, double price, const LatticeSpec& spec, Mode mode);

struct DemonRow {
    long step = 0;
    long upticks = 0;
    double stock = 1.0;   // 2^{2k - n}
    double wealth = 1.0;  // C(k, n) / C(0, 0)
};

/// Replication of the hindsight claim on the double-or-half coin with a coin of bias p.
std::vector<DemonRow> demon_simulation(long N, double p, std::uint64_t seed, Mode mode = Mode::levered);

}  // namespace cover
