#include "cover/lattice.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include "cover/errors.hpp"
#include "cover/market.hpp"

namespace cover {

namespace {

enum class Branch { cash, interior, stock };

struct BranchValue {
    Branch branch;
    double log_value;
};

double log_levered_payoff(long j, const LatticeSpec& spec) {
    const double n = static_cast<double>(spec.N);
    const double up = static_cast<double>(j);
    const double down = n - up;
    const double q = spec.q();
    return n * std::log(spec.gross_rate() / n) + xlogx(up) - up * std::log(q) + xlogx(down) - down * std::log1p(-q);
}

// Unlevered payoff with its branch. Near a branch boundary both adjacent
// formulas are evaluated and the larger one wins.
BranchValue unlevered_payoff(long j, const LatticeSpec& spec) {
    const double n = static_cast<double>(spec.N);
    const double jj = static_cast<double>(j);
    const double lower = n * spec.q();
    const double upper = lattice_all_stock_threshold(spec);
    const double tol = 1e-9 * std::max(1.0, n);

    const double cash = n * std::log(spec.gross_rate());
    const double stock = jj * std::log(spec.u) + (n - jj) * std::log(spec.d);

    BranchValue best{Branch::interior, -std::numeric_limits<double>::infinity()};
    auto consider = [&best](Branch b, double v) {
        if (v > best.log_value) best = {b, v};
    };
    if (jj <= lower + tol) consider(Branch::cash, cash);
    if (jj >= upper - tol) consider(Branch::stock, stock);
    if (jj >= lower - tol && jj <= upper + tol) consider(Branch::interior, log_levered_payoff(j, spec));
    return best;
}

void require_node(LatticeState state, const LatticeSpec& spec) {
    if (state.n < 0 || state.n > spec.N || state.k < 0 || state.k > state.n)
        throw DomainError("lattice state needs 0 <= k <= n <= N");
}

// log of the risk-neutral weight of j further ups in `remaining` steps, discounted.
double log_weight(long remaining, long j, const LatticeSpec& spec) {
    const double q = spec.q();
    return log_binomial(remaining, j) + static_cast<double>(j) * std::log(q) +
           static_cast<double>(remaining - j) * std::log1p(-q) -
           static_cast<double>(remaining) * std::log(spec.gross_rate());
}

}  // namespace

LatticeSpec LatticeSpec::crr(double sigma, double T, double rate, long N) {
    if (!(sigma > 0.0) || !(T > 0.0) || N < 1) throw DomainError("CRR calibration needs sigma > 0, T > 0, N >= 1");
    const double dt = T / static_cast<double>(N);
    LatticeSpec spec;
    spec.u = std::exp(sigma * std::sqrt(dt));
    spec.d = 1.0 / spec.u;
    spec.r_per = std::expm1(rate * dt);
    spec.N = N;
    return validate_lattice(spec);
}

LatticeSpec LatticeSpec::shannon(long N) { return validate_lattice({2.0, 0.5, 0.0, N}); }

LatticeSpec validate_lattice(LatticeSpec spec) {
    if (spec.N < 1) throw DomainError("lattice needs N >= 1");
    const double R = spec.gross_rate();
    if (!(spec.d > 0.0 && spec.d < R && R < spec.u)) throw DomainError("lattice needs 0 < d < 1 + r < u");
    return spec;
}

double lattice_wealth(double b, long j, const LatticeSpec& spec) {
    const double R = spec.gross_rate();
    const double up = 1.0 + b * (spec.u / R - 1.0);
    const double down = 1.0 + b * (spec.d / R - 1.0);
    return std::pow(R, static_cast<double>(spec.N)) * std::pow(up, static_cast<double>(j)) *
           std::pow(down, static_cast<double>(spec.N - j));
}

double lattice_best_rule(long j, const LatticeSpec& spec) {
    if (j < 0 || j > spec.N) throw DomainError("uptick count must lie in [0, N]");
    const double q = spec.q();
    const double n = static_cast<double>(spec.N);
    const double jj = static_cast<double>(j);
    return spec.gross_rate() / (n * (spec.u - spec.d)) * (jj / q - (n - jj) / (1.0 - q));
}

double lattice_all_stock_threshold(const LatticeSpec& spec) {
    return static_cast<double>(spec.N) * spec.q() * spec.u / spec.gross_rate();
}

double lattice_log_payoff(long j, const LatticeSpec& spec, Mode mode) {
    if (j < 0 || j > spec.N) throw DomainError("uptick count must lie in [0, N]");
    return mode == Mode::levered ? log_levered_payoff(j, spec) : unlevered_payoff(j, spec).log_value;
}

double lattice_payoff(long j, const LatticeSpec& spec, Mode mode) { return std::exp(lattice_log_payoff(j, spec, mode)); }

double lattice_log_price(LatticeState state, const LatticeSpec& spec, Mode mode) {
    require_node(state, spec);
    const long remaining = spec.N - state.n;
    std::vector<double> terms(static_cast<std::size_t>(remaining + 1));
    for (long j = 0; j <= remaining; ++j)
        terms[static_cast<std::size_t>(j)] = log_weight(remaining, j, spec) + lattice_log_payoff(state.k + j, spec, mode);
    return log_sum_exp(terms);
}

double lattice_price(LatticeState state, const LatticeSpec& spec, Mode mode) {
    return std::exp(lattice_log_price(state, spec, mode));
}

LatticeUnleveredTerms lattice_unlevered_terms(LatticeState state, const LatticeSpec& spec) {
    require_node(state, spec);
    const long remaining = spec.N - state.n;
    std::vector<double> cash, interior, stock;
    for (long j = 0; j <= remaining; ++j) {
        const BranchValue v = unlevered_payoff(state.k + j, spec);
        const double term = log_weight(remaining, j, spec) + v.log_value;
        switch (v.branch) {
            case Branch::cash: cash.push_back(term); break;
            case Branch::interior: interior.push_back(term); break;
            case Branch::stock: stock.push_back(term); break;
        }
    }
    return {std::exp(log_sum_exp(cash)), std::exp(log_sum_exp(interior)), std::exp(log_sum_exp(stock))};
}

double lattice_price_time0_unlevered(const LatticeSpec& spec) {
    const long N = spec.N;
    const double n = static_cast<double>(N);
    const double q = spec.q();
    const double lower = n * q;
    const double upper = lattice_all_stock_threshold(spec);
    std::vector<double> cash, interior, stock;
    for (long j = 0; j <= N; ++j) {
        const double jj = static_cast<double>(j);
        const double lb = log_binomial(N, j);
        if (jj <= lower) {
            cash.push_back(lb + jj * std::log(q) + (n - jj) * std::log1p(-q));
        } else if (jj < upper) {
            interior.push_back(lb + xlogx(jj / n) * n + xlogx(1.0 - jj / n) * n);
        } else {
            stock.push_back(lb + jj * std::log(q * spec.u) + (n - jj) * std::log((1.0 - q) * spec.d) -
                            n * std::log(spec.gross_rate()));
        }
    }
    return std::exp(log_sum_exp(cash)) + std::exp(log_sum_exp(interior)) + std::exp(log_sum_exp(stock));
}

std::vector<std::vector<double>> backward_induction(const LatticeSpec& spec, Mode mode) {
    const long N = spec.N;
    const double q = spec.q();
    const double R = spec.gross_rate();
    std::vector<std::vector<double>> price(static_cast<std::size_t>(N + 1));
    auto& last = price[static_cast<std::size_t>(N)];
    last.resize(static_cast<std::size_t>(N + 1));
    for (long j = 0; j <= N; ++j) last[static_cast<std::size_t>(j)] = lattice_payoff(j, spec, mode);
    for (long n = N - 1; n >= 0; --n) {
        const auto& next = price[static_cast<std::size_t>(n + 1)];
        auto& row = price[static_cast<std::size_t>(n)];
        row.resize(static_cast<std::size_t>(n + 1));
        for (long k = 0; k <= n; ++k)
            row[static_cast<std::size_t>(k)] =
                (q * next[static_cast<std::size_t>(k + 1)] + (1.0 - q) * next[static_cast<std::size_t>(k)]) / R;
    }
    return price;
}

double lattice_delta(LatticeState state, double price, const LatticeSpec& spec, Mode mode) {
    require_node(state, spec);
    if (state.n >= spec.N) throw DomainError("no hedge is needed at expiry");
    if (!(price > 0.0)) throw DomainError("stock price must be positive");
    const double up = lattice_price({state.k + 1, state.n + 1}, spec, mode);
    const double down = lattice_price({state.k, state.n + 1}, spec, mode);
    return (up - down) / (price * (spec.u - spec.d));
}

std::vector<DemonRow> demon_simulation(long N, double p, std::uint64_t seed, Mode mode) {
    if (!(p >= 0.0 && p <= 1.0)) throw DomainError("coin bias must lie in [0, 1]");
    const LatticeSpec spec = LatticeSpec::shannon(N);
    const double log_c0 = lattice_log_price({0, 0}, spec, mode);
    std::mt19937_64 gen(derive_stream_seed(seed, 0));

    std::vector<DemonRow> rows;
    rows.reserve(static_cast<std::size_t>(N + 1));
    rows.push_back({0, 0, 1.0, 1.0});
    long k = 0;
    for (long n = 1; n <= N; ++n) {
        const double draw = static_cast<double>(gen() >> 11) * 0x1.0p-53;
        if (draw < p) ++k;
        const double wealth = std::exp(lattice_log_price({k, n}, spec, mode) - log_c0);
        rows.push_back({n, k, std::ldexp(1.0, static_cast<int>(2 * k - n)), wealth});
    }
    return rows;
}

}  // namespace cover
