#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "cover/hindsight.hpp"

namespace cover {

/// Time series of a self-financing account holding `shares` of each asset and
/// `cash` in the money market between consecutive grid points.
struct HedgeLedger {
    std::vector<double> times;
    std::vector<double> wealth;
    std::vector<double> cash;
    Matrix fractions;  // rows = grid points, cols = assets
    Matrix shares;
    Matrix prices;

    std::size_t size() const { return times.size(); }
};

/// Largest relative violation of wealth[k+1] = shares[k]'S[k+1] + cash[k] e^{r dt}.
double self_financing_residual(const HedgeLedger& ledger, double rate);

/// Replicates the hindsight claim along `path` from t_start to T, starting with
/// $1. Levered mode holds the current best rule in hindsight; unlevered mode
/// holds the delta of the unlevered price (central differences, step 1e-5 S).
/// Both t_start and T must be grid points of the path. The ledger ends in cash.
HedgeLedger hedge_path(const Market& market, const PricePath& path, double t_start, double T, Mode mode);

enum class Scenario { sim1, sim2, sim3, custom };

Scenario parse_scenario(const std::string& name);
const char* to_string(Scenario scenario) noexcept;

struct SimulationConfig {
    MarketSpec spec;
    double T = 200.0;
    double warmup = 5.0;
    std::size_t steps_per_year = 52;
    std::size_t n_paths = 1;
    std::uint64_t seed = 1;
    Scenario scenario = Scenario::custom;

    /// Parameters of the three long-horizon experiments: r = 2%, unit initial
    /// prices, 200 years, 5-year buy-and-hold warmup, drift mu = nu + sigma^2/2.
    static SimulationConfig paper(Scenario scenario);
};

struct PathSummary {
    double terminal_wealth = 0.0;         // price-tracking wealth W_w C(S_T, T) / C(S_w, w)
    double hedged_terminal_wealth = 0.0;  // explicit discrete hedge
    double growth_rate = 0.0;             // log(terminal_wealth) / T
    double hedged_growth_rate = 0.0;
    double stock_growth_rate = 0.0;       // log of the warmup portfolio held to T, per year
    double max_exposure = 0.0;            // max over time of sum(b)
};

struct SimulationReport {
    SimulationConfig config;
    KellyResult kelly;
    HedgeLedger ledger;                  // explicit hedge on path 0, warmup included
    std::vector<double> tracked_wealth;  // price-tracking wealth on path 0
    std::vector<PathSummary> paths;
    double mean_growth_rate = 0.0;
    double mean_hedged_growth_rate = 0.0;
    double mean_stock_growth_rate = 0.0;
};

/// Buy-and-hold (one share, or $1 split evenly) during the warmup, then all
/// wealth into the replicating strategy until T.
SimulationReport run_paper_simulation(const SimulationConfig& config);

struct PriceTable {
    std::vector<std::string> labels;  // first column as written
    std::vector<double> years;        // elapsed years since the first row
    std::vector<std::string> assets;
    Matrix prices;                    // rows = observations
};

struct BacktestResult {
    std::vector<double> years;
    std::vector<double> wealth;  // starts at 1
    bool ruined = false;
    std::size_t ruin_index = 0;  // row at which wealth would have dropped to <= 0
    double elapsed_years = 0.0;
    double cagr = 0.0;           // (V_end / V_0)^{1 / years} - 1
};

/// Fixed-fraction strategy rebalanced every `rebalance_interval` rows, with
/// `period_rate` simple interest per rebalancing period on the cash remainder.
BacktestResult discrete_backtest(const PriceTable& table, const Vector& b, std::size_t rebalance_interval,
                                 double period_rate);

}  // namespace cover
