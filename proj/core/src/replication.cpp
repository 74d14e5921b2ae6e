#include "cover/replication.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "cover/errors.hpp"
#include "cover/pricing.hpp"

namespace cover {

namespace {

std::size_t grid_index(const std::vector<double>& times, double t, const char* what) {
    const double tol = 1e-9 * std::max(1.0, std::abs(t));
    const auto it = std::lower_bound(times.begin(), times.end(), t - tol);
    if (it == times.end() || std::abs(*it - t) > tol)
        throw DomainError(std::string("path grid has no point at the ") + what + " time");
    return static_cast<std::size_t>(it - times.begin());
}

Vector unlevered_fraction(const Market& market, double price, double t, double T) {
    const double h = 1e-5 * price;
    const double up = price_unlevered(market, Vector::Constant(1, price + h), t, T).price;
    const double down = price_unlevered(market, Vector::Constant(1, price - h), t, T).price;
    const double c = price_unlevered(market, Vector::Constant(1, price), t, T).price;
    const double delta = (up - down) / (2.0 * h);
    return Vector::Constant(1, delta * price / c);
}

}  // namespace

double self_financing_residual(const HedgeLedger& ledger, double rate) {
    double worst = 0.0;
    for (std::size_t k = 0; k + 1 < ledger.size(); ++k) {
        const auto next = static_cast<Eigen::Index>(k + 1);
        const auto row = static_cast<Eigen::Index>(k);
        const double expected = ledger.shares.row(row).dot(ledger.prices.row(next)) +
                                ledger.cash[k] * std::exp(rate * (ledger.times[k + 1] - ledger.times[k]));
        const double scale = std::max(std::abs(ledger.wealth[k + 1]), std::numeric_limits<double>::min());
        worst = std::max(worst, std::abs(ledger.wealth[k + 1] - expected) / scale);
    }
    return worst;
}

HedgeLedger hedge_path(const Market& market, const PricePath& path, double t_start, double T, Mode mode) {
    if (!(t_start > 0.0)) throw DomainError("hedging must start at t > 0");
    if (!(t_start < T)) throw DomainError("hedge start must precede expiry");
    if (mode == Mode::unlevered && market.size() != 1) throw DomainError("unlevered hedging is single-asset only");
    if (path.prices.cols() != market.size()) throw DomainError("path has the wrong number of assets");
    const std::size_t first = grid_index(path.times, t_start, "hedge start");
    const std::size_t last = grid_index(path.times, T, "expiry");

    const Eigen::Index n = market.size();
    const auto rows = static_cast<Eigen::Index>(last - first + 1);
    HedgeLedger ledger;
    ledger.times.assign(path.times.begin() + static_cast<std::ptrdiff_t>(first),
                        path.times.begin() + static_cast<std::ptrdiff_t>(last + 1));
    ledger.prices = path.prices.middleRows(static_cast<Eigen::Index>(first), rows);
    ledger.wealth.resize(static_cast<std::size_t>(rows));
    ledger.cash.resize(static_cast<std::size_t>(rows));
    ledger.fractions = Matrix::Zero(rows, n);
    ledger.shares = Matrix::Zero(rows, n);

    double wealth = 1.0;
    for (Eigen::Index k = 0; k < rows; ++k) {
        const auto idx = static_cast<std::size_t>(k);
        const Vector s = ledger.prices.row(k).transpose();
        const double t = ledger.times[idx];
        if (k > 0) {
            const double dt = t - ledger.times[idx - 1];
            wealth = ledger.shares.row(k - 1).dot(s) + ledger.cash[idx - 1] * std::exp(market.rate() * dt);
        }
        ledger.wealth[idx] = wealth;
        if (k + 1 == rows) {
            ledger.cash[idx] = wealth;
            break;
        }
        const Vector f = mode == Mode::levered ? best_rule(market, s, t, Mode::levered).b
                                               : unlevered_fraction(market, s[0], t, T);
        ledger.fractions.row(k) = f.transpose();
        ledger.shares.row(k) = (f.cwiseQuotient(s) * wealth).transpose();
        ledger.cash[idx] = wealth * (1.0 - f.sum());
    }
    return ledger;
}

Scenario parse_scenario(const std::string& name) {
    if (name == "sim1") return Scenario::sim1;
    if (name == "sim2") return Scenario::sim2;
    if (name == "sim3") return Scenario::sim3;
    if (name == "custom") return Scenario::custom;
    throw std::invalid_argument("unknown scenario '" + name + "' (expected sim1, sim2, sim3 or custom)");
}

const char* to_string(Scenario scenario) noexcept {
    switch (scenario) {
        case Scenario::sim1: return "sim1";
        case Scenario::sim2: return "sim2";
        case Scenario::sim3: return "sim3";
        case Scenario::custom: return "custom";
    }
    return "custom";
}

SimulationConfig SimulationConfig::paper(Scenario scenario) {
    SimulationConfig config;
    config.scenario = scenario;
    auto from_growth = [](std::vector<double> nu, std::vector<double> sigma, double rho) {
        const auto n = static_cast<Eigen::Index>(sigma.size());
        MarketSpec spec;
        spec.sigma = Eigen::Map<Vector>(sigma.data(), n);
        spec.mu = Eigen::Map<Vector>(nu.data(), n) + 0.5 * spec.sigma.cwiseAbs2();
        spec.corr = Matrix::Constant(n, n, rho);
        spec.corr.diagonal().setOnes();
        spec.rate = 0.02;
        spec.s0 = Vector::Ones(n);
        return spec;
    };
    switch (scenario) {
        case Scenario::sim1: config.spec = from_growth({0.04}, {0.7}, 0.0); break;
        case Scenario::sim2: config.spec = from_growth({0.08}, {0.17}, 0.0); break;
        case Scenario::sim3: config.spec = from_growth({0.03, 0.08}, {0.55, 0.7}, 0.2); break;
        case Scenario::custom: throw std::invalid_argument("the custom scenario has no preset parameters");
    }
    return config;
}

SimulationReport run_paper_simulation(const SimulationConfig& config) {
    const Market market(config.spec);
    if (!(config.warmup > 0.0 && config.warmup < config.T)) throw DomainError("need 0 < warmup < T");
    if (config.steps_per_year < 1 || config.n_paths < 1) throw DomainError("need steps_per_year >= 1 and n_paths >= 1");
    const double steps_real = config.T * static_cast<double>(config.steps_per_year);
    const auto steps = static_cast<std::size_t>(std::llround(steps_real));
    if (std::abs(steps_real - static_cast<double>(steps)) > 1e-9 * steps_real)
        throw DomainError("T * steps_per_year must be a whole number of steps");

    const Eigen::Index n = market.size();
    const Vector initial_shares = (Vector::Constant(n, 1.0 / static_cast<double>(n))).cwiseQuotient(market.s0());

    SimulationReport report;
    report.config = config;
    report.kelly = kelly_rule(market);
    report.paths.reserve(config.n_paths);

    for (std::size_t p = 0; p < config.n_paths; ++p) {
        const PricePath path = simulate_path(market, config.T, steps, Measure::physical, config.seed, p);
        const std::size_t w = grid_index(path.times, config.warmup, "warmup end");
        const Vector s_w = path.at(w);
        const double warm_wealth = initial_shares.dot(s_w);
        const double log_c_w = price_levered(market, s_w, config.warmup, config.T).log_price;

        HedgeLedger hedge = hedge_path(market, path, config.warmup, config.T, Mode::levered);

        PathSummary summary;
        const Vector s_end = path.at(path.steps());
        summary.terminal_wealth =
            warm_wealth * std::exp(price_levered(market, s_end, config.T, config.T).log_price - log_c_w);
        summary.hedged_terminal_wealth = warm_wealth * hedge.wealth.back();
        summary.growth_rate = std::log(summary.terminal_wealth) / config.T;
        summary.hedged_growth_rate = std::log(summary.hedged_terminal_wealth) / config.T;
        summary.stock_growth_rate = std::log(initial_shares.dot(s_end)) / config.T;
        summary.max_exposure = hedge.fractions.rowwise().sum().maxCoeff();
        report.paths.push_back(summary);

        if (p != 0) continue;

        // Path 0 keeps the full ledger: buy-and-hold rows, then the hedge scaled by warmup wealth.
        HedgeLedger& ledger = report.ledger;
        const auto rows = static_cast<Eigen::Index>(path.times.size());
        const auto warm_rows = static_cast<Eigen::Index>(w);
        ledger.times = path.times;
        ledger.prices = path.prices;
        ledger.wealth.resize(path.times.size());
        ledger.cash.assign(path.times.size(), 0.0);
        ledger.fractions.resize(rows, n);
        ledger.shares.resize(rows, n);
        report.tracked_wealth.resize(path.times.size());
        for (Eigen::Index k = 0; k < warm_rows; ++k) {
            const Vector s = path.at(static_cast<std::size_t>(k));
            const double v = initial_shares.dot(s);
            ledger.wealth[static_cast<std::size_t>(k)] = v;
            ledger.shares.row(k) = initial_shares.transpose();
            ledger.fractions.row(k) = (initial_shares.cwiseProduct(s) / v).transpose();
            report.tracked_wealth[static_cast<std::size_t>(k)] = v;
        }
        for (Eigen::Index k = warm_rows; k < rows; ++k) {
            const auto idx = static_cast<std::size_t>(k);
            const auto h = k - warm_rows;
            ledger.wealth[idx] = warm_wealth * hedge.wealth[static_cast<std::size_t>(h)];
            ledger.cash[idx] = warm_wealth * hedge.cash[static_cast<std::size_t>(h)];
            ledger.shares.row(k) = warm_wealth * hedge.shares.row(h);
            ledger.fractions.row(k) = hedge.fractions.row(h);
            report.tracked_wealth[idx] =
                warm_wealth *
                std::exp(price_levered(market, path.at(idx), path.times[idx], config.T).log_price - log_c_w);
        }
    }

    const double count = static_cast<double>(report.paths.size());
    for (const auto& s : report.paths) {
        report.mean_growth_rate += s.growth_rate / count;
        report.mean_hedged_growth_rate += s.hedged_growth_rate / count;
        report.mean_stock_growth_rate += s.stock_growth_rate / count;
    }
    return report;
}

BacktestResult discrete_backtest(const PriceTable& table, const Vector& b, std::size_t rebalance_interval,
                                 double period_rate) {
    const Eigen::Index rows = table.prices.rows();
    if (rows < 2) throw DomainError("backtest needs at least two observations");
    if (b.size() != table.prices.cols()) throw DomainError("fraction vector must have one entry per asset");
    if (rebalance_interval < 1) throw DomainError("rebalance interval must be at least one row");
    if ((table.prices.array() <= 0.0).any()) throw DomainError("prices must be positive");
    for (std::size_t i = 1; i < table.years.size(); ++i)
        if (!(table.years[i] > table.years[i - 1])) throw DomainError("observations must be in chronological order");

    const double cash_fraction = 1.0 - b.sum();
    BacktestResult result;
    result.years.push_back(table.years.front());
    result.wealth.push_back(1.0);
    const auto step = static_cast<Eigen::Index>(rebalance_interval);
    for (Eigen::Index k = 0; k + step < rows; k += step) {
        const Eigen::Index next = k + step;
        const Vector ratio = table.prices.row(next).cwiseQuotient(table.prices.row(k)).transpose();
        const double growth = 1.0 + b.dot(ratio - Vector::Ones(b.size())) + cash_fraction * period_rate;
        const double v = result.wealth.back() * growth;
        if (!(v > 0.0)) {
            result.ruined = true;
            result.ruin_index = static_cast<std::size_t>(next);
            break;
        }
        result.years.push_back(table.years[static_cast<std::size_t>(next)]);
        result.wealth.push_back(v);
    }
    result.elapsed_years = result.years.back() - result.years.front();
    if (result.ruined)
        result.cagr = -1.0;
    else if (result.elapsed_years > 0.0)
        result.cagr = std::pow(result.wealth.back() / result.wealth.front(), 1.0 / result.elapsed_years) - 1.0;
    else
        result.cagr = std::numeric_limits<double>::quiet_NaN();
    return result;
}

}  // namespace cover
