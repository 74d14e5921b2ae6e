#include <sstream>

#include "doctest.h"
#include "cover/errors.hpp"
#include "cover/io.hpp"
#include "cover/pricing.hpp"
#include "cover/replication.hpp"
#include "oracles.hpp"

using namespace cover;

namespace {

PricePath subsample(const PricePath& fine, std::size_t every) {
    PricePath out;
    std::vector<Eigen::Index> rows;
    for (std::size_t k = 0; k < fine.times.size(); k += every) {
        out.times.push_back(fine.times[k]);
        rows.push_back(static_cast<Eigen::Index>(k));
    }
    out.prices = fine.prices(rows, Eigen::all);
    return out;
}

PriceTable table_of(std::vector<double> years, std::vector<double> prices) {
    PriceTable table;
    table.years = years;
    table.assets = {"x"};
    table.prices = Eigen::Map<Vector>(prices.data(), static_cast<Eigen::Index>(prices.size()));
    for (double y : years) table.labels.push_back(format_double(y));
    return table;
}

}  // namespace

TEST_CASE("hedge ledger is self-financing") {
    const Market m(MarketSpec::single(0.06, 0.3, 0.02));
    const PricePath path = simulate_path(m, 4.0, 400, Measure::physical, 3, 0);
    for (Mode mode : {Mode::levered, Mode::unlevered}) {
        const HedgeLedger ledger = hedge_path(m, path, 1.0, 4.0, mode);
        CHECK(ledger.size() == 301);
        CHECK(ledger.wealth.front() == 1.0);
        CHECK(self_financing_residual(ledger, m.rate()) <= 1e-12);
        for (std::size_t k = 0; k + 1 < ledger.size(); ++k) {
            const auto row = static_cast<Eigen::Index>(k);
            for (Eigen::Index i = 0; i < m.size(); ++i)
                CHECK(ledger.shares(row, i) * ledger.prices(row, i) ==
                      doctest::Approx(ledger.fractions(row, i) * ledger.wealth[k]).epsilon(1e-13));
            CHECK(ledger.cash[k] + ledger.shares.row(row).dot(ledger.prices.row(row)) ==
                  doctest::Approx(ledger.wealth[k]).epsilon(1e-13));
        }
        CHECK(ledger.shares.row(ledger.fractions.rows() - 1).isZero());
        CHECK(ledger.cash.back() == ledger.wealth.back());
    }
}

TEST_CASE("levered hedge fraction is (mu_hat - r) / sigma^2") {
    const double sigma = 0.25, r = 0.03;
    const Market m(MarketSpec::single(0.1, sigma, r));
    const PricePath path = simulate_path(m, 3.0, 300, Measure::physical, 8, 0);
    const HedgeLedger ledger = hedge_path(m, path, 0.5, 3.0, Mode::levered);
    for (std::size_t k = 0; k + 1 < ledger.size(); ++k) {
        const double t = ledger.times[k];
        const double mu_hat = std::log(ledger.prices(static_cast<Eigen::Index>(k), 0)) / t + 0.5 * sigma * sigma;
        CHECK(ledger.fractions(static_cast<Eigen::Index>(k), 0) == doctest::Approx((mu_hat - r) / (sigma * sigma)).epsilon(1e-10));
    }
}

TEST_CASE("a drift-only path keeps the hedge in cash") {
    const double sigma = 0.2, r = 0.05;
    const Market m(MarketSpec::single(r, sigma, r));
    PricePath path;
    const std::size_t steps = 100;
    path.prices.resize(steps + 1, 1);
    for (std::size_t k = 0; k <= steps; ++k) {
        const double t = 2.0 * static_cast<double>(k) / steps;
        path.times.push_back(t);
        path.prices(static_cast<Eigen::Index>(k), 0) = std::exp((r - 0.5 * sigma * sigma) * t);
    }
    const HedgeLedger ledger = hedge_path(m, path, 0.4, 2.0, Mode::levered);
    CHECK(ledger.fractions.cwiseAbs().maxCoeff() < 1e-12);
    CHECK(ledger.wealth.back() == doctest::Approx(std::exp(r * 1.6)).epsilon(1e-12));
}

TEST_CASE("hedging error shrinks with the rebalancing frequency") {
    const Market m(MarketSpec::single(0.02, 0.3, 0.02));
    const double t0 = 4.0, T = 5.0;
    for (Mode mode : {Mode::levered, Mode::unlevered}) {
        double coarse_sq = 0.0, fine_sq = 0.0;
        for (std::uint64_t p = 0; p < 20; ++p) {
            const PricePath fine = simulate_path(m, T, 20000, Measure::risk_neutral, 17, p);
            const auto price = [&](const Vector& s, double t) {
                return mode == Mode::levered ? price_levered(m, s, t, T).price : price_unlevered(m, s, t, T).price;
            };
            const double target = price(fine.at(fine.steps()), T) / price(fine.at(16000), t0);
            const double e_fine = hedge_path(m, subsample(fine, 1), t0, T, mode).wealth.back() / target - 1.0;
            const double e_coarse = hedge_path(m, subsample(fine, 40), t0, T, mode).wealth.back() / target - 1.0;
            fine_sq += e_fine * e_fine;
            coarse_sq += e_coarse * e_coarse;
        }
        CHECK(fine_sq < coarse_sq);
        // 4000 rebalances over the last year.
        CHECK(std::sqrt(fine_sq / 20.0) < 0.015);
    }
}

TEST_CASE("hedge_path validation") {
    const Market m(MarketSpec::single(0.02, 0.3, 0.02));
    const PricePath path = simulate_path(m, 1.0, 10, Measure::physical, 1, 0);
    CHECK_THROWS_AS(hedge_path(m, path, 0.0, 1.0, Mode::levered), DomainError);
    CHECK_THROWS_AS(hedge_path(m, path, 0.55, 1.0, Mode::levered), DomainError);
    CHECK_THROWS_AS(hedge_path(m, path, 0.5, 1.2, Mode::levered), DomainError);
    CHECK_NOTHROW(hedge_path(m, path, 0.3, 0.8, Mode::levered));
}

TEST_CASE("discrete backtest") {
    const PriceTable table = table_of({0, 1, 2, 3}, {100, 120, 90, 150});
    SUBCASE("all stock tracks the price") {
        const BacktestResult r = discrete_backtest(table, Vector::Ones(1), 1, 0.0);
        for (std::size_t k = 0; k < r.wealth.size(); ++k)
            CHECK(r.wealth[k] == doctest::Approx(table.prices(static_cast<Eigen::Index>(k), 0) / 100.0));
        CHECK(r.cagr == doctest::Approx(std::pow(1.5, 1.0 / 3.0) - 1.0));
    }
    SUBCASE("all cash compounds the period rate") {
        const BacktestResult r = discrete_backtest(table, Vector::Zero(1), 1, 0.01);
        CHECK(r.wealth.back() == doctest::Approx(std::pow(1.01, 3.0)));
    }
    SUBCASE("half in a round trip gains from volatility") {
        const BacktestResult r = discrete_backtest(table_of({0, 1, 2}, {100, 200, 100}), Vector::Constant(1, 0.5), 1, 0.0);
        CHECK(r.wealth.back() == doctest::Approx(1.125));
    }
    SUBCASE("rebalancing interval skips rows") {
        const BacktestResult r = discrete_backtest(table, Vector::Constant(1, 0.5), 2, 0.0);
        CHECK(r.wealth.size() == 2);
        CHECK(r.wealth.back() == doctest::Approx(0.95));
    }
    SUBCASE("leverage ruin is flagged") {
        const BacktestResult r = discrete_backtest(table_of({0, 1, 2}, {100, 40, 60}), Vector::Constant(1, 2.0), 1, 0.0);
        CHECK(r.ruined);
        CHECK(r.ruin_index == 1);
        CHECK(r.cagr == -1.0);
        CHECK(r.wealth.size() == 1);
    }
    SUBCASE("matches the oracle wealth for a multi-asset table") {
        PriceTable t2;
        t2.years = {0, 1, 2, 3, 4};
        t2.assets = {"a", "b"};
        t2.labels = {"0", "1", "2", "3", "4"};
        t2.prices = (Matrix(5, 2) << 10, 5, 11, 4, 9, 6, 12, 6.5, 13, 5).finished();
        const Vector b = (Vector(2) << 0.7, 0.6).finished();
        PricePath path{t2.years, t2.prices};
        CHECK(discrete_backtest(t2, b, 1, 0.0).wealth.back() == doctest::Approx(oracle::discrete_crp_wealth(path, b, 0.0)).epsilon(1e-14));
    }
    CHECK_THROWS_AS(discrete_backtest(table, Vector::Ones(2), 1, 0.0), DomainError);
    CHECK_THROWS_AS(discrete_backtest(table, Vector::Ones(1), 0, 0.0), DomainError);
}

TEST_CASE("long-horizon simulations") {
    SUBCASE("scenario parameters") {
        const SimulationConfig c1 = SimulationConfig::paper(Scenario::sim1);
        CHECK(c1.spec.mu[0] == doctest::Approx(0.04 + 0.5 * 0.49));
        CHECK(c1.spec.rate == 0.02);
        const SimulationConfig c3 = SimulationConfig::paper(Scenario::sim3);
        CHECK(c3.spec.size() == 2);
        CHECK(c3.spec.corr(0, 1) == 0.2);
        CHECK(parse_scenario("sim2") == Scenario::sim2);
        CHECK_THROWS_AS(parse_scenario("sim4"), std::invalid_argument);
        CHECK_THROWS_AS(SimulationConfig::paper(Scenario::custom), std::invalid_argument);
    }
    SUBCASE("report structure and tracking") {
        SimulationConfig config = SimulationConfig::paper(Scenario::sim3);
        config.n_paths = 3;
        config.seed = 12;
        const SimulationReport report = run_paper_simulation(config);
        CHECK(report.paths.size() == 3);
        CHECK(report.ledger.size() == 200 * 52 + 1);
        CHECK(report.tracked_wealth.size() == report.ledger.size());
        CHECK(report.kelly.growth_rate == doctest::Approx(0.13703).epsilon(1e-4));
        CHECK(report.ledger.wealth.front() == doctest::Approx(1.0));
        CHECK(report.tracked_wealth.back() == doctest::Approx(report.paths[0].terminal_wealth).epsilon(1e-12));
        // Weekly hedging tracks the claim closely in growth-rate terms.
        for (const PathSummary& s : report.paths) {
            CHECK(std::isfinite(s.growth_rate));
            CHECK(std::abs(s.growth_rate - s.hedged_growth_rate) < 0.005);
        }
        const auto warm = static_cast<std::size_t>(5 * 52);
        CHECK(std::abs(report.ledger.wealth[warm] - report.tracked_wealth[warm]) < 1e-12 * report.tracked_wealth[warm]);
    }
    SUBCASE("same seed, same report") {
        SimulationConfig config = SimulationConfig::paper(Scenario::sim2);
        config.T = 20.0;
        const SimulationReport a = run_paper_simulation(config);
        const SimulationReport b = run_paper_simulation(config);
        CHECK(a.paths[0].terminal_wealth == b.paths[0].terminal_wealth);
    }
    SUBCASE("invalid configurations") {
        SimulationConfig config = SimulationConfig::paper(Scenario::sim1);
        config.warmup = 0.0;
        CHECK_THROWS_AS(run_paper_simulation(config), DomainError);
        config = SimulationConfig::paper(Scenario::sim1);
        config.T = 200.01;
        CHECK_THROWS_AS(run_paper_simulation(config), DomainError);
    }
}
