#include <sstream>

#include "doctest.h"
#include "cover/errors.hpp"
#include "cover/market.hpp"
#include "oracles.hpp"

using namespace cover;

namespace {

MarketSpec two_asset(double rho) {
    MarketSpec spec;
    spec.mu = Vector::Constant(2, 0.05);
    spec.sigma = (Vector(2) << 0.55, 0.7).finished();
    spec.corr = (Matrix(2, 2) << 1.0, rho, rho, 1.0).finished();
    spec.rate = 0.02;
    spec.s0 = Vector::Ones(2);
    return spec;
}

}  // namespace

TEST_CASE("validate_market accepts and rejects the documented cases") {
    CHECK_NOTHROW(validate_market(MarketSpec::single(0.1, 0.7, 0.02)));
    CHECK_NOTHROW(validate_market(two_asset(0.2)));
    CHECK_THROWS_AS(validate_market(two_asset(1.0)), DomainError);
    CHECK_THROWS_AS(validate_market(two_asset(1.5)), DomainError);

    auto bad_sigma = MarketSpec::single(0.1, 0.0, 0.02);
    CHECK_THROWS_AS(validate_market(bad_sigma), DomainError);
    auto bad_s0 = MarketSpec::single(0.1, 0.2, 0.02, -1.0);
    CHECK_THROWS_AS(validate_market(bad_s0), DomainError);

    auto asym = two_asset(0.2);
    asym.corr(0, 1) = 0.3;
    CHECK_THROWS_AS(validate_market(asym), DomainError);

    auto nonsquare = two_asset(0.2);
    nonsquare.corr = Matrix::Ones(2, 3);
    CHECK_THROWS_AS(validate_market(nonsquare), DomainError);
}

TEST_CASE("cholesky pivot tolerance is scale aware") {
    Matrix nearly = (Matrix(2, 2) << 1.0, 1.0 - 1e-14, 1.0 - 1e-14, 1.0).finished();
    CHECK_THROWS_AS(cholesky_factor(nearly), DomainError);
    Matrix fine = (Matrix(2, 2) << 1.0, 0.999, 0.999, 1.0).finished();
    const Matrix l = cholesky_factor(fine);
    CHECK((l * l.transpose() - fine).norm() < 1e-14);
}

TEST_CASE("correlated_normals") {
    SUBCASE("identity gives uncorrelated draws") {
        const std::size_t count = 200000;
        const Matrix x = correlated_normals(Matrix::Identity(2, 2), count, 11);
        const double corr = (x.col(0).array() * x.col(1).array()).mean();
        CHECK(std::abs(corr) < 3.0 / std::sqrt(static_cast<double>(count)));
    }
    SUBCASE("rho = 0.2 over a million draws") {
        const Matrix r = two_asset(0.2).corr;
        const Matrix x = correlated_normals(r, 1000000, 5);
        const Eigen::ArrayXd a = x.col(0).array() - x.col(0).mean();
        const Eigen::ArrayXd b = x.col(1).array() - x.col(1).mean();
        const double sample = (a * b).sum() / std::sqrt(a.square().sum() * b.square().sum());
        CHECK(sample >= 0.197);
        CHECK(sample <= 0.203);
    }
    SUBCASE("deterministic in the seed") {
        const Matrix r = two_asset(0.2).corr;
        CHECK(correlated_normals(r, 1000, 9) == correlated_normals(r, 1000, 9));
        CHECK(correlated_normals(r, 1000, 9) != correlated_normals(r, 1000, 10));
    }
    CHECK_THROWS_AS(correlated_normals(two_asset(1.0).corr, 10, 1), DomainError);
}

TEST_CASE("simulate_paths: deterministic limit and grid") {
    const Market m(MarketSpec::single(0.05, 1e-12, 0.01, 3.0));
    const auto paths = simulate_paths(m, 1.0, 50, 4, Measure::physical, 1);
    for (const auto& p : paths) {
        CHECK(p.times.front() == 0.0);
        CHECK(p.times.back() == doctest::Approx(1.0).epsilon(1e-15));
        CHECK(p.prices(0, 0) == 3.0);
        CHECK(p.prices(50, 0) == doctest::Approx(3.0 * std::exp(0.05)).epsilon(1e-10));
        for (std::size_t k = 1; k < p.times.size(); ++k) CHECK(p.times[k] > p.times[k - 1]);
    }
    CHECK_THROWS_AS(simulate_paths(m, 0.0, 10, 1, Measure::physical, 1), DomainError);
    CHECK_THROWS_AS(simulate_paths(m, 1.0, 0, 1, Measure::physical, 1), DomainError);
}

TEST_CASE("simulate_paths: per-path streams do not depend on n_paths") {
    const Market m(MarketSpec::single(0.05, 0.3, 0.01));
    const auto few = simulate_paths(m, 1.0, 20, 3, Measure::physical, 42);
    const auto many = simulate_paths(m, 1.0, 20, 10, Measure::physical, 42);
    for (std::size_t p = 0; p < few.size(); ++p) CHECK(few[p].prices == many[p].prices);
    CHECK(simulate_path(m, 1.0, 20, Measure::physical, 42, 7).prices == many[7].prices);
}

TEST_CASE("risk-neutral discounted prices are martingales") {
    const Market m(MarketSpec::single(0.3, 0.4, 0.03, 2.0));
    const std::size_t n_paths = 100000;
    const auto paths = simulate_paths(m, 2.0, 1, n_paths, Measure::risk_neutral, 3);
    Eigen::ArrayXd disc(static_cast<Eigen::Index>(n_paths));
    for (std::size_t p = 0; p < n_paths; ++p) disc[static_cast<Eigen::Index>(p)] = std::exp(-0.06) * paths[p].prices(1, 0);
    const double mean = disc.mean();
    const double se = std::sqrt((disc - mean).square().sum() / (disc.size() - 1) / disc.size());
    CHECK(std::abs(mean - 2.0) < 4.0 * se);
}

TEST_CASE("physical growth rate and log-return covariance") {
    SUBCASE("mean log growth equals nu = mu - sigma^2/2") {
        const double sigma = 0.7;
        const double nu = 0.04;
        const Market m(MarketSpec::single(nu + 0.5 * sigma * sigma, sigma, 0.02));
        const std::size_t n_paths = 40000;
        const double T = 10.0;
        const auto paths = simulate_paths(m, T, 1, n_paths, Measure::physical, 17);
        Eigen::ArrayXd g(static_cast<Eigen::Index>(n_paths));
        for (std::size_t p = 0; p < n_paths; ++p) g[static_cast<Eigen::Index>(p)] = std::log(paths[p].prices(1, 0)) / T;
        const double se = sigma / std::sqrt(T * static_cast<double>(n_paths));
        CHECK(std::abs(g.mean() - nu) < 4.0 * se);
    }
    SUBCASE("log-return covariance approaches Sigma dt") {
        const Market m(two_asset(0.2));
        const std::size_t steps = 200000;
        const double horizon = 200.0;
        const PricePath p = simulate_path(m, horizon, steps, Measure::physical, 8, 0);
        const double dt = horizon / static_cast<double>(steps);
        const Matrix logs = p.prices.array().log().matrix();
        const Matrix rets = logs.bottomRows(steps) - logs.topRows(steps);
        const Matrix centered = rets.rowwise() - rets.colwise().mean();
        const Matrix cov = centered.transpose() * centered / static_cast<double>(steps - 1);
        const Matrix target = m.covariance() * dt;
        for (Eigen::Index i = 0; i < 2; ++i)
            for (Eigen::Index j = 0; j < 2; ++j) {
                const double se = std::sqrt((target(i, i) * target(j, j) + target(i, j) * target(i, j)) / steps);
                CHECK(std::abs(cov(i, j) - target(i, j)) < 4.0 * se);
            }
    }
}

TEST_CASE("market config round trip and errors") {
    const MarketSpec spec = two_asset(0.2);
    std::stringstream buf;
    write_market_config(buf, spec);
    const MarketSpec back = read_market_config(buf);
    CHECK(back.mu == spec.mu);
    CHECK(back.sigma == spec.sigma);
    CHECK(back.corr == spec.corr);
    CHECK(back.rate == spec.rate);
    CHECK(back.s0 == spec.s0);

    std::istringstream semicolons("sigma = 0.3 0.4\ncorr = 1 0.5; 0.5 1  # rows\nrate = 0.01\n");
    const MarketSpec s2 = read_market_config(semicolons);
    CHECK(s2.corr(0, 1) == 0.5);
    CHECK(s2.mu == Vector::Constant(2, 0.01));
    CHECK(s2.s0 == Vector::Ones(2));

    std::istringstream bad("sigma = 0.3\nrate = abc\n");
    try {
        read_market_config(bad);
        FAIL("expected a parse error");
    } catch (const ParseError& e) {
        CHECK(e.line() == 2);
    }
    std::istringstream unknown("sigma = 0.3\nvol = 1\n");
    CHECK_THROWS_AS(read_market_config(unknown), ParseError);
}
