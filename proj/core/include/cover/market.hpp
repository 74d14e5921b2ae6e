#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include <Eigen/Cholesky>
#include <Eigen/Dense>

namespace cover {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// Constant-coefficient correlated geometric Brownian motion market with a
/// money-market account.
struct MarketSpec {
    Vector mu;           // drift per year
    Vector sigma;        // volatility per sqrt(year), > 0
    Matrix corr;         // correlation, symmetric positive definite, unit diagonal
    double rate = 0.0;   // continuously compounded risk-free rate
    Vector s0;           // initial prices, > 0

    Eigen::Index size() const { return sigma.size(); }

    static MarketSpec single(double mu, double sigma, double rate, double s0 = 1.0);
};

/// Throws DomainError unless every MarketSpec invariant holds; returns the spec unchanged.
MarketSpec validate_market(MarketSpec spec);

/// Cholesky factor of a correlation matrix. A pivot below 1e-12 times the
/// largest diagonal entry is treated as loss of definiteness.
Matrix cholesky_factor(const Matrix& corr);

/// A validated market with its correlation factor cached. All pricing and
/// hindsight operations take this type so that validation happens once.
class Market {
public:
    explicit Market(MarketSpec spec);

    const MarketSpec& spec() const { return spec_; }
    Eigen::Index size() const { return spec_.size(); }
    double rate() const { return spec_.rate; }
    const Vector& sigma() const { return spec_.sigma; }
    const Vector& s0() const { return spec_.s0; }
    const Matrix& corr() const { return spec_.corr; }
    const Matrix& corr_factor() const { return factor_; }

    /// Sigma = M R M with M = diag(sigma).
    Matrix covariance() const;

    /// R^{-1} x through the cached factor.
    Vector solve_corr(const Vector& x) const;
    /// x' R^{-1} x through the cached factor.
    double corr_quadratic_form(const Vector& x) const;

    /// Same market with the drift replaced; the factor is reused.
    Market with_drift(Vector mu) const;

private:
    Market(MarketSpec spec, Matrix factor) : spec_(std::move(spec)), factor_(std::move(factor)) {}

    MarketSpec spec_;
    Matrix factor_;
};

enum class Measure { physical, risk_neutral };

struct PricePath {
    std::vector<double> times;   // strictly increasing, times[0] == 0
    Matrix prices;               // rows = grid points, cols = assets

    std::size_t steps() const { return times.empty() ? 0 : times.size() - 1; }
    Vector at(std::size_t k) const { return prices.row(static_cast<Eigen::Index>(k)).transpose(); }
};

/// Seed for the stream of a given index; independent of how many streams are drawn.
std::uint64_t derive_stream_seed(std::uint64_t seed, std::uint64_t index);

/// count x n matrix whose rows are independent N(0, corr) draws.
Matrix correlated_normals(const Matrix& corr, std::size_t count, std::uint64_t seed);

/// Exact lognormal stepping on a uniform grid of `steps` intervals over [0, horizon].
std::vector<PricePath> simulate_paths(const Market& market, double horizon, std::size_t steps,
                                      std::size_t n_paths, Measure measure, std::uint64_t seed);

/// Single path; path `index` of simulate_paths with the same arguments is identical.
PricePath simulate_path(const Market& market, double horizon, std::size_t steps, Measure measure,
                        std::uint64_t seed, std::uint64_t index);

/// Plain key/value config: n, mu, sigma, corr (one row per `corr` line or
/// rows separated by ';'), rate, s0. '#' starts a comment.
MarketSpec read_market_config(std::istream& in);
MarketSpec read_market_config_file(const std::string& path);
void write_market_config(std::ostream& out, const MarketSpec& spec);

}  // namespace cover
