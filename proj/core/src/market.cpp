#include "cover/market.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <random>
#include <sstream>

#include "cover/errors.hpp"

namespace cover {

namespace {

constexpr double kPivotTolerance = 1e-12;

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

std::string trim(const std::string& s) {
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string::npos) return {};
    const auto last = s.find_last_not_of(" \t\r");
    return s.substr(first, last - first + 1);
}

std::vector<double> parse_numbers(const std::string& text, std::size_t line, std::size_t column) {
    std::vector<double> values;
    std::istringstream in(text);
    in.imbue(std::locale::classic());
    std::string token;
    while (in >> token) {
        if (token == ",") continue;
        if (!token.empty() && token.back() == ',') token.pop_back();
        double v = 0.0;
        const char* begin = token.data() + (token[0] == '+');
        const auto [ptr, ec] = std::from_chars(begin, token.data() + token.size(), v);
        if (ec != std::errc{} || ptr != token.data() + token.size()) throw ParseError("expected a number, got '" + token + "'", line, column);
        values.push_back(v);
    }
    return values;
}

Vector to_vector(const std::vector<double>& v) { return Eigen::Map<const Vector>(v.data(), static_cast<Eigen::Index>(v.size())); }

}  // namespace

MarketSpec MarketSpec::single(double mu, double sigma, double rate, double s0) {
    MarketSpec spec;
    spec.mu = Vector::Constant(1, mu);
    spec.sigma = Vector::Constant(1, sigma);
    spec.corr = Matrix::Identity(1, 1);
    spec.rate = rate;
    spec.s0 = Vector::Constant(1, s0);
    return spec;
}

Matrix cholesky_factor(const Matrix& corr) {
    if (corr.rows() != corr.cols() || corr.rows() == 0) throw DomainError("correlation matrix must be square and non-empty");
    Eigen::LLT<Matrix> llt(corr);
    if (llt.info() != Eigen::Success) throw DomainError("correlation matrix is not positive definite");
    Matrix factor = llt.matrixL();
    const double scale = corr.diagonal().maxCoeff();
    for (Eigen::Index i = 0; i < factor.rows(); ++i) {
        const double pivot = factor(i, i) * factor(i, i);
        if (!(pivot >= kPivotTolerance * scale))
            throw DomainError("correlation matrix is numerically singular (pivot " + std::to_string(pivot) + ")");
    }
    return factor;
}

MarketSpec validate_market(MarketSpec spec) {
    const Eigen::Index n = spec.sigma.size();
    if (n < 1) throw DomainError("market needs at least one asset");
    if (spec.mu.size() != n || spec.s0.size() != n) throw DomainError("mu, sigma and s0 must have the same length");
    if (spec.corr.rows() != n || spec.corr.cols() != n) throw DomainError("correlation matrix must be n x n");
    for (Eigen::Index i = 0; i < n; ++i) {
        if (!(spec.sigma[i] > 0.0) || !std::isfinite(spec.sigma[i])) throw DomainError("volatilities must be positive");
        if (!(spec.s0[i] > 0.0) || !std::isfinite(spec.s0[i])) throw DomainError("initial prices must be positive");
        if (!std::isfinite(spec.mu[i])) throw DomainError("drifts must be finite");
        if (spec.corr(i, i) != 1.0) throw DomainError("correlation matrix must have a unit diagonal");
        for (Eigen::Index j = 0; j < n; ++j) {
            const double c = spec.corr(i, j);
            if (!(c >= -1.0 && c <= 1.0)) throw DomainError("correlations must lie in [-1, 1]");
            if (c != spec.corr(j, i)) throw DomainError("correlation matrix must be symmetric");
        }
    }
    if (!std::isfinite(spec.rate)) throw DomainError("rate must be finite");
    cholesky_factor(spec.corr);
    return spec;
}

Market::Market(MarketSpec spec) : spec_(validate_market(std::move(spec))), factor_(cholesky_factor(spec_.corr)) {}

Matrix Market::covariance() const {
    const auto m = spec_.sigma.asDiagonal();
    return m * spec_.corr * m;
}

Vector Market::solve_corr(const Vector& x) const {
    const auto l = factor_.triangularView<Eigen::Lower>();
    return l.transpose().solve(l.solve(x));
}

double Market::corr_quadratic_form(const Vector& x) const {
    return factor_.triangularView<Eigen::Lower>().solve(x).squaredNorm();
}

Market Market::with_drift(Vector mu) const {
    MarketSpec spec = spec_;
    if (mu.size() != spec.size()) throw DomainError("drift vector has the wrong length");
    spec.mu = std::move(mu);
    return Market(std::move(spec), factor_);
}

std::uint64_t derive_stream_seed(std::uint64_t seed, std::uint64_t index) {
    return splitmix64(splitmix64(seed) ^ splitmix64(index + 0x632BE59BD9B4E019ULL));
}

Matrix correlated_normals(const Matrix& corr, std::size_t count, std::uint64_t seed) {
    const Matrix factor = cholesky_factor(corr);
    const Eigen::Index n = corr.rows();
    std::mt19937_64 gen(derive_stream_seed(seed, 0));
    std::normal_distribution<double> normal;
    Matrix out(static_cast<Eigen::Index>(count), n);
    Vector eps(n);
    for (Eigen::Index row = 0; row < out.rows(); ++row) {
        for (Eigen::Index i = 0; i < n; ++i) eps[i] = normal(gen);
        out.row(row) = (factor * eps).transpose();
    }
    return out;
}

PricePath simulate_path(const Market& market, double horizon, std::size_t steps, Measure measure,
                        std::uint64_t seed, std::uint64_t index) {
    if (!(horizon > 0.0)) throw DomainError("horizon must be positive");
    if (steps < 1) throw DomainError("need at least one step");
    const auto& spec = market.spec();
    const Eigen::Index n = market.size();
    const double dt = horizon / static_cast<double>(steps);
    const double sqrt_dt = std::sqrt(dt);

    Vector drift(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        const double g = measure == Measure::physical ? spec.mu[i] : spec.rate;
        drift[i] = (g - 0.5 * spec.sigma[i] * spec.sigma[i]) * dt;
    }

    PricePath path;
    path.times.resize(steps + 1);
    path.prices.resize(static_cast<Eigen::Index>(steps + 1), n);
    path.times[0] = 0.0;
    path.prices.row(0) = spec.s0.transpose();

    std::mt19937_64 gen(derive_stream_seed(seed, index));
    std::normal_distribution<double> normal;
    Vector eps(n);
    Vector log_s = spec.s0.array().log();
    const Matrix& factor = market.corr_factor();
    for (std::size_t k = 1; k <= steps; ++k) {
        for (Eigen::Index i = 0; i < n; ++i) eps[i] = normal(gen);
        const Vector shock = factor * eps;
        log_s.array() += drift.array() + spec.sigma.array() * sqrt_dt * shock.array();
        path.times[k] = horizon * static_cast<double>(k) / static_cast<double>(steps);
        path.prices.row(static_cast<Eigen::Index>(k)) = log_s.array().exp().transpose();
    }
    return path;
}

std::vector<PricePath> simulate_paths(const Market& market, double horizon, std::size_t steps,
                                      std::size_t n_paths, Measure measure, std::uint64_t seed) {
    std::vector<PricePath> paths;
    paths.reserve(n_paths);
    for (std::size_t p = 0; p < n_paths; ++p) paths.push_back(simulate_path(market, horizon, steps, measure, seed, p));
    return paths;
}

MarketSpec read_market_config(std::istream& in) {
    MarketSpec spec;
    long declared_n = -1;
    std::vector<double> mu, sigma, s0;
    std::vector<std::vector<double>> corr_rows;
    bool have_rate = false;

    std::string raw;
    std::size_t line_no = 0;
    while (std::getline(in, raw)) {
        ++line_no;
        const auto hash = raw.find('#');
        const std::string line = trim(hash == std::string::npos ? raw : raw.substr(0, hash));
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) throw ParseError("expected 'key = value'", line_no, 1);
        const std::string key = trim(line.substr(0, eq));
        const std::string value = line.substr(eq + 1);
        const std::size_t col = eq + 2;
        if (key == "n") {
            const auto v = parse_numbers(value, line_no, col);
            if (v.size() != 1 || v[0] < 1 || v[0] != std::floor(v[0])) throw ParseError("n must be a positive integer", line_no, col);
            declared_n = static_cast<long>(v[0]);
        } else if (key == "mu") {
            mu = parse_numbers(value, line_no, col);
        } else if (key == "sigma") {
            sigma = parse_numbers(value, line_no, col);
        } else if (key == "s0") {
            s0 = parse_numbers(value, line_no, col);
        } else if (key == "rate") {
            const auto v = parse_numbers(value, line_no, col);
            if (v.size() != 1) throw ParseError("rate takes one value", line_no, col);
            spec.rate = v[0];
            have_rate = true;
        } else if (key == "corr") {
            std::stringstream rows(value);
            std::string row;
            while (std::getline(rows, row, ';'))
                if (!trim(row).empty()) corr_rows.push_back(parse_numbers(row, line_no, col));
        } else {
            throw ParseError("unknown key '" + key + "'", line_no, 1);
        }
    }

    const std::size_t n = declared_n > 0 ? static_cast<std::size_t>(declared_n) : sigma.size();
    if (n == 0) throw ParseError("config must define sigma", line_no, 1);
    if (sigma.size() != n) throw ParseError("sigma has " + std::to_string(sigma.size()) + " entries, expected " + std::to_string(n), line_no, 1);
    if (!have_rate) spec.rate = 0.0;
    if (mu.empty()) mu.assign(n, spec.rate);
    if (s0.empty()) s0.assign(n, 1.0);
    if (mu.size() != n) throw ParseError("mu has the wrong length", line_no, 1);
    if (s0.size() != n) throw ParseError("s0 has the wrong length", line_no, 1);
    spec.mu = to_vector(mu);
    spec.sigma = to_vector(sigma);
    spec.s0 = to_vector(s0);
    if (corr_rows.empty()) {
        spec.corr = Matrix::Identity(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
    } else {
        if (corr_rows.size() != n) throw ParseError("corr must have n rows", line_no, 1);
        spec.corr.resize(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
        for (std::size_t i = 0; i < n; ++i) {
            if (corr_rows[i].size() != n) throw ParseError("corr row " + std::to_string(i + 1) + " must have n entries", line_no, 1);
            for (std::size_t j = 0; j < n; ++j)
                spec.corr(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = corr_rows[i][j];
        }
    }
    return spec;
}

MarketSpec read_market_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open config file '" + path + "'");
    return read_market_config(in);
}

void write_market_config(std::ostream& out, const MarketSpec& spec) {
    std::ostringstream s;
    s.imbue(std::locale::classic());
    s.precision(17);
    auto row = [&s](const auto& v) {
        for (Eigen::Index i = 0; i < v.size(); ++i) s << (i ? " " : "") << v[i];
        s << '\n';
    };
    s << "n = " << spec.size() << '\n';
    s << "mu = ";
    row(spec.mu);
    s << "sigma = ";
    row(spec.sigma);
    for (Eigen::Index i = 0; i < spec.corr.rows(); ++i) {
        s << "corr = ";
        row(Vector(spec.corr.row(i).transpose()));
    }
    s << "rate = " << spec.rate << '\n';
    s << "s0 = ";
    row(spec.s0);
    out << s.str();
}

}  // namespace cover
