#include "cover/numerics.hpp"

#include <algorithm>
#include <limits>
#include <string>

#include "cover/errors.hpp"

namespace cover {

const char* to_string(Mode mode) noexcept { return mode == Mode::levered ? "levered" : "unlevered"; }

Mode parse_mode(const std::string_view text) {
    if (text == "levered") return Mode::levered;
    if (text == "unlevered") return Mode::unlevered;
    throw std::invalid_argument("unknown mode '" + std::string(text) + "' (expected levered or unlevered)");
}

double normal_interval(double a, double b) {
    if (a > 0.0) return normal_cdf(-a) - normal_cdf(-b);
    return normal_cdf(b) - normal_cdf(a);
}

double log_normal_tail(double x) {
    if (x < 35.0) return std::log(0.5 * std::erfc(x / std::numbers::sqrt2));
    // Asymptotic series phi(x)/x (1 - 1/x^2 + 3/x^4 - 15/x^6 + 105/x^8).
    const double u = 1.0 / (x * x);
    const double series = 1.0 - u * (1.0 - u * (3.0 - u * (15.0 - u * 105.0)));
    return -0.5 * x * x - 0.5 * std::log(2.0 * std::numbers::pi) - std::log(x) + std::log(series);
}

double log_normal_interval(double a, double b) {
    if (!(a < b)) return -std::numeric_limits<double>::infinity();
    double lo = a, hi = b;
    if (b <= 0.0) {
        lo = -b;
        hi = -a;
    } else if (a < 0.0) {
        return std::log(normal_interval(a, b));
    }
    const double log_lo = log_normal_tail(lo);
    if (std::isinf(hi)) return log_lo;
    return log_lo + std::log1p(-std::exp(log_normal_tail(hi) - log_lo));
}

double log_binomial(long n, long k) {
    if (k < 0 || k > n) return -std::numeric_limits<double>::infinity();
    return std::lgamma(static_cast<double>(n) + 1.0) - std::lgamma(static_cast<double>(k) + 1.0) -
           std::lgamma(static_cast<double>(n - k) + 1.0);
}

double log_sum_exp(std::span<const double> values) {
    if (values.empty()) return -std::numeric_limits<double>::infinity();
    const double peak = *std::max_element(values.begin(), values.end());
    if (!std::isfinite(peak)) return peak;
    CompensatedSum acc;
    for (double v : values) acc.add(std::exp(v - peak));
    return peak + std::log(acc.value());
}

}  // namespace cover
