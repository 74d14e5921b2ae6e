#pragma once

#include <cmath>
#include <numbers>
#include <span>
#include <string>
#include <string_view>

namespace cover {

enum class Mode { levered, unlevered };

const char* to_string(Mode mode) noexcept;
Mode parse_mode(const std::string_view text);

/// Standard normal CDF via erfc; absolute error is at the erfc rounding level.
inline double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }

inline double normal_pdf(double x) { return std::exp(-0.5 * x * x) / std::sqrt(2.0 * std::numbers::pi); }

/// N(b) - N(a) for a <= b, evaluated on the side of the origin that avoids
/// subtracting two numbers close to one.
double normal_interval(double a, double b);

/// log(N(b) - N(a)) for a < b; stays finite when both ends sit far in one tail.
double log_normal_interval(double a, double b);

/// log of the upper tail 1 - N(x), accurate for large x.
double log_normal_tail(double x);

/// x log x with the 0 log 0 = 0 convention.
inline double xlogx(double x) { return x > 0.0 ? x * std::log(x) : 0.0; }

/// log of the binomial coefficient via lgamma.
double log_binomial(long n, long k);

/// Stable log(sum(exp(values))); returns -inf for an empty range.
double log_sum_exp(std::span<const double> values);

/// Neumaier-compensated running sum; used where result determinism across
/// chunkings matters.
class CompensatedSum {
public:
    void add(double x) {
        const double t = sum_ + x;
        if (std::abs(sum_) >= std::abs(x))
            comp_ += (sum_ - t) + x;
        else
            comp_ += (x - t) + sum_;
        sum_ = t;
    }
    double value() const { return sum_ + comp_; }

private:
    double sum_ = 0.0;
    double comp_ = 0.0;
};

}  // namespace cover
