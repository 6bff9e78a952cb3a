#pragma once

#include <cmath>

namespace equiv {

inline constexpr double kSqrt2 = 1.41421356237309504880;
inline constexpr double kLogSqrt2Pi = 0.91893853320467274178;

/// Standard normal density.
inline double normal_pdf(double z) {
    return std::exp(-0.5 * z * z - kLogSqrt2Pi);
}

/// Standard normal CDF via the complementary error function.
/// Absolute error is well below 1e-14 over the whole real line.
inline double normal_cdf(double z) {
    return 0.5 * std::erfc(-z / kSqrt2);
}

/// log N(x; mean, var), var > 0.
inline double normal_logpdf(double x, double mean, double var) {
    const double d = x - mean;
    return -0.5 * std::log(var) - kLogSqrt2Pi - d * d / (2.0 * var);
}

inline double normal_density(double x, double mean, double var) {
    return std::exp(normal_logpdf(x, mean, var));
}

/// Mass of N(mean, sd^2) on the interval (lo, hi).
inline double normal_interval_mass(double lo, double hi, double mean, double sd) {
    return normal_cdf((hi - mean) / sd) - normal_cdf((lo - mean) / sd);
}

}  // namespace equiv
