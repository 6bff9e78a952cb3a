#pragma once

#include <cmath>
#include <limits>
#include <span>
#include <stdexcept>
#include <string>

namespace equiv {

/// Input or file-content validation failure (maps to CLI exit code 1).
class ValidationError : public std::runtime_error {
public:
    explicit ValidationError(const std::string& msg) : std::runtime_error(msg) {}
};

// Pairwise reduction; deterministic for a fixed partition and with lower
// roundoff growth than left-to-right accumulation.
inline double pairwise_sum(std::span<const double> xs) {
    if (xs.size() <= 8) {
        double s = 0.0;
        for (double x : xs) s += x;
        return s;
    }
    const std::size_t h = xs.size() / 2;
    return pairwise_sum(xs.first(h)) + pairwise_sum(xs.subspan(h));
}

inline double log_sum_exp(std::span<const double> logs) {
    double mx = -std::numeric_limits<double>::infinity();
    for (double l : logs) mx = std::max(mx, l);
    if (!std::isfinite(mx)) return mx;
    double s = 0.0;
    for (double l : logs) s += std::exp(l - mx);
    return mx + std::log(s);
}

}  // namespace equiv
