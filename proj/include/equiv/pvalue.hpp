#pragma once

#include <cmath>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "equiv/normal.hpp"
#include "equiv/util.hpp"

namespace equiv {

/// Equivalence margin epsilon and, optionally, an observation window
/// half-width ell (0 < ell < epsilon) used by interval-conditioned checks.
struct EquivalenceSpec {
    double epsilon = 1.0;
    std::optional<double> ell;

    EquivalenceSpec() = default;
    explicit EquivalenceSpec(double eps, std::optional<double> l = std::nullopt)
        : epsilon(eps), ell(l) {
        if (!(eps > 0.0))
            throw ValidationError("equivalence margin epsilon must be positive");
        if (l && !(*l > 0.0 && *l < eps))
            throw ValidationError("window half-width ell must satisfy 0 < ell < epsilon");
    }
};

/// A point estimate with known standard error; the estimate is modeled as
/// N(theta, se^2).
struct EstimateSummary {
    double theta_hat = 0.0;
    double se = 1.0;

    EstimateSummary() = default;
    EstimateSummary(double theta, double stderr_) : theta_hat(theta), se(stderr_) {
        if (!(stderr_ > 0.0))
            throw ValidationError("standard error must be positive");
    }
};

/// Equivalence test statistic (epsilon - |theta_hat|) / se.  Large values
/// favour the equivalence alternative; the maximum epsilon/se is attained at
/// theta_hat = 0.
inline double test_statistic_u(const EstimateSummary& est, const EquivalenceSpec& spec) {
    return (spec.epsilon - std::abs(est.theta_hat)) / est.se;
}

/// Equivalence P-value
///   Phi((|theta_hat| - eps)/se) - Phi((-|theta_hat| - eps)/se),
/// the supremum over the composite null |theta| >= eps, attained at the
/// boundary theta = +-eps.  Always in [0, 1) and even in theta_hat.
inline double equivalence_p_value(const EstimateSummary& est, const EquivalenceSpec& spec) {
    const double t = std::abs(est.theta_hat);
    return normal_cdf((t - spec.epsilon) / est.se) -
           normal_cdf((-t - spec.epsilon) / est.se);
}

/// Rejection probability at the null boundary for the symmetric acceptance
/// region (-c, c):  Phi((c - eps)/se) - Phi((-c - eps)/se).  Minimizing over
/// c with theta_hat inside (-c, c) reproduces the equivalence P-value, with
/// the minimum at c = |theta_hat| since the expression is increasing in c.
inline double power_function(double c, double se, const EquivalenceSpec& spec) {
    if (!(c > 0.0)) throw ValidationError("critical value c must be positive");
    if (!(se > 0.0)) throw ValidationError("standard error must be positive");
    return normal_cdf((c - spec.epsilon) / se) -
           normal_cdf((-c - spec.epsilon) / se);
}

/// P-value as a function of the standard error, for fixed theta_hat.
inline std::vector<std::pair<double, double>> p_value_curve(
    double theta_hat, const EquivalenceSpec& spec, std::span<const double> se_grid) {
    if (se_grid.empty())
        throw ValidationError("standard-error grid must be nonempty");
    std::vector<std::pair<double, double>> out;
    out.reserve(se_grid.size());
    for (double se : se_grid) {
        if (!(se > 0.0))
            throw ValidationError("standard-error grid entries must be positive");
        out.emplace_back(se, equivalence_p_value(EstimateSummary(theta_hat, se), spec));
    }
    return out;
}

}  // namespace equiv
