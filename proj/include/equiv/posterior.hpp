#pragma once

#include <array>
#include <cmath>
#include <limits>
#include <span>
#include <utility>
#include <vector>

#include "equiv/mixture.hpp"
#include "equiv/normal.hpp"
#include "equiv/pvalue.hpp"
#include "equiv/util.hpp"

namespace equiv {

/// Per-gene posterior mixture constants.  The posterior of the true mean log
/// ratio given y is a three-component mixture of N(e[j], d2[j]) with weights
/// mix_weights; a is the marginal density of y (the normalizer), and b, c
/// are the raw factorization constants
///   b[j] = pi_j / (2 pi sqrt(sigma2 tau2_j)),
///   c[j] = exp(-(tau2_j y^2 + sigma2 mu_j^2) / (2 sigma2 tau2_j)).
/// b and c individually over/underflow for near-degenerate tau2; mix_weights
/// is always computed in log space and is the quantity to consume.  For a
/// tau2 = 0 component the posterior collapses to a point mass at mu_j
/// (d2 = 0, e = mu_j) and b, c are reported as their limits (inf, 0).
struct PosteriorDecomposition {
    double a = 0.0;
    std::array<double, 3> b{}, c{}, d2{}, e{};
    std::array<double, 3> mix_weights{};
};

namespace detail {

// log of pi_j * N(y; mu_j, sigma2 + tau2_j), the unnormalized posterior
// component weight; -inf for pi_j = 0.
inline std::array<double, 3> component_log_weights(const GeneObservation& obs,
                                                   const MixturePrior& prior) {
    std::array<double, 3> lw;
    for (int j = 0; j < 3; ++j) {
        if (prior.weights[j] > 0.0) {
            lw[j] = std::log(prior.weights[j]) +
                    normal_logpdf(obs.y, prior.means[j],
                                  obs.sigma2 + prior.variances[j]);
        } else {
            lw[j] = -std::numeric_limits<double>::infinity();
        }
    }
    return lw;
}

}  // namespace detail

/// Marginal density of the observed mean log ratio,
/// f(y) = sum_j pi_j N(y; mu_j, sigma2 + tau2_j).
inline double marginal_density(const GeneObservation& obs, const MixturePrior& prior) {
    prior.validate();
    double f = 0.0;
    for (int j = 0; j < 3; ++j) {
        if (prior.weights[j] == 0.0) continue;
        f += prior.weights[j] *
             normal_density(obs.y, prior.means[j], obs.sigma2 + prior.variances[j]);
    }
    return f;
}

inline PosteriorDecomposition posterior_decomposition(const GeneObservation& obs,
                                                      const MixturePrior& prior) {
    prior.validate();
    PosteriorDecomposition dec;
    const auto lw = detail::component_log_weights(obs, prior);
    const double lse = log_sum_exp(lw);
    if (!std::isfinite(lse))
        throw ValidationError("posterior decomposition: all mixture components vanish");
    dec.a = std::exp(lse);
    for (int j = 0; j < 3; ++j) {
        const double tau2 = prior.variances[j];
        const double mu = prior.means[j];
        if (tau2 > 0.0) {
            dec.d2[j] = obs.sigma2 * tau2 / (tau2 + obs.sigma2);
            dec.e[j] = (obs.y * tau2 + mu * obs.sigma2) / (tau2 + obs.sigma2);
            dec.b[j] = prior.weights[j] /
                       (2.0 * M_PI * std::sqrt(obs.sigma2 * tau2));
            dec.c[j] = std::exp(-(tau2 * obs.y * obs.y + obs.sigma2 * mu * mu) /
                                (2.0 * obs.sigma2 * tau2));
        } else {
            dec.d2[j] = 0.0;
            dec.e[j] = mu;
            dec.b[j] = std::numeric_limits<double>::infinity();
            dec.c[j] = 0.0;
        }
        dec.mix_weights[j] = std::isfinite(lw[j]) ? std::exp(lw[j] - lse) : 0.0;
    }
    return dec;
}

/// Posterior density of the true mean log ratio at theta.  Requires every
/// contributing component to have tau2 > 0 (point masses have no density).
inline double posterior_density(const PosteriorDecomposition& dec, double theta) {
    double f = 0.0;
    for (int j = 0; j < 3; ++j) {
        if (dec.mix_weights[j] == 0.0) continue;
        if (dec.d2[j] == 0.0)
            throw ValidationError("posterior density undefined for a point-mass component");
        f += dec.mix_weights[j] * normal_density(theta, dec.e[j], dec.d2[j]);
    }
    return f;
}

/// Posterior probability of equivalence P(-eps < theta < eps | y):
/// sum_j w_j [Phi((eps - e_j)/d_j) - Phi((-eps - e_j)/d_j)], with point-mass
/// components contributing an indicator (1/2 exactly on the boundary).
inline double posterior_equivalence_probability(const GeneObservation& obs,
                                                const MixturePrior& prior,
                                                const EquivalenceSpec& spec) {
    const PosteriorDecomposition dec = posterior_decomposition(obs, prior);
    double p = 0.0;
    for (int j = 0; j < 3; ++j) {
        const double w = dec.mix_weights[j];
        if (w == 0.0) continue;
        if (dec.d2[j] > 0.0) {
            p += w * normal_interval_mass(-spec.epsilon, spec.epsilon, dec.e[j],
                                          std::sqrt(dec.d2[j]));
        } else {
            const double t = std::abs(dec.e[j]);
            if (t < spec.epsilon) p += w;
            else if (t == spec.epsilon) p += 0.5 * w;
        }
    }
    return std::min(1.0, std::max(0.0, p));
}

/// Posterior equivalence probability as a function of the observation
/// variance, for fixed y.
inline std::vector<std::pair<double, double>> equivalence_curve(
    double y, const MixturePrior& prior, const EquivalenceSpec& spec,
    std::span<const double> sigma2_grid) {
    if (sigma2_grid.empty())
        throw ValidationError("variance grid must be nonempty");
    std::vector<std::pair<double, double>> out;
    out.reserve(sigma2_grid.size());
    for (double s2 : sigma2_grid) {
        if (!(s2 > 0.0))
            throw ValidationError("variance grid entries must be positive");
        out.emplace_back(s2, posterior_equivalence_probability(
                                 GeneObservation("grid", y, s2), prior, spec));
    }
    return out;
}

}  // namespace equiv
