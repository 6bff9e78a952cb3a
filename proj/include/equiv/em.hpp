#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numeric>
#include <optional>
#include <span>
#include <vector>

#include "equiv/mixture.hpp"
#include "equiv/normal.hpp"
#include "equiv/optimize.hpp"
#include "equiv/util.hpp"

namespace equiv {

/// Per-gene component responsibilities gamma[i][j]; rows sum to 1.
struct ResponsibilityMatrix {
    std::vector<std::array<double, 3>> gamma;
};

/// Default multi-start mixing proportions: equally contributing components,
/// one dominating component (three rotations), and two dominating
/// components (three rotations).
inline std::vector<std::array<double, 3>> default_starts() {
    return {{1.0 / 3, 1.0 / 3, 1.0 / 3},
            {0.80, 0.10, 0.10},
            {0.10, 0.80, 0.10},
            {0.10, 0.10, 0.80},
            {0.10, 0.45, 0.45},
            {0.45, 0.10, 0.45},
            {0.45, 0.45, 0.10}};
}

struct FitConfig {
    int screening_iters = 50;
    double screening_tol = 1e-5;
    double final_tol = 1e-10;
    int max_iters = 5000;
    std::optional<double> tau2_upper;  // default: max_i sigma2_i
    std::vector<std::array<double, 3>> starts = default_starts();

    void validate() const {
        if (screening_iters <= 0 || max_iters <= 0)
            throw ValidationError("iteration counts must be positive");
        if (!(screening_tol > 0.0) || !(final_tol > 0.0))
            throw ValidationError("convergence tolerances must be positive");
        if (final_tol > screening_tol)
            throw ValidationError("final tolerance must not exceed screening tolerance");
        if (tau2_upper && !(*tau2_upper >= 0.0))
            throw ValidationError("tau2 upper bound must be nonnegative");
        if (starts.empty()) throw ValidationError("starts list must be nonempty");
        for (const auto& s : starts) {
            if (std::abs(s[0] + s[1] + s[2] - 1.0) > 1e-9)
                throw ValidationError("each start must sum to 1");
        }
    }
};

struct FitResult {
    MixturePrior prior;
    double log_likelihood = -std::numeric_limits<double>::infinity();
    int iterations = 0;
    std::array<double, 3> start_used{};
    bool converged = false;
    std::vector<double> trace;  // observed log-likelihood per sweep
};

namespace detail {

// log g_j(y_i; mu_j, tau2_j) = log N(y_i; mu_j, tau2_j + sigma2_i)
inline double log_component_density(const GeneObservation& obs, double mu, double tau2) {
    return normal_logpdf(obs.y, mu, tau2 + obs.sigma2);
}

inline double max_sigma2(std::span<const GeneObservation> data) {
    double mx = 0.0;
    for (const auto& g : data) mx = std::max(mx, g.sigma2);
    return mx;
}

}  // namespace detail

inline double observed_log_likelihood(std::span<const GeneObservation> data,
                                      const MixturePrior& prior) {
    if (data.empty()) throw ValidationError("log-likelihood of empty data");
    prior.validate();
    std::vector<double> rows(data.size());
    for (std::size_t i = 0; i < data.size(); ++i) {
        std::array<double, 3> lw;
        for (int j = 0; j < 3; ++j) {
            lw[j] = prior.weights[j] > 0.0
                        ? std::log(prior.weights[j]) +
                              detail::log_component_density(data[i], prior.means[j],
                                                            prior.variances[j])
                        : -std::numeric_limits<double>::infinity();
        }
        rows[i] = log_sum_exp(lw);
        if (!std::isfinite(rows[i]))
            throw ValidationError("mixture density vanished for gene '" + data[i].id + "'");
    }
    return pairwise_sum(rows);
}

inline ResponsibilityMatrix e_step(std::span<const GeneObservation> data,
                                   const MixturePrior& prior) {
    prior.validate();
    ResponsibilityMatrix r;
    r.gamma.resize(data.size());
    for (std::size_t i = 0; i < data.size(); ++i) {
        std::array<double, 3> lw;
        for (int j = 0; j < 3; ++j) {
            lw[j] = prior.weights[j] > 0.0
                        ? std::log(prior.weights[j]) +
                              detail::log_component_density(data[i], prior.means[j],
                                                            prior.variances[j])
                        : -std::numeric_limits<double>::infinity();
        }
        const double lse = log_sum_exp(lw);
        if (!std::isfinite(lse))
            throw ValidationError("responsibilities vanished for gene '" + data[i].id + "'");
        for (int j = 0; j < 3; ++j)
            r.gamma[i][j] = std::isfinite(lw[j]) ? std::exp(lw[j] - lse) : 0.0;
    }
    return r;
}

inline std::array<double, 3> cm_step_weights(const ResponsibilityMatrix& resp) {
    if (resp.gamma.empty()) throw ValidationError("empty responsibility matrix");
    std::array<double, 3> col{0.0, 0.0, 0.0};
    for (const auto& row : resp.gamma)
        for (int j = 0; j < 3; ++j) col[j] += row[j];
    const double total = col[0] + col[1] + col[2];
    for (int j = 0; j < 3; ++j) col[j] /= total;
    return col;
}

/// Precision-weighted component means, using the previous iteration's tau2.
inline std::array<double, 3> cm_step_means(std::span<const GeneObservation> data,
                                           const ResponsibilityMatrix& resp,
                                           const std::array<double, 3>& tau2_prev) {
    std::array<double, 3> num{}, den{};
    for (std::size_t i = 0; i < data.size(); ++i) {
        for (int j = 0; j < 3; ++j) {
            const double w = resp.gamma[i][j] / (data[i].sigma2 + tau2_prev[j]);
            num[j] += w * data[i].y;
            den[j] += w;
        }
    }
    std::array<double, 3> mu;
    for (int j = 0; j < 3; ++j) {
        if (!(den[j] > 0.0))
            throw ValidationError("component " + std::to_string(j + 1) +
                                  " has zero responsibility mass");
        mu[j] = num[j] / den[j];
    }
    return mu;
}

/// Per-component tau2 maximizing the responsibility-weighted component
/// log-likelihood over [0, tau2_upper], using the current iteration's means.
inline std::array<double, 3> cm_step_variances(std::span<const GeneObservation> data,
                                               const ResponsibilityMatrix& resp,
                                               const std::array<double, 3>& mu_next,
                                               double tau2_upper) {
    std::array<double, 3> tau2;
    for (int j = 0; j < 3; ++j) {
        double mass = 0.0;
        for (const auto& row : resp.gamma) mass += row[j];
        if (!(mass > 0.0))
            throw ValidationError("component " + std::to_string(j + 1) +
                                  " has zero responsibility mass");
        auto objective = [&](double t2) {
            double q = 0.0;
            for (std::size_t i = 0; i < data.size(); ++i) {
                if (resp.gamma[i][j] == 0.0) continue;
                q += resp.gamma[i][j] *
                     detail::log_component_density(data[i], mu_next[j], t2);
            }
            return q;
        };
        tau2[j] = tau2_upper > 0.0 ? maximize_scalar(objective, 0.0, tau2_upper) : 0.0;
    }
    return tau2;
}

/// Finch-style initialization: order genes by y, split into blocks of sizes
/// round(m*pi_1), round(m*pi_2), remainder; block mean gives mu_j and the
/// block marginal likelihood maximized over [0, block max sigma2] gives tau2_j.
inline MixturePrior initialize_prior(std::span<const GeneObservation> data,
                                     const std::array<double, 3>& start_weights) {
    const std::size_t m = data.size();
    if (m < 3) throw ValidationError("initialization requires at least 3 genes");
    std::vector<std::size_t> order(m);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(),
              [&](std::size_t a, std::size_t b) { return data[a].y < data[b].y; });

    const auto n1 = static_cast<std::size_t>(std::lround(double(m) * start_weights[0]));
    const auto n2 = static_cast<std::size_t>(std::lround(double(m) * start_weights[1]));
    if (n1 == 0 || n2 == 0 || n1 + n2 >= m)
        throw ValidationError("initialization start weights produce an empty block");
    const std::array<std::size_t, 3> sizes{n1, n2, m - n1 - n2};

    MixturePrior prior;
    prior.weights = start_weights;
    std::size_t offset = 0;
    for (int j = 0; j < 3; ++j) {
        const auto block = std::span(order).subspan(offset, sizes[j]);
        offset += sizes[j];
        double mean = 0.0, smax = 0.0;
        for (std::size_t idx : block) {
            mean += data[idx].y;
            smax = std::max(smax, data[idx].sigma2);
        }
        mean /= double(block.size());
        auto objective = [&](double t2) {
            double ll = 0.0;
            for (std::size_t idx : block)
                ll += detail::log_component_density(data[idx], mean, t2);
            return ll;
        };
        prior.means[j] = mean;
        prior.variances[j] = smax > 0.0 ? maximize_scalar(objective, 0.0, smax) : 0.0;
    }
    return prior;
}

namespace detail {

struct SweepOutcome {
    MixturePrior prior;
    double max_param_change;
};

inline SweepOutcome ecm_sweep(std::span<const GeneObservation> data,
                              const MixturePrior& prior, double tau2_upper) {
    const ResponsibilityMatrix resp = e_step(data, prior);
    MixturePrior next;
    next.weights = cm_step_weights(resp);
    next.means = cm_step_means(data, resp, prior.variances);
    next.variances = cm_step_variances(data, resp, next.means, tau2_upper);
    double change = 0.0;
    for (int j = 0; j < 3; ++j) {
        change = std::max(change, std::abs(next.weights[j] - prior.weights[j]));
        change = std::max(change, std::abs(next.means[j] - prior.means[j]));
        change = std::max(change, std::abs(next.variances[j] - prior.variances[j]));
    }
    return {next, change};
}

struct RunOutcome {
    MixturePrior prior;
    double log_likelihood;
    int iterations;
    bool converged;
    std::vector<double> trace;
};

inline RunOutcome run_ecm(std::span<const GeneObservation> data, MixturePrior prior,
                          double tau2_upper, int max_iters, double tol) {
    RunOutcome out{prior, observed_log_likelihood(data, prior), 0, false, {}};
    out.trace.push_back(out.log_likelihood);
    for (int it = 0; it < max_iters; ++it) {
        auto [next, change] = ecm_sweep(data, prior, tau2_upper);
        prior = next;
        out.iterations = it + 1;
        out.log_likelihood = observed_log_likelihood(data, prior);
        out.trace.push_back(out.log_likelihood);
        if (change < tol) {
            out.converged = true;
            break;
        }
    }
    out.prior = prior;
    return out;
}

}  // namespace detail

/// Multi-start ECM fit: every start is screened for a limited number of
/// sweeps, the start with the highest observed log-likelihood is re-run from
/// its initialization to the final tolerance.
inline FitResult fit_prior(std::span<const GeneObservation> data,
                           const FitConfig& config = {}) {
    config.validate();
    if (data.size() < 3) throw ValidationError("fit requires at least 3 genes");
    const double tau2_upper =
        config.tau2_upper ? *config.tau2_upper : detail::max_sigma2(data);

    std::size_t best = 0;
    double best_ll = -std::numeric_limits<double>::infinity();
    for (std::size_t s = 0; s < config.starts.size(); ++s) {
        const MixturePrior init = initialize_prior(data, config.starts[s]);
        const auto probe = detail::run_ecm(data, init, tau2_upper,
                                           config.screening_iters, config.screening_tol);
        if (probe.log_likelihood > best_ll) {
            best_ll = probe.log_likelihood;
            best = s;
        }
    }

    const MixturePrior init = initialize_prior(data, config.starts[best]);
    const auto final_run = detail::run_ecm(data, init, tau2_upper,
                                           config.max_iters, config.final_tol);
    FitResult result;
    result.prior = final_run.prior;
    result.log_likelihood = final_run.log_likelihood;
    result.iterations = final_run.iterations;
    result.start_used = config.starts[best];
    result.converged = final_run.converged;
    result.trace = final_run.trace;
    return result;
}

}  // namespace equiv
