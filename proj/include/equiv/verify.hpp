#pragma once

#include <array>
#include <cmath>
#include <functional>
#include <span>
#include <utility>
#include <vector>

#include "equiv/normal.hpp"
#include "equiv/pvalue.hpp"
#include "equiv/quadrature.hpp"
#include "equiv/util.hpp"

namespace equiv {

/// Prior on the true effect used by the interval-conditioned monotonicity
/// checks: a finite mixture of normals, a set of discrete atoms, or both.
/// Weights across components and atoms must sum to 1.
struct IntervalPrior {
    struct NormalComponent {
        double weight, mean, var;
    };
    struct Atom {
        double weight, location;
    };
    std::vector<NormalComponent> components;
    std::vector<Atom> atoms;

    void validate() const {
        double s = 0.0;
        for (const auto& c : components) {
            if (!(c.weight >= 0.0) || !(c.var > 0.0))
                throw ValidationError("interval prior: bad normal component");
            s += c.weight;
        }
        for (const auto& a : atoms) {
            if (!(a.weight >= 0.0))
                throw ValidationError("interval prior: bad atom weight");
            s += a.weight;
        }
        if (std::abs(s - 1.0) > 1e-9)
            throw ValidationError("interval prior weights must sum to 1");
    }

    double mass_inside(double eps) const {
        double p = 0.0;
        for (const auto& c : components)
            p += c.weight * normal_interval_mass(-eps, eps, c.mean, std::sqrt(c.var));
        for (const auto& a : atoms)
            if (std::abs(a.location) < eps) p += a.weight;
        return p;
    }
};

struct Lemma1Result {
    double lhs = 0.0;
    double rhs = 0.0;
    bool holds = false;
};

/// Weighted-second-moment comparison for a symmetric positive density f:
///   int_a^b x^2 f / int_a^b f  <  int_c^d x^2 f / int_c^d f
/// under the hypotheses -ell < a < b < ell, 0 < c, ell < d, b - a = d - c.
inline Lemma1Result lemma1_check(const std::function<double(double)>& f,
                                 double a, double b, double c, double d,
                                 double ell, double quad_tol = 1e-10) {
    if (!(-ell < a && a < b && b < ell))
        throw ValidationError("lemma1: need -ell < a < b < ell");
    if (!(c > 0.0) || !(d > ell))
        throw ValidationError("lemma1: need 0 < c and ell < d");
    if (std::abs((b - a) - (d - c)) > 1e-12)
        throw ValidationError("lemma1: need b - a = d - c");
    auto x2f = [&](double x) { return x * x * f(x); };
    Lemma1Result res;
    res.lhs = integrate(x2f, a, b, quad_tol) / integrate(f, a, b, quad_tol);
    res.rhs = integrate(x2f, c, d, quad_tol) / integrate(f, c, d, quad_tol);
    res.holds = res.lhs < res.rhs;
    return res;
}

namespace detail {

// P(-ell < T < ell | theta) with T | theta ~ N(theta, sigma^2).
inline double window_probability(double theta, double ell, double sigma) {
    const double a = (ell - theta) / sigma;
    const double b = (-ell - theta) / sigma;
    const double width = a - b;  // 2 ell / sigma
    if (width > 0.01) return normal_cdf(a) - normal_cdf(b);
    // Narrow window: the CDF difference cancels to ~width relative accuracy,
    // which is noise the adaptive quadrature then chases without converging.
    // Integrate the density across [b, a] by composite Simpson instead; the
    // panel count keeps the step below the density's local variation scale
    // for ~1e-14 relative error.
    const double z = std::max(std::abs(a), std::abs(b));
    const int n = 1 + int(width * (1.0 + z) / 2e-3);
    const double h = width / n;
    double sum = 0.0;
    for (int k = 0; k < n; ++k) {
        const double lo = b + k * h;
        sum += (h / 6.0) * (normal_pdf(lo) + 4.0 * normal_pdf(lo + 0.5 * h) +
                            normal_pdf(lo + h));
    }
    return sum;
}

}  // namespace detail

/// Conditional probability P(-eps < theta < eps | -ell < T < ell) where
/// T | theta ~ N(theta, sigma2), for any window half-width ell > 0 (a very
/// large ell makes the conditioning uninformative and recovers the prior
/// mass inside (-eps, eps)).  Atoms are evaluated exactly; normal components
/// use the closed window probability inside a quadrature over theta,
/// truncated at +-10 component standard deviations.
inline double interval_conditioned_probability(const IntervalPrior& prior, double eps,
                                               double ell, double sigma2,
                                               double quad_tol = 1e-12) {
    prior.validate();
    if (!(eps > 0.0) || !(ell > 0.0))
        throw ValidationError("need positive eps and ell");
    if (!(sigma2 > 0.0)) throw ValidationError("sigma2 must be positive");
    const double inside_mass = prior.mass_inside(eps);
    if (!(inside_mass > 0.0) || !(inside_mass < 1.0))
        throw ValidationError("prior must place mass both inside and outside (-eps, eps)");

    const double sigma = std::sqrt(sigma2);
    // The denominator P(-ell < T < ell) is available in closed form: atoms
    // directly, normal components as the component convolved with the
    // observation noise.  It is computed first because it also sets the
    // quadrature tolerance: the conditional's error is (numerator error) /
    // denominator, so each component integral only needs absolute accuracy
    // quad_tol * denominator.  A tolerance relative to the component's own
    // (possibly astronomically small) contribution would spend unbounded
    // effort on terms that cannot move the result.
    double denominator = 0.0;
    for (const auto& a : prior.atoms)
        denominator += a.weight * detail::window_probability(a.location, ell, sigma);
    for (const auto& comp : prior.components)
        denominator += comp.weight * normal_interval_mass(
                           -ell, ell, comp.mean, std::sqrt(comp.var + sigma2));
    if (!(denominator > 0.0))
        throw ValidationError("conditioning event has zero probability");

    const std::size_t n_terms = prior.atoms.size() + prior.components.size();
    const double tol_abs =
        std::max(quad_tol * denominator / double(n_terms), 1e-300);

    double numerator = 0.0;
    for (const auto& a : prior.atoms) {
        if (a.weight == 0.0 || std::abs(a.location) >= eps) continue;
        numerator += a.weight * detail::window_probability(a.location, ell, sigma);
    }
    for (const auto& comp : prior.components) {
        if (comp.weight == 0.0) continue;
        const double sd = std::sqrt(comp.var);
        auto integrand = [&](double theta) {
            return normal_density(theta, comp.mean, comp.var) *
                   detail::window_probability(theta, ell, sigma);
        };
        const double lo = std::max(-eps, comp.mean - 10.0 * sd);
        const double hi = std::min(eps, comp.mean + 10.0 * sd);
        if (lo < hi)
            numerator +=
                comp.weight * integrate(integrand, lo, hi,
                                        tol_abs / std::max(comp.weight, 1e-12));
    }
    // quadrature noise can push the ratio marginally past the sharp bounds
    return std::clamp(numerator / denominator, 0.0, 1.0);
}

/// The theorem-statement form: requires spec.ell (so 0 < ell < eps holds).
inline double theorem2_posterior(const IntervalPrior& prior, const EquivalenceSpec& spec,
                                 double sigma2, double quad_tol = 1e-12) {
    if (!spec.ell)
        throw ValidationError("theorem2_posterior requires a window half-width ell");
    return interval_conditioned_probability(prior, spec.epsilon, *spec.ell, sigma2,
                                            quad_tol);
}

struct SweepResult {
    std::vector<std::pair<double, double>> points;  // (sigma2, probability)
    bool strictly_decreasing = false;
};

/// Evaluates the conditional equivalence probability over an ascending
/// sigma2 grid; the verdict allows 1e-10 equality slack on each step.
inline SweepResult theorem2_sweep(const IntervalPrior& prior, const EquivalenceSpec& spec,
                                  std::span<const double> sigma2_grid) {
    if (sigma2_grid.empty()) throw ValidationError("sigma2 grid must be nonempty");
    SweepResult res;
    res.points.reserve(sigma2_grid.size());
    for (std::size_t k = 0; k < sigma2_grid.size(); ++k) {
        if (k > 0 && !(sigma2_grid[k] > sigma2_grid[k - 1]))
            throw ValidationError("sigma2 grid must be sorted ascending");
        res.points.emplace_back(sigma2_grid[k],
                                theorem2_posterior(prior, spec, sigma2_grid[k]));
    }
    res.strictly_decreasing = true;
    for (std::size_t k = 1; k < res.points.size(); ++k) {
        if (res.points[k].second > res.points[k - 1].second + 1e-10) {
            res.strictly_decreasing = false;
            break;
        }
    }
    return res;
}

/// Figure data demonstrating why the equivalence P-value fails as an
/// evidence measure: three P-value-vs-SE curves, the equal-P witness pair,
/// and the vanishing tail, with machine-checkable verdicts.
struct PathologyReport {
    std::vector<double> se_grid;
    std::array<double, 3> theta_hats{0.5, 1.0, 2.0};
    std::array<std::vector<double>, 3> curves;
    double witness_se_low = 0.3;
    double witness_se_high = 8.28224;
    double witness_p_low = 0.0;
    double witness_p_high = 0.0;
    double interior_max = 0.0;  // max of the theta_hat = 0.5 curve
    double interior_argmax = 0.0;
    bool witness_equal = false;      // |p(0.3) - p(8.28224)| < 5e-5
    bool interior_max_ok = false;    // interior max within 0.24 +- 0.01
    // The P-value decays like 2|theta_hat| phi(0) / SE, so only the
    // theta_hat = 0.5 curve is below 0.01 by the end of the default grid;
    // the verdict additionally requires every curve to have decayed to less
    // than half its quarter-grid value (the 1/SE decay gives ~0.25 there).
    bool tails_vanish = false;
};

inline PathologyReport pathology_report(const EquivalenceSpec& spec,
                                        double se_max = 40.0, double se_step = 0.005) {
    PathologyReport rep;
    for (double se = se_step; se <= se_max + 0.5 * se_step; se += se_step)
        rep.se_grid.push_back(se);
    for (int k = 0; k < 3; ++k) {
        rep.curves[k].reserve(rep.se_grid.size());
        for (double se : rep.se_grid)
            rep.curves[k].push_back(
                equivalence_p_value(EstimateSummary(rep.theta_hats[k], se), spec));
    }
    rep.witness_p_low =
        equivalence_p_value(EstimateSummary(rep.theta_hats[0], rep.witness_se_low), spec);
    rep.witness_p_high =
        equivalence_p_value(EstimateSummary(rep.theta_hats[0], rep.witness_se_high), spec);
    for (std::size_t i = 0; i < rep.se_grid.size(); ++i) {
        if (rep.curves[0][i] > rep.interior_max) {
            rep.interior_max = rep.curves[0][i];
            rep.interior_argmax = rep.se_grid[i];
        }
    }
    rep.witness_equal = std::abs(rep.witness_p_low - rep.witness_p_high) < 5e-5;
    rep.interior_max_ok = std::abs(rep.interior_max - 0.24) <= 0.01;
    rep.tails_vanish = rep.curves[0].back() < 0.01;
    const std::size_t quarter = rep.se_grid.size() / 4;
    for (int k = 0; k < 3; ++k)
        if (rep.curves[k].back() >= 0.5 * rep.curves[k][quarter]) rep.tails_vanish = false;
    return rep;
}

/// A hypothesis-satisfying interval tuple for lemma1_check, tagged with the
/// proof case it exercises: 1 for b <= c, 2 for c < b with |a| <= c, 3 for
/// c < b with |a| > c.
struct Lemma1Tuple {
    double a = 0.0, b = 0.0, c = 0.0, d = 0.0;
    int proof_case = 0;
};

/// Rejection-samples a tuple satisfying -ell < a < b < ell, 0 < c, ell < d,
/// b - a = d - c, stratified to the requested proof case (0 = any).
/// uniform01 is any callable returning U(0,1) draws.
template <class Rng>
Lemma1Tuple sample_lemma1_tuple(Rng&& uniform01, double ell, int want_case = 0) {
    for (int tries = 0; tries < 100000; ++tries) {
        const double b = -ell + 2.0 * ell * uniform01();
        const double a = -ell + (b + ell) * uniform01();
        const double w = b - a;
        if (w < 0.01) continue;
        const double c = 1e-3 + (3.0 * ell - 1e-3) * uniform01();
        const double d = c + w;
        if (d <= ell + 1e-6) continue;
        Lemma1Tuple t{a, b, c, d, 0};
        if (b <= c) t.proof_case = 1;
        else if (std::abs(a) <= c) t.proof_case = 2;
        else t.proof_case = 3;
        if (want_case == 0 || t.proof_case == want_case) return t;
    }
    throw ValidationError("failed to sample a lemma1 tuple for the requested case");
}

/// Random mixture-of-normals prior with mass strictly inside and strictly
/// outside (-eps, eps), component means kept away from the +-eps and +-ell
/// boundaries so small-noise limits are sharp.
template <class Rng>
IntervalPrior sample_mixture_prior(Rng&& uniform01, double eps, double ell) {
    IntervalPrior prior;
    const int extra = uniform01() < 0.5 ? 1 : 0;
    std::vector<IntervalPrior::NormalComponent> comps;
    // one component centred inside the window
    comps.push_back({0.0, (uniform01() - 0.5) * 1.2 * ell,
                     std::pow(0.05 + 0.25 * uniform01(), 2)});
    // one component well outside the margin
    const double sign = uniform01() < 0.5 ? -1.0 : 1.0;
    comps.push_back({0.0, sign * (1.5 * eps + 1.5 * eps * uniform01()),
                     std::pow(0.05 + 0.45 * uniform01(), 2)});
    for (int k = 0; k < extra; ++k) {
        double mean;
        do {
            mean = (uniform01() - 0.5) * 6.0 * eps;
        } while (std::abs(std::abs(mean) - eps) < 0.1 ||
                 std::abs(std::abs(mean) - ell) < 0.1);
        comps.push_back({0.0, mean, std::pow(0.05 + 0.5 * uniform01(), 2)});
    }
    double total = 0.0;
    for (auto& c : comps) {
        c.weight = 0.1 + uniform01();
        total += c.weight;
    }
    for (auto& c : comps) c.weight /= total;
    prior.components = std::move(comps);
    return prior;
}

}  // namespace equiv
