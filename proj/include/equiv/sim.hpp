#pragma once

#include <cmath>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "equiv/mixture.hpp"
#include "equiv/posterior.hpp"
#include "equiv/qvalue.hpp"
#include "equiv/util.hpp"

namespace equiv {

/// splitmix64: a documented, counter-friendly generator.  Each gene gets an
/// independent stream keyed by (seed, gene index), so panels are
/// reproducible bit-for-bit regardless of evaluation order.
class GeneRng {
public:
    GeneRng(std::uint64_t seed, std::uint64_t index)
        : state_(mix(seed + 0x9E3779B97F4A7C15ULL * (index + 1))) {}

    std::uint64_t next_u64() {
        state_ += 0x9E3779B97F4A7C15ULL;
        return mix(state_);
    }

    /// Uniform on (0, 1].
    double next_uniform() {
        return (double(next_u64() >> 11) + 1.0) * 0x1.0p-53;
    }

    /// Standard normal via Box-Muller (one draw per call; the cosine and
    /// sine branches alternate deterministically).
    double next_normal() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        const double u1 = next_uniform();
        const double u2 = next_uniform();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double a = 2.0 * M_PI * u2;
        spare_ = r * std::sin(a);
        have_spare_ = true;
        return r * std::cos(a);
    }

private:
    static std::uint64_t mix(std::uint64_t z) {
        z ^= z >> 30;
        z *= 0xBF58476D1CE4E5B9ULL;
        z ^= z >> 27;
        z *= 0x94D049BB133111EBULL;
        z ^= z >> 31;
        return z;
    }
    std::uint64_t state_;
    double spare_ = 0.0;
    bool have_spare_ = false;
};

/// Per-gene observation-variance law.
struct Sigma2Law {
    enum class Kind { Constant, Uniform, Empirical };
    Kind kind = Kind::Constant;
    double value = 0.01;        // Constant
    double lo = 0.0, hi = 0.0;  // Uniform
    std::vector<double> pool;   // Empirical: sampled with replacement

    static Sigma2Law constant(double v) {
        if (!(v > 0.0)) throw ValidationError("sigma2 must be positive");
        return {Kind::Constant, v, 0.0, 0.0, {}};
    }
    static Sigma2Law uniform(double lo, double hi) {
        if (!(0.0 < lo && lo <= hi))
            throw ValidationError("need 0 < lo <= hi for uniform sigma2 law");
        return {Kind::Uniform, 0.0, lo, hi, {}};
    }
    static Sigma2Law empirical(std::vector<double> values) {
        if (values.empty()) throw ValidationError("empirical sigma2 pool is empty");
        for (double v : values)
            if (!(v > 0.0)) throw ValidationError("sigma2 pool entries must be positive");
        return {Kind::Empirical, 0.0, 0.0, 0.0, std::move(values)};
    }

    double draw(GeneRng& rng) const {
        switch (kind) {
            case Kind::Constant: return value;
            case Kind::Uniform: return lo + (hi - lo) * rng.next_uniform();
            case Kind::Empirical:
                return pool[std::size_t(rng.next_u64() % pool.size())];
        }
        return value;
    }
};

struct SimScenario {
    std::size_t m = 1000;
    MixturePrior prior;
    Sigma2Law sigma2_law = Sigma2Law::constant(0.01);
    std::uint64_t seed = 0;
    double epsilon = 1.0;
};

struct SimTruth {
    double theta = 0.0;
    bool equivalent = false;  // |theta| < epsilon
};

struct SimulatedPanel {
    std::vector<GeneObservation> observations;
    std::vector<SimTruth> truth;
};

/// Generative draw of the joint model: component j ~ weights,
/// theta ~ N(mu_j, tau2_j), sigma2 ~ law, y ~ N(theta, sigma2).
inline SimulatedPanel simulate(const SimScenario& scn) {
    if (scn.m < 1) throw ValidationError("panel size must be at least 1");
    scn.prior.validate();
    if (!(scn.epsilon > 0.0)) throw ValidationError("epsilon must be positive");
    SimulatedPanel panel;
    panel.observations.reserve(scn.m);
    panel.truth.reserve(scn.m);
    for (std::size_t i = 0; i < scn.m; ++i) {
        GeneRng rng(scn.seed, i);
        const double u = rng.next_uniform();
        int j = 0;
        double acc = scn.prior.weights[0];
        while (j < 2 && u > acc) acc += scn.prior.weights[++j];
        const double tau = std::sqrt(scn.prior.variances[j]);
        const double theta = scn.prior.means[j] + tau * rng.next_normal();
        const double sigma2 = scn.sigma2_law.draw(rng);
        const double y = theta + std::sqrt(sigma2) * rng.next_normal();
        panel.observations.emplace_back("g" + std::to_string(i + 1), y, sigma2);
        panel.truth.push_back({theta, std::abs(theta) < scn.epsilon});
    }
    return panel;
}

struct CalibrationRow {
    double t = 0.0;
    double q_hat = 0.0;
    double fdp = 0.0;  // realized false-discovery proportion
    std::size_t discoveries = 0;
};

/// Scores a simulated panel and compares the q-value estimate with the
/// realized false-discovery proportion at each threshold.  Scoring uses the
/// true prior unless an (e.g. fitted) override is supplied.  Thresholds with
/// empty discovery sets are omitted.
inline std::vector<CalibrationRow> calibration_experiment(
    const SimScenario& scn, std::span<const double> thresholds,
    const MixturePrior* scoring_prior = nullptr) {
    const SimulatedPanel panel = simulate(scn);
    const MixturePrior& prior = scoring_prior ? *scoring_prior : scn.prior;
    const EquivalenceSpec spec(scn.epsilon);
    std::vector<double> ps(panel.observations.size());
    for (std::size_t i = 0; i < panel.observations.size(); ++i)
        ps[i] = posterior_equivalence_probability(panel.observations[i], prior, spec);

    std::vector<CalibrationRow> rows;
    for (double t : thresholds) {
        CalibrationRow row;
        row.t = t;
        double fd = 0.0, sum_q = 0.0;
        for (std::size_t i = 0; i < ps.size(); ++i) {
            if (ps[i] >= t) {
                ++row.discoveries;
                sum_q += 1.0 - ps[i];
                if (!panel.truth[i].equivalent) fd += 1.0;
            }
        }
        if (row.discoveries == 0) continue;
        row.q_hat = sum_q / double(row.discoveries);
        row.fdp = fd / double(row.discoveries);
        rows.push_back(row);
    }
    return rows;
}

}  // namespace equiv
