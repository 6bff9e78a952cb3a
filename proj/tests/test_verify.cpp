#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>
#include <vector>

#include "equiv/mixture.hpp"
#include "equiv/verify.hpp"

using equiv::EquivalenceSpec;
using equiv::IntervalPrior;

namespace {

double std_normal(double x) { return equiv::normal_pdf(x); }

// symmetric bimodal density
double bimodal(double x) {
    return 0.5 * equiv::normal_density(x, -1.0, 0.2) +
           0.5 * equiv::normal_density(x, 1.0, 0.2);
}

IntervalPrior two_atom_prior() {
    IntervalPrior prior;
    prior.atoms = {{0.5, 0.0}, {0.5, 2.0}};
    return prior;
}

}  // namespace

TEST_CASE("weighted second-moment comparison: closed uniform case") {
    auto flat = [](double) { return 1.0; };
    const auto res = equiv::lemma1_check(flat, -0.1, 0.1, 0.6, 0.8, 0.5);
    CHECK(res.lhs == Catch::Approx(0.01 / 3.0).margin(1e-10));
    CHECK(res.rhs == Catch::Approx(0.296 / 0.6).margin(1e-10));
    CHECK(res.holds);
}

TEST_CASE("weighted second-moment comparison: normal example") {
    const auto res = equiv::lemma1_check(std_normal, -0.2, 0.4, 0.6, 1.2, 0.5);
    CHECK(res.holds);
    CHECK(res.lhs < res.rhs);
}

TEST_CASE("weighted second-moment comparison across all three proof cases") {
    std::mt19937_64 rng(33);
    std::uniform_real_distribution<double> u01(0.0, 1.0);
    auto u = [&] { return u01(rng); };
    const double ell = 0.5;
    for (int want = 1; want <= 3; ++want) {
        for (int k = 0; k < 40; ++k) {
            const auto t = equiv::sample_lemma1_tuple(u, ell, want);
            CHECK(t.proof_case == want);
            CHECK(-ell < t.a);
            CHECK(t.a < t.b);
            CHECK(t.b < ell);
            CHECK(t.c > 0.0);
            CHECK(t.d > ell);
            CHECK(std::abs((t.b - t.a) - (t.d - t.c)) < 1e-12);
            const auto r1 = equiv::lemma1_check(std_normal, t.a, t.b, t.c, t.d, ell);
            CHECK(r1.holds);
            const auto r2 = equiv::lemma1_check(bimodal, t.a, t.b, t.c, t.d, ell);
            CHECK(r2.holds);
        }
    }
}

TEST_CASE("hypothesis violations are rejected") {
    CHECK_THROWS_AS(equiv::lemma1_check(std_normal, 0.4, -0.2, 0.6, 1.2, 0.5),
                    equiv::ValidationError);
    CHECK_THROWS_AS(equiv::lemma1_check(std_normal, -0.2, 0.6, 0.6, 1.4, 0.5),
                    equiv::ValidationError);
    CHECK_THROWS_AS(equiv::lemma1_check(std_normal, -0.2, 0.4, -0.1, 0.5, 0.5),
                    equiv::ValidationError);
    CHECK_THROWS_AS(equiv::lemma1_check(std_normal, -0.2, 0.4, 0.6, 1.0, 0.5),
                    equiv::ValidationError);  // unequal widths
    CHECK_THROWS_AS(equiv::lemma1_check(std_normal, -0.2, 0.4, 0.1, 0.7, 1.0),
                    equiv::ValidationError);  // d <= ell
}

TEST_CASE("interval-conditioned probability: two-atom limits") {
    const auto prior = two_atom_prior();
    // tiny noise: only the inside atom can land the statistic in the window
    CHECK(equiv::interval_conditioned_probability(prior, 1.0, 0.5, 1e-4) ==
          Catch::Approx(1.0).margin(1e-12));
    // huge noise: the window probability no longer depends on theta
    CHECK(equiv::interval_conditioned_probability(prior, 1.0, 0.5, 1e8) ==
          Catch::Approx(0.5).margin(1e-4));
}

TEST_CASE("interval-conditioned probability decreases in sigma2 for atoms") {
    const auto prior = two_atom_prior();
    const EquivalenceSpec spec(1.0, 0.5);
    std::vector<double> grid;
    for (int k = -30; k <= 30; ++k) grid.push_back(std::pow(10.0, k / 10.0));
    const auto sweep = equiv::theorem2_sweep(prior, spec, grid);
    CHECK(sweep.strictly_decreasing);
    CHECK(sweep.points.front().second > 0.999);
    CHECK(sweep.points.back().second < 0.51);
}

TEST_CASE("interval-conditioned probability decreases for mixture priors") {
    std::mt19937_64 rng(44);
    std::uniform_real_distribution<double> u01(0.0, 1.0);
    auto u = [&] { return u01(rng); };
    std::vector<double> grid;
    for (int k = -12; k <= 12; ++k) grid.push_back(std::pow(10.0, k / 4.0));
    for (int rep = 0; rep < 25; ++rep) {
        const auto prior = equiv::sample_mixture_prior(u, 1.0, 0.5);
        const auto sweep = equiv::theorem2_sweep(prior, EquivalenceSpec(1.0, 0.5), grid);
        CHECK(sweep.strictly_decreasing);
    }
}

TEST_CASE("empirical-prior components satisfy the monotone decrease") {
    const auto mix = equiv::reference_prior();
    IntervalPrior prior;
    for (int j = 0; j < 3; ++j) {
        if (mix.variances[j] > 1e-8)
            prior.components.push_back({mix.weights[j], mix.means[j], mix.variances[j]});
        else
            prior.atoms.push_back({mix.weights[j], mix.means[j]});
    }
    std::vector<double> grid;
    for (int k = -12; k <= 12; ++k) grid.push_back(std::pow(10.0, k / 4.0));
    const auto sweep = equiv::theorem2_sweep(prior, EquivalenceSpec(1.0, 0.5), grid);
    CHECK(sweep.strictly_decreasing);
}

TEST_CASE("an uninformative window recovers the prior mass") {
    std::mt19937_64 rng(55);
    std::uniform_real_distribution<double> u01(0.0, 1.0);
    auto u = [&] { return u01(rng); };
    for (int rep = 0; rep < 10; ++rep) {
        const auto prior = equiv::sample_mixture_prior(u, 1.0, 0.5);
        CHECK(equiv::interval_conditioned_probability(prior, 1.0, 100.0, 0.5) ==
              Catch::Approx(prior.mass_inside(1.0)).margin(1e-8));
    }
}

TEST_CASE("conditional probability is stable under quadrature refinement") {
    std::mt19937_64 rng(66);
    std::uniform_real_distribution<double> u01(0.0, 1.0);
    auto u = [&] { return u01(rng); };
    const auto prior = equiv::sample_mixture_prior(u, 1.0, 0.5);
    const double coarse =
        equiv::interval_conditioned_probability(prior, 1.0, 0.5, 0.7, 1e-8);
    const double fine =
        equiv::interval_conditioned_probability(prior, 1.0, 0.5, 0.7, 1e-12);
    CHECK(std::abs(coarse - fine) < 1e-7);
}

TEST_CASE("conditional probability validation") {
    const auto prior = two_atom_prior();
    CHECK_THROWS_AS(equiv::interval_conditioned_probability(prior, 1.0, 0.5, 0.0),
                    equiv::ValidationError);
    CHECK_THROWS_AS(equiv::interval_conditioned_probability(prior, -1.0, 0.5, 1.0),
                    equiv::ValidationError);
    IntervalPrior all_inside;
    all_inside.atoms = {{1.0, 0.0}};
    CHECK_THROWS_AS(equiv::interval_conditioned_probability(all_inside, 1.0, 0.5, 1.0),
                    equiv::ValidationError);
    CHECK_THROWS_AS(equiv::theorem2_posterior(prior, EquivalenceSpec(1.0), 1.0),
                    equiv::ValidationError);  // no window half-width set
    std::vector<double> bad_grid{1.0, 0.5};
    CHECK_THROWS_AS(equiv::theorem2_sweep(prior, EquivalenceSpec(1.0, 0.5), bad_grid),
                    equiv::ValidationError);
}

TEST_CASE("pathology report: curves, witnesses, verdicts") {
    const auto rep = equiv::pathology_report(EquivalenceSpec(1.0));
    CHECK(rep.witness_equal);
    CHECK(rep.witness_p_low == Catch::Approx(0.04779).margin(5e-5));
    CHECK(rep.witness_p_high == Catch::Approx(rep.witness_p_low).margin(5e-5));
    CHECK(rep.interior_max_ok);
    CHECK(rep.interior_max == Catch::Approx(0.24).margin(0.01));
    CHECK(rep.interior_argmax > 0.5);
    CHECK(rep.interior_argmax < 3.0);
    CHECK(rep.tails_vanish);
    REQUIRE(rep.se_grid.size() == rep.curves[0].size());
    // theta_hat = 2 sits outside the margin, so its curve starts near 1 and
    // still decays to nothing: small P-values arise from noise alone
    CHECK(rep.curves[2].front() == Catch::Approx(1.0).margin(1e-9));
    CHECK(rep.curves[2].back() < 0.05);  // decays like 2*2*phi(0)/40
    CHECK(rep.curves[0].back() < 0.01);
    // theta_hat = 1 is exactly on the margin: P = 1/2 at vanishing SE
    CHECK(rep.curves[1].front() == Catch::Approx(0.5).margin(1e-9));
}
