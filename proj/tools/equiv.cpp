// Command-line pipeline: simulate synthetic panels, fit the empirical-Bayes
// mixture prior, score genes by posterior probability of equivalence, rank
// with q-values, and run the numerical verification suites.
//
// Exit codes: 0 success, 1 validation error, 2 fit non-convergence,
// 3 verification failure.

#include <array>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "equiv/em.hpp"
#include "equiv/io.hpp"
#include "equiv/posterior.hpp"
#include "equiv/pvalue.hpp"
#include "equiv/qvalue.hpp"
#include "equiv/sim.hpp"
#include "equiv/verify.hpp"

namespace {

constexpr int kExitValidation = 1;
constexpr int kExitNonConvergence = 2;
constexpr int kExitVerifyFailure = 3;

std::ofstream open_out(const std::string& path) {
    std::ofstream out(path);
    if (!out) throw equiv::ValidationError("cannot open output file '" + path + "'");
    return out;
}

std::array<double, 3> parse_triple(const std::string& s, const std::string& what) {
    std::array<double, 3> out{};
    std::stringstream ss(s);
    std::string field;
    int k = 0;
    while (std::getline(ss, field, ',')) {
        if (k >= 3) throw equiv::ValidationError(what + ": expected three values");
        out[k++] = equiv::parse_number(field, what);
    }
    if (k != 3) throw equiv::ValidationError(what + ": expected three values");
    return out;
}

std::vector<std::array<double, 3>> parse_starts(const std::string& s) {
    std::vector<std::array<double, 3>> out;
    std::stringstream ss(s);
    std::string triple;
    while (std::getline(ss, triple, ';'))
        out.push_back(parse_triple(triple, "--starts"));
    if (out.empty()) throw equiv::ValidationError("--starts: no start triples given");
    return out;
}

int cmd_simulate(std::size_t m, std::uint64_t seed, double epsilon,
                 const std::string& pi, const std::string& mu, const std::string& tau2,
                 double sigma2_const, const std::string& sigma2_uniform,
                 const std::string& out_path, const std::string& truth_path) {
    equiv::SimScenario scn;
    scn.m = m;
    scn.seed = seed;
    scn.epsilon = epsilon;
    scn.prior = equiv::MixturePrior(parse_triple(pi, "--pi"), parse_triple(mu, "--mu"),
                                    parse_triple(tau2, "--tau2"));
    if (!sigma2_uniform.empty()) {
        std::stringstream ss(sigma2_uniform);
        std::string lo_s, hi_s;
        if (!std::getline(ss, lo_s, ',') || !std::getline(ss, hi_s, ','))
            throw equiv::ValidationError("--sigma2-uniform: expected lo,hi");
        scn.sigma2_law = equiv::Sigma2Law::uniform(
            equiv::parse_number(lo_s, "--sigma2-uniform"),
            equiv::parse_number(hi_s, "--sigma2-uniform"));
    } else {
        scn.sigma2_law = equiv::Sigma2Law::constant(sigma2_const);
    }
    const auto panel = equiv::simulate(scn);
    auto out = open_out(out_path);
    equiv::write_panel(out, panel.observations);
    if (!truth_path.empty()) {
        auto tout = open_out(truth_path);
        equiv::write_truth(tout, panel.observations, panel.truth);
    }
    return 0;
}

int cmd_fit(const std::string& in_path, const std::string& out_path,
            const equiv::FitConfig& config) {
    const auto panel = equiv::read_panel_file(in_path);
    if (panel.size() < 3)
        throw equiv::ValidationError("fit requires at least 3 genes, got " +
                                     std::to_string(panel.size()));
    const equiv::FitResult fit = equiv::fit_prior(panel, config);
    auto out = open_out(out_path);
    equiv::write_params(out, fit);
    if (!fit.converged) {
        std::cerr << "fit did not converge within " << config.max_iters
                  << " iterations\n";
        return kExitNonConvergence;
    }
    return 0;
}

int cmd_score(const std::string& in_path, const std::string& params_path,
              double epsilon, const std::string& out_path, int threads) {
    const auto panel = equiv::read_panel_file(in_path);
    if (panel.empty()) throw equiv::ValidationError("panel is empty");
    const equiv::FitResult params = equiv::read_params_file(params_path);
    const equiv::EquivalenceSpec spec(epsilon);

    std::vector<std::pair<std::string, double>> scored(panel.size());
    const int n_threads = std::max(1, threads);
    auto worker = [&](std::size_t begin, std::size_t end) {
        for (std::size_t i = begin; i < end; ++i)
            scored[i] = {panel[i].id, equiv::posterior_equivalence_probability(
                                          panel[i], params.prior, spec)};
    };
    if (n_threads == 1 || panel.size() < 64) {
        worker(0, panel.size());
    } else {
        std::vector<std::thread> pool;
        const std::size_t chunk = (panel.size() + n_threads - 1) / n_threads;
        for (int t = 0; t < n_threads; ++t) {
            const std::size_t begin = std::size_t(t) * chunk;
            if (begin >= panel.size()) break;
            pool.emplace_back(worker, begin, std::min(begin + chunk, panel.size()));
        }
        for (auto& th : pool) th.join();
    }
    auto out = open_out(out_path);
    equiv::write_qvalue_table(out, equiv::build_table(std::move(scored)));
    return 0;
}

int cmd_pvalue(const std::string& in_path, double epsilon, const std::string& out_path) {
    const auto panel = equiv::read_panel_file(in_path);
    const equiv::EquivalenceSpec spec(epsilon);
    auto out = open_out(out_path);
    out << "# warning: equivalence P-values are not a valid strength-of-evidence "
           "measure for equivalence; see README\n";
    out << "gene_id,p_value\n";
    for (const auto& g : panel) {
        const equiv::EstimateSummary est(g.y, std::sqrt(g.sigma2));
        out << g.id << ',' << equiv::format_number(equiv::equivalence_p_value(est, spec))
            << '\n';
    }
    return 0;
}

int cmd_verify(const std::string& out_dir, std::uint64_t seed, double epsilon,
               double ell) {
    std::filesystem::create_directories(out_dir);
    const equiv::EquivalenceSpec spec(epsilon, ell);
    nlohmann::json verdicts;
    bool all_ok = true;

    // P-value pathology curves (figure 1)
    const auto pathology = equiv::pathology_report(spec);
    {
        auto out = open_out(out_dir + "/figure1.csv");
        out << "theta_hat,se,p_value\n";
        for (int k = 0; k < 3; ++k)
            for (std::size_t i = 0; i < pathology.se_grid.size(); ++i)
                out << equiv::format_number(pathology.theta_hats[k]) << ','
                    << equiv::format_number(pathology.se_grid[i]) << ','
                    << equiv::format_number(pathology.curves[k][i]) << '\n';
    }
    verdicts["pathology"] = {
        {"witness_equal", pathology.witness_equal},
        {"interior_max", pathology.interior_max},
        {"interior_argmax", pathology.interior_argmax},
        {"interior_max_ok", pathology.interior_max_ok},
        {"tails_vanish", pathology.tails_vanish},
    };
    all_ok = all_ok && pathology.witness_equal && pathology.interior_max_ok &&
             pathology.tails_vanish;

    // Posterior equivalence curves under the reference prior (figure 3)
    {
        const auto prior = equiv::reference_prior();
        std::vector<double> grid;
        for (double s2 = 0.005; s2 <= 2.5 + 1e-12; s2 += 0.005) grid.push_back(s2);
        auto out = open_out(out_dir + "/figure3.csv");
        out << "y,sigma2,p_equiv\n";
        for (double y : {-3.5, -2.5, -1.5, -0.5, 0.0, 0.5, 1.5, 2.5, 3.5}) {
            for (const auto& [s2, p] : equiv::equivalence_curve(y, prior, spec, grid))
                out << equiv::format_number(y) << ',' << equiv::format_number(s2) << ','
                    << equiv::format_number(p) << '\n';
        }
    }

    // q-value vs posterior probability on a seeded synthetic panel (figure 4)
    {
        equiv::SimScenario scn;
        scn.m = 5000;
        scn.prior = equiv::reference_prior();
        scn.sigma2_law = equiv::Sigma2Law::uniform(0.005, 0.25);
        scn.seed = seed;
        scn.epsilon = epsilon;
        const auto panel = equiv::simulate(scn);
        std::vector<std::pair<std::string, double>> scored;
        scored.reserve(panel.observations.size());
        for (const auto& g : panel.observations)
            scored.emplace_back(g.id, equiv::posterior_equivalence_probability(
                                          g, scn.prior, equiv::EquivalenceSpec(epsilon)));
        const auto table = equiv::build_table(std::move(scored));
        auto out = open_out(out_dir + "/figure4.csv");
        out << "p_equiv,q_value\n";
        for (const auto& row : table.rows)
            out << equiv::format_number(row.p) << ',' << equiv::format_number(row.q_hat) << '\n';
    }

    // Weighted-second-moment inequality on stratified random tuples
    {
        equiv::GeneRng rng(seed, 1);
        auto u01 = [&] { return rng.next_uniform(); };
        auto normal_pdf = [](double x) { return equiv::normal_pdf(x); };
        int checked = 0, failed = 0;
        for (int want_case = 1; want_case <= 3; ++want_case) {
            for (int k = 0; k < 334; ++k) {
                const auto t = equiv::sample_lemma1_tuple(u01, ell, want_case);
                const auto res =
                    equiv::lemma1_check(normal_pdf, t.a, t.b, t.c, t.d, ell);
                ++checked;
                if (!res.holds) ++failed;
            }
        }
        verdicts["lemma1"] = {{"instances", checked}, {"failures", failed},
                              {"holds", failed == 0}};
        all_ok = all_ok && failed == 0;
    }

    // Monotonicity of the interval-conditioned equivalence probability
    {
        equiv::GeneRng rng(seed, 2);
        auto u01 = [&] { return rng.next_uniform(); };
        std::vector<double> grid;
        for (int k = 0; k < 20; ++k)
            grid.push_back(std::pow(10.0, -3.0 + 6.0 * k / 19.0));
        int failed = 0;
        const int n_priors = 200;
        for (int k = 0; k < n_priors; ++k) {
            const auto prior = equiv::sample_mixture_prior(u01, epsilon, ell);
            const auto sweep = equiv::theorem2_sweep(prior, spec, grid);
            if (!sweep.strictly_decreasing) ++failed;
        }
        verdicts["theorem2"] = {{"priors", n_priors}, {"failures", failed},
                                {"decreasing", failed == 0}};
        all_ok = all_ok && failed == 0;
    }

    {
        auto out = open_out(out_dir + "/verdicts.json");
        out << verdicts.dump(2) << '\n';
    }
    return all_ok ? 0 : kExitVerifyFailure;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Posterior-probability ranking of equivalence hypotheses"};
    app.require_subcommand(1);

    auto* sim = app.add_subcommand("simulate", "Generate a synthetic panel with known truth");
    std::size_t sim_m = 1000;
    std::uint64_t sim_seed = 0;
    double sim_eps = 1.0, sim_sigma2 = 0.01;
    std::string sim_pi = "0.33333333333333331,0.33333333333333331,0.33333333333333337";
    std::string sim_mu = "-1,0,1";
    std::string sim_tau2 = "0.25,0.25,0.25";
    std::string sim_sigma2_uniform, sim_out = "panel.csv", sim_truth;
    sim->add_option("--m", sim_m, "panel size");
    sim->add_option("--seed", sim_seed, "RNG seed");
    sim->add_option("--epsilon", sim_eps, "equivalence margin");
    sim->add_option("--pi", sim_pi, "prior weights a,b,c");
    sim->add_option("--mu", sim_mu, "prior means a,b,c");
    sim->add_option("--tau2", sim_tau2, "prior variances a,b,c");
    sim->add_option("--sigma2", sim_sigma2, "constant observation variance");
    sim->add_option("--sigma2-uniform", sim_sigma2_uniform,
                    "uniform observation variance law lo,hi");
    sim->add_option("--out", sim_out, "panel CSV output path");
    sim->add_option("--truth-out", sim_truth, "truth CSV output path");

    auto* fit = app.add_subcommand("fit", "Estimate the mixture prior by multi-start ECM");
    std::string fit_in, fit_out = "params.txt", fit_starts;
    equiv::FitConfig fit_config;
    fit->add_option("input", fit_in, "panel CSV")->required();
    fit->add_option("--out", fit_out, "parameter file output path");
    fit->add_option("--screening-iters", fit_config.screening_iters,
                    "sweeps per multi-start probe");
    fit->add_option("--tol-screen", fit_config.screening_tol, "screening tolerance");
    fit->add_option("--tol-final", fit_config.final_tol, "final tolerance");
    fit->add_option("--max-iters", fit_config.max_iters, "final-run sweep cap");
    fit->add_option("--starts", fit_starts,
                    "start weights, e.g. '0.8,0.1,0.1;0.1,0.8,0.1'");

    auto* score = app.add_subcommand("score", "Rank genes by posterior equivalence probability");
    std::string score_in, score_params, score_out = "qvalues.csv";
    double score_eps = 1.0;
    int score_threads = 1;
    score->add_option("input", score_in, "panel CSV")->required();
    score->add_option("--params", score_params, "fitted parameter file")->required();
    score->add_option("--epsilon", score_eps, "equivalence margin");
    score->add_option("--out", score_out, "ranked table output path");
    score->add_option("--threads", score_threads, "scoring threads");

    auto* pval = app.add_subcommand("pvalue", "Per-gene equivalence P-values (negative comparison)");
    std::string pval_in, pval_out = "pvalues.csv";
    double pval_eps = 1.0;
    pval->add_option("input", pval_in, "panel CSV")->required();
    pval->add_option("--epsilon", pval_eps, "equivalence margin");
    pval->add_option("--out", pval_out, "output path");

    auto* verify = app.add_subcommand("verify", "Run the numerical verification suites");
    std::string verify_dir = ".";
    std::uint64_t verify_seed = 20240101;
    double verify_eps = 1.0, verify_ell = 0.5;
    verify->add_option("--out-dir", verify_dir, "directory for figure CSVs and verdicts");
    verify->add_option("--seed", verify_seed, "RNG seed for randomized suites");
    verify->add_option("--epsilon", verify_eps, "equivalence margin");
    verify->add_option("--ell", verify_ell, "observation window half-width");

    CLI11_PARSE(app, argc, argv);

    try {
        if (sim->parsed())
            return cmd_simulate(sim_m, sim_seed, sim_eps, sim_pi, sim_mu, sim_tau2,
                                sim_sigma2, sim_sigma2_uniform, sim_out, sim_truth);
        if (fit->parsed()) {
            if (!fit_starts.empty()) fit_config.starts = parse_starts(fit_starts);
            return cmd_fit(fit_in, fit_out, fit_config);
        }
        if (score->parsed())
            return cmd_score(score_in, score_params, score_eps, score_out,
                             score_threads);
        if (pval->parsed()) return cmd_pvalue(pval_in, pval_eps, pval_out);
        if (verify->parsed())
            return cmd_verify(verify_dir, verify_seed, verify_eps, verify_ell);
    } catch (const equiv::ValidationError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitValidation;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitValidation;
    }
    return 0;
}
