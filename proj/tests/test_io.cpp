#include <catch2/catch_amalgamated.hpp>

#include <sstream>
#include <string>

#include "equiv/io.hpp"

using equiv::GeneObservation;

TEST_CASE("panel round trip preserves every bit") {
    std::vector<GeneObservation> panel{
        {"YFL039C", 0.123456789012345678, 0.0412},
        {"YDR224C", -1.5e-7, 3.0},
        {"ctrl-1", 0.0, 1e-9},
    };
    std::stringstream buf;
    equiv::write_panel(buf, panel);
    const auto back = equiv::read_panel(buf);
    REQUIRE(back.size() == panel.size());
    for (std::size_t i = 0; i < panel.size(); ++i) {
        CHECK(back[i].id == panel[i].id);
        CHECK(back[i].y == panel[i].y);
        CHECK(back[i].sigma2 == panel[i].sigma2);
        CHECK(back[i].spot_type.empty());
    }
}

TEST_CASE("spot_type column round trips when present") {
    std::vector<GeneObservation> panel{
        {"g1", 0.5, 0.1, "gene"},
        {"g2", -0.5, 0.2, "control"},
    };
    std::stringstream buf;
    equiv::write_panel(buf, panel);
    CHECK(buf.str().rfind("gene_id,mean_log_ratio,variance,spot_type\n", 0) == 0);
    const auto back = equiv::read_panel(buf);
    REQUIRE(back.size() == 2);
    CHECK(back[0].spot_type == "gene");
    CHECK(back[1].spot_type == "control");
}

TEST_CASE("reader accepts CRLF and blank lines") {
    std::stringstream in(
        "gene_id,mean_log_ratio,variance\r\n"
        "g1,0.25,0.04\r\n"
        "\r\n"
        "g2,-0.5,0.09\n");
    const auto panel = equiv::read_panel(in);
    REQUIRE(panel.size() == 2);
    CHECK(panel[0].y == 0.25);
    CHECK(panel[1].sigma2 == 0.09);
}

TEST_CASE("reader errors carry line numbers") {
    auto expect_error = [](const std::string& text, const std::string& needle) {
        std::stringstream in(text);
        try {
            equiv::read_panel(in);
            FAIL("expected a parse error");
        } catch (const equiv::ValidationError& e) {
            CHECK(std::string(e.what()).find(needle) != std::string::npos);
        }
    };
    expect_error("", "line 1");
    expect_error("bad,header\n", "line 1");
    expect_error("gene_id,mean_log_ratio,variance\ng1,0.5\n", "line 2");
    expect_error("gene_id,mean_log_ratio,variance\ng1,abc,0.5\n", "malformed number");
    expect_error("gene_id,mean_log_ratio,variance\ng1,0.5,0.1\ng1,0.6,0.1\n",
                 "duplicate gene_id");
    expect_error("gene_id,mean_log_ratio,variance\ng1,0.5,0.1\ng2,0.6,-0.1\n",
                 "line 3");
    expect_error("gene_id,mean_log_ratio,variance\ng1,0.5,0\n",
                 "variance must be positive");
    expect_error("gene_id,mean_log_ratio,variance\n,0.5,0.1\n", "empty gene_id");
}

TEST_CASE("q-value table serialization") {
    equiv::QValueTable table;
    table.rows = {{"g2", 0.95, 0.05}, {"g1", 0.4, 0.325}};
    std::stringstream out;
    equiv::write_qvalue_table(out, table);
    CHECK(out.str() ==
          "gene_id,p_equiv,q_value\n"
          "g2,0.95,0.05\n"
          "g1,0.4,0.325\n");
}

TEST_CASE("parameter file round trip") {
    equiv::FitResult fit;
    fit.prior = equiv::reference_prior();
    fit.log_likelihood = -1234.56789012345;
    fit.converged = true;
    fit.iterations = 321;
    fit.start_used = {0.8, 0.1, 0.1};
    std::stringstream buf;
    equiv::write_params(buf, fit);
    const auto back = equiv::read_params(buf);
    for (int j = 0; j < 3; ++j) {
        CHECK(back.prior.weights[j] == fit.prior.weights[j]);
        CHECK(back.prior.means[j] == fit.prior.means[j]);
        CHECK(back.prior.variances[j] == fit.prior.variances[j]);
        CHECK(back.start_used[j] == fit.start_used[j]);
    }
    CHECK(back.log_likelihood == fit.log_likelihood);
    CHECK(back.converged == fit.converged);
    CHECK(back.iterations == fit.iterations);
}

TEST_CASE("parameter reader tolerates comments and missing optional keys") {
    std::stringstream in(
        "# fitted prior\n"
        "pi1=0.2\npi2=0.3\npi3=0.5\n"
        "mu1=-1\nmu2=0\nmu3=1\n"
        "tau2_1=0.1\ntau2_2=0.2\ntau2_3=0.3\n");
    const auto fit = equiv::read_params(in);
    CHECK(fit.prior.weights[2] == 0.5);
    CHECK(fit.converged);
    CHECK(fit.iterations == 0);
}

TEST_CASE("parameter reader rejects malformed input") {
    std::stringstream missing("pi1=0.2\npi2=0.3\n");
    CHECK_THROWS_AS(equiv::read_params(missing), equiv::ValidationError);
    std::stringstream noequals("pi1 0.2\n");
    CHECK_THROWS_AS(equiv::read_params(noequals), equiv::ValidationError);
    std::stringstream badsum(
        "pi1=0.2\npi2=0.3\npi3=0.9\n"
        "mu1=-1\nmu2=0\nmu3=1\n"
        "tau2_1=0.1\ntau2_2=0.2\ntau2_3=0.3\n");
    CHECK_THROWS_AS(equiv::read_params(badsum), equiv::ValidationError);
}

TEST_CASE("missing files raise descriptive errors") {
    CHECK_THROWS_AS(equiv::read_panel_file("/nonexistent/panel.csv"),
                    equiv::ValidationError);
    CHECK_THROWS_AS(equiv::read_params_file("/nonexistent/params.txt"),
                    equiv::ValidationError);
}

TEST_CASE("truth table serialization") {
    std::vector<GeneObservation> panel{{"g1", 0.5, 0.1}, {"g2", 1.5, 0.1}};
    std::vector<equiv::SimTruth> truth{{0.25, true}, {1.75, false}};
    std::stringstream out;
    equiv::write_truth(out, panel, truth);
    CHECK(out.str() ==
          "gene_id,theta,equivalent\n"
          "g1,0.25,1\n"
          "g2,1.75,0\n");
}

TEST_CASE("number formatting keeps at least six significant digits") {
    CHECK(equiv::format_number(0.123456789) == "0.123456789");
    CHECK(equiv::format_number(1.0) == "1");
    CHECK(equiv::parse_number("3.5e-2", "x") == 0.035);
    CHECK_THROWS_AS(equiv::parse_number("zzz", "x"), equiv::ValidationError);
}
