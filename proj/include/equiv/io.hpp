#pragma once

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>
#include <span>
#include <sstream>
#include <string>
#include <unordered_set>
#include <vector>

#include "equiv/em.hpp"
#include "equiv/mixture.hpp"
#include "equiv/qvalue.hpp"
#include "equiv/sim.hpp"
#include "equiv/util.hpp"

namespace equiv {

namespace detail {

// Locale-independent formatting with enough digits for 6+ significant
// figures; %.17g is used where exact round-trip matters.
inline std::string fmt(double v, const char* spec = "%.10g") {
    char buf[64];
    std::snprintf(buf, sizeof buf, spec, v);
    return buf;
}

inline double parse_double(const std::string& s, std::size_t line_no) {
    char* end = nullptr;
    const double v = std::strtod(s.c_str(), &end);
    if (end == s.c_str() || *end != '\0')
        throw ValidationError("line " + std::to_string(line_no) +
                              ": malformed number '" + s + "'");
    return v;
}

inline std::vector<std::string> split_csv(const std::string& line) {
    std::vector<std::string> out;
    std::string field;
    std::stringstream ss(line);
    while (std::getline(ss, field, ',')) out.push_back(field);
    if (!line.empty() && line.back() == ',') out.emplace_back();
    return out;
}

}  // namespace detail

/// Locale-independent number formatting for CSV output (>= 6 significant
/// digits).
inline std::string format_number(double v) { return detail::fmt(v); }

inline double parse_number(const std::string& s, const std::string& what) {
    char* end = nullptr;
    const double v = std::strtod(s.c_str(), &end);
    if (end == s.c_str() || *end != '\0')
        throw ValidationError(what + ": malformed number '" + s + "'");
    return v;
}

inline constexpr const char* kPanelHeader = "gene_id,mean_log_ratio,variance";
inline constexpr const char* kPanelHeaderSpot = "gene_id,mean_log_ratio,variance,spot_type";

inline std::vector<GeneObservation> read_panel(std::istream& in) {
    std::string line;
    if (!std::getline(in, line))
        throw ValidationError("line 1: missing panel header");
    if (!line.empty() && line.back() == '\r') line.pop_back();
    bool has_spot;
    if (line == kPanelHeader) has_spot = false;
    else if (line == kPanelHeaderSpot) has_spot = true;
    else throw ValidationError("line 1: unexpected panel header '" + line + "'");

    std::vector<GeneObservation> panel;
    std::unordered_set<std::string> seen;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        const auto fields = detail::split_csv(line);
        const std::size_t expect = has_spot ? 4 : 3;
        if (fields.size() != expect)
            throw ValidationError("line " + std::to_string(line_no) + ": expected " +
                                  std::to_string(expect) + " fields, got " +
                                  std::to_string(fields.size()));
        if (fields[0].empty())
            throw ValidationError("line " + std::to_string(line_no) + ": empty gene_id");
        if (!seen.insert(fields[0]).second)
            throw ValidationError("line " + std::to_string(line_no) +
                                  ": duplicate gene_id '" + fields[0] + "'");
        const double y = detail::parse_double(fields[1], line_no);
        const double s2 = detail::parse_double(fields[2], line_no);
        if (!(s2 > 0.0))
            throw ValidationError("line " + std::to_string(line_no) +
                                  ": variance must be positive");
        panel.emplace_back(fields[0], y, s2, has_spot ? fields[3] : std::string{});
    }
    return panel;
}

inline std::vector<GeneObservation> read_panel_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ValidationError("cannot open panel file '" + path + "'");
    return read_panel(in);
}

inline void write_panel(std::ostream& out, std::span<const GeneObservation> panel) {
    bool has_spot = false;
    for (const auto& g : panel)
        if (!g.spot_type.empty()) has_spot = true;
    out << (has_spot ? kPanelHeaderSpot : kPanelHeader) << '\n';
    for (const auto& g : panel) {
        out << g.id << ',' << detail::fmt(g.y, "%.17g") << ','
            << detail::fmt(g.sigma2, "%.17g");
        if (has_spot) out << ',' << g.spot_type;
        out << '\n';
    }
}

inline void write_truth(std::ostream& out, std::span<const GeneObservation> panel,
                        std::span<const SimTruth> truth) {
    out << "gene_id,theta,equivalent\n";
    for (std::size_t i = 0; i < panel.size(); ++i)
        out << panel[i].id << ',' << detail::fmt(truth[i].theta, "%.17g") << ','
            << (truth[i].equivalent ? 1 : 0) << '\n';
}

inline void write_qvalue_table(std::ostream& out, const QValueTable& table) {
    out << "gene_id,p_equiv,q_value\n";
    for (const auto& row : table.rows)
        out << row.id << ',' << detail::fmt(row.p) << ',' << detail::fmt(row.q_hat)
            << '\n';
}

inline void write_params(std::ostream& out, const FitResult& fit) {
    static const char* pi_keys[] = {"pi1", "pi2", "pi3"};
    static const char* mu_keys[] = {"mu1", "mu2", "mu3"};
    static const char* tau_keys[] = {"tau2_1", "tau2_2", "tau2_3"};
    for (int j = 0; j < 3; ++j)
        out << pi_keys[j] << '=' << detail::fmt(fit.prior.weights[j], "%.17g") << '\n';
    for (int j = 0; j < 3; ++j)
        out << mu_keys[j] << '=' << detail::fmt(fit.prior.means[j], "%.17g") << '\n';
    for (int j = 0; j < 3; ++j)
        out << tau_keys[j] << '=' << detail::fmt(fit.prior.variances[j], "%.17g") << '\n';
    out << "loglik=" << detail::fmt(fit.log_likelihood, "%.17g") << '\n';
    out << "converged=" << (fit.converged ? 1 : 0) << '\n';
    out << "iterations=" << fit.iterations << '\n';
    for (int j = 0; j < 3; ++j)
        out << "start_pi" << (j + 1) << '='
            << detail::fmt(fit.start_used[j], "%.17g") << '\n';
}

inline FitResult read_params(std::istream& in) {
    std::map<std::string, std::string> kv;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty() || line[0] == '#') continue;
        const auto pos = line.find('=');
        if (pos == std::string::npos)
            throw ValidationError("line " + std::to_string(line_no) +
                                  ": expected key=value");
        kv[line.substr(0, pos)] = line.substr(pos + 1);
    }
    auto need = [&](const std::string& key) -> double {
        auto it = kv.find(key);
        if (it == kv.end())
            throw ValidationError("parameter file missing key '" + key + "'");
        return detail::parse_double(it->second, 0);
    };
    FitResult fit;
    fit.prior = MixturePrior({need("pi1"), need("pi2"), need("pi3")},
                             {need("mu1"), need("mu2"), need("mu3")},
                             {need("tau2_1"), need("tau2_2"), need("tau2_3")});
    fit.log_likelihood = kv.count("loglik") ? need("loglik") : 0.0;
    fit.converged = kv.count("converged") ? need("converged") != 0.0 : true;
    fit.iterations = kv.count("iterations") ? int(need("iterations")) : 0;
    for (int j = 0; j < 3; ++j) {
        const std::string key = "start_pi" + std::to_string(j + 1);
        fit.start_used[j] = kv.count(key) ? need(key) : 0.0;
    }
    return fit;
}

inline FitResult read_params_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ValidationError("cannot open parameter file '" + path + "'");
    return read_params(in);
}

}  // namespace equiv
