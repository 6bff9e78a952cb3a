#pragma once

#include <algorithm>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "equiv/util.hpp"

namespace equiv {

/// q-value estimate at cutoff t: mean of (1 - p_i) over the discovery set
/// {i : p_i >= t}.
inline double q_value_at(double t, std::span<const double> ps) {
    double sum = 0.0;
    std::size_t count = 0;
    for (double p : ps) {
        if (p >= t) {
            sum += 1.0 - p;
            ++count;
        }
    }
    if (count == 0)
        throw ValidationError("empty discovery set at cutoff t");
    return sum / double(count);
}

struct QValueRow {
    std::string id;
    double p = 0.0;      // posterior probability of equivalence
    double q_hat = 0.0;  // estimated q-value at the achieved cutoff p
};

/// Genes ranked by posterior equivalence probability (descending) with the
/// q-value estimate at each achieved cutoff; tied p share a q_hat.
struct QValueTable {
    std::vector<QValueRow> rows;
};

inline QValueTable build_table(std::vector<std::pair<std::string, double>> scored) {
    if (scored.empty()) throw ValidationError("cannot rank an empty panel");
    std::sort(scored.begin(), scored.end(), [](const auto& a, const auto& b) {
        if (a.second != b.second) return a.second > b.second;
        return a.first < b.first;  // stable, deterministic output
    });
    QValueTable table;
    table.rows.resize(scored.size());
    double prefix = 0.0;
    std::size_t group_start = 0;
    for (std::size_t k = 0; k < scored.size(); ++k) {
        prefix += 1.0 - scored[k].second;
        table.rows[k].id = scored[k].first;
        table.rows[k].p = scored[k].second;
        const bool group_ends =
            k + 1 == scored.size() || scored[k + 1].second != scored[k].second;
        if (group_ends) {
            const double q = prefix / double(k + 1);
            for (std::size_t i = group_start; i <= k; ++i) table.rows[i].q_hat = q;
            group_start = k + 1;
        }
    }
    return table;
}

}  // namespace equiv
