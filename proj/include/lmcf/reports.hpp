#pragma once

#include <ostream>
#include <sstream>
#include <string>

#include <nlohmann/json.hpp>

#include "lmcf/estimates.hpp"
#include "lmcf/liouville.hpp"

namespace lmcf {

inline nlohmann::json point_json(const Point& x, int dim) {
    nlohmann::json a = nlohmann::json::array();
    for (int k = 0; k < dim; ++k) a.push_back(x[static_cast<std::size_t>(k)]);
    return a;
}

// JSON has no inf/nan; such margins (e.g. an empty scan) are written as null.
inline nlohmann::json finite_or_null(double v) { return std::isfinite(v) ? nlohmann::json(v) : nlohmann::json(nullptr); }

inline nlohmann::json to_json(const EstimateReport& r, int dim) {
    nlohmann::json hyp = nlohmann::json::array();
    for (const auto& h : r.hypothesis_log) hyp.push_back({{"description", h.description}, {"satisfied", h.satisfied}});
    nlohmann::json details = nlohmann::json::object();
    for (const auto& [k, v] : r.details) details[k] = finite_or_null(v);
    return {{"name", r.check_name},
            {"status", to_string(r.status)},
            {"margin", finite_or_null(r.worst_margin)},
            {"location", {{"node", r.worst_location.node}, {"x", point_json(r.worst_location.x, dim)}, {"t", r.worst_location.t}}},
            {"tolerance", r.tolerance_used},
            {"hypothesis_log", hyp},
            {"details", details}};
}

inline const char* csv_header() { return "check,status,margin,tolerance,node,t"; }

inline std::string csv_row(const EstimateReport& r) {
    std::ostringstream os;
    os.precision(17);
    os << r.check_name << ',' << to_string(r.status) << ',' << r.worst_margin << ',' << r.tolerance_used << ','
       << r.worst_location.node << ',' << r.worst_location.t;
    return os.str();
}

inline nlohmann::json to_json(const GrowthReport& g) {
    return {{"R0", g.R0}, {"threshold", g.threshold}, {"times", g.times}, {"ratios", g.ratios}};
}

/// Columns t, ratio, threshold.
inline void write_growth_csv(const GrowthReport& g, std::ostream& os) {
    os.precision(17);
    os << "t,ratio,threshold\n";
    for (std::size_t k = 0; k < g.ratios.size(); ++k) os << g.times[k] << ',' << g.ratios[k] << ',' << g.threshold << '\n';
}

inline nlohmann::json to_json(const QuadraticFit& f) {
    const int n = f.A.dim;
    nlohmann::json A = nlohmann::json::array();
    for (int i = 0; i < n; ++i) {
        nlohmann::json row = nlohmann::json::array();
        for (int j = 0; j < n; ++j) row.push_back(f.A(i, j));
        A.push_back(row);
    }
    return {{"A", A}, {"linear", point_json(f.linear, n)}, {"constant", f.constant}, {"residual_sup", f.residual_sup}};
}

inline nlohmann::json to_json(const MainConstants& c) {
    return {{"n", c.n},
            {"gamma", c.gamma},
            {"alpha", c.alpha},
            {"K", c.K},
            {"C_hb", c.C_hb},
            {"C_printed", c.C_printed},
            {"gamma_below_0.61_over_n", c.gamma_below_limit}};
}

}  // namespace lmcf
