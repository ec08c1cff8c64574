#pragma once

// File formats: trajectory / sweep / Lorenz CSV, equilibrium / fit JSON.
// Every number is written with 9 significant digits.

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "kinetax/calibration.hpp"
#include "kinetax/dynamics.hpp"
#include "kinetax/errors.hpp"
#include "kinetax/metrics.hpp"

namespace kinetax {

inline std::string fmt9(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.9g", v);
    return buf;
}

/// v rounded to 9 significant digits, so JSON serialization prints at most 9.
inline double round9(double v) { return std::strtod(fmt9(v).c_str(), nullptr); }

inline void write_trajectory_csv(std::ostream& os, const Trajectory& traj) {
    if (traj.states.empty()) return;
    const std::size_t n = traj.states.front().n(), m = traj.states.front().m();
    os << "t";
    for (std::size_t j = 1; j <= n; ++j)
        for (std::size_t a = 1; a <= m; ++a) os << ",x_" << j << "_" << a;
    os << "\n";
    for (std::size_t i = 0; i < traj.states.size(); ++i) {
        os << fmt9(traj.times[i]);
        for (double v : traj.states[i].values()) os << "," << fmt9(v);
        os << "\n";
    }
}

inline void write_lorenz_csv(std::ostream& os, const LorenzCurve& curve) {
    os << "population_share,income_share\n";
    for (const auto& p : curve) os << fmt9(p.population) << "," << fmt9(p.income) << "\n";
}

inline nlohmann::ordered_json equilibrium_json(double mu, const EnforcementParams& e, const EquilibriumResult& eq,
                                               const MetricsReport& metrics) {
    nlohmann::ordered_json j;
    j["mu"] = round9(mu);
    j["sigma"] = round9(e.sigma);
    j["xi"] = round9(e.xi);
    j["converged"] = eq.converged;
    j["t_final"] = round9(eq.t_final);
    j["residual"] = round9(eq.residual);
    auto& st = j["state"] = nlohmann::ordered_json::array();
    for (double v : eq.state.values()) st.push_back(round9(v));
    j["gini"] = round9(metrics.gini);
    j["tax_revenue"] = round9(metrics.tax_revenue);
    auto& sm = j["sector_mean_income"] = nlohmann::ordered_json::array();
    for (double v : metrics.sector_mean_income) sm.push_back(round9(v));
    return j;
}

inline constexpr const char* kSweepHeader = "sigma,xi,gini,tax_revenue,converged,residual";

inline void write_sweep_csv(std::ostream& os, const SweepTable& table) {
    os << kSweepHeader << "\n";
    for (const auto& r : table.rows)
        os << fmt9(r.sigma) << "," << fmt9(r.xi) << "," << fmt9(r.gini) << "," << fmt9(r.tax_revenue) << ","
           << (r.converged ? "true" : "false") << "," << fmt9(r.residual) << "\n";
}

namespace detail {

inline std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> out;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) {
        while (!cell.empty() && (cell.back() == '\r' || cell.back() == ' ')) cell.pop_back();
        while (!cell.empty() && cell.front() == ' ') cell.erase(cell.begin());
        out.push_back(cell);
    }
    return out;
}

inline double parse_double(const std::string& s, std::size_t line, const std::string& column) {
    char* end = nullptr;
    const double v = std::strtod(s.c_str(), &end);
    if (s.empty() || end != s.c_str() + s.size())
        throw ConfigError("sweep csv line " + std::to_string(line) + ": bad " + column + " value '" + s + "'");
    return v;
}

} // namespace detail

/// Reads a sweep CSV. Columns other than sigma and xi may be absent; an absent
/// `converged` column counts as converged (externally supplied tables).
inline SweepTable read_sweep_csv(std::istream& is) {
    std::string line;
    if (!std::getline(is, line)) throw ConfigError("sweep csv: empty input");
    const auto header = detail::split_csv_line(line);
    auto col = [&](const std::string& name) -> long {
        for (std::size_t i = 0; i < header.size(); ++i)
            if (header[i] == name) return static_cast<long>(i);
        return -1;
    };
    const long cs = col("sigma"), cx = col("xi"), cg = col("gini"), ct = col("tax_revenue"), cc = col("converged"),
               cr = col("residual");
    if (cs < 0 || cx < 0) throw ConfigError("sweep csv: header must contain sigma and xi");

    SweepTable table;
    std::vector<double> sig, xis;
    std::size_t lineno = 1;
    while (std::getline(is, line)) {
        ++lineno;
        if (line.empty() || line == "\r") continue;
        const auto cells = detail::split_csv_line(line);
        if (cells.size() != header.size())
            throw ConfigError("sweep csv line " + std::to_string(lineno) + ": expected " +
                              std::to_string(header.size()) + " columns");
        SweepRow row;
        row.sigma = detail::parse_double(cells[static_cast<std::size_t>(cs)], lineno, "sigma");
        row.xi = detail::parse_double(cells[static_cast<std::size_t>(cx)], lineno, "xi");
        if (cg >= 0) row.gini = detail::parse_double(cells[static_cast<std::size_t>(cg)], lineno, "gini");
        if (ct >= 0) row.tax_revenue = detail::parse_double(cells[static_cast<std::size_t>(ct)], lineno, "tax_revenue");
        row.converged = true;
        if (cc >= 0) {
            const auto& v = cells[static_cast<std::size_t>(cc)];
            if (v == "true" || v == "1") row.converged = true;
            else if (v == "false" || v == "0") row.converged = false;
            else throw ConfigError("sweep csv line " + std::to_string(lineno) + ": bad converged value '" + v + "'");
        }
        if (cr >= 0) row.residual = detail::parse_double(cells[static_cast<std::size_t>(cr)], lineno, "residual");
        sig.push_back(row.sigma);
        xis.push_back(row.xi);
        table.rows.push_back(row);
    }
    table.sigmas = sorted_unique(sig);
    table.xis = sorted_unique(xis);
    return table;
}

inline nlohmann::ordered_json fit_json(const FitCoefficients& f) {
    nlohmann::ordered_json j;
    j["metric"] = f.metric;
    j["a0"] = round9(f.a0);
    j["a10"] = round9(f.a10);
    j["a01"] = round9(f.a01);
    j["a11"] = round9(f.a11);
    j["fit_residual_max"] = round9(f.fit_residual_max);
    return j;
}

inline FitCoefficients parse_fit_json(const nlohmann::json& j) {
    FitCoefficients f;
    try {
        f.metric = j.at("metric").get<std::string>();
        f.a0 = j.at("a0").get<double>();
        f.a10 = j.at("a10").get<double>();
        f.a01 = j.at("a01").get<double>();
        f.a11 = j.at("a11").get<double>();
        f.fit_residual_max = j.value("fit_residual_max", 0.0);
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("fit json: ") + e.what());
    }
    return f;
}

} // namespace kinetax
