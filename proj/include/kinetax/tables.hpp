#pragma once

// Reproduction of the reference scenario tables and the side-by-side report.

#include <cmath>
#include <ostream>
#include <string>
#include <vector>

#include "kinetax/calibration.hpp"
#include "kinetax/output.hpp"
#include "kinetax/presets.hpp"

namespace kinetax {

struct Comparison {
    std::string quantity; // e.g. "gini(sigma=2/56, xi=1.25)"
    double computed = 0.0;
    double reference = 0.0;
    double tolerance = 0.0;
    bool relative = false; // tolerance is relative to |reference|
    bool pass = false;

    double abs_dev() const { return std::abs(computed - reference); }
    double rel_dev() const { return reference != 0.0 ? abs_dev() / std::abs(reference) : INFINITY; }
};

inline Comparison compare_abs(std::string q, double computed, double reference, double tol) {
    Comparison c{std::move(q), computed, reference, tol, false, false};
    c.pass = c.abs_dev() <= tol;
    return c;
}

inline Comparison compare_rel(std::string q, double computed, double reference, double tol) {
    Comparison c{std::move(q), computed, reference, tol, true, false};
    c.pass = c.rel_dev() <= tol;
    return c;
}

struct TableReproduction {
    int scenario = 0;
    SweepTable sweep;
    SweepRow no_evasion;
    SweepRow no_audit;
    std::vector<Comparison> comparisons;
    bool all_converged = false;

    bool pass() const {
        if (!all_converged) return false;
        for (const auto& c : comparisons)
            if (!c.pass) return false;
        return true;
    }
};

inline std::string grid_label(double sigma, double xi) {
    return "sigma=" + std::to_string(static_cast<int>(std::lround(sigma * 56))) + "/56, xi=" + fmt9(xi);
}

/// Runs the 5x5 grid and both baselines for a scenario preset and compares with its reference table.
inline TableReproduction reproduce_table(int scenario, const IntegratorSettings& settings, std::size_t workers = 1) {
    const ScenarioPreset preset = scenario_preset(scenario);
    const ReferenceTable& ref = preset.reference;
    const ModelConfig model = scenario_model(scenario);
    const double mu = kTableMeanIncome;

    TableReproduction out;
    out.scenario = scenario;
    out.sweep = sweep(model, mu, ref.sigmas, ref.xis, settings, workers, preset.name);

    ModelConfig compliant = model;
    compliant.theta_ev.assign(model.m(), 1.0);
    out.no_evasion = solve_cell(compliant, mu, {0.0, 2.0}, settings);
    out.no_audit = solve_cell(model, mu, {0.0, 2.0}, settings);
    out.all_converged = out.sweep.fit_eligible() && out.no_evasion.converged && out.no_audit.converged;

    for (std::size_t i = 0; i < 5; ++i)
        for (std::size_t k = 0; k < 5; ++k) {
            const SweepRow& row = out.sweep.at(i, k);
            out.comparisons.push_back(compare_abs("gini(" + grid_label(row.sigma, row.xi) + ")", row.gini,
                                                  ref.gini[i][k], kGiniAbsTol));
        }
    for (std::size_t i = 0; i < 5; ++i)
        for (std::size_t k = 0; k < 5; ++k) {
            const SweepRow& row = out.sweep.at(i, k);
            out.comparisons.push_back(compare_rel("tax_revenue(" + grid_label(row.sigma, row.xi) + ")",
                                                  row.tax_revenue, ref.tax_revenue[i][k], kRevenueRelTol));
        }
    out.comparisons.push_back(compare_abs("gini(no evasion)", out.no_evasion.gini, ref.gini_no_evasion, kGiniAbsTol));
    out.comparisons.push_back(
        compare_rel("tax_revenue(no evasion)", out.no_evasion.tax_revenue, ref.tr_no_evasion, kRevenueRelTol));
    out.comparisons.push_back(compare_abs("gini(no audit)", out.no_audit.gini, ref.gini_no_audit, kGiniAbsTol));
    out.comparisons.push_back(
        compare_rel("tax_revenue(no audit)", out.no_audit.tax_revenue, ref.tr_no_audit, kRevenueRelTol));

    if (scenario == 1) {
        // Revenue gain of the strongest enforcement (sigma = 14/56, xi = 1.85) over no audits.
        const double gain = out.sweep.at(4, 4).tax_revenue / out.no_audit.tax_revenue - 1.0;
        Comparison c{"revenue_gain(sigma=14/56, xi=1.85 vs no audit)",
                     gain,
                     0.5 * (kAuditGainMin + kAuditGainMax),
                     0.5 * (kAuditGainMax - kAuditGainMin),
                     false,
                     gain >= kAuditGainMin && gain <= kAuditGainMax};
        out.comparisons.push_back(c);
    }
    return out;
}

inline void write_table_report(std::ostream& os, const TableReproduction& rep) {
    os << "# scenario " << rep.scenario << " (mean income " << fmt9(kTableMeanIncome) << ")\n";
    os << "quantity,computed,reference,abs_dev,rel_dev,tolerance,tolerance_kind,status\n";
    for (const auto& c : rep.comparisons)
        os << '"' << c.quantity << "\"," << fmt9(c.computed) << "," << fmt9(c.reference) << "," << fmt9(c.abs_dev())
           << "," << fmt9(c.rel_dev()) << "," << fmt9(c.tolerance) << "," << (c.relative ? "relative" : "absolute")
           << "," << (c.pass ? "PASS" : "FAIL") << "\n";
    os << "# converged: " << (rep.all_converged ? "yes" : "NO") << "\n";
    os << "# overall: " << (rep.pass() ? "PASS" : "FAIL") << "\n";
}

} // namespace kinetax
