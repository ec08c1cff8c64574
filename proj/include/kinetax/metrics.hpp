#pragma once

#include <algorithm>
#include <cstddef>
#include <span>
#include <utility>
#include <vector>

#include "kinetax/errors.hpp"
#include "kinetax/kinetic_core.hpp"
#include "kinetax/model.hpp"

namespace kinetax {

struct LorenzPoint {
    double population = 0.0; // cumulative population share
    double income = 0.0;     // cumulative income share
};

using LorenzCurve = std::vector<LorenzPoint>;

struct MetricsReport {
    double gini = 0.0;
    double tax_revenue = 0.0;
    std::vector<double> sector_mean_income;
    EnforcementParams enforcement; // (sigma, xi) used for the revenue
};

/// Lorenz curve over income classes (sectors aggregated), classes with no mass skipped.
inline LorenzCurve lorenz(const PopulationState& x, std::span<const double> r) {
    if (r.size() != x.n()) throw StateError("lorenz: class count does not match the incomes");
    double mass = 0.0, income = 0.0;
    for (std::size_t j = 0; j < x.n(); ++j) {
        mass += x.class_mass(j);
        income += r[j] * x.class_mass(j);
    }
    if (!(mass > 0.0) || !(income > 0.0)) throw StateError("lorenz: distribution has zero total income");

    LorenzCurve curve{{0.0, 0.0}};
    double cum_mass = 0.0, cum_income = 0.0;
    for (std::size_t j = 0; j < x.n(); ++j) {
        const double y = x.class_mass(j);
        if (y <= 0.0) continue;
        cum_mass += y;
        cum_income += r[j] * y;
        curve.push_back({cum_mass / mass, cum_income / income});
    }
    curve.back() = {1.0, 1.0};
    return curve;
}

/// One minus twice the trapezoidal area under the Lorenz polyline.
inline double gini(const LorenzCurve& curve) {
    double area = 0.0;
    for (std::size_t i = 1; i < curve.size(); ++i)
        area += 0.5 * (curve[i].population - curve[i - 1].population) * (curve[i].income + curve[i - 1].income);
    return std::clamp(1.0 - 2.0 * area, 0.0, 1.0);
}

inline double gini(const PopulationState& x, std::span<const double> r) { return gini(lorenz(x, r)); }

/// Tax collected per unit time:
/// sum_{h,k,c} S p(h,k) (theta(k,c) + sigma xi (tau_k - theta(k,c))) X_h x_k^c * sum_{j<n} X_j,
/// with X_i the mass of class i.
inline double tax_revenue(const PopulationState& x, const TransitionTensors& t, const EnforcementParams& e) {
    e.validate();
    if (x.n() != t.n || x.m() != t.m) throw StateError("tax_revenue: state dimensions do not match the model");
    const std::size_t n = t.n, m = t.m;
    const Matrix& theta = t.theta();

    double eligible = 0.0;
    for (std::size_t j = 0; j + 1 < n; ++j) eligible += x.class_mass(j);

    double tr = 0.0;
    for (std::size_t h = 0; h < n; ++h) {
        const double payer = x.class_mass(h);
        for (std::size_t k = 0; k < n; ++k)
            for (std::size_t c = 0; c < m; ++c) {
                const double rate = theta(k, c) + e.sigma * e.xi * (t.tau[k] - theta(k, c));
                tr += t.S * t.p(h, k) * rate * payer * x(k, c);
            }
    }
    return tr * eligible;
}

/// Mean income of each sector: sum_j r_j x_j^a / sum_j x_j^a.
inline std::vector<double> sector_mean_income(const PopulationState& x, std::span<const double> r) {
    if (r.size() != x.n()) throw StateError("sector_mean_income: class count does not match the incomes");
    std::vector<double> out(x.m());
    for (std::size_t a = 0; a < x.m(); ++a) {
        double mass = 0.0, income = 0.0;
        for (std::size_t j = 0; j < x.n(); ++j) {
            mass += x(j, a);
            income += r[j] * x(j, a);
        }
        if (!(mass > 0.0)) throw StateError("sector_mean_income: sector " + std::to_string(a) + " is empty");
        out[a] = income / mass;
    }
    return out;
}

inline MetricsReport compute_metrics(const PopulationState& x, const TransitionTensors& t,
                                     const EnforcementParams& e) {
    return {gini(x, t.r), tax_revenue(x, t, e), sector_mean_income(x, t.r), e};
}

} // namespace kinetax
