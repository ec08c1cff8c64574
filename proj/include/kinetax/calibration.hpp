#pragma once

#include <algorithm>
#include <array>
#include <atomic>
#include <cmath>
#include <cstddef>
#include <exception>
#include <mutex>
#include <optional>
#include <span>
#include <string>
#include <thread>
#include <vector>

#include "kinetax/dynamics.hpp"
#include "kinetax/errors.hpp"
#include "kinetax/kinetic_core.hpp"
#include "kinetax/metrics.hpp"
#include "kinetax/model.hpp"

namespace kinetax {

enum class Metric { gini, tax_revenue };

inline std::string metric_name(Metric m) { return m == Metric::gini ? "gini" : "tax_revenue"; }

inline Metric parse_metric(const std::string& s) {
    if (s == "gini") return Metric::gini;
    if (s == "tr" || s == "tax_revenue") return Metric::tax_revenue;
    throw ConfigError("unknown metric '" + s + "' (expected gini or tr)");
}

struct SweepRow {
    double sigma = 0.0;
    double xi = 0.0;
    double gini = 0.0;
    double tax_revenue = 0.0;
    bool converged = false;
    double residual = 0.0;

    double value(Metric m) const { return m == Metric::gini ? gini : tax_revenue; }
};

/// Results over a (sigma, xi) grid, rows in sigma-major order.
struct SweepTable {
    std::string scenario;
    std::vector<double> sigmas;
    std::vector<double> xis;
    std::vector<SweepRow> rows;

    bool fit_eligible() const {
        return !rows.empty() && std::all_of(rows.begin(), rows.end(), [](const SweepRow& r) { return r.converged; });
    }

    /// Row for grid cell (i, k) = (sigmas[i], xis[k]); valid for tables produced by sweep().
    const SweepRow& at(std::size_t i, std::size_t k) const { return rows.at(i * xis.size() + k); }
};

inline std::vector<double> sorted_unique(std::vector<double> v) {
    std::sort(v.begin(), v.end());
    v.erase(std::unique(v.begin(), v.end()), v.end());
    return v;
}

/// Steady state and metrics for one enforcement setting, from the standard initial condition.
inline SweepRow solve_cell(const ModelConfig& config, double mu, const EnforcementParams& e,
                           const IntegratorSettings& settings) {
    const TransitionTensors t = build_tensors(config, e);
    const EquilibriumResult eq = find_steady_state(make_audit_system(t, e), make_initial_condition(config, mu), settings);
    return {e.sigma, e.xi, gini(eq.state, t.r), tax_revenue(eq.state, t, e), eq.converged, eq.residual};
}

/// Runs every grid cell to equilibrium. Cells are independent; up to `workers`
/// threads process them and the table is assembled in grid order.
inline SweepTable sweep(const ModelConfig& config, double mu, std::span<const double> sigma_list,
                        std::span<const double> xi_list, const IntegratorSettings& settings,
                        std::size_t workers = 1, std::string scenario = {}) {
    if (sigma_list.empty()) throw ConfigError("sweep: empty sigma list");
    if (xi_list.empty()) throw ConfigError("sweep: empty xi list");
    config.validate();
    settings.validate();

    SweepTable table;
    table.scenario = std::move(scenario);
    table.sigmas = sorted_unique({sigma_list.begin(), sigma_list.end()});
    table.xis = sorted_unique({xi_list.begin(), xi_list.end()});
    for (double s : table.sigmas)
        for (double x : table.xis) EnforcementParams{s, x}.validate();

    const std::size_t cells = table.sigmas.size() * table.xis.size();
    table.rows.resize(cells);
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    auto work = [&] {
        for (std::size_t c = next++; c < cells; c = next++) {
            try {
                const EnforcementParams e{table.sigmas[c / table.xis.size()], table.xis[c % table.xis.size()]};
                table.rows[c] = solve_cell(config, mu, e, settings);
            } catch (...) {
                std::lock_guard lock(failure_mutex);
                if (!failure) failure = std::current_exception();
            }
        }
    };
    const std::size_t nthreads = std::clamp<std::size_t>(workers, 1, cells);
    if (nthreads == 1) {
        work();
    } else {
        std::vector<std::jthread> pool;
        for (std::size_t i = 0; i < nthreads; ++i) pool.emplace_back(work);
    }
    if (failure) std::rethrow_exception(failure);
    return table;
}

// ---------------------------------------------------------------------------
// Least squares

struct Sample {
    double sigma = 0.0;
    double xi = 0.0;
    double value = 0.0;
};

inline std::vector<Sample> samples(const SweepTable& table, Metric metric) {
    std::vector<Sample> out;
    out.reserve(table.rows.size());
    for (const auto& r : table.rows) out.push_back({r.sigma, r.xi, r.value(metric)});
    return out;
}

/// Reassigns each cell (sigma_i, xi_k) to (sigma_k, xi_i): the grid read with its axes swapped.
/// Needs a square grid.
inline std::vector<Sample> transposed_samples(const SweepTable& table, Metric metric) {
    if (table.sigmas.size() != table.xis.size()) throw FitError("transposed grid: sigma and xi counts differ");
    std::vector<Sample> out;
    for (const auto& r : table.rows) {
        const auto i = static_cast<std::size_t>(
            std::find(table.sigmas.begin(), table.sigmas.end(), r.sigma) - table.sigmas.begin());
        const auto k =
            static_cast<std::size_t>(std::find(table.xis.begin(), table.xis.end(), r.xi) - table.xis.begin());
        if (i >= table.sigmas.size() || k >= table.xis.size()) throw FitError("transposed grid: row off the grid");
        out.push_back({table.sigmas[k], table.xis[i], r.value(metric)});
    }
    return out;
}

namespace detail {

/// Solves the symmetric system A c = b by Gaussian elimination with partial pivoting.
/// A pivot below 1e-12 of the largest diagonal entry means the design is rank deficient.
template <std::size_t N>
std::array<double, N> solve_normal_equations(std::array<std::array<double, N>, N> a, std::array<double, N> b) {
    double scale = 0.0;
    for (std::size_t i = 0; i < N; ++i) scale = std::max(scale, std::abs(a[i][i]));
    if (!(scale > 0.0)) throw FitError("least squares: empty design");

    for (std::size_t col = 0; col < N; ++col) {
        std::size_t piv = col;
        for (std::size_t i = col + 1; i < N; ++i)
            if (std::abs(a[i][col]) > std::abs(a[piv][col])) piv = i;
        if (std::abs(a[piv][col]) <= 1e-12 * scale) throw FitError("least squares: rank-deficient design");
        std::swap(a[piv], a[col]);
        std::swap(b[piv], b[col]);
        for (std::size_t i = col + 1; i < N; ++i) {
            const double f = a[i][col] / a[col][col];
            for (std::size_t j = col; j < N; ++j) a[i][j] -= f * a[col][j];
            b[i] -= f * b[col];
        }
    }
    std::array<double, N> c{};
    for (std::size_t i = N; i-- > 0;) {
        double v = b[i];
        for (std::size_t j = i + 1; j < N; ++j) v -= a[i][j] * c[j];
        c[i] = v / a[i][i];
    }
    return c;
}

template <std::size_t N, typename Basis>
std::array<double, N> least_squares(std::span<const Sample> data, Basis basis) {
    std::array<std::array<double, N>, N> ata{};
    std::array<double, N> atb{};
    for (const auto& s : data) {
        const std::array<double, N> phi = basis(s.xi, s.sigma);
        for (std::size_t i = 0; i < N; ++i) {
            for (std::size_t j = 0; j < N; ++j) ata[i][j] += phi[i] * phi[j];
            atb[i] += phi[i] * s.value;
        }
    }
    return solve_normal_equations<N>(ata, atb);
}

inline std::array<double, 4> bilinear_basis(double xi, double sigma) { return {1.0, xi, sigma, xi * sigma}; }

inline std::array<double, 6> quadratic_basis(double xi, double sigma) {
    return {1.0, xi, sigma, xi * sigma, xi * xi, sigma * sigma};
}

} // namespace detail

/// f(xi, sigma) = a0 + a10 xi + a01 sigma + a11 xi sigma.
struct FitCoefficients {
    std::string metric;
    double a0 = 0.0;
    double a10 = 0.0;
    double a01 = 0.0;
    double a11 = 0.0;
    double fit_residual_max = 0.0;

    double operator()(double xi, double sigma) const { return a0 + a10 * xi + a01 * sigma + a11 * xi * sigma; }
};

/// Bilinear + xi^2 + sigma^2 surface, used only to check that curvature is negligible.
struct QuadraticFit {
    double a0 = 0.0, a10 = 0.0, a01 = 0.0, a11 = 0.0, a20 = 0.0, a02 = 0.0;
    double fit_residual_max = 0.0;

    double operator()(double xi, double sigma) const {
        return a0 + a10 * xi + a01 * sigma + a11 * xi * sigma + a20 * xi * xi + a02 * sigma * sigma;
    }
};

inline double sum_squared_error(const FitCoefficients& f, std::span<const Sample> data) {
    double sse = 0.0;
    for (const auto& s : data) sse += (f(s.xi, s.sigma) - s.value) * (f(s.xi, s.sigma) - s.value);
    return sse;
}

/// Least-squares bilinear surface through the samples, via the 4x4 normal equations.
inline FitCoefficients bilinear_fit(std::span<const Sample> data, std::string metric = {}) {
    if (data.size() < 4) throw FitError("bilinear fit: need at least 4 samples");
    for (const auto& s : data)
        if (!std::isfinite(s.value) || !std::isfinite(s.xi) || !std::isfinite(s.sigma))
            throw FitError("bilinear fit: non-finite sample");
    const auto c = detail::least_squares<4>(data, detail::bilinear_basis);
    FitCoefficients fit{std::move(metric), c[0], c[1], c[2], c[3], 0.0};
    for (const auto& s : data) fit.fit_residual_max = std::max(fit.fit_residual_max, std::abs(fit(s.xi, s.sigma) - s.value));
    return fit;
}

inline FitCoefficients bilinear_fit(const SweepTable& table, Metric metric) {
    if (!table.fit_eligible()) throw FitError("bilinear fit: table has non-converged cells");
    const auto data = samples(table, metric);
    return bilinear_fit(data, metric_name(metric));
}

inline QuadraticFit quadratic_fit(std::span<const Sample> data) {
    if (data.size() < 6) throw FitError("quadratic fit: need at least 6 samples");
    const auto c = detail::least_squares<6>(data, detail::quadratic_basis);
    QuadraticFit fit{c[0], c[1], c[2], c[3], c[4], c[5], 0.0};
    for (const auto& s : data) fit.fit_residual_max = std::max(fit.fit_residual_max, std::abs(fit(s.xi, s.sigma) - s.value));
    return fit;
}

// ---------------------------------------------------------------------------
// Inversion of f(xi, sigma) = C along one coordinate

struct InversionResult {
    double value = 0.0;
    std::string formula;
    std::optional<std::string> warning; // set when the value leaves the admissible range
};

inline constexpr double kSingularDenominator = 1e-12;

/// xi = (C - a0 - a01 sigma) / (a10 + a11 sigma).
inline InversionResult xi_for_target(const FitCoefficients& f, double target, double sigma) {
    const double den = f.a10 + f.a11 * sigma;
    if (std::abs(den) < kSingularDenominator)
        throw SingularInversionError("xi_for_target: a10 + a11*sigma vanishes at sigma = " + std::to_string(sigma));
    InversionResult res{(target - f.a0 - f.a01 * sigma) / den, "xi = (C - a0 - a01*sigma) / (a10 + a11*sigma)", {}};
    if (!(res.value > 1.0 && res.value <= 2.0))
        res.warning = "xi = " + std::to_string(res.value) + " lies outside (1, 2]";
    return res;
}

/// sigma = (C - a0 - a10 xi) / (a01 + a11 xi).
inline InversionResult sigma_for_target(const FitCoefficients& f, double target, double xi) {
    const double den = f.a01 + f.a11 * xi;
    if (std::abs(den) < kSingularDenominator)
        throw SingularInversionError("sigma_for_target: a01 + a11*xi vanishes at xi = " + std::to_string(xi));
    InversionResult res{(target - f.a0 - f.a10 * xi) / den, "sigma = (C - a0 - a10*xi) / (a01 + a11*xi)", {}};
    if (!(res.value >= 0.0 && res.value <= 1.0))
        res.warning = "sigma = " + std::to_string(res.value) + " lies outside [0, 1]";
    return res;
}

} // namespace kinetax
