#pragma once

// Coefficients and right-hand sides of the kinetic taxation/evasion/audit model.
//
// Notation used throughout (0-based):
//   class j in [0,n), sector a in [0,m), group (j,a) stored at j*m + a;
//   gap_j = r_{j+1} - r_j for j in [0,n-1).
// In a binary encounter between a source (h,b) and a partner (k,c), the source
// pays S to the partner with probability p(h,k) and receives S with p(k,h); the
// receiving side's effective tax rate decides how much money actually changes hands.

#include <cstddef>
#include <span>
#include <stdexcept>
#include <vector>

#include "kinetax/errors.hpp"
#include "kinetax/model.hpp"

namespace kinetax {

/// Probability p(h,k) that, when a class-h and a class-k individual meet, the class-h one pays.
///
/// Base rule min(r_h, r_k) / (4 r_n), overridden by: the interior diagonal r_j / (2 r_n);
/// column 1 by r_1 / (2 r_n); row n by r_k / (2 r_n); row 1 by 0; column n by 0.
/// Exceptions are applied in that order and overlapping cells must agree.
inline Matrix build_payer_matrix(std::span<const double> r) {
    const std::size_t n = r.size();
    if (n < 2) throw ConfigError("payer matrix: need at least 2 income classes");
    if (!(r[0] > 0.0)) throw ConfigError("payer matrix: incomes must be positive");
    for (std::size_t i = 0; i + 1 < n; ++i)
        if (!(r[i + 1] > r[i])) throw ConfigError("payer matrix: incomes must be strictly increasing");

    const double rn = r[n - 1];
    Matrix p(n, n);
    for (std::size_t h = 0; h < n; ++h)
        for (std::size_t k = 0; k < n; ++k) p(h, k) = std::min(r[h], r[k]) / (4.0 * rn);

    Matrix assigned(n, n, 0.0);
    auto except = [&](std::size_t h, std::size_t k, double v) {
        if (assigned(h, k) != 0.0 && p(h, k) != v)
            throw std::logic_error("payer matrix: inconsistent exception values on overlapping cell");
        p(h, k) = v;
        assigned(h, k) = 1.0;
    };
    for (std::size_t j = 1; j + 1 < n; ++j) except(j, j, r[j] / (2.0 * rn));
    for (std::size_t h = 1; h < n; ++h) except(h, 0, r[0] / (2.0 * rn));
    for (std::size_t k = 0; k + 1 < n; ++k) except(n - 1, k, r[k] / (2.0 * rn));
    for (std::size_t k = 0; k < n; ++k) except(0, k, 0.0);
    for (std::size_t h = 0; h < n; ++h) except(h, n - 1, 0.0);
    return p;
}

/// theta(k,a) = theta_ev(a) * tau_k.
inline Matrix effective_rates(const ModelConfig& config) {
    config.validate();
    Matrix theta(config.n(), config.m());
    for (std::size_t k = 0; k < config.n(); ++k)
        for (std::size_t a = 0; a < config.m(); ++a) theta(k, a) = config.theta_ev[a] * config.tau[k];
    return theta;
}

/// Rate charged to an audited individual, evaded tax included with the fine:
/// theta + xi (tau - theta). Bounded by 1 under tau_n <= 0.5 and xi <= 2.
inline Matrix audited_rates(const Matrix& theta, std::span<const double> tau, double xi) {
    if (theta.rows() != tau.size()) throw ConfigError("audited rates: tau length does not match theta");
    if (!(xi > 1.0 && xi <= 2.0)) throw ConstraintError("audited rates: xi = " + std::to_string(xi));
    if (!tau.empty() && tau.back() > 0.5) throw ConstraintError("audited rates: top tax rate exceeds 0.5");
    Matrix out(theta.rows(), theta.cols());
    for (std::size_t k = 0; k < theta.rows(); ++k)
        for (std::size_t a = 0; a < theta.cols(); ++a) out(k, a) = theta(k, a) + xi * (tau[k] - theta(k, a));
    return out;
}

/// Coefficients derived from one matrix of effective tax rates.
///
/// The three binary-transition families are stored as (n*m) x (n*m) arrays
/// indexed [source group][partner group]; the target is implied:
///   up    - source (h,b) moves to (h+1,b)
///   down  - source (h,b) moves to (h-1,b)
///   stay  - source remains in (h,b); stay = 1 - up - down.
/// `tax_weight(h, k*m+c)` = p(h,k) S theta(k,c) is the tax raised when h pays (k,c).
struct RateCoefficients {
    Matrix theta;
    Matrix up;
    Matrix down;
    Matrix stay;
    Matrix tax_weight;
};

struct TransitionTensors {
    std::size_t n = 0;
    std::size_t m = 0;
    double S = 0.0;
    std::vector<double> r;
    std::vector<double> tau;
    std::vector<double> inv_gap; // 1 / (r_{j+1} - r_j), length n-1
    Matrix p;
    RateCoefficients plain;   // non-audited bracket
    RateCoefficients audited; // audited bracket (theta replaced by the audited rate)
    double xi = 2.0;

    const Matrix& theta() const { return plain.theta; }
    const Matrix& theta_audited() const { return audited.theta; }
};

namespace detail {

inline RateCoefficients make_rate_coefficients(const Matrix& theta, const Matrix& p, std::span<const double> inv_gap,
                                               double S) {
    const std::size_t n = theta.rows();
    const std::size_t m = theta.cols();
    const std::size_t nm = n * m;
    RateCoefficients rc{theta, Matrix(nm, nm), Matrix(nm, nm), Matrix(nm, nm), Matrix(n, nm)};

    for (std::size_t h = 0; h < n; ++h)
        for (std::size_t b = 0; b < m; ++b)
            for (std::size_t k = 0; k < n; ++k)
                for (std::size_t c = 0; c < m; ++c) {
                    const std::size_t src = h * m + b;
                    const std::size_t par = k * m + c;
                    // Receiving S from the partner lifts the source one class (not from the top).
                    const double up = (h + 1 < n) ? p(k, h) * S * (1.0 - theta(h, b)) * inv_gap[h] : 0.0;
                    // Paying S to the partner drops the source one class (not from the bottom).
                    const double down = (h > 0) ? p(h, k) * S * (1.0 - theta(k, c)) * inv_gap[h - 1] : 0.0;
                    rc.up(src, par) = up;
                    rc.down(src, par) = down;
                    rc.stay(src, par) = 1.0 - up - down;
                }

    for (std::size_t h = 0; h < n; ++h)
        for (std::size_t k = 0; k < n; ++k)
            for (std::size_t c = 0; c < m; ++c) rc.tax_weight(h, k * m + c) = p(h, k) * S * theta(k, c);
    return rc;
}

} // namespace detail

/// Precomputes every state-independent coefficient for the plain and audited brackets.
inline TransitionTensors build_tensors(const ModelConfig& config, const EnforcementParams& enforcement) {
    config.validate();
    enforcement.validate();

    TransitionTensors t;
    t.n = config.n();
    t.m = config.m();
    t.S = config.S;
    t.r = config.r;
    t.tau = config.tau;
    t.xi = enforcement.xi;
    t.inv_gap.resize(t.n - 1);
    for (std::size_t j = 0; j + 1 < t.n; ++j) t.inv_gap[j] = 1.0 / (config.r[j + 1] - config.r[j]);
    t.p = build_payer_matrix(config.r);

    const Matrix theta = effective_rates(config);
    const Matrix theta_aud = audited_rates(theta, config.tau, enforcement.xi);
    t.plain = detail::make_rate_coefficients(theta, t.p, t.inv_gap, t.S);
    t.audited = detail::make_rate_coefficients(theta_aud, t.p, t.inv_gap, t.S);
    return t;
}

/// Binary-transition coefficient C^{target}_{source;partner} read from the banded storage.
inline double transition_coefficient(const RateCoefficients& rc, std::size_t m, std::size_t target,
                                     std::size_t source, std::size_t partner) {
    const std::size_t j = target / m, a = target % m;
    const std::size_t h = source / m, b = source % m;
    if (a != b) return 0.0;
    if (h == j) return rc.stay(source, partner);
    if (h == j + 1) return rc.down(source, partner);
    if (j == h + 1) return rc.up(source, partner);
    return 0.0;
}

/// Taxation/redistribution functional T^{target}_{[source;partner]}(x).
inline double redistribution_term(const TransitionTensors& t, const RateCoefficients& rc, std::size_t target,
                                  std::size_t source, std::size_t partner, const PopulationState& x) {
    const std::size_t m = t.m, n = t.n;
    const std::size_t j = target / m, a = target % m;
    const std::size_t h = source / m, b = source % m;
    const double w = rc.tax_weight(h, partner);
    const double total = x.total();
    double eligible = 0.0;
    for (std::size_t i = 0; i + 1 < n; ++i) eligible += x.class_mass(i);

    double spread = 0.0;
    if (j >= 1) spread += x(j - 1, a) * t.inv_gap[j - 1];
    if (j + 1 < n) spread -= x(j, a) * t.inv_gap[j];

    double pay = 0.0;
    if (a == b) {
        if (h == j + 1) pay += t.inv_gap[j];
        if (h == j && j >= 1) pay -= t.inv_gap[j - 1];
    }
    return w / total * spread + w * pay * eligible / total;
}

namespace detail {

/// sum_{h,b,k,c} (C + T(x)) x_h^b x_k^c - x_j^a sum(x), for one rate set.
inline void bracket(const TransitionTensors& t, const RateCoefficients& rc, const PopulationState& x,
                    std::span<double> out) {
    const std::size_t n = t.n, m = t.m, nm = n * m;
    const std::span<const double> xv = x.values();

    double total = 0.0;
    for (double v : xv) total += v;
    if (!(total > 0.0)) throw StateError("rhs: population state has no mass");

    // Per-source rates of leaving upward/downward/staying, integrated over partners.
    std::vector<double> up(nm), down(nm), stay(nm);
    for (std::size_t s = 0; s < nm; ++s) {
        double u = 0.0, d = 0.0, st = 0.0;
        const auto ru = rc.up.row(s), rd = rc.down.row(s), rs = rc.stay.row(s);
        for (std::size_t q = 0; q < nm; ++q) {
            u += ru[q] * xv[q];
            d += rd[q] * xv[q];
            st += rs[q] * xv[q];
        }
        up[s] = u;
        down[s] = d;
        stay[s] = st;
    }

    // Tax paid per unit mass of payer class h, and total tax raised.
    std::vector<double> class_mass(n, 0.0), paid(n, 0.0);
    for (std::size_t h = 0; h < n; ++h)
        for (std::size_t b = 0; b < m; ++b) class_mass[h] += xv[h * m + b];
    double raised = 0.0;
    for (std::size_t h = 0; h < n; ++h) {
        const auto w = rc.tax_weight.row(h);
        double v = 0.0;
        for (std::size_t q = 0; q < nm; ++q) v += w[q] * xv[q];
        paid[h] = v;
        raised += class_mass[h] * v;
    }
    double eligible = 0.0;
    for (std::size_t i = 0; i + 1 < n; ++i) eligible += class_mass[i];
    const double spread_scale = raised / total;
    const double pay_scale = eligible / total;

    for (std::size_t j = 0; j < n; ++j)
        for (std::size_t a = 0; a < m; ++a) {
            const std::size_t g = j * m + a;
            double v = stay[g] * xv[g];
            if (j + 1 < n) v += down[g + m] * xv[g + m];
            if (j >= 1) v += up[g - m] * xv[g - m];

            double spread = 0.0;
            if (j >= 1) spread += xv[g - m] * t.inv_gap[j - 1];
            if (j + 1 < n) spread -= xv[g] * t.inv_gap[j];

            double pay = 0.0;
            if (j + 1 < n) pay += paid[j + 1] * xv[g + m] * t.inv_gap[j];
            if (j >= 1) pay -= paid[j] * xv[g] * t.inv_gap[j - 1];

            out[g] = v + spread_scale * spread + pay_scale * pay - xv[g] * total;
        }
}

inline void check_dims(const TransitionTensors& t, const PopulationState& x, std::span<double> out) {
    if (x.n() != t.n || x.m() != t.m || x.size() != t.n * t.m)
        throw StateError("rhs: state dimensions do not match the model");
    if (out.size() != t.n * t.m) throw StateError("rhs: output length does not match the model");
}

} // namespace detail

/// Time derivative of the model without audits.
inline void rhs_base(const TransitionTensors& t, const PopulationState& x, std::span<double> out) {
    detail::check_dims(t, x, out);
    detail::bracket(t, t.plain, x, out);
}

inline std::vector<double> rhs_base(const TransitionTensors& t, const PopulationState& x) {
    std::vector<double> out(t.n * t.m);
    rhs_base(t, x, out);
    return out;
}

/// Time derivative with a fraction sigma of audited individuals:
/// (1 - sigma) * plain bracket + sigma * audited bracket, evaluated as
/// plain + sigma * (audited - plain) so that sigma = 0 reproduces rhs_base exactly.
inline void rhs_audit(const TransitionTensors& t, const EnforcementParams& enforcement, const PopulationState& x,
                      std::span<double> out) {
    detail::check_dims(t, x, out);
    enforcement.validate();
    if (enforcement.xi != t.xi) throw ConfigError("rhs_audit: tensors were built for a different xi");
    detail::bracket(t, t.plain, x, out);
    if (enforcement.sigma == 0.0) return;
    std::vector<double> aud(out.size());
    detail::bracket(t, t.audited, x, aud);
    for (std::size_t i = 0; i < out.size(); ++i) out[i] += enforcement.sigma * (aud[i] - out[i]);
}

inline std::vector<double> rhs_audit(const TransitionTensors& t, const EnforcementParams& enforcement,
                                     const PopulationState& x) {
    std::vector<double> out(t.n * t.m);
    rhs_audit(t, enforcement, x, out);
    return out;
}

} // namespace kinetax
