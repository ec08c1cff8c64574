#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include "kinetax/errors.hpp"

namespace kinetax {

/// Dense row-major matrix of doubles. Only what the model needs.
class Matrix {
  public:
    Matrix() = default;
    Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
        : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

    double& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
    double operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }
    std::span<const double> row(std::size_t i) const { return {data_.data() + i * cols_, cols_}; }
    std::span<const double> data() const { return data_; }

  private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<double> data_;
};

/// Static parameters of the kinetic model.
///
/// Classes are indexed 0..n-1 by increasing income, sectors 0..m-1.
/// `theta_ev[a]` is the fraction of due tax actually paid by sector `a`
/// (1 = compliant, 0 = total evasion).
struct ModelConfig {
    std::vector<double> r;              // average income per class
    double S = 0.1;                     // amount exchanged per transaction
    std::vector<double> tau;            // tax rate per class
    std::vector<double> theta_ev;       // retention parameter per sector
    std::vector<double> sector_weights; // population fraction per sector

    bool operator==(const ModelConfig&) const = default;

    std::size_t n() const { return r.size(); }
    std::size_t m() const { return theta_ev.size(); }

    double min_gap() const {
        double gap = INFINITY;
        for (std::size_t i = 0; i + 1 < r.size(); ++i) gap = std::min(gap, r[i + 1] - r[i]);
        return gap;
    }

    /// Throws ConfigError / ConstraintError on any violated invariant.
    /// Returns non-fatal warnings (currently: S not small against the class gaps).
    std::vector<std::string> validate() const {
        if (r.size() < 2) throw ConfigError("model.r: need at least 2 income classes");
        if (theta_ev.empty()) throw ConfigError("model.theta_ev: need at least 1 sector");
        if (tau.size() != r.size())
            throw ConfigError("model.tau: expected " + std::to_string(r.size()) + " rates, got " +
                              std::to_string(tau.size()));
        if (sector_weights.size() != theta_ev.size())
            throw ConfigError("model.sector_weights: expected " + std::to_string(theta_ev.size()) +
                              " weights, got " + std::to_string(sector_weights.size()));
        if (!(r[0] > 0.0)) throw ConfigError("model.r: incomes must be positive");
        for (std::size_t i = 0; i + 1 < r.size(); ++i)
            if (!(r[i + 1] > r[i]))
                throw ConfigError("model.r: incomes must be strictly increasing (r[" +
                                  std::to_string(i + 1) + "] <= r[" + std::to_string(i) + "])");
        for (std::size_t i = 0; i < tau.size(); ++i) {
            if (!(tau[i] >= 0.0)) throw ConfigError("model.tau: rates must be nonnegative");
            if (i + 1 < tau.size() && tau[i + 1] < tau[i])
                throw ConfigError("model.tau: rates must be nondecreasing");
        }
        if (tau.back() > 0.5) throw ConstraintError("model.tau: top rate exceeds 0.5");
        for (double t : theta_ev)
            if (!(t >= 0.0 && t <= 1.0)) throw ConfigError("model.theta_ev: values must lie in [0,1]");
        double wsum = 0.0;
        for (double w : sector_weights) {
            if (!(w >= 0.0)) throw ConfigError("model.sector_weights: weights must be nonnegative");
            wsum += w;
        }
        if (std::abs(wsum - 1.0) > 1e-12) throw ConfigError("model.sector_weights: weights must sum to 1");
        if (!(S >= 0.0)) throw ConfigError("model.S: exchanged amount must be nonnegative");
        const double gap = min_gap();
        if (S >= gap) throw ConfigError("model.S: exchanged amount must be below the smallest class gap");

        std::vector<std::string> warnings;
        if (S > 0.1 * gap) {
            std::ostringstream os;
            os << "model.S = " << S << " is not small against the smallest class gap " << gap;
            warnings.push_back(os.str());
        }
        return warnings;
    }
};

/// Audit fraction and fine multiplier. sigma = 0 disables audits and makes xi irrelevant.
struct EnforcementParams {
    double sigma = 0.0;
    double xi = 2.0;

    bool operator==(const EnforcementParams&) const = default;

    void validate() const {
        if (!(sigma >= 0.0 && sigma <= 1.0)) throw ConfigError("enforcement.sigma: must lie in [0,1]");
        if (!(xi > 1.0 && xi <= 2.0)) throw ConstraintError("enforcement.xi = " + std::to_string(xi));
    }
};

/// Fractions x_j^a flattened class-major: index = j*m + a.
class PopulationState {
  public:
    PopulationState() = default;
    PopulationState(std::size_t n, std::size_t m) : n_(n), m_(m), x_(n * m, 0.0) {}
    PopulationState(std::size_t n, std::size_t m, std::vector<double> x) : n_(n), m_(m), x_(std::move(x)) {
        if (x_.size() != n_ * m_)
            throw StateError("state: expected " + std::to_string(n_ * m_) + " components, got " +
                             std::to_string(x_.size()));
    }

    std::size_t n() const { return n_; }
    std::size_t m() const { return m_; }
    std::size_t size() const { return x_.size(); }

    double& operator()(std::size_t j, std::size_t a) { return x_[j * m_ + a]; }
    double operator()(std::size_t j, std::size_t a) const { return x_[j * m_ + a]; }

    std::span<const double> values() const { return x_; }
    std::span<double> values() { return x_; }

    double total() const { return std::accumulate(x_.begin(), x_.end(), 0.0); }

    double class_mass(std::size_t j) const {
        double s = 0.0;
        for (std::size_t a = 0; a < m_; ++a) s += (*this)(j, a);
        return s;
    }

    double total_income(std::span<const double> r) const {
        double mu = 0.0;
        for (std::size_t j = 0; j < n_; ++j) mu += r[j] * class_mass(j);
        return mu;
    }

    /// Checks nonnegativity, unit mass within `mass_tol`, and r_1 <= mu <= r_n.
    void validate(std::span<const double> r, double mass_tol = 1e-9) const {
        if (r.size() != n_) throw StateError("state: class count does not match the model");
        for (double v : x_)
            if (!(v >= 0.0)) throw StateError("state: components must be nonnegative");
        if (std::abs(total() - 1.0) > mass_tol) throw StateError("state: components must sum to 1");
        const double mu = total_income(r);
        const double slack = 1e-12 * r.back();
        if (mu < r.front() - slack || mu > r.back() + slack)
            throw StateError("state: total income outside [r_1, r_n]");
    }

  private:
    std::size_t n_ = 0;
    std::size_t m_ = 0;
    std::vector<double> x_;
};

/// tau_j = tau_1 + (j-1)/(n-1) * (tau_n - tau_1), the linear progressive schedule.
inline std::vector<double> linear_tax_schedule(std::size_t n, double tau_first, double tau_last) {
    if (n < 2) throw ConfigError("tax schedule: need at least 2 classes");
    std::vector<double> tau(n);
    for (std::size_t j = 0; j < n; ++j)
        tau[j] = tau_first + static_cast<double>(j) / static_cast<double>(n - 1) * (tau_last - tau_first);
    return tau;
}

/// r_j = base + step * j for j = 0..n-1.
inline std::vector<double> linear_incomes(std::size_t n, double base, double step) {
    std::vector<double> r(n);
    for (std::size_t j = 0; j < n; ++j) r[j] = base + step * static_cast<double>(j);
    return r;
}

} // namespace kinetax
