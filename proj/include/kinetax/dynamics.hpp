#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "kinetax/errors.hpp"
#include "kinetax/kinetic_core.hpp"
#include "kinetax/model.hpp"

namespace kinetax {

struct IntegratorSettings {
    double dt = 1.0;
    double tol = 1e-11;       // stationarity threshold on max |dx/dt|
    double max_time = 1e7;
    std::size_t record_every = 1000;

    bool operator==(const IntegratorSettings&) const = default;

    void validate() const {
        if (!(dt > 0.0)) throw ConfigError("integrator.dt: must be positive");
        if (!(tol > 0.0)) throw ConfigError("integrator.tol: must be positive");
        if (!(max_time >= dt)) throw ConfigError("integrator.max_time: must be at least dt");
        if (record_every == 0) throw ConfigError("integrator.record_every: must be positive");
    }
};

/// Bounds on conserved quantities along a trajectory.
inline constexpr double kMassDriftTol = 1e-9;
inline constexpr double kIncomeDriftTol = 1e-8; // relative
inline constexpr double kNegativityTol = 1e-9;

/// dx/dt as a function of the state, written into the output span.
using RateFunction = std::function<void(const PopulationState&, std::span<double>)>;

/// A rate function together with the class incomes needed to monitor total income.
struct DynamicalSystem {
    RateFunction rate;
    std::vector<double> r;
};

inline DynamicalSystem make_base_system(const TransitionTensors& t) {
    return {[&t](const PopulationState& x, std::span<double> out) { rhs_base(t, x, out); }, t.r};
}

inline DynamicalSystem make_audit_system(const TransitionTensors& t, const EnforcementParams& e) {
    return {[&t, e](const PopulationState& x, std::span<double> out) { rhs_audit(t, e, x, out); }, t.r};
}

struct Drift {
    double mass = 0.0;   // max |sum(x) - 1|
    double income = 0.0; // max |mu(x) - mu(x0)| / mu(x0)
};

struct Trajectory {
    std::vector<double> times;
    std::vector<PopulationState> states;
    Drift drift;
};

struct EquilibriumResult {
    PopulationState state;
    double t_final = 0.0;
    double residual = 0.0;
    bool converged = false;
    Drift drift;
};

/// Admissible initial condition with total income `mu`.
///
/// The class profile mixes a uniform distribution with a point mass on the top
/// class (mu above the mean income) or on the bottom class (mu below it); every
/// class is split across sectors by the sector weights.
inline PopulationState make_initial_condition(const ModelConfig& config, double mu) {
    config.validate();
    const std::size_t n = config.n(), m = config.m();
    const auto& r = config.r;
    if (!(mu >= r.front() && mu <= r.back()))
        throw ConfigError("initial.mu: must lie in [r_1, r_n]");

    double mean = 0.0;
    for (double v : r) mean += v;
    mean /= static_cast<double>(n);

    std::vector<double> q(n, 1.0 / static_cast<double>(n));
    const std::size_t anchor = mu >= mean ? n - 1 : 0;
    const double lambda = (mu - mean) / (r[anchor] - mean);
    if (mu != mean) {
        for (std::size_t j = 0; j < n; ++j) q[j] = (1.0 - lambda) / static_cast<double>(n);
        q[anchor] += lambda;
    }

    PopulationState x(n, m);
    for (std::size_t j = 0; j < n; ++j)
        for (std::size_t a = 0; a < m; ++a) x(j, a) = config.sector_weights[a] * q[j];
    return x;
}

namespace detail {

class Rk4Stepper {
  public:
    Rk4Stepper(const RateFunction& f, std::size_t n, std::size_t m)
        : f_(f), k1_(n * m), k2_(n * m), k3_(n * m), k4_(n * m), tmp_(n, m) {}

    /// Writes dx/dt at x into k1 and returns its max-norm.
    double slope(const PopulationState& x) {
        f_(x, k1_);
        double norm = 0.0;
        for (double v : k1_) norm = std::max(norm, std::abs(v));
        return norm;
    }

    /// Advances x by dt; requires slope(x) to have been called on the same x.
    void advance(PopulationState& x, double dt) {
        auto xv = x.values();
        auto tv = tmp_.values();
        const std::size_t len = xv.size();
        for (std::size_t i = 0; i < len; ++i) tv[i] = xv[i] + 0.5 * dt * k1_[i];
        f_(tmp_, k2_);
        for (std::size_t i = 0; i < len; ++i) tv[i] = xv[i] + 0.5 * dt * k2_[i];
        f_(tmp_, k3_);
        for (std::size_t i = 0; i < len; ++i) tv[i] = xv[i] + dt * k3_[i];
        f_(tmp_, k4_);
        for (std::size_t i = 0; i < len; ++i)
            xv[i] += dt / 6.0 * (k1_[i] + 2.0 * k2_[i] + 2.0 * k3_[i] + k4_[i]);
    }

  private:
    const RateFunction& f_;
    std::vector<double> k1_, k2_, k3_, k4_;
    PopulationState tmp_;
};

class ConservationMonitor {
  public:
    ConservationMonitor(std::span<const double> r, const PopulationState& x0)
        : r_(r), mu0_(x0.total_income(r)) {
        check(x0, 0.0);
    }

    void check(const PopulationState& x, double t) {
        const double mass = std::abs(x.total() - 1.0);
        const double income = std::abs(x.total_income(r_) - mu0_) / mu0_;
        drift_.mass = std::max(drift_.mass, mass);
        drift_.income = std::max(drift_.income, income);
        if (mass > kMassDriftTol)
            throw IntegrationError("population drift " + std::to_string(mass) + " at t = " + std::to_string(t));
        if (income > kIncomeDriftTol)
            throw IntegrationError("relative income drift " + std::to_string(income) +
                                   " at t = " + std::to_string(t));
        for (double v : x.values())
            if (v < -kNegativityTol)
                throw IntegrationError("negative component " + std::to_string(v) + " at t = " + std::to_string(t));
    }

    const Drift& drift() const { return drift_; }

  private:
    std::span<const double> r_;
    double mu0_;
    Drift drift_;
};

/// Components in [-kNegativityTol, 0) are reported as 0.
inline PopulationState clamp_for_report(PopulationState x) {
    for (double& v : x.values())
        if (v < 0.0) v = 0.0;
    return x;
}

} // namespace detail

/// Fixed-step classical Runge-Kutta integration over [0, max_time].
///
/// The initial state and every `record_every`-th step are recorded (plus the
/// final one). Conservation is monitored at every step and never enforced.
inline Trajectory integrate(const DynamicalSystem& sys, const PopulationState& x0, const IntegratorSettings& settings) {
    settings.validate();
    x0.validate(sys.r);
    detail::Rk4Stepper stepper(sys.rate, x0.n(), x0.m());
    detail::ConservationMonitor monitor(sys.r, x0);

    Trajectory traj;
    PopulationState x = x0;
    traj.times.push_back(0.0);
    traj.states.push_back(x);
    const auto steps = static_cast<std::size_t>(std::floor(settings.max_time / settings.dt + 1e-9));
    for (std::size_t s = 1; s <= steps; ++s) {
        stepper.slope(x);
        stepper.advance(x, settings.dt);
        const double t = static_cast<double>(s) * settings.dt;
        monitor.check(x, t);
        if (s % settings.record_every == 0 || s == steps) {
            traj.times.push_back(t);
            traj.states.push_back(detail::clamp_for_report(x));
        }
    }
    traj.drift = monitor.drift();
    return traj;
}

/// Integrates until max |dx/dt| <= tol or the time cap is reached.
/// When `trajectory` is given, samples are recorded as in integrate() up to the stopping time.
inline EquilibriumResult find_steady_state(const DynamicalSystem& sys, const PopulationState& x0,
                                           const IntegratorSettings& settings, Trajectory* trajectory = nullptr) {
    settings.validate();
    x0.validate(sys.r);
    detail::Rk4Stepper stepper(sys.rate, x0.n(), x0.m());
    detail::ConservationMonitor monitor(sys.r, x0);

    PopulationState x = x0;
    if (trajectory) {
        *trajectory = {};
        trajectory->times.push_back(0.0);
        trajectory->states.push_back(x);
    }
    const auto steps = static_cast<std::size_t>(std::floor(settings.max_time / settings.dt + 1e-9));
    std::size_t s = 0;
    double residual = stepper.slope(x);
    while (residual > settings.tol && s < steps) {
        stepper.advance(x, settings.dt);
        ++s;
        monitor.check(x, static_cast<double>(s) * settings.dt);
        residual = stepper.slope(x);
        if (trajectory && (s % settings.record_every == 0 || residual <= settings.tol || s == steps)) {
            trajectory->times.push_back(static_cast<double>(s) * settings.dt);
            trajectory->states.push_back(detail::clamp_for_report(x));
        }
    }
    if (trajectory) trajectory->drift = monitor.drift();

    EquilibriumResult res;
    res.state = detail::clamp_for_report(x);
    res.t_final = static_cast<double>(s) * settings.dt;
    res.residual = residual;
    res.converged = residual <= settings.tol;
    res.drift = monitor.drift();
    return res;
}

} // namespace kinetax
