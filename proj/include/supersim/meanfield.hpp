#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace supersim::meanfield {

/// Truncated mean-field state v(1..K), with implicit v(0) = 1 and v(K+1) = 0.
struct State {
    std::vector<double> v;  // v[k - 1] = v(k)

    std::size_t levels() const noexcept { return v.size(); }
    double at(std::size_t k) const noexcept {
        if (k == 0) return 1.0;
        return k <= v.size() ? v[k - 1] : 0.0;
    }

    /// Largest violation of 1 >= v(1) >= ... >= v(K) >= 0.
    double monotonicity_violation() const noexcept {
        double worst = 0.0;
        for (std::size_t k = 1; k <= v.size() + 1; ++k) worst = std::max(worst, at(k) - at(k - 1));
        for (double x : v) worst = std::max(worst, -x);
        return worst;
    }
};

class InvariantViolation : public std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// dv(k)/dt = lambda (v(k-1)^d - v(k)^d) - (v(k) - v(k+1)), k = 1..K.
inline std::vector<double> derivative(const State& s, double lambda, std::uint32_t d) {
    const std::size_t K = s.levels();
    std::vector<double> out(K);
    for (std::size_t k = 1; k <= K; ++k) {
        const double prev = s.at(k - 1), cur = s.at(k), next = s.at(k + 1);
        out[k - 1] = lambda * (std::pow(prev, d) - std::pow(cur, d)) - (cur - next);
    }
    return out;
}

/// v(k) = lambda^{(d^k - 1)/(d - 1)}, which is lambda^k for d = 1.
/// Exponents are formed in floating point so large d^k underflow to 0.
inline double fixed_point_level(double lambda, std::uint32_t d, std::uint32_t k) {
    if (d == 1) return std::pow(lambda, static_cast<double>(k));
    const double exponent = (std::pow(static_cast<double>(d), k) - 1.0) / (d - 1.0);
    return std::exp(exponent * std::log(lambda));
}

inline State fixed_point(double lambda, std::uint32_t d, std::uint32_t K) {
    if (K < 1) throw std::invalid_argument("fixed_point: K must be >= 1");
    State s;
    s.v.resize(K);
    // Iterating v(k) = lambda v(k-1)^d keeps the stationarity relation exact
    // to rounding instead of relying on pow with a huge exponent.
    double prev = 1.0;
    for (std::uint32_t k = 1; k <= K; ++k) {
        prev = lambda * std::pow(prev, d);
        s.v[k - 1] = prev;
    }
    return s;
}

/// Smallest K with fixed-point tail below `tol`.
inline std::uint32_t default_truncation(double lambda, std::uint32_t d, double tol = 1e-12) {
    std::uint32_t K = 1;
    while (fixed_point_level(lambda, d, K) >= tol && K < 10000) ++K;
    return K;
}

struct Trajectory {
    std::vector<double> times;
    std::vector<State> states;
    double step_halving_error = 0.0;  // max |v_dt(T) - v_{dt/2}(T)| when requested
};

namespace detail {

inline State rk4_step(const State& s, double lambda, std::uint32_t d, double dt) {
    auto axpy = [](const State& base, const std::vector<double>& k, double h) {
        State r = base;
        for (std::size_t i = 0; i < r.v.size(); ++i) r.v[i] += h * k[i];
        return r;
    };
    const auto k1 = derivative(s, lambda, d);
    const auto k2 = derivative(axpy(s, k1, dt / 2), lambda, d);
    const auto k3 = derivative(axpy(s, k2, dt / 2), lambda, d);
    const auto k4 = derivative(axpy(s, k3, dt), lambda, d);
    State r = s;
    for (std::size_t i = 0; i < r.v.size(); ++i) r.v[i] += dt / 6.0 * (k1[i] + 2 * k2[i] + 2 * k3[i] + k4[i]);
    return r;
}

inline State integrate_to(State s, double lambda, std::uint32_t d, double T, double dt, std::vector<double>* times,
                          std::vector<State>* states, std::size_t record_every) {
    const auto steps = static_cast<std::size_t>(std::llround(T / dt));
    if (std::abs(static_cast<double>(steps) * dt - T) > 1e-9 * std::max(1.0, T))
        throw std::invalid_argument("integrate: T must be a multiple of dt");
    if (states) {
        times->push_back(0.0);
        states->push_back(s);
    }
    for (std::size_t i = 1; i <= steps; ++i) {
        s = rk4_step(s, lambda, d, dt);
        const double bad = s.monotonicity_violation();
        if (bad > 1e-9)
            throw InvariantViolation("mean-field state lost monotonicity by " + std::to_string(bad) + " at t=" +
                                     std::to_string(static_cast<double>(i) * dt) + " (dt too large or K too small)");
        if (states && (i % record_every == 0 || i == steps)) {
            times->push_back(static_cast<double>(i) * dt);
            states->push_back(s);
        }
    }
    return s;
}

}  // namespace detail

struct IntegrateOptions {
    std::size_t record_every = 1;  // keep every k-th step in the trajectory
    bool step_halving = true;
};

/// Classical fixed-step RK4 from v0 over [0, T]. The state is checked for
/// monotonicity after every step. With step_halving the run is repeated at
/// dt/2 and the final-state discrepancy reported.
inline Trajectory integrate(const State& v0, double lambda, std::uint32_t d, double T, double dt,
                            const IntegrateOptions& opt = {}) {
    if (!(dt > 0.0)) throw std::invalid_argument("integrate: dt must be > 0");
    if (!(T >= 0.0)) throw std::invalid_argument("integrate: T must be >= 0");
    if (v0.monotonicity_violation() > 1e-9) throw InvariantViolation("integrate: v0 is not nonincreasing in [0, 1]");
    Trajectory traj;
    const State end =
        detail::integrate_to(v0, lambda, d, T, dt, &traj.times, &traj.states, std::max<std::size_t>(1, opt.record_every));
    if (opt.step_halving) {
        const State fine = detail::integrate_to(v0, lambda, d, T, dt / 2, nullptr, nullptr, 1);
        for (std::size_t i = 0; i < end.v.size(); ++i)
            traj.step_halving_error = std::max(traj.step_halving_error, std::abs(end.v[i] - fine.v[i]));
    }
    return traj;
}

/// Sum over k of dv(k)/dt telescopes to lambda (1 - v(K)^d) - v(1).
inline double mass_derivative(const State& s, double lambda, std::uint32_t d) {
    return lambda * (1.0 - std::pow(s.at(s.levels()), d)) - s.at(1);
}

inline double max_abs_diff(const State& a, const State& b) {
    const std::size_t K = std::max(a.levels(), b.levels());
    double worst = 0.0;
    for (std::size_t k = 1; k <= K; ++k) worst = std::max(worst, std::abs(a.at(k) - b.at(k)));
    return worst;
}

}  // namespace supersim::meanfield
