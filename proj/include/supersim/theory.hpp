#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <stdexcept>
#include <vector>

#include "supersim/model.hpp"
#include "supersim/rng.hpp"

namespace supersim::theory {

/// ln of lambda^{(d^i - 1)/(d - 1)} in long double, so large d^i do not overflow
/// the exponent and tiny values do not underflow to 0 before comparison.
inline long double log_tail_level(double lambda, std::uint32_t d, std::uint32_t i) {
    const long double ll = std::log(static_cast<long double>(lambda));
    if (d == 1) return ll * i;
    const long double geom = (std::pow(static_cast<long double>(d), static_cast<long double>(i)) - 1.0L) / (d - 1.0L);
    return ll * geom;
}

struct LevelIndex {
    std::uint32_t value = 0;
    bool pre_asymptotic = false;  // threshold n^{-1/2} ln^2 n >= 1, so i = 0
};

/// Least i >= 0 with lambda^{(d^i - 1)/(d - 1)} < n^{-1/2} ln^2 n.
inline LevelIndex compute_i_d(std::uint64_t n, double lambda, std::uint32_t d) {
    if (d < 2) throw std::invalid_argument("compute_i_d: requires d >= 2");
    if (n < 2) throw std::invalid_argument("compute_i_d: requires n >= 2");
    const long double ln_n = std::log(static_cast<long double>(n));
    const long double log_threshold = -0.5L * ln_n + 2.0L * std::log(ln_n);
    LevelIndex out;
    out.pre_asymptotic = log_threshold >= 0.0L;
    while (!(log_tail_level(lambda, d, out.value) < log_threshold)) ++out.value;
    return out;
}

/// m_2 = i_2 + 1; m_d = i_d for d >= 3. Undefined for d = 1.
inline std::uint32_t compute_m_d(std::uint64_t n, double lambda, std::uint32_t d) {
    if (d == 1)
        throw std::invalid_argument("m_d is undefined for d = 1; use d1_max_cdf for the single-choice maximum");
    const auto i = compute_i_d(n, lambda, d).value;
    return d == 2 ? i + 1 : i;
}

/// max{i : n lambda^{(d^i - 1)/(d - 1)} >= 1}, the level at which the
/// expected number of queues at least that long drops below one.
inline std::uint32_t predicted_mode(std::uint64_t n, double lambda, std::uint32_t d) {
    if (d < 1) throw std::invalid_argument("predicted_mode: requires d >= 1");
    const long double ln_n = std::log(static_cast<long double>(n));
    std::uint32_t i = 0;
    while (ln_n + log_tail_level(lambda, d, i + 1) >= 0.0L) ++i;
    return i;
}

inline double lnln_over_lnd(std::uint64_t n, std::uint32_t d) {
    return std::log(std::log(static_cast<double>(n))) / std::log(static_cast<double>(d));
}

/// Pr(M <= m) = (1 - lambda^{m+1})^n for d = 1 in equilibrium.
inline double d1_max_cdf(std::uint64_t n, double lambda, std::uint32_t m) {
    const double q = std::pow(lambda, static_cast<double>(m) + 1.0);
    return std::exp(static_cast<double>(n) * std::log1p(-q));
}

/// Exact equilibrium state for d = 1: i.i.d. geometric lengths with
/// Pr(X(j) = k) = (1 - lambda) lambda^k.
inline QueueState d1_equilibrium_sample(std::uint32_t n, double lambda, std::uint64_t seed) {
    Xoshiro256 rng(derive_seed(seed, "d1-equilibrium"));
    std::vector<std::uint32_t> x(n);
    for (auto& v : x) v = rng.geometric_tail(lambda);
    return QueueState(std::move(x));
}

/// Pr(M >= k) <= n lambda^k in equilibrium. May exceed 1.
inline double bound_max_tail(std::uint64_t n, double lambda, std::uint32_t k) {
    return static_cast<double>(n) * std::pow(lambda, static_cast<double>(k));
}

inline double survival_rate(double lambda) { return std::min(0.25 * std::log(1.0 / lambda), 0.25); }

/// Pr(some initial customer is still present at t) <= 2 n e^{-alpha t}.
inline double bound_survival(std::uint64_t n, double lambda, double t) {
    return 2.0 * static_cast<double>(n) * std::exp(-survival_rate(lambda) * t);
}

inline void check_eps(double eps) {
    if (!(eps >= 0.0 && eps <= 1.0)) throw std::domain_error("Chernoff bound requires 0 <= eps <= 1");
}

/// Pr(X - mu <= -eps mu) <= e^{-eps^2 mu / 2}.
inline double chernoff_lower(double mu, double eps) {
    check_eps(eps);
    return std::exp(-0.5 * eps * eps * mu);
}

/// Pr(X - mu >= eps mu) <= e^{-eps^2 mu / 3}.
inline double chernoff_upper(double mu, double eps) {
    check_eps(eps);
    return std::exp(-eps * eps * mu / 3.0);
}

/// Pr(X >= x) <= 2^{-x}, valid for x >= 2 e mu.
inline double chernoff_2x(double mu, double x) {
    if (x < 2.0 * std::exp(1.0) * mu) throw std::domain_error("chernoff_2x requires x >= 2 e mu");
    return std::exp2(-x);
}

struct PredictionReport {
    std::uint64_t n = 0;
    double lambda = 0.0;
    std::uint32_t d = 1;
    std::optional<std::uint32_t> i_d;
    std::optional<std::uint32_t> m_d;
    bool pre_asymptotic = false;
    std::uint32_t mode = 0;
    double lnln_ratio = 0.0;       // ln ln n / ln d, d >= 2 only
    std::vector<double> tails;     // lambda^{(d^k - 1)/(d - 1)}, k = 0..mode+2
    std::vector<double> d1_cdf;    // Pr(M <= m), d = 1 only, m = 0.. until >= 1 - 1e-9
};

inline PredictionReport predict(std::uint64_t n, double lambda, std::uint32_t d) {
    PredictionReport r;
    r.n = n;
    r.lambda = lambda;
    r.d = d;
    r.mode = predicted_mode(n, lambda, d);
    if (d >= 2) {
        if (n >= 2) {
            const auto i = compute_i_d(n, lambda, d);
            r.i_d = i.value;
            r.pre_asymptotic = i.pre_asymptotic;
            r.m_d = compute_m_d(n, lambda, d);
        }
        r.lnln_ratio = n >= 3 ? lnln_over_lnd(n, d) : 0.0;
    } else {
        for (std::uint32_t m = 0; m < 10000; ++m) {
            r.d1_cdf.push_back(d1_max_cdf(n, lambda, m));
            if (r.d1_cdf.back() >= 1.0 - 1e-9) break;
        }
    }
    for (std::uint32_t k = 0; k <= r.mode + 2; ++k)
        r.tails.push_back(static_cast<double>(std::exp(log_tail_level(lambda, d, k))));
    return r;
}

}  // namespace supersim::theory
