#pragma once

#include <cmath>
#include <cstdint>

// Exact Poisson probabilities by direct summation of the mass function.

namespace supersim::poisson {

inline double pmf(double mu, std::int64_t k) {
    if (k < 0) return 0.0;
    return std::exp(-mu + static_cast<double>(k) * std::log(mu) - std::lgamma(static_cast<double>(k) + 1.0));
}

/// Pr(X <= k).
inline double cdf(double mu, std::int64_t k) {
    double s = 0.0;
    for (std::int64_t j = 0; j <= k; ++j) s += pmf(mu, j);
    return s;
}

/// Pr(X >= k), summed upward until the terms vanish.
inline double upper(double mu, std::int64_t k) {
    if (k <= 0) return 1.0;
    double s = 0.0;
    for (std::int64_t j = k;; ++j) {
        const double p = pmf(mu, j);
        s += p;
        if (static_cast<double>(j) > mu && (p < 1e-300 || p < s * 1e-18)) break;
    }
    return s;
}

}  // namespace supersim::poisson
