#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace supersim::oracle {

inline constexpr std::size_t kMaxStates = 1'000'000;
inline constexpr std::size_t kDenseLimit = 2'000;

/// Supermarket model truncated at queue length `cap`; arrivals that would
/// push the selected queue above the cap are lost. States {0..cap}^n are
/// indexed lexicographically with queue 1 most significant.
struct CappedChainSpec {
    std::uint32_t n = 1;
    double lambda = 0.5;
    std::uint32_t d = 1;
    std::uint32_t cap = 10;

    std::size_t state_count() const {
        double c = std::pow(static_cast<double>(cap) + 1.0, n);
        if (c > static_cast<double>(kMaxStates))
            throw std::length_error("CappedChainSpec: " + std::to_string(c) + " states exceed the limit of " +
                                    std::to_string(kMaxStates));
        return static_cast<std::size_t>(std::llround(c));
    }

    void validate() const {
        if (n < 1 || d < 1) throw std::invalid_argument("CappedChainSpec: n and d must be >= 1");
        if (!(lambda > 0.0 && lambda < 1.0)) throw std::invalid_argument("CappedChainSpec: lambda must lie in (0, 1)");
        (void)state_count();
    }

    std::vector<std::uint32_t> decode(std::size_t index) const {
        std::vector<std::uint32_t> x(n);
        for (std::uint32_t j = n; j-- > 0;) {
            x[j] = static_cast<std::uint32_t>(index % (cap + 1));
            index /= cap + 1;
        }
        return x;
    }

    std::size_t encode(std::span<const std::uint32_t> x) const {
        if (x.size() != n) throw std::invalid_argument("encode: wrong state size");
        std::size_t index = 0;
        for (auto v : x) {
            if (v > cap) throw std::out_of_range("encode: queue length above cap");
            index = index * (cap + 1) + v;
        }
        return index;
    }
};

/// Probability that each queue receives an arrival in state x, by running the
/// first-listed-minimum rule over all n^d equally likely ordered choice lists.
inline std::vector<double> choice_probabilities(std::span<const std::uint32_t> x, std::uint32_t d) {
    const auto n = static_cast<std::uint32_t>(x.size());
    std::vector<std::uint64_t> wins(n, 0);
    std::vector<std::uint32_t> tuple(d, 0);
    std::uint64_t total = 0;
    while (true) {
        std::uint32_t pick = tuple[0];
        for (std::uint32_t i = 1; i < d; ++i)
            if (x[tuple[i]] < x[pick]) pick = tuple[i];
        ++wins[pick];
        ++total;
        std::uint32_t pos = d;
        while (pos > 0 && ++tuple[pos - 1] == n) tuple[--pos] = 0;
        if (pos == 0) break;
    }
    std::vector<double> p(n);
    for (std::uint32_t j = 0; j < n; ++j) p[j] = static_cast<double>(wins[j]) / static_cast<double>(total);
    return p;
}

struct Transition {
    std::uint32_t target;
    double rate;
};

/// Sparse generator Q: off-diagonal transitions per row plus the diagonal.
struct GeneratorMatrix {
    CappedChainSpec spec;
    std::vector<std::vector<Transition>> rows;
    std::vector<double> diagonal;

    std::size_t size() const noexcept { return rows.size(); }

    double max_outflow() const {
        double m = 0.0;
        for (double q : diagonal) m = std::max(m, -q);
        return m;
    }

    Eigen::MatrixXd dense() const {
        Eigen::MatrixXd Q = Eigen::MatrixXd::Zero(size(), size());
        for (std::size_t i = 0; i < size(); ++i) {
            Q(i, i) = diagonal[i];
            for (auto [j, r] : rows[i]) Q(i, j) += r;
        }
        return Q;
    }

    /// max_i |sum_j Q(i, j)|.
    double row_sum_error() const {
        double worst = 0.0;
        for (std::size_t i = 0; i < size(); ++i) {
            double s = diagonal[i];
            for (auto [j, r] : rows[i]) s += r;
            worst = std::max(worst, std::abs(s));
        }
        return worst;
    }

    /// row vector p times Q.
    std::vector<double> left_multiply(std::span<const double> p) const {
        std::vector<double> out(size(), 0.0);
        for (std::size_t i = 0; i < size(); ++i) {
            if (p[i] == 0.0) continue;
            out[i] += p[i] * diagonal[i];
            for (auto [j, r] : rows[i]) out[j] += p[i] * r;
        }
        return out;
    }

    double residual(std::span<const double> p) const {
        double worst = 0.0;
        for (double v : left_multiply(p)) worst = std::max(worst, std::abs(v));
        return worst;
    }
};

inline GeneratorMatrix build_generator(const CappedChainSpec& spec) {
    spec.validate();
    const std::size_t S = spec.state_count();
    GeneratorMatrix g;
    g.spec = spec;
    g.rows.resize(S);
    g.diagonal.assign(S, 0.0);
    const double arrival_rate = spec.lambda * spec.n;
    std::vector<std::uint32_t> y;
    for (std::size_t i = 0; i < S; ++i) {
        const auto x = spec.decode(i);
        const auto p = choice_probabilities(x, spec.d);
        double out = 0.0;
        for (std::uint32_t j = 0; j < spec.n; ++j) {
            if (p[j] > 0.0 && x[j] < spec.cap) {
                y = x;
                ++y[j];
                const double r = arrival_rate * p[j];
                g.rows[i].push_back({static_cast<std::uint32_t>(spec.encode(y)), r});
                out += r;
            }
            if (x[j] > 0) {
                y = x;
                --y[j];
                g.rows[i].push_back({static_cast<std::uint32_t>(spec.encode(y)), 1.0});
                out += 1.0;
            }
        }
        g.diagonal[i] = -out;
    }
    return g;
}

class NumericalFailure : public std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// pi Q = 0, sum pi = 1 by dense LU on Q^T with one balance equation
/// replaced by the normalization.
inline std::vector<double> stationary_dense(const GeneratorMatrix& g) {
    const std::size_t S = g.size();
    if (S > kDenseLimit) throw std::length_error("stationary_dense: too many states for a dense solve");
    if (S == 1) return {1.0};
    Eigen::MatrixXd A = g.dense().transpose();
    A.row(S - 1).setOnes();
    Eigen::VectorXd b = Eigen::VectorXd::Zero(S);
    b(S - 1) = 1.0;
    Eigen::FullPivLU<Eigen::MatrixXd> lu(A);
    if (lu.rank() < static_cast<Eigen::Index>(S))
        throw NumericalFailure("stationary_dense: generator has more than a one-dimensional null space");
    Eigen::VectorXd pi = lu.solve(b);
    return {pi.data(), pi.data() + S};
}

/// Power iteration on the uniformized chain I + Q / Lambda with Lambda
/// slightly above the largest outflow, until ||pi Q||_inf < tol.
inline std::vector<double> stationary_power(const GeneratorMatrix& g, double tol = 1e-13,
                                            std::size_t max_iter = 10'000'000) {
    const std::size_t S = g.size();
    if (S == 1) return {1.0};
    const double Lambda = 1.05 * g.max_outflow();
    std::vector<double> pi(S, 1.0 / static_cast<double>(S));
    for (std::size_t it = 0; it < max_iter; ++it) {
        auto flow = g.left_multiply(pi);
        double worst = 0.0;
        for (double v : flow) worst = std::max(worst, std::abs(v));
        if (worst < tol) return pi;
        double sum = 0.0;
        for (std::size_t i = 0; i < S; ++i) {
            pi[i] += flow[i] / Lambda;
            sum += pi[i];
        }
        for (double& v : pi) v /= sum;
    }
    throw NumericalFailure("stationary_power: no convergence within the iteration limit");
}

inline std::vector<double> stationary(const GeneratorMatrix& g) {
    return g.size() <= kDenseLimit ? stationary_dense(g) : stationary_power(g);
}

/// Distribution at time t from point mass at state `start`, by
/// uniformization at rate Lambda = max outflow. Terms stop once the Poisson
/// right tail is below tol.
inline std::vector<double> transient(const GeneratorMatrix& g, std::size_t start, double t, double tol = 1e-12) {
    const std::size_t S = g.size();
    if (start >= S) throw std::out_of_range("transient: start state out of range");
    if (!(t >= 0.0)) throw std::invalid_argument("transient: t must be >= 0");
    std::vector<double> v(S, 0.0);
    v[start] = 1.0;
    const double Lambda = g.max_outflow();
    const double mu = Lambda * t;
    if (mu == 0.0) return v;
    if (mu > 1e8) throw std::overflow_error("transient: Lambda * t too large for uniformization");

    std::vector<double> acc(S, 0.0);
    const double log_mu = std::log(mu);
    for (std::size_t k = 0;; ++k) {
        const double w = std::exp(-mu + static_cast<double>(k) * log_mu - std::lgamma(static_cast<double>(k) + 1.0));
        for (std::size_t i = 0; i < S; ++i) acc[i] += w * v[i];
        // Pr(N > k) <= w_{k+1} (k+2) / (k+2-mu) once k+2 > mu.
        const double kk = static_cast<double>(k);
        if (kk + 2.0 > mu) {
            const double w_next = w * mu / (kk + 1.0);
            if (w_next * (kk + 2.0) / (kk + 2.0 - mu) < tol) break;
        }
        auto flow = g.left_multiply(v);
        for (std::size_t i = 0; i < S; ++i) v[i] += flow[i] / Lambda;
    }
    return acc;
}

inline double exact_tv(std::span<const double> p, std::span<const double> q) {
    if (p.size() != q.size()) throw std::invalid_argument("exact_tv: dimension mismatch");
    double s = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) s += std::abs(p[i] - q[i]);
    return 0.5 * s;
}

/// u(k) = E[#{j : X(j) >= k}] / n under the distribution, k = 0..cap.
inline std::vector<double> tail_u(const CappedChainSpec& spec, std::span<const double> dist) {
    std::vector<double> u(spec.cap + 1, 0.0);
    for (std::size_t i = 0; i < dist.size(); ++i) {
        if (dist[i] == 0.0) continue;
        for (auto v : spec.decode(i))
            for (std::uint32_t k = 0; k <= v; ++k) u[k] += dist[i];
    }
    for (double& x : u) x /= spec.n;
    return u;
}

/// E[lambda u(i-1, X)^d] - E[u(i, X)] for i = 1..cap.
inline std::vector<double> balance_residuals(const CappedChainSpec& spec, std::span<const double> dist) {
    std::vector<double> r(spec.cap, 0.0);
    for (std::size_t s = 0; s < dist.size(); ++s) {
        if (dist[s] == 0.0) continue;
        const auto x = spec.decode(s);
        for (std::uint32_t i = 1; i <= spec.cap; ++i) {
            double below = 0, at = 0;
            for (auto v : x) {
                below += v >= i - 1;
                at += v >= i;
            }
            r[i - 1] += dist[s] * (spec.lambda * std::pow(below / spec.n, spec.d) - at / spec.n);
        }
    }
    return r;
}

/// Probability of the states with some queue at the cap.
inline double boundary_mass(const CappedChainSpec& spec, std::span<const double> dist) {
    double m = 0.0;
    for (std::size_t s = 0; s < dist.size(); ++s) {
        const auto x = spec.decode(s);
        if (std::any_of(x.begin(), x.end(), [&](auto v) { return v == spec.cap; })) m += dist[s];
    }
    return m;
}

}  // namespace supersim::oracle
