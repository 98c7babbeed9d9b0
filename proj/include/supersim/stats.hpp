#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <vector>

namespace supersim::stats {

struct MeanSe {
    double mean = 0.0;
    double variance = 0.0;  // sample variance of the raw values
    double se = 0.0;
    std::size_t count = 0;
};

inline double mean(std::span<const double> xs) {
    if (xs.empty()) return 0.0;
    double s = 0.0;
    for (double x : xs) s += x;
    return s / static_cast<double>(xs.size());
}

inline double sample_variance(std::span<const double> xs) {
    if (xs.size() < 2) return 0.0;
    const double m = mean(xs);
    double s = 0.0;
    for (double x : xs) s += (x - m) * (x - m);
    return s / static_cast<double>(xs.size() - 1);
}

/// Independent-sample mean with standard error.
inline MeanSe iid_mean(std::span<const double> xs) {
    MeanSe r;
    r.count = xs.size();
    r.mean = mean(xs);
    r.variance = sample_variance(xs);
    r.se = xs.size() > 1 ? std::sqrt(r.variance / static_cast<double>(xs.size())) : 0.0;
    return r;
}

inline constexpr std::size_t kDefaultBatches = 20;

/// Mean with a batch-means standard error for autocorrelated series.
///
/// The series is cut into `batches` contiguous batches of equal size (the
/// remainder goes to the last batches, one extra sample each); the SE is the
/// standard deviation of the batch means over sqrt(batches). Series shorter
/// than 2 * batches fall back to one sample per batch.
inline MeanSe batch_means(std::span<const double> xs, std::size_t batches = kDefaultBatches) {
    MeanSe r;
    r.count = xs.size();
    r.mean = mean(xs);
    r.variance = sample_variance(xs);
    if (xs.size() < 2) return r;
    if (xs.size() < 2 * batches) batches = xs.size();
    std::vector<double> bm(batches);
    const std::size_t base = xs.size() / batches;
    const std::size_t extra = xs.size() % batches;
    std::size_t pos = 0;
    for (std::size_t b = 0; b < batches; ++b) {
        const std::size_t len = base + (b >= batches - extra ? 1 : 0);
        bm[b] = mean(xs.subspan(pos, len));
        pos += len;
    }
    r.se = std::sqrt(sample_variance(bm) / static_cast<double>(batches));
    return r;
}

/// Count-weighted merge of two independent estimates of the same quantity.
inline MeanSe merge(const MeanSe& a, const MeanSe& b) {
    if (a.count == 0) return b;
    if (b.count == 0) return a;
    const double na = static_cast<double>(a.count);
    const double nb = static_cast<double>(b.count);
    const double n = na + nb;
    MeanSe r;
    r.count = a.count + b.count;
    r.mean = (na * a.mean + nb * b.mean) / n;
    const double delta = b.mean - a.mean;
    const double m2 = a.variance * (na - 1) + b.variance * (nb - 1) + delta * delta * na * nb / n;
    r.variance = n > 1 ? m2 / (n - 1) : 0.0;
    r.se = std::sqrt(na * na * a.se * a.se + nb * nb * b.se * b.se) / n;
    return r;
}

/// Standard error of a proportion from independent trials.
inline double proportion_se(double p, std::size_t trials) {
    if (trials == 0) return 0.0;
    return std::sqrt(std::max(p * (1.0 - p), 0.0) / static_cast<double>(trials));
}

/// sup_m |F(m) - G(m)| over integer support 0..cdf.size()-1, where `sample`
/// are nonnegative integers and `cdf[m]` = Pr(X <= m). Values beyond the
/// table are treated as having CDF 1.
inline double kolmogorov_distance(std::span<const unsigned> sample, std::span<const double> cdf) {
    if (sample.empty()) throw std::invalid_argument("kolmogorov_distance: empty sample");
    unsigned top = 0;
    for (auto v : sample) top = std::max(top, v);
    const std::size_t len = std::max<std::size_t>(cdf.size(), static_cast<std::size_t>(top) + 1);
    std::vector<double> counts(len, 0.0);
    for (auto v : sample) counts[v] += 1.0;
    double cum = 0.0;
    double worst = 0.0;
    const double n = static_cast<double>(sample.size());
    for (std::size_t m = 0; m < len; ++m) {
        cum += counts[m];
        const double model = m < cdf.size() ? cdf[m] : 1.0;
        worst = std::max(worst, std::abs(cum / n - model));
    }
    return worst;
}

struct LinearFit {
    double slope = 0.0;
    double intercept = 0.0;
    double r_squared = 0.0;
    std::size_t points = 0;
};

/// Ordinary least squares y = intercept + slope * x.
inline LinearFit linear_fit(std::span<const double> x, std::span<const double> y) {
    if (x.size() != y.size()) throw std::invalid_argument("linear_fit: size mismatch");
    LinearFit f;
    f.points = x.size();
    if (x.size() < 2) return f;
    const double mx = mean(x);
    const double my = mean(y);
    double sxx = 0, sxy = 0, syy = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxx += (x[i] - mx) * (x[i] - mx);
        sxy += (x[i] - mx) * (y[i] - my);
        syy += (y[i] - my) * (y[i] - my);
    }
    if (sxx == 0.0) return f;
    f.slope = sxy / sxx;
    f.intercept = my - f.slope * mx;
    f.r_squared = syy > 0.0 ? (sxy * sxy) / (sxx * syy) : 1.0;
    return f;
}

}  // namespace supersim::stats
