#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <map>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "supersim/event_stream.hpp"
#include "supersim/model.hpp"
#include "supersim/parallel.hpp"
#include "supersim/rng.hpp"
#include "supersim/stats.hpp"

namespace supersim {

struct SamplingPlan {
    double warmup = 0.0;
    double interval = 2.0;
    std::uint32_t count = 1;

    void validate() const {
        if (!(warmup >= 0.0) || !std::isfinite(warmup)) throw std::invalid_argument("SamplingPlan: warmup must be >= 0");
        if (!(interval > 0.0) || !std::isfinite(interval)) throw std::invalid_argument("SamplingPlan: interval must be > 0");
        if (count < 1) throw std::invalid_argument("SamplingPlan: count must be >= 1");
    }

    double last_time() const { return warmup + interval * static_cast<double>(count - 1); }
};

/// Warm-up used when starting from the empty state: 40 ln(n) / (1 - lambda),
/// with ln(n) floored at 1 so that tiny systems still get a warm-up.
inline double default_warmup(const ModelParams& p) {
    return 40.0 * std::max(std::log(static_cast<double>(p.n)), 1.0) / (1.0 - p.lambda);
}

inline SamplingPlan default_plan(const ModelParams& p, std::uint32_t count) {
    return SamplingPlan{default_warmup(p), 2.0, count};
}

struct Snapshot {
    double t = 0.0;
    std::uint64_t total = 0;
    std::uint32_t max = 0;
    std::vector<std::uint64_t> ell;  // ell[0..max]

    static Snapshot of(double t, const QueueState& x) {
        return Snapshot{t, x.total(), x.max_length(), {x.level_counts().begin(), x.level_counts().end()}};
    }

    double u(std::size_t k) const {
        return k < ell.size() ? static_cast<double>(ell[k]) / static_cast<double>(ell[0]) : 0.0;
    }
};

/// Snapshots at warmup + i * interval, i = 0..count-1.
inline std::vector<Snapshot> run_trajectory(const ModelParams& params, QueueState x0, const SamplingPlan& plan,
                                            std::uint64_t seed) {
    params.validate();
    plan.validate();
    if (x0.size() != params.n) throw std::invalid_argument("run_trajectory: x0 has wrong size");
    const double horizon = plan.last_time();
    if (!std::isfinite(horizon)) throw std::overflow_error("run_trajectory: sampling horizon overflows");
    StreamCursor cursor(EventStream{params, seed, horizon});
    std::vector<Snapshot> out;
    out.reserve(plan.count);
    for (std::uint32_t i = 0; i < plan.count; ++i) {
        const double t = plan.warmup + plan.interval * static_cast<double>(i);
        advance(x0, cursor, t);
        out.push_back(Snapshot::of(t, x0));
    }
    return out;
}

/// One trajectory per replica, each seeded with derive_seed(seed, replica)
/// and started from initial(replica).
inline std::vector<std::vector<Snapshot>> run_replicas(const ModelParams& params,
                                                       const std::function<QueueState(std::size_t)>& initial,
                                                       const SamplingPlan& plan, std::size_t replicas,
                                                       std::uint64_t seed, unsigned threads = 0) {
    std::vector<std::vector<Snapshot>> out(replicas);
    parallel_for(
        replicas,
        [&](std::size_t r) { out[r] = run_trajectory(params, initial(r), plan, derive_seed(seed, r)); },
        threads);
    return out;
}

struct TailEstimate {
    std::uint32_t n = 0;
    std::vector<stats::MeanSe> u;               // per level k = 0..K
    std::map<std::uint32_t, std::uint64_t> max_hist;
    stats::MeanSe total;
    std::size_t samples = 0;

    double u_hat(std::size_t k) const { return k < u.size() ? u[k].mean : 0.0; }
    double se(std::size_t k) const { return k < u.size() ? u[k].se : 0.0; }
    std::size_t levels() const { return u.size(); }

    /// Empirical Pr(M >= k) over snapshots.
    double max_tail(std::uint32_t k) const {
        std::uint64_t hits = 0;
        for (auto [m, c] : max_hist)
            if (m >= k) hits += c;
        return samples ? static_cast<double>(hits) / static_cast<double>(samples) : 0.0;
    }

    double max_tail_se(std::uint32_t k) const { return stats::proportion_se(max_tail(k), samples); }

    /// Most frequent maximum and the mass on {mode - 1, mode} or {mode, mode + 1},
    /// whichever adjacent pair is heavier.
    std::pair<std::uint32_t, double> best_adjacent_pair() const {
        std::uint32_t lo = 0;
        double best = -1.0;
        for (auto [m, c] : max_hist) {
            auto it = max_hist.find(m + 1);
            const double mass = static_cast<double>(c + (it != max_hist.end() ? it->second : 0));
            if (mass > best) {
                best = mass;
                lo = m;
            }
        }
        return {lo, samples ? best / static_cast<double>(samples) : 0.0};
    }
};

/// Per-level means of u(k) with batch-means standard errors.
inline TailEstimate estimate_tail(std::span<const Snapshot> snaps, std::size_t batches = stats::kDefaultBatches) {
    if (snaps.empty()) throw std::invalid_argument("estimate_tail: need at least one snapshot");
    TailEstimate est;
    est.n = static_cast<std::uint32_t>(snaps[0].ell[0]);
    est.samples = snaps.size();
    std::size_t levels = 0;
    for (const auto& s : snaps) levels = std::max(levels, s.ell.size());
    std::vector<double> series(snaps.size());
    est.u.resize(levels);
    for (std::size_t k = 0; k < levels; ++k) {
        for (std::size_t i = 0; i < snaps.size(); ++i) series[i] = snaps[i].u(k);
        est.u[k] = stats::batch_means(series, batches);
    }
    for (std::size_t i = 0; i < snaps.size(); ++i) {
        series[i] = static_cast<double>(snaps[i].total);
        ++est.max_hist[snaps[i].max];
    }
    est.total = stats::batch_means(series, batches);
    return est;
}

/// Merge of estimates from independent replicas; associative.
inline TailEstimate merge(const TailEstimate& a, const TailEstimate& b) {
    if (a.samples == 0) return b;
    if (b.samples == 0) return a;
    if (a.n != b.n) throw std::invalid_argument("merge: estimates for different n");
    TailEstimate r;
    r.n = a.n;
    r.samples = a.samples + b.samples;
    const std::size_t levels = std::max(a.u.size(), b.u.size());
    r.u.resize(levels);
    for (std::size_t k = 0; k < levels; ++k) {
        auto pad = [](const TailEstimate& e, std::size_t k) {
            return k < e.u.size() ? e.u[k] : stats::MeanSe{0.0, 0.0, 0.0, e.samples};
        };
        r.u[k] = stats::merge(pad(a, k), pad(b, k));
    }
    r.total = stats::merge(a.total, b.total);
    r.max_hist = a.max_hist;
    for (auto [m, c] : b.max_hist) r.max_hist[m] += c;
    return r;
}

inline TailEstimate estimate_tail(const std::vector<std::vector<Snapshot>>& replicas) {
    TailEstimate acc;
    for (const auto& run : replicas) acc = merge(acc, estimate_tail(run));
    return acc;
}

/// Geweke-style z-score comparing mean total queue length in the first and
/// second halves of a run. |z| > 3 suggests the warm-up was too short.
inline double warmup_z_score(std::span<const Snapshot> snaps) {
    if (snaps.size() < 4) return 0.0;
    const std::size_t half = snaps.size() / 2;
    std::vector<double> a, b;
    for (std::size_t i = 0; i < snaps.size(); ++i)
        (i < half ? a : b).push_back(static_cast<double>(snaps[i].total));
    const auto ea = stats::batch_means(a, 10);
    const auto eb = stats::batch_means(b, 10);
    const double se = std::sqrt(ea.se * ea.se + eb.se * eb.se);
    if (se == 0.0) return ea.mean == eb.mean ? 0.0 : std::numeric_limits<double>::infinity();
    return (ea.mean - eb.mean) / se;
}

struct BalanceReport {
    std::vector<std::uint32_t> levels;  // i = 1..K+1
    std::vector<stats::MeanSe> residual;
    bool warmup_warning = false;   // first snapshot at t = 0
    bool equilibrium_consistent = true;  // every |r(i)| <= 3 SE
};

/// Residuals r(i) = lambda * mean(u(i-1)^d) - mean(u(i)), which vanish in
/// equilibrium. SEs are batch means over the per-snapshot residual series.
inline BalanceReport verify_balance(std::span<const Snapshot> snaps, const ModelParams& params,
                                    std::size_t batches = stats::kDefaultBatches) {
    if (snaps.empty()) throw std::invalid_argument("verify_balance: need at least one snapshot");
    BalanceReport rep;
    rep.warmup_warning = snaps.front().t == 0.0;
    std::size_t top = 0;
    for (const auto& s : snaps) top = std::max(top, s.ell.size());
    std::vector<double> series(snaps.size());
    for (std::size_t i = 1; i <= top; ++i) {
        for (std::size_t s = 0; s < snaps.size(); ++s)
            series[s] = params.lambda * std::pow(snaps[s].u(i - 1), params.d) - snaps[s].u(i);
        auto r = stats::batch_means(series, batches);
        if (std::abs(r.mean) > 3.0 * r.se + 1e-12) rep.equilibrium_consistent = false;
        rep.levels.push_back(static_cast<std::uint32_t>(i));
        rep.residual.push_back(r);
    }
    return rep;
}

struct MaxExtremes {
    std::uint32_t min = 0;
    std::uint32_t max = 0;
};

/// Smallest and largest maximum queue length over [0, horizon].
inline MaxExtremes max_interval_extremes(const ModelParams& params, QueueState x0, double horizon,
                                         std::uint64_t seed) {
    if (!(horizon >= 0.0)) throw std::invalid_argument("max_interval_extremes: horizon must be >= 0");
    StreamCursor cursor(EventStream{params, seed, horizon});
    MaxExtremes ext{x0.max_length(), x0.max_length()};
    advance(x0, cursor, horizon, [&](const EventView&, bool changed) {
        if (!changed) return;
        const std::uint32_t m = x0.max_length();
        ext.min = std::min(ext.min, m);
        ext.max = std::max(ext.max, m);
    });
    return ext;
}

/// Tracks the FIFO fate of the customers present at time 0: queue j's
/// initial customers are gone once it has served initial[j] departures.
struct SurvivalRecord {
    std::vector<std::uint32_t> initial;
    std::vector<std::uint32_t> served;
    std::uint32_t queues_pending = 0;
    double last_departure = 0.0;

    explicit SurvivalRecord(std::span<const std::uint32_t> x0)
        : initial(x0.begin(), x0.end()), served(x0.size(), 0) {
        for (auto v : initial) queues_pending += v > 0 ? 1 : 0;
    }

    bool done() const noexcept { return queues_pending == 0; }

    void on_departure(std::uint32_t j, double t) {
        if (served[j] < initial[j] && ++served[j] == initial[j]) {
            --queues_pending;
            if (queues_pending == 0) last_departure = t;
        }
    }
};

struct SurvivalResult {
    double time = 0.0;   // departure time of the last initial customer
    bool censored = false;  // not all initial customers left within the horizon
};

template <EventSource Source>
SurvivalResult survival_time(QueueState x0, Source& source) {
    SurvivalRecord rec(x0.lengths());
    if (rec.done()) return {0.0, false};
    while (source.peek_time() <= source.horizon()) {
        const EventView e = source.next();
        const bool changed = apply_event(x0, e);
        if (e.kind == EventKind::Departure && changed) {
            rec.on_departure(e.queues[0], e.time);
            if (rec.done()) return {rec.last_departure, false};
        }
    }
    return {source.horizon(), true};
}

inline SurvivalResult survival_time(const ModelParams& params, QueueState x0, double horizon, std::uint64_t seed) {
    StreamCursor cursor(EventStream{params, seed, horizon});
    return survival_time(std::move(x0), cursor);
}

}  // namespace supersim
