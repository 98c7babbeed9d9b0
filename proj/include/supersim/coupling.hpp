#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

#include "supersim/event_stream.hpp"
#include "supersim/model.hpp"
#include "supersim/parallel.hpp"
#include "supersim/simulator.hpp"
#include "supersim/stats.hpp"

namespace supersim {

/// Incrementally maintained distance between two states x and y of equal
/// size: l1 = sum |y_j - x_j|, linf = max |y_j - x_j| and the number of
/// coordinates where x_j > y_j and where x_j < y_j.
class PairDistance {
public:
    PairDistance(const QueueState& x, const QueueState& y) {
        if (x.size() != y.size()) throw std::invalid_argument("PairDistance: states differ in n");
        hist_.assign(1, 0);
        for (std::uint32_t j = 0; j < x.size(); ++j) add(static_cast<std::int64_t>(y[j]) - x[j]);
    }

    /// Coordinate j moved from delta `before` to `after` (delta = y_j - x_j).
    void update(std::int64_t before, std::int64_t after) {
        if (before == after) return;
        remove(before);
        add(after);
    }

    std::uint64_t l1() const noexcept { return l1_; }
    std::uint64_t linf() const noexcept { return hist_.size() - 1; }
    std::uint64_t x_above() const noexcept { return x_above_; }
    std::uint64_t x_below() const noexcept { return x_below_; }
    bool equal() const noexcept { return l1_ == 0; }

private:
    void add(std::int64_t delta) {
        const auto a = static_cast<std::uint64_t>(delta < 0 ? -delta : delta);
        if (a >= hist_.size()) hist_.resize(a + 1, 0);
        ++hist_[a];
        l1_ += a;
        x_above_ += delta < 0;
        x_below_ += delta > 0;
    }

    void remove(std::int64_t delta) {
        const auto a = static_cast<std::uint64_t>(delta < 0 ? -delta : delta);
        --hist_[a];
        while (hist_.size() > 1 && hist_.back() == 0) hist_.pop_back();
        l1_ -= a;
        x_above_ -= delta < 0;
        x_below_ -= delta > 0;
    }

    std::vector<std::uint64_t> hist_;  // hist_[a] = #{j : |delta_j| = a}
    std::uint64_t l1_ = 0;
    std::uint64_t x_above_ = 0;
    std::uint64_t x_below_ = 0;
};

/// Violations found by the per-event audit of a coupled run. Every field
/// must stay zero: the shared-stream coupling is contracting and monotone.
struct AuditReport {
    std::uint64_t events = 0;
    std::uint64_t l1_increases = 0;
    std::uint64_t linf_increases = 0;
    std::uint64_t order_violations = 0;
    std::uint64_t coalescence_breaks = 0;

    bool clean() const noexcept {
        return l1_increases == 0 && linf_increases == 0 && order_violations == 0 && coalescence_breaks == 0;
    }
};

struct PairSample {
    double time;
    std::uint64_t l1;
    std::uint64_t linf;
};

/// Several replicas driven by one shared event source. Every pair (a, b),
/// a < b, is tracked and audited after each event.
template <EventSource Source>
class Coupling {
public:
    Coupling(std::vector<QueueState> states, Source source, bool keep_history = false)
        : states_(std::move(states)), source_(std::move(source)), keep_history_(keep_history) {
        if (states_.empty()) throw std::invalid_argument("Coupling: no states");
        for (const auto& s : states_)
            if (s.size() != states_[0].size()) throw std::invalid_argument("Coupling: states differ in n");
        for (std::size_t a = 0; a < states_.size(); ++a)
            for (std::size_t b = a + 1; b < states_.size(); ++b) {
                Pair p{a, b, PairDistance(states_[a], states_[b]), {}, {}, {}};
                p.ordered_ab = p.dist.x_above() == 0;
                p.ordered_ba = p.dist.x_below() == 0;
                if (p.dist.equal()) p.coalesced_at = 0.0;
                if (keep_history_) p.history.push_back({0.0, p.dist.l1(), p.dist.linf()});
                pairs_.push_back(std::move(p));
            }
        changed_.resize(states_.size());
    }

    /// Applies all events with time <= t.
    void run_until(double t) {
        if (t > source_.horizon()) throw InsufficientStream(t, source_.horizon());
        while (source_.peek_time() <= t) step();
    }

    /// Applies events until every tracked pair has coalesced or the time
    /// limit is reached. Returns true if all pairs coalesced.
    bool run_until_coalesced(double limit) {
        while (!all_coalesced() && source_.peek_time() <= limit) step();
        return all_coalesced();
    }

    bool all_coalesced() const {
        return std::all_of(pairs_.begin(), pairs_.end(), [](const Pair& p) { return p.coalesced_at.has_value(); });
    }

    std::span<const QueueState> states() const noexcept { return states_; }
    QueueState& state(std::size_t i) { return states_[i]; }
    Source& source() noexcept { return source_; }
    const AuditReport& audit() const noexcept { return audit_; }
    double now() const noexcept { return now_; }

    std::size_t pair_index(std::size_t a, std::size_t b) const {
        if (a > b) std::swap(a, b);
        for (std::size_t i = 0; i < pairs_.size(); ++i)
            if (pairs_[i].a == a && pairs_[i].b == b) return i;
        throw std::out_of_range("Coupling: no such pair");
    }

    std::optional<double> coalescence_time(std::size_t a, std::size_t b) const {
        return pairs_[pair_index(a, b)].coalesced_at;
    }

    const PairDistance& distance(std::size_t a, std::size_t b) const { return pairs_[pair_index(a, b)].dist; }

    std::span<const PairSample> history(std::size_t a, std::size_t b) const {
        return pairs_[pair_index(a, b)].history;
    }

    void step() {
        const EventView e = source_.next();
        now_ = e.time;
        ++audit_.events;
        for (std::size_t i = 0; i < states_.size(); ++i) {
            auto& s = states_[i];
            if (e.kind == EventKind::Arrival) {
                changed_[i] = apply_arrival(s, e.queues);
            } else {
                changed_[i] = apply_departure(s, e.queues[0]) ? e.queues[0] : kNone;
            }
        }
        for (auto& p : pairs_) {
            const std::uint64_t l1 = p.dist.l1();
            const std::uint64_t linf = p.dist.linf();
            touch(p, changed_[p.a], e.kind);
            if (changed_[p.b] != changed_[p.a]) touch(p, changed_[p.b], e.kind);
            if (p.dist.l1() > l1) ++audit_.l1_increases;
            if (p.dist.linf() > linf) ++audit_.linf_increases;
            if ((p.ordered_ab && p.dist.x_above() > 0) || (p.ordered_ba && p.dist.x_below() > 0))
                ++audit_.order_violations;
            if (p.coalesced_at) {
                if (!p.dist.equal()) ++audit_.coalescence_breaks;
            } else if (p.dist.equal()) {
                p.coalesced_at = e.time;
            }
            if (keep_history_) p.history.push_back({e.time, p.dist.l1(), p.dist.linf()});
        }
    }

private:
    static constexpr std::uint32_t kNone = std::numeric_limits<std::uint32_t>::max();

    struct Pair {
        std::size_t a;
        std::size_t b;
        PairDistance dist;
        std::optional<double> coalesced_at;
        std::vector<PairSample> history;
        bool ordered_ab = false;  // states[a] <= states[b] componentwise at start
        bool ordered_ba = false;
    };

    // Recomputes the delta of queue j; `j` was modified in at least one replica.
    void touch(Pair& p, std::uint32_t j, EventKind kind) {
        if (j == kNone) return;
        const auto after = static_cast<std::int64_t>(states_[p.b][j]) - states_[p.a][j];
        std::int64_t before = after;
        const bool in_a = changed_[p.a] == j;
        const bool in_b = changed_[p.b] == j;
        const std::int64_t step = kind == EventKind::Arrival ? 1 : -1;
        if (in_b) before -= step;
        if (in_a) before += step;
        p.dist.update(before, after);
    }

    std::vector<QueueState> states_;
    Source source_;
    bool keep_history_;
    std::vector<Pair> pairs_;
    std::vector<std::uint32_t> changed_;  // queue modified in each replica by the current event, or kNone
    AuditReport audit_;
    double now_ = 0.0;
};

/// Each output equals evolve(states[i], stream, t).
inline std::vector<QueueState> coupled_evolve(std::vector<QueueState> states, const EventStream& stream, double t) {
    for (const auto& s : states)
        if (s.size() != stream.params.n) throw std::invalid_argument("coupled_evolve: state size differs from n");
    Coupling<StreamCursor> run(std::move(states), StreamCursor(stream));
    run.run_until(t);
    return {run.states().begin(), run.states().end()};
}

struct CoalescenceResult {
    double time = 0.0;
    bool censored = false;
    std::uint64_t path_length = 0;  // ||x - y||_1, the length of the adjacent-state path through min(x, y)
    std::uint64_t path_bound = 0;   // ||x||_1 + ||y||_1
};

/// True when plus = x + e_k for some k.
inline bool is_adjacent_above(const QueueState& x, const QueueState& plus) {
    if (x.size() != plus.size()) return false;
    std::uint32_t diffs = 0;
    for (std::uint32_t j = 0; j < x.size(); ++j) {
        if (plus[j] == x[j]) continue;
        if (plus[j] != x[j] + 1) return false;
        ++diffs;
    }
    return diffs == 1;
}

/// First time the two replicas agree under the shared stream, or the
/// horizon with censored = true.
template <EventSource Source>
CoalescenceResult path_coalescence(const QueueState& x, const QueueState& y, Source source) {
    if (x.size() != y.size()) throw std::invalid_argument("path_coalescence: states differ in n");
    const double horizon = source.horizon();
    Coupling<Source> run({x, y}, std::move(source));
    CoalescenceResult res;
    res.path_length = run.distance(0, 1).l1();
    res.path_bound = x.total() + y.total();
    if (run.run_until_coalesced(horizon)) {
        res.time = *run.coalescence_time(0, 1);
    } else {
        res.time = horizon;
        res.censored = true;
    }
    return res;
}

inline CoalescenceResult path_coalescence(const QueueState& x, const QueueState& y, const EventStream& stream) {
    return path_coalescence(x, y, StreamCursor(stream));
}

template <EventSource Source>
CoalescenceResult coalescence_time(const QueueState& x, const QueueState& plus, Source source) {
    if (!is_adjacent_above(x, plus))
        throw std::invalid_argument("coalescence_time: second state must equal the first plus one customer");
    return path_coalescence(x, plus, std::move(source));
}

inline CoalescenceResult coalescence_time(const QueueState& x, const QueueState& plus, const EventStream& stream) {
    return coalescence_time(x, plus, StreamCursor(stream));
}

/// Censoring horizon for coalescence experiments: 50 ln(n) / (1 - lambda).
inline double default_censoring_horizon(const ModelParams& p) {
    return 50.0 * std::max(std::log(static_cast<double>(p.n)), 1.0) / (1.0 - p.lambda);
}

struct MixingPoint {
    double t = 0.0;
    double pr_neq = 0.0;
    double se_neq = 0.0;
    double deficit = 0.0;
    double se_deficit = 0.0;
    double bound_lower = 0.0;  // lambda * exp(-(1 + lambda d) t)
};

struct MixingProfile {
    ModelParams params;
    std::size_t replicas = 0;
    std::vector<MixingPoint> points;
    std::vector<double> coalescence;  // per replica; +inf when not coalesced by the last grid time
    bool few_replicas_warning = false;
};

struct MixingOptions {
    std::optional<double> partner_warmup;  // default_warmup(params) when unset
    unsigned threads = 0;
};

/// X starts empty; its partner Y runs an independent warm-up on its own
/// stream and is then driven by the stream shared with X. Reports the
/// fraction of replicas with X_t != Y_t and the deficit lambda - mean u(1, X_t).
inline MixingProfile mixing_profile(const ModelParams& params, std::span<const double> grid, std::size_t replicas,
                                    std::uint64_t seed_base, const MixingOptions& opt = {}) {
    params.validate();
    if (grid.empty()) throw std::invalid_argument("mixing_profile: empty time grid");
    if (!std::is_sorted(grid.begin(), grid.end()) || grid.front() < 0.0)
        throw std::invalid_argument("mixing_profile: grid must be sorted and nonnegative");
    const double warmup = opt.partner_warmup.value_or(default_warmup(params));
    const double horizon = grid.back();

    std::vector<std::vector<double>> busy(replicas, std::vector<double>(grid.size()));
    std::vector<double> coalesced(replicas, std::numeric_limits<double>::infinity());

    parallel_for(
        replicas,
        [&](std::size_t r) {
            const std::uint64_t seed = derive_seed(seed_base, r);
            const QueueState partner =
                evolve(QueueState::empty(params.n), EventStream{params, derive_seed(seed, "partner-warmup"), warmup},
                       warmup);
            Coupling<StreamCursor> run({QueueState::empty(params.n), partner},
                                       StreamCursor(EventStream{params, derive_seed(seed, "shared"), horizon}));
            for (std::size_t g = 0; g < grid.size(); ++g) {
                if (run.all_coalesced()) {
                    advance(run.state(0), run.source(), grid[g]);
                } else {
                    run.run_until_coalesced(grid[g]);
                    if (run.all_coalesced()) advance(run.state(0), run.source(), grid[g]);
                }
                busy[r][g] = static_cast<double>(run.state(0).ell(1)) / params.n;
            }
            if (auto tc = run.coalescence_time(0, 1)) coalesced[r] = *tc;
        },
        opt.threads);

    MixingProfile prof;
    prof.params = params;
    prof.replicas = replicas;
    prof.coalescence = coalesced;
    prof.few_replicas_warning = replicas < 100;
    std::vector<double> col(replicas);
    for (std::size_t g = 0; g < grid.size(); ++g) {
        MixingPoint pt;
        pt.t = grid[g];
        std::size_t apart = 0;
        for (std::size_t r = 0; r < replicas; ++r) apart += coalesced[r] > grid[g] ? 1 : 0;
        pt.pr_neq = replicas ? static_cast<double>(apart) / replicas : 0.0;
        pt.se_neq = stats::proportion_se(pt.pr_neq, replicas);
        for (std::size_t r = 0; r < replicas; ++r) col[r] = busy[r][g];
        const auto m = stats::iid_mean(col);
        pt.deficit = params.lambda - m.mean;
        pt.se_deficit = m.se;
        pt.bound_lower = params.lambda * std::exp(-(1.0 + params.lambda * params.d) * grid[g]);
        prof.points.push_back(pt);
    }
    return prof;
}

/// Least-squares fit of ln Pr(X_t != Y_t) against t over the decaying
/// segment: grid points after the profile first drops to `start_below` or
/// lower, while at least `min_apart` replicas are still apart.
inline stats::LinearFit fit_decay(const MixingProfile& prof, double start_below = 0.9, std::size_t min_apart = 5) {
    std::vector<double> ts, ys;
    bool started = false;
    for (const auto& p : prof.points) {
        if (!started && p.pr_neq <= start_below) started = true;
        if (!started) continue;
        if (p.pr_neq * static_cast<double>(prof.replicas) < static_cast<double>(min_apart) - 0.5) break;
        ts.push_back(p.t);
        ys.push_back(std::log(p.pr_neq));
    }
    return stats::linear_fit(ts, ys);
}

}  // namespace supersim
