#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace supersim {

/// Parameters of the supermarket model: n FIFO unit-rate queues, Poisson
/// arrivals at total rate lambda * n, each arrival joins the shortest of d
/// queues sampled uniformly with replacement.
struct ModelParams {
    std::uint32_t n = 1;
    double lambda = 0.5;
    std::uint32_t d = 1;

    void validate() const {
        if (n < 1) throw std::invalid_argument("ModelParams: n must be >= 1");
        if (d < 1) throw std::invalid_argument("ModelParams: d must be >= 1");
        if (!(lambda > 0.0 && lambda < 1.0))
            throw std::invalid_argument("ModelParams: lambda must lie in (0, 1)");
    }

    double arrival_rate() const noexcept { return lambda * static_cast<double>(n); }
    double departure_rate() const noexcept { return static_cast<double>(n); }
};

/// Queue lengths together with the level counts ell(k) = #{j : x(j) >= k}.
///
/// The level-count vector always has size max + 1, so ell(0) = n and the
/// last entry is positive unless the state is empty.
class QueueState {
public:
    QueueState() = default;

    explicit QueueState(std::uint32_t n) : lengths_(n, 0), levels_{n} {}

    explicit QueueState(std::vector<std::uint32_t> lengths) : lengths_(std::move(lengths)) {
        rebuild_levels();
    }

    static QueueState empty(std::uint32_t n) { return QueueState(n); }

    std::uint32_t size() const noexcept { return static_cast<std::uint32_t>(lengths_.size()); }
    std::span<const std::uint32_t> lengths() const noexcept { return lengths_; }
    std::uint32_t operator[](std::size_t j) const { return lengths_[j]; }

    std::span<const std::uint64_t> level_counts() const noexcept { return levels_; }

    std::uint64_t ell(std::size_t k) const noexcept { return k < levels_.size() ? levels_[k] : 0; }

    std::uint32_t max_length() const noexcept { return static_cast<std::uint32_t>(levels_.size() - 1); }

    std::uint64_t total() const noexcept { return total_; }

    void increment(std::uint32_t j) {
        check_index(j);
        const std::uint32_t next = ++lengths_[j];
        if (next >= levels_.size()) levels_.push_back(0);
        ++levels_[next];
        ++total_;
    }

    /// Returns false (state unchanged) when queue j is empty.
    bool decrement(std::uint32_t j) {
        check_index(j);
        const std::uint32_t len = lengths_[j];
        if (len == 0) return false;
        --levels_[len];
        if (len + 1 == levels_.size() && levels_[len] == 0) levels_.pop_back();
        --lengths_[j];
        --total_;
        return true;
    }

    /// Recomputes level counts from lengths; used by audits.
    std::vector<std::uint64_t> recompute_levels() const {
        std::uint32_t top = 0;
        for (auto x : lengths_) top = std::max(top, x);
        std::vector<std::uint64_t> out(static_cast<std::size_t>(top) + 1, 0);
        for (auto x : lengths_)
            for (std::uint32_t k = 0; k <= x; ++k) ++out[k];
        return out;
    }

    bool levels_consistent() const {
        return recompute_levels() == std::vector<std::uint64_t>(levels_.begin(), levels_.end()) &&
               total_ == std::accumulate(lengths_.begin(), lengths_.end(), std::uint64_t{0});
    }

    friend bool operator==(const QueueState& a, const QueueState& b) noexcept {
        return a.lengths_ == b.lengths_;
    }

private:
    void check_index(std::uint32_t j) const {
        if (j >= lengths_.size())
            throw std::out_of_range("queue index " + std::to_string(j) + " out of range for n=" +
                                    std::to_string(lengths_.size()));
    }

    void rebuild_levels() {
        auto lv = recompute_levels();
        levels_.assign(lv.begin(), lv.end());
        total_ = std::accumulate(lengths_.begin(), lengths_.end(), std::uint64_t{0});
    }

    std::vector<std::uint32_t> lengths_;
    std::vector<std::uint64_t> levels_{0};
    std::uint64_t total_ = 0;
};

/// Index of the queue an arrival joins: the first entry of `choices` that
/// attains the minimum length among the chosen queues.
inline std::uint32_t select_shortest(const QueueState& state, std::span<const std::uint32_t> choices) {
    if (choices.empty()) throw std::invalid_argument("arrival needs at least one choice");
    std::uint32_t best = choices[0];
    if (best >= state.size()) throw std::out_of_range("choice index out of range");
    std::uint32_t best_len = state[best];
    for (std::size_t i = 1; i < choices.size(); ++i) {
        const std::uint32_t c = choices[i];
        if (c >= state.size()) throw std::out_of_range("choice index out of range");
        if (state[c] < best_len) {
            best = c;
            best_len = state[c];
        }
    }
    return best;
}

/// Returns the queue that received the customer.
inline std::uint32_t apply_arrival(QueueState& state, std::span<const std::uint32_t> choices) {
    const std::uint32_t j = select_shortest(state, choices);
    state.increment(j);
    return j;
}

/// Departures from empty queues are ignored. Returns true for a real departure.
inline bool apply_departure(QueueState& state, std::uint32_t selection) {
    return state.decrement(selection);
}

struct Observables {
    std::vector<std::uint64_t> ell;  // ell[k] for k = 0..max
    std::vector<double> u;           // u[k] = ell[k] / n
    std::uint64_t total = 0;
    std::uint32_t max = 0;
};

inline Observables observables(const QueueState& state) {
    Observables out;
    out.ell.assign(state.level_counts().begin(), state.level_counts().end());
    out.u.resize(out.ell.size());
    const double n = static_cast<double>(state.size());
    for (std::size_t k = 0; k < out.ell.size(); ++k) out.u[k] = static_cast<double>(out.ell[k]) / n;
    out.total = state.total();
    out.max = state.max_length();
    return out;
}

}  // namespace supersim
