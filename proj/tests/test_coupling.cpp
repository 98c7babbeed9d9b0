#include <gtest/gtest.h>

#include <algorithm>
#include <cstdlib>

#include "supersim/coupling.hpp"

using namespace supersim;

namespace {

struct Brute {
    std::uint64_t l1 = 0, linf = 0;
    bool x_le_y = true, y_le_x = true;
};

Brute brute(const QueueState& x, const QueueState& y) {
    Brute b;
    for (std::uint32_t j = 0; j < x.size(); ++j) {
        const auto diff = static_cast<std::int64_t>(y[j]) - x[j];
        b.l1 += static_cast<std::uint64_t>(std::llabs(diff));
        b.linf = std::max<std::uint64_t>(b.linf, static_cast<std::uint64_t>(std::llabs(diff)));
        if (diff < 0) b.x_le_y = false;
        if (diff > 0) b.y_le_x = false;
    }
    return b;
}

QueueState random_state(Xoshiro256& rng, std::uint32_t n, std::uint32_t max_len) {
    std::vector<std::uint32_t> x(n);
    for (auto& v : x) v = rng.below(max_len + 1);
    return QueueState(std::move(x));
}

}  // namespace

TEST(CoupledEvolve, MatchesIndependentEvolve) {
    const EventStream stream{ModelParams{12, 0.8, 2}, 55, 40.0};
    Xoshiro256 rng(1);
    std::vector<QueueState> states;
    for (int i = 0; i < 4; ++i) states.push_back(random_state(rng, 12, 6));
    const auto out = coupled_evolve(states, stream, 40.0);
    for (std::size_t i = 0; i < states.size(); ++i) EXPECT_EQ(out[i], evolve(states[i], stream, 40.0));
}

TEST(CoupledEvolve, MixedSizesRejected) {
    const EventStream stream{ModelParams{3, 0.5, 2}, 1, 1.0};
    EXPECT_THROW(coupled_evolve({QueueState::empty(3), QueueState::empty(2)}, stream, 1.0), std::invalid_argument);
}

TEST(CoupledEvolve, IdenticalStatesStayIdentical) {
    Xoshiro256 rng(2);
    const auto x = random_state(rng, 10, 5);
    Coupling<StreamCursor> run({x, x}, StreamCursor(EventStream{ModelParams{10, 0.7, 3}, 9, 100.0}));
    run.run_until(100.0);
    EXPECT_EQ(run.states()[0], run.states()[1]);
    EXPECT_EQ(run.coalescence_time(0, 1), 0.0);
    EXPECT_TRUE(run.audit().clean());
}

TEST(CoupledEvolve, OrderPreservedAtEveryEvent) {
    const QueueState x(std::vector<std::uint32_t>{0, 0});
    const QueueState y(std::vector<std::uint32_t>{1, 0});
    for (std::uint64_t seed = 0; seed < 50; ++seed) {
        Coupling<StreamCursor> run({x, y}, StreamCursor(EventStream{ModelParams{2, 0.5, 2}, seed, 30.0}));
        while (run.source().peek_time() <= 30.0) {
            run.step();
            const auto b = brute(run.states()[0], run.states()[1]);
            ASSERT_TRUE(b.x_le_y);
        }
        EXPECT_TRUE(run.audit().clean());
    }
}

// 1000 random adjacent pairs: after every event the l1 distance is either
// unchanged or one smaller, and the incremental tracker matches a recount.
TEST(CoupledEvolve, AdjacentPairL1StepsDownByAtMostOne) {
    Xoshiro256 rng(314);
    for (int trial = 0; trial < 1000; ++trial) {
        const std::uint32_t n = 2 + rng.below(8);
        const std::uint32_t d = 1 + rng.below(3);
        const double lambda = 0.2 + 0.7 * rng.uniform();
        const auto x = random_state(rng, n, 5);
        std::vector<std::uint32_t> plus(x.lengths().begin(), x.lengths().end());
        ++plus[rng.below(n)];
        Coupling<StreamCursor> run({x, QueueState(plus)},
                                   StreamCursor(EventStream{ModelParams{n, lambda, d}, rng(), 20.0}));
        std::uint64_t prev = 1;
        while (run.source().peek_time() <= 20.0) {
            run.step();
            const auto b = brute(run.states()[0], run.states()[1]);
            const auto& dist = run.distance(0, 1);
            ASSERT_EQ(dist.l1(), b.l1);
            ASSERT_EQ(dist.linf(), b.linf);
            ASSERT_TRUE(b.l1 == prev || b.l1 + 1 == prev) << "trial " << trial;
            ASSERT_TRUE(b.x_le_y);
            prev = b.l1;
        }
        ASSERT_TRUE(run.audit().clean());
    }
}

TEST(CoupledEvolve, HistoryRecordsEveryEvent) {
    Xoshiro256 rng(8);
    Coupling<StreamCursor> run({random_state(rng, 5, 3), random_state(rng, 5, 3)},
                               StreamCursor(EventStream{ModelParams{5, 0.5, 2}, 3, 10.0}), true);
    run.run_until(10.0);
    const auto h = run.history(0, 1);
    EXPECT_EQ(h.size(), run.audit().events + 1);
    for (std::size_t i = 1; i < h.size(); ++i) {
        EXPECT_LE(h[i].l1, h[i - 1].l1);
        EXPECT_LE(h[i].linf, h[i - 1].linf);
    }
}

TEST(Coalescence, FirstEventDepartureFromExtraCustomer) {
    const std::vector<Event> events{
        {EventKind::Departure, 0.4, {0}},
        {EventKind::Arrival, 0.9, {1, 2}},
    };
    const auto x = QueueState::empty(3);
    const QueueState plus(std::vector<std::uint32_t>{1, 0, 0});
    const auto r = coalescence_time(x, plus, RecordedCursor(events, 5.0));
    EXPECT_FALSE(r.censored);
    EXPECT_DOUBLE_EQ(r.time, 0.4);
}

TEST(Coalescence, RejectsNonAdjacentInputs) {
    const EventStream stream{ModelParams{3, 0.5, 2}, 1, 10.0};
    const auto x = QueueState::empty(3);
    EXPECT_THROW(coalescence_time(x, x, stream), std::invalid_argument);
    EXPECT_THROW(coalescence_time(x, QueueState(std::vector<std::uint32_t>{2, 0, 0}), stream), std::invalid_argument);
    EXPECT_THROW(coalescence_time(x, QueueState(std::vector<std::uint32_t>{1, 1, 0}), stream), std::invalid_argument);
}

TEST(Coalescence, CensoredWhenHorizonTooShort) {
    const auto x = QueueState(std::vector<std::uint32_t>{30, 0});
    const auto plus = QueueState(std::vector<std::uint32_t>{31, 0});
    const auto r = coalescence_time(x, plus, EventStream{ModelParams{2, 0.5, 2}, 1, 0.5});
    EXPECT_TRUE(r.censored);
    EXPECT_EQ(r.time, 0.5);
}

TEST(Coalescence, AdjacentPairsCoalesceQuickly) {
    const ModelParams p{100, 0.5, 2};
    Xoshiro256 rng(2);
    std::vector<double> times;
    std::uint32_t worst_max = 0;
    for (int trial = 0; trial < 500; ++trial) {
        const auto x = evolve(QueueState::empty(100), EventStream{p, rng(), 60.0}, 60.0);
        std::vector<std::uint32_t> plus(x.lengths().begin(), x.lengths().end());
        ++plus[rng.below(100)];
        worst_max = std::max(worst_max, x.max_length() + 1);
        const auto r = coalescence_time(x, QueueState(plus), EventStream{p, rng(), 500.0});
        ASSERT_FALSE(r.censored);
        times.push_back(r.time);
    }
    std::nth_element(times.begin(), times.begin() + 250, times.end());
    const double median = times[250];
    EXPECT_LT(median, 4.0 * (worst_max + std::log(100.0)));
}

TEST(PathCoalescence, EqualStatesCoalesceImmediately) {
    const QueueState x(std::vector<std::uint32_t>{1, 2});
    const auto r = path_coalescence(x, x, EventStream{ModelParams{2, 0.5, 2}, 1, 10.0});
    EXPECT_EQ(r.time, 0.0);
    EXPECT_FALSE(r.censored);
    EXPECT_EQ(r.path_length, 0u);
}

TEST(PathCoalescence, PathLengthMetadata) {
    const QueueState x(std::vector<std::uint32_t>{2, 0});
    const QueueState y(std::vector<std::uint32_t>{0, 1});
    const auto r = path_coalescence(x, y, EventStream{ModelParams{2, 0.5, 2}, 1, 1000.0});
    EXPECT_EQ(r.path_bound, 3u);
    EXPECT_LE(r.path_length, 3u);
    EXPECT_FALSE(r.censored);
}

TEST(PathCoalescence, EmptyAgainstWarmedUpState) {
    const ModelParams p{200, 0.5, 2};
    Xoshiro256 rng(77);
    std::vector<double> times;
    for (int trial = 0; trial < 100; ++trial) {
        const auto y = evolve(QueueState::empty(200), EventStream{p, rng(), 100.0}, 100.0);
        const auto r = path_coalescence(QueueState::empty(200), y, EventStream{p, rng(), default_censoring_horizon(p)});
        ASSERT_FALSE(r.censored);
        times.push_back(r.time);
    }
    std::nth_element(times.begin(), times.begin() + 50, times.end());
    EXPECT_LT(times[50], 10.0 * std::log(200.0));
}

TEST(MixingProfile, StartsApartWithFullDeficit) {
    const ModelParams p{50, 0.7, 2};
    const std::vector<double> grid{0.0, 1.0, 5.0, 20.0, 80.0};
    const auto prof = mixing_profile(p, grid, 120, 5);
    ASSERT_EQ(prof.points.size(), grid.size());
    EXPECT_FALSE(prof.few_replicas_warning);
    EXPECT_NEAR(prof.points[0].pr_neq, 1.0, 0.02);
    EXPECT_DOUBLE_EQ(prof.points[0].deficit, 0.7);
    EXPECT_DOUBLE_EQ(prof.points[0].bound_lower, 0.7);
    for (std::size_t i = 1; i < prof.points.size(); ++i) {
        EXPECT_LE(prof.points[i].pr_neq, prof.points[i - 1].pr_neq);
        EXPECT_GE(prof.points[i].deficit + 3 * prof.points[i].se_deficit, prof.points[i].bound_lower);
    }
}

TEST(MixingProfile, RejectsUnsortedGridAndWarnsOnFewReplicas) {
    const ModelParams p{5, 0.5, 2};
    const std::vector<double> bad{1.0, 0.5};
    EXPECT_THROW(mixing_profile(p, bad, 10, 1), std::invalid_argument);
    const std::vector<double> grid{0.0, 1.0};
    EXPECT_TRUE(mixing_profile(p, grid, 10, 1).few_replicas_warning);
}

TEST(MixingProfile, DeterministicGivenSeed) {
    const ModelParams p{20, 0.6, 2};
    const std::vector<double> grid{0.0, 2.0, 10.0};
    const auto a = mixing_profile(p, grid, 30, 4, {std::nullopt, 1});
    const auto b = mixing_profile(p, grid, 30, 4, {std::nullopt, 3});
    EXPECT_EQ(a.coalescence, b.coalescence);
    for (std::size_t i = 0; i < grid.size(); ++i) EXPECT_EQ(a.points[i].deficit, b.points[i].deficit);
}
