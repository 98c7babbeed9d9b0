#include <gtest/gtest.h>

#include <cmath>
#include <set>

#include "supersim/rng.hpp"
#include "supersim/stats.hpp"

using namespace supersim;

TEST(Rng, SameSeedSameSequence) {
    Xoshiro256 a(42), b(42);
    for (int i = 0; i < 1000; ++i) ASSERT_EQ(a(), b());
}

TEST(Rng, LabelsGiveDistinctSeeds) {
    std::set<std::uint64_t> seen;
    for (std::uint64_t s : {0ULL, 1ULL, 2ULL, 0xFFFFFFFFFFFFFFFFULL})
        for (auto label : {"arrival-times", "choices", "departure-times", "selections"})
            seen.insert(derive_seed(s, label));
    EXPECT_EQ(seen.size(), 16u);
    EXPECT_NE(derive_seed(7, 0), derive_seed(7, 1));
}

TEST(Rng, UniformAndBoundedRanges) {
    Xoshiro256 r(3);
    for (int i = 0; i < 100000; ++i) {
        const double u = r.uniform();
        ASSERT_GE(u, 0.0);
        ASSERT_LT(u, 1.0);
        ASSERT_LT(r.below(7), 7u);
        ASSERT_GT(r.uniform_open_zero(), 0.0);
    }
}

TEST(Rng, BelowIsUniform) {
    Xoshiro256 r(11);
    constexpr int kBins = 5, kDraws = 500000;
    int counts[kBins] = {};
    for (int i = 0; i < kDraws; ++i) ++counts[r.below(kBins)];
    // chi-square with 4 dof; 99.9% quantile is 18.47
    double chi = 0.0;
    for (int c : counts) chi += std::pow(c - kDraws / kBins, 2) / (kDraws / kBins);
    EXPECT_LT(chi, 18.47);
}

TEST(Rng, ExponentialAndGeometricMoments) {
    Xoshiro256 r(5);
    std::vector<double> e(200000), g(200000);
    for (auto& x : e) x = r.exponential(4.0);
    for (auto& x : g) x = r.geometric_tail(0.5);
    const auto me = stats::iid_mean(e);
    const auto mg = stats::iid_mean(g);
    EXPECT_NEAR(me.mean, 0.25, 4 * me.se);
    EXPECT_NEAR(mg.mean, 1.0, 4 * mg.se);  // lambda / (1 - lambda)
    EXPECT_EQ(r.geometric_tail(0.0), 0u);
}
