#include <gtest/gtest.h>

#include <cmath>

#include "supersim/meanfield.hpp"

using namespace supersim::meanfield;

TEST(MeanField, FixedPointValues) {
    EXPECT_DOUBLE_EQ(fixed_point(0.5, 2, 3).at(3), 0.0078125);
    const auto d1 = fixed_point(0.3, 1, 6);
    for (std::uint32_t k = 1; k <= 6; ++k) EXPECT_NEAR(d1.at(k), std::pow(0.3, k), 1e-15);
    const auto fp = fixed_point(0.7, 2, 4);
    EXPECT_NEAR(fp.at(1), 0.7, 1e-15);
    EXPECT_NEAR(fp.at(2), 0.343, 1e-15);
    EXPECT_NEAR(fp.at(3), 0.0823543, 1e-15);
    EXPECT_NEAR(fp.at(4), std::pow(0.7, 15), 1e-16);
    EXPECT_NEAR(fp.at(4), 0.00475, 1e-5);
    EXPECT_THROW(fixed_point(0.5, 2, 0), std::invalid_argument);
    for (std::uint32_t k = 1; k <= 4; ++k) EXPECT_NEAR(fixed_point_level(0.7, 2, k), fp.at(k), 1e-15);
}

TEST(MeanField, DerivativeExamples) {
    State zero{std::vector<double>(5, 0.0)};
    const auto dz = derivative(zero, 0.6, 2);
    EXPECT_DOUBLE_EQ(dz[0], 0.6);
    for (std::size_t k = 1; k < dz.size(); ++k) EXPECT_DOUBLE_EQ(dz[k], 0.0);

    State s{{0.5, 0.125, 0.0, 0.0}};
    EXPECT_DOUBLE_EQ(derivative(s, 0.5, 2)[0], 0.0);
}

TEST(MeanField, FixedPointIsStationary) {
    for (double lambda : {0.3, 0.5, 0.7, 0.9}) {
        for (std::uint32_t d : {2u, 3u}) {
            const auto K = default_truncation(lambda, d, 1e-14);
            const auto fp = fixed_point(lambda, d, K);
            for (double r : derivative(fp, lambda, d)) EXPECT_LT(std::abs(r), 1e-12) << lambda << " " << d;
        }
    }
}

TEST(MeanField, FixedPointTrajectoryIsConstant) {
    const auto fp = fixed_point(0.5, 2, 12);
    const auto traj = integrate(fp, 0.5, 2, 10.0, 0.01, {100, false});
    for (const auto& s : traj.states) EXPECT_LT(max_abs_diff(s, fp), 1e-10);
}

TEST(MeanField, ConvergesFromEmpty) {
    const State zero{std::vector<double>(12, 0.0)};
    const auto traj = integrate(zero, 0.5, 2, 50.0, 0.01, {1000, true});
    EXPECT_DOUBLE_EQ(traj.times.back(), 50.0);
    EXPECT_LT(max_abs_diff(traj.states.back(), fixed_point(0.5, 2, 12)), 1e-6);
    EXPECT_LT(traj.step_halving_error, 1e-9);
    for (const auto& s : traj.states) EXPECT_LE(s.monotonicity_violation(), 0.0);
}

TEST(MeanField, TruncationLevelDoesNotMatter) {
    const double lambda = 0.5;
    std::uint32_t K = 1;
    while (fixed_point_level(lambda, 2, K) >= 1e-12) ++K;
    const auto a = integrate(State{std::vector<double>(K, 0.0)}, lambda, 2, 20.0, 0.01, {100, false});
    const auto b = integrate(State{std::vector<double>(K + 5, 0.0)}, lambda, 2, 20.0, 0.01, {100, false});
    ASSERT_EQ(a.states.size(), b.states.size());
    for (std::size_t i = 0; i < a.states.size(); ++i) EXPECT_LT(max_abs_diff(a.states[i], b.states[i]), 1e-10);
}

TEST(MeanField, MassIdentity) {
    const State s{{0.9, 0.6, 0.2, 0.05, 0.01}};
    for (std::uint32_t d : {1u, 2u, 3u}) {
        double sum = 0.0;
        for (double x : derivative(s, 0.8, d)) sum += x;
        EXPECT_NEAR(sum, mass_derivative(s, 0.8, d), 1e-15);
    }
}

TEST(MeanField, RejectsBadInputs) {
    const State zero{std::vector<double>(4, 0.0)};
    EXPECT_THROW(integrate(zero, 0.5, 2, 1.0, 0.0), std::invalid_argument);
    EXPECT_THROW(integrate(zero, 0.5, 2, 1.0, 0.3), std::invalid_argument);
    EXPECT_THROW(integrate(State{{0.2, 0.5}}, 0.5, 2, 1.0, 0.1), InvariantViolation);
    EXPECT_THROW(integrate(zero, 0.9, 2, 20.0, 2.5), InvariantViolation);
}
