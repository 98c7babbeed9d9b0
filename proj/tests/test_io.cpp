#include <gtest/gtest.h>

#include <sstream>

#include "supersim/io.hpp"

using namespace supersim;

TEST(Io, SnapshotCsvPadsLevels) {
    std::vector<Snapshot> snaps{Snapshot::of(0.0, QueueState::empty(2)),
                                Snapshot::of(1.5, QueueState(std::vector<std::uint32_t>{2, 1}))};
    std::ostringstream os;
    io::write_snapshots_csv(os, snaps);
    EXPECT_EQ(os.str(), "t,total,max,ell_0,ell_1,ell_2\n0,0,0,2,0,0\n1.5,3,2,2,2,1\n");
}

TEST(Io, SummaryJson) {
    const QueueState x(std::vector<std::uint32_t>{1, 0});
    std::vector<Snapshot> snaps(4, Snapshot::of(0.0, x));
    const auto j = io::summary_json(ModelParams{2, 0.5, 2}, SamplingPlan{0.0, 1.0, 4}, estimate_tail(snaps));
    EXPECT_EQ(j["params"]["n"], 2);
    EXPECT_EQ(j["u"].size(), 2u);
    EXPECT_DOUBLE_EQ(j["u"][1].get<double>(), 0.5);
    EXPECT_EQ(j["max_hist"]["1"], 4);
    EXPECT_EQ(j["plan"]["count"], 4);
}

TEST(Io, DistributionCsv) {
    const oracle::CappedChainSpec spec{2, 0.5, 2, 1};
    const std::vector<double> p{0.25, 0.25, 0.25, 0.25};
    std::ostringstream os;
    io::write_distribution_csv(os, spec, p);
    EXPECT_EQ(os.str(), "state_index,x1,x2,prob\n0,0,0,0.25\n1,0,1,0.25\n2,1,0,0.25\n3,1,1,0.25\n");
}

TEST(Io, MixingAndCoalescenceCsv) {
    MixingProfile prof;
    prof.points.push_back({0.0, 1.0, 0.0, 0.7, 0.0, 0.7});
    std::ostringstream os;
    io::write_mixing_csv(os, prof);
    EXPECT_EQ(os.str(), "t,pr_neq,se_neq,deficit,se_deficit,bound_lower\n0,1,0,0.69999999999999996,0,0.69999999999999996\n");
    std::ostringstream cs;
    const std::vector<double> times{0.5, std::numeric_limits<double>::infinity()};
    io::write_coalescence_csv(cs, times);
    EXPECT_EQ(cs.str(), "coalescence_time\n0.5\ninf\n");
}

TEST(Io, PredictionJson) {
    const auto j = io::to_json(theory::predict(1'000'000, 0.5, 2));
    EXPECT_EQ(j["i_d"], 2);
    EXPECT_EQ(j["m_d"], 3);
    const auto j1 = io::to_json(theory::predict(100, 0.5, 1));
    EXPECT_TRUE(j1["m_d"].is_null());
    EXPECT_FALSE(j1["d1_max_cdf"].empty());
}
