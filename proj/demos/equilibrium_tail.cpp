// Simulates the power-of-two-choices system to equilibrium and compares the
// empirical tail u(k) with the mean-field fixed point.

#include <cstdio>

#include "supersim/meanfield.hpp"
#include "supersim/simulator.hpp"

int main() {
    using namespace supersim;
    const ModelParams p{2000, 0.9, 2};
    const auto snaps = run_trajectory(p, QueueState::empty(p.n), default_plan(p, 400), 42);
    const auto est = estimate_tail(snaps);
    const auto fp = meanfield::fixed_point(p.lambda, p.d, 10);

    std::printf("%3s %12s %10s %12s\n", "k", "u_hat", "se", "mean-field");
    for (std::uint32_t k = 1; k < est.levels(); ++k)
        std::printf("%3u %12.6f %10.6f %12.6f\n", k, est.u_hat(k), est.se(k), fp.at(k));
    std::printf("warm-up z score: %.2f\n", warmup_z_score(snaps));
}
