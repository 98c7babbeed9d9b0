#pragma once

#include <json.hpp>

#include <chrono>
#include <cmath>
#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "supersim/coupling.hpp"
#include "supersim/meanfield.hpp"
#include "supersim/oracle.hpp"
#include "supersim/poisson.hpp"
#include "supersim/simulator.hpp"
#include "supersim/stats.hpp"
#include "supersim/theory.hpp"

namespace supersim::checks {

using json = nlohmann::json;

struct CheckOptions {
    std::uint64_t seed = 20060101;
    bool quick = false;  // smaller shared runs for checks 5-10; tolerances unchanged
    unsigned threads = 0;
};

struct CheckResult {
    std::string check;
    bool passed = false;
    json observed;
    json expected;
    json tolerance;
    std::string summary;
    double seconds = 0.0;

    json verdict() const {
        return {{"check", check}, {"passed", passed}, {"observed", observed}, {"expected", expected}, {"tolerance", tolerance}};
    }
};

/// Expensive runs shared between checks, computed on first use.
class Context {
public:
    explicit Context(CheckOptions opt) : opt_(opt) {}

    const CheckOptions& options() const noexcept { return opt_; }

    std::size_t scaled(std::size_t full, std::size_t quick) const { return opt_.quick ? quick : full; }

    std::uint64_t seed_for(std::string_view name) const { return derive_seed(opt_.seed, name); }

    /// n = 10^4, lambda = 0.7, d = 2, empty start, default warm-up, interval 2.
    const std::vector<Snapshot>& moderate_run() {
        if (!moderate_) {
            const ModelParams p{10'000, 0.7, 2};
            moderate_ = run_trajectory(p, QueueState::empty(p.n),
                                       default_plan(p, static_cast<std::uint32_t>(scaled(2000, 300))),
                                       seed_for("moderate-run"));
        }
        return *moderate_;
    }

    /// n = 10^3, lambda = 0.7, d = 2: grid 0, 0.25, ..., 3 followed by 4, 5, ..., 40 ln n / (1 - lambda).
    const MixingProfile& mixing() {
        if (!mixing_) {
            const ModelParams p{1000, 0.7, 2};
            std::vector<double> grid;
            for (int i = 0; i <= 12; ++i) grid.push_back(0.25 * i);
            const double end = mixing_deadline(p);
            for (double t = 4.0; t < end; t += 1.0) grid.push_back(t);
            grid.push_back(end);
            mixing_ = mixing_profile(p, grid, scaled(500, 100), seed_for("mixing"), {std::nullopt, opt_.threads});
        }
        return *mixing_;
    }

    static double mixing_deadline(const ModelParams& p) {
        return 40.0 * std::log(static_cast<double>(p.n)) / (1.0 - p.lambda);
    }

private:
    CheckOptions opt_;
    std::optional<std::vector<Snapshot>> moderate_;
    std::optional<MixingProfile> mixing_;
};

namespace detail {

inline std::string fmt(double v) {
    std::ostringstream os;
    os.precision(4);
    os << v;
    return os.str();
}

}  // namespace detail

// 1. Shared-stream coupling: l1 and l_inf distances never increase, ordered
// pairs stay ordered, and coalesced pairs stay coalesced. Every event is
// audited by recomputing the distances from scratch.
inline CheckResult coupling_contraction(Context& ctx) {
    CheckResult r;
    const std::size_t pairs = 1000;
    const double lambdas[] = {0.3, 0.5, 0.9};
    const std::uint32_t n = 50;
    const double horizon = 40.0;
    Xoshiro256 rng(ctx.seed_for("coupling-contraction"));
    std::uint64_t events = 0, l1_up = 0, linf_up = 0, order_broken = 0, uncoalesced = 0, coalesced = 0;
    AuditReport tracker_audit;
    for (std::size_t i = 0; i < pairs; ++i) {
        const ModelParams p{n, lambdas[i % 3], static_cast<std::uint32_t>(1 + (i / 3) % 3)};
        std::vector<std::uint32_t> x(n), y(n);
        for (auto& v : x) v = rng.below(21);
        switch (i % 4) {
            case 0:  // independent
                for (auto& v : y) v = rng.below(21);
                break;
            case 1:  // ordered
                for (std::uint32_t j = 0; j < n; ++j) y[j] = std::min(20u, x[j] + rng.below(4));
                break;
            case 2: {  // adjacent
                y = x;
                std::uint32_t j = rng.below(n);
                while (y[j] == 20) j = rng.below(n);
                ++y[j];
                break;
            }
            default:  // identical
                y = x;
        }
        Coupling<StreamCursor> run({QueueState(x), QueueState(y)}, StreamCursor(EventStream{p, rng(), horizon}));
        auto brute = [&] {
            std::uint64_t l1 = 0, linf = 0;
            bool le = true, ge = true;
            for (std::uint32_t j = 0; j < n; ++j) {
                const std::int64_t diff = static_cast<std::int64_t>(run.states()[1][j]) - run.states()[0][j];
                const auto a = static_cast<std::uint64_t>(diff < 0 ? -diff : diff);
                l1 += a;
                linf = std::max(linf, a);
                le = le && diff >= 0;
                ge = ge && diff <= 0;
            }
            return std::tuple{l1, linf, le, ge};
        };
        auto [l1, linf, le0, ge0] = brute();
        bool was_equal = l1 == 0;
        while (run.source().peek_time() <= horizon) {
            run.step();
            ++events;
            const auto [nl1, nlinf, le, ge] = brute();
            l1_up += nl1 > l1;
            linf_up += nlinf > linf;
            order_broken += (le0 && !le) || (ge0 && !ge);
            if (was_equal && nl1 != 0) ++uncoalesced;
            was_equal = was_equal || nl1 == 0;
            l1 = nl1;
            linf = nlinf;
        }
        coalesced += was_equal;
        const auto& a = run.audit();
        tracker_audit.l1_increases += a.l1_increases;
        tracker_audit.linf_increases += a.linf_increases;
        tracker_audit.order_violations += a.order_violations;
        tracker_audit.coalescence_breaks += a.coalescence_breaks;
    }
    r.passed = l1_up == 0 && linf_up == 0 && order_broken == 0 && uncoalesced == 0 && tracker_audit.clean();
    r.observed = {{"pairs", pairs},
                  {"events", events},
                  {"l1_increases", l1_up},
                  {"linf_increases", linf_up},
                  {"order_violations", order_broken},
                  {"coalescence_breaks", uncoalesced},
                  {"pairs_coalesced", coalesced},
                  {"tracker_clean", tracker_audit.clean()}};
    r.expected = {{"violations", 0}};
    r.tolerance = 0;
    r.summary = std::to_string(pairs) + " pairs, " + std::to_string(events) + " events audited, " +
                std::to_string(l1_up + linf_up + order_broken + uncoalesced) + " violations";
    return r;
}

// 2. Simulated equilibrium tail of the n = 2, d = 2 chain against the exact
// stationary distribution of the capped chain.
inline CheckResult oracle_stationary(Context& ctx) {
    CheckResult r;
    const oracle::CappedChainSpec spec{2, 0.5, 2, 12};
    const auto g = oracle::build_generator(spec);
    const auto pi = oracle::stationary(g);
    const double residual = g.residual(pi);
    const auto exact = oracle::tail_u(spec, pi);
    const double boundary = oracle::boundary_mass(spec, pi);

    const ModelParams p{2, 0.5, 2};
    const auto samples = std::uint32_t{100'000};
    const auto snaps = run_trajectory(p, QueueState::empty(2), default_plan(p, samples), ctx.seed_for("oracle-stationary"));
    const auto est = estimate_tail(snaps);

    bool ok = residual < 1e-12;
    double worst_z = 0.0;
    json levels = json::array();
    for (std::uint32_t k = 1; k <= spec.cap; ++k) {
        const double u = est.u_hat(k), se = est.se(k);
        bool level_ok;
        if (u == 0.0) {
            // Nothing observed: consistent when the exact tail predicts fewer
            // than 3 hits among the samples.
            level_ok = exact[k] * samples <= 3.0;
        } else {
            level_ok = std::abs(u - exact[k]) <= 3.0 * se + boundary;
            worst_z = std::max(worst_z, se > 0 ? std::abs(u - exact[k]) / se : 0.0);
        }
        ok = ok && level_ok;
        levels.push_back({{"k", k}, {"u_hat", u}, {"se", se}, {"exact", exact[k]}, {"ok", level_ok}});
    }
    r.passed = ok;
    r.observed = {{"levels", levels}, {"residual", residual}, {"boundary_mass", boundary}, {"samples", samples}};
    r.expected = {{"residual_below", 1e-12}, {"u_exact", exact}};
    r.tolerance = "3 SE per level (plus boundary mass); zero-hit levels need exact tail * samples <= 3";
    r.summary = "max |z| = " + detail::fmt(worst_z) + ", ||pi Q||_inf = " + detail::fmt(residual);
    return r;
}

// 3. Empirical law at t = 2 of independent replicas from (0, 0) against the
// uniformization distribution.
inline CheckResult oracle_transient(Context& ctx) {
    CheckResult r;
    const oracle::CappedChainSpec spec{2, 0.5, 2, 12};
    const auto g = oracle::build_generator(spec);
    const std::vector<std::uint32_t> origin{0, 0};
    const auto exact = oracle::transient(g, spec.encode(origin), 2.0);

    const ModelParams p{2, 0.5, 2};
    const std::size_t replicas = 100'000;
    std::vector<double> counts(g.size(), 0.0);
    double outside = 0.0;
    const std::uint64_t base = ctx.seed_for("oracle-transient");
    for (std::size_t i = 0; i < replicas; ++i) {
        const auto x = evolve(QueueState::empty(2), EventStream{p, derive_seed(base, i), 2.0}, 2.0);
        if (x.max_length() > spec.cap) {
            outside += 1.0;
            continue;
        }
        counts[spec.encode(x.lengths())] += 1.0;
    }
    for (double& c : counts) c /= static_cast<double>(replicas);
    const double tv = oracle::exact_tv(counts, exact) + 0.5 * outside / static_cast<double>(replicas);
    r.passed = tv <= 0.03;
    r.observed = {{"tv", tv}, {"replicas", replicas}};
    r.expected = {{"tv_at_most", 0.03}};
    r.tolerance = 0.03;
    r.summary = "TV = " + detail::fmt(tv);
    return r;
}

// 4. Single-choice maximum: exact geometric equilibrium samples and simulated
// equilibrium snapshots against (1 - lambda^{m+1})^n.
inline CheckResult d1_exact_law(Context& ctx) {
    CheckResult r;
    const std::uint32_t n = 100;
    const double lambda = 0.5;
    std::vector<double> cdf;
    for (std::uint32_t m = 0; m <= 60; ++m) cdf.push_back(theory::d1_max_cdf(n, lambda, m));

    const std::size_t exact_samples = 10'000;
    const std::uint64_t base = ctx.seed_for("d1-exact");
    std::vector<unsigned> maxima(exact_samples);
    for (std::size_t i = 0; i < exact_samples; ++i)
        maxima[i] = theory::d1_equilibrium_sample(n, lambda, derive_seed(base, i)).max_length();
    const double ks_exact = stats::kolmogorov_distance(maxima, cdf);

    // Simulated: independent replicas, each warmed up from empty.
    const ModelParams p{n, lambda, 1};
    const std::size_t sim_samples = 1'000;
    const auto runs = run_replicas(
        p, [&](std::size_t) { return QueueState::empty(n); }, default_plan(p, 1), sim_samples,
        ctx.seed_for("d1-simulated"), ctx.options().threads);
    std::vector<unsigned> sim_max;
    for (const auto& run : runs) sim_max.push_back(run.front().max);
    const double ks_sim = stats::kolmogorov_distance(sim_max, cdf);

    r.passed = ks_exact <= 0.02 && ks_sim <= 0.05;
    r.observed = {{"ks_exact_samples", ks_exact}, {"ks_simulated", ks_sim}, {"exact_samples", exact_samples},
                  {"simulated_samples", sim_samples}};
    r.expected = {{"cdf", cdf}};
    r.tolerance = {{"ks_exact", 0.02}, {"ks_simulated", 0.05}};
    r.summary = "KS exact = " + detail::fmt(ks_exact) + ", KS simulated = " + detail::fmt(ks_sim);
    return r;
}

// 5. Stationary balance lambda E[u(i-1)^d] = u(i) on the moderate run.
inline CheckResult balance_identity(Context& ctx) {
    CheckResult r;
    const ModelParams p{10'000, 0.7, 2};
    const auto& snaps = ctx.moderate_run();
    const auto rep = verify_balance(snaps, p);
    const auto est = estimate_tail(snaps);
    bool ok = !rep.warmup_warning;
    json levels = json::array();
    double worst = 0.0;
    for (std::uint32_t i = 1; i <= 6; ++i) {
        const stats::MeanSe res = i <= rep.residual.size() ? rep.residual[i - 1] : stats::MeanSe{};
        const double tol = 3.0 * res.se + 10.0 / p.n;
        const bool level_ok = std::abs(res.mean) <= tol;
        ok = ok && level_ok;
        worst = std::max(worst, std::abs(res.mean));
        levels.push_back({{"i", i}, {"residual", res.mean}, {"se", res.se}, {"tolerance", tol}, {"ok", level_ok}});
    }
    const double u1_err = std::abs(est.u_hat(1) - 0.7);
    ok = ok && u1_err <= 0.005;
    r.passed = ok;
    r.observed = {{"levels", levels}, {"u1", est.u_hat(1)}, {"samples", snaps.size()}, {"warmup_z", warmup_z_score(snaps)}};
    r.expected = {{"residual", 0.0}, {"u1", 0.7}};
    r.tolerance = {{"residual", "3 SE + 10/n"}, {"u1", 0.005}};
    r.summary = "max |r(i)| = " + detail::fmt(worst) + ", |u(1) - 0.7| = " + detail::fmt(u1_err);
    return r;
}

// 6. Tail law u(i) ~ lambda^{2^i - 1} on the moderate run.
inline CheckResult tail_law(Context& ctx) {
    CheckResult r;
    const auto est = estimate_tail(ctx.moderate_run());
    bool ok = true;
    double worst = 0.0;
    json levels = json::array();
    const std::size_t top = std::max<std::size_t>(est.levels(), 7);
    for (std::uint32_t i = 1; i < top; ++i) {
        const double predicted = meanfield::fixed_point_level(0.7, 2, i);
        const double err = std::abs(est.u_hat(i) - predicted);
        const bool level_ok = err <= 0.01 + 3.0 * est.se(i);
        ok = ok && level_ok;
        worst = std::max(worst, err);
        levels.push_back({{"i", i}, {"u_hat", est.u_hat(i)}, {"se", est.se(i)}, {"predicted", predicted}, {"ok", level_ok}});
    }
    r.passed = ok;
    r.observed = levels;
    r.expected = "0.7^(2^i - 1)";
    r.tolerance = "0.01 + 3 SE";
    r.summary = "max |u_hat(i) - 0.7^(2^i-1)| = " + detail::fmt(worst);
    return r;
}

// 7. Maximum queue length concentrated on two adjacent values.
inline CheckResult two_point_max(Context& ctx) {
    CheckResult r;
    const ModelParams p{100'000, 0.7, 2};
    const auto samples = static_cast<std::uint32_t>(ctx.scaled(500, 60));
    const auto snaps =
        run_trajectory(p, QueueState::empty(p.n), default_plan(p, samples), ctx.seed_for("two-point-max"));
    const auto est = estimate_tail(snaps);
    const std::uint32_t mode = theory::predicted_mode(p.n, p.lambda, p.d);
    const double centre = theory::lnln_over_lnd(p.n, p.d);
    const auto [lo, mass] = est.best_adjacent_pair();
    std::uint64_t near = 0;
    for (const auto& s : snaps) near += std::abs(s.max - centre) <= 4.0;
    const double near_frac = static_cast<double>(near) / static_cast<double>(snaps.size());
    auto hist_mass = [&](std::uint32_t m) {
        auto it = est.max_hist.find(m);
        return it == est.max_hist.end() ? 0.0 : static_cast<double>(it->second) / static_cast<double>(snaps.size());
    };
    const double predicted_pair_mass = hist_mass(mode - 1) + hist_mass(mode);
    r.passed = mass >= 0.9 && lo + 1 == mode && near_frac >= 0.99;
    json hist = json::object();
    for (auto [m, c] : est.max_hist) hist[std::to_string(m)] = c;
    r.observed = {{"max_hist", hist},
                  {"best_pair", {lo, lo + 1}},
                  {"best_pair_mass", mass},
                  {"predicted_pair_mass", predicted_pair_mass},
                  {"within_4_of_lnln", near_frac}};
    r.expected = {{"pair", {mode - 1, mode}}, {"lnln_n_over_ln_d", centre}};
    r.tolerance = {{"pair_mass_at_least", 0.9}, {"within_4_at_least", 0.99}};
    r.summary = "M in {" + std::to_string(lo) + "," + std::to_string(lo + 1) + "} for " + detail::fmt(100 * mass) +
                "% (predicted {" + std::to_string(mode - 1) + "," + std::to_string(mode) + "}), |M - " +
                detail::fmt(centre) + "| <= 4 for " + detail::fmt(100 * near_frac) + "%";
    return r;
}

// 8. Equilibrium bounds Pr(M >= k) <= n lambda^k and u(i) <= lambda^i.
inline CheckResult equilibrium_domination(Context& ctx) {
    CheckResult r;
    const ModelParams p{10'000, 0.7, 2};
    const auto& snaps = ctx.moderate_run();
    const auto est = estimate_tail(snaps);
    bool ok = true;
    double worst_margin = -1.0;  // max over levels of (empirical - bound - 4 SE)
    json levels = json::array();
    for (std::uint32_t k = 1; k < est.levels() + 2; ++k) {
        const double pm = est.max_tail(k), pm_se = est.max_tail_se(k);
        const double mb = theory::bound_max_tail(p.n, p.lambda, k);
        const double ub = std::pow(p.lambda, k);
        const double m1 = pm - mb - 4 * pm_se;
        const double m2 = est.u_hat(k) - ub - 4 * est.se(k);
        ok = ok && m1 <= 0 && m2 <= 0;
        worst_margin = std::max({worst_margin, m1, m2});
        levels.push_back({{"k", k}, {"pr_max_ge", pm}, {"max_bound", mb}, {"u_hat", est.u_hat(k)}, {"u_bound", ub}});
    }
    r.passed = ok;
    r.observed = levels;
    r.expected = "Pr(M >= k) <= n lambda^k and u(k) <= lambda^k";
    r.tolerance = "4 SE";
    r.summary = "largest excess over bound + 4 SE = " + detail::fmt(worst_margin);
    return r;
}

// 9. Coupled empty and equilibrium starts: Pr(X_t != Y_t) small by the
// deadline and exponentially decaying.
inline CheckResult mixing_upper(Context& ctx) {
    CheckResult r;
    const auto& prof = ctx.mixing();
    const double deadline = Context::mixing_deadline(prof.params);
    const auto& last = prof.points.back();
    const auto fit = fit_decay(prof);
    r.passed = last.t >= deadline - 1e-9 && last.pr_neq <= 0.05 && fit.r_squared >= 0.95 && fit.points >= 3;
    std::size_t censored = 0;
    for (double t : prof.coalescence) censored += std::isinf(t);
    r.observed = {{"pr_neq_at_deadline", last.pr_neq},
                  {"deadline", deadline},
                  {"fit_rate", -fit.slope},
                  {"fit_r_squared", fit.r_squared},
                  {"fit_points", fit.points},
                  {"replicas", prof.replicas},
                  {"not_coalesced", censored}};
    r.expected = {{"pr_neq_at_most", 0.05}, {"r_squared_at_least", 0.95}};
    r.tolerance = {{"pr_neq", 0.05}, {"r_squared", 0.95}};
    r.summary = "Pr(X != Y) at t=" + detail::fmt(deadline) + " is " + detail::fmt(last.pr_neq) +
                ", decay rate " + detail::fmt(-fit.slope) + " with R^2 = " + detail::fmt(fit.r_squared) + " over " +
                std::to_string(fit.points) + " points";
    return r;
}

// 10. Deficit lambda - u_t(1) from the empty start stays above lambda e^{-(1 + lambda d) t}.
inline CheckResult mixing_lower(Context& ctx) {
    CheckResult r;
    const auto& prof = ctx.mixing();
    bool ok = true;
    double worst = std::numeric_limits<double>::infinity();
    json pts = json::array();
    std::size_t checked = 0;
    for (const auto& pt : prof.points) {
        if (pt.t > 3.0 + 1e-12) break;
        const double slack = pt.deficit + 3 * pt.se_deficit - pt.bound_lower;
        ok = ok && slack >= 0.0;
        worst = std::min(worst, slack);
        ++checked;
        pts.push_back({{"t", pt.t}, {"deficit", pt.deficit}, {"se", pt.se_deficit}, {"bound", pt.bound_lower}});
    }
    r.passed = ok && checked == 13;
    r.observed = pts;
    r.expected = "deficit >= lambda exp(-(1 + lambda d) t)";
    r.tolerance = "3 SE";
    r.summary = std::to_string(checked) + " grid points, smallest slack " + detail::fmt(worst);
    return r;
}

// 11. Survival of initial customers against 2 n e^{-alpha t}.
inline CheckResult survival_bound(Context& ctx) {
    CheckResult r;
    const ModelParams p{100, 0.5, 1};
    const std::size_t replicas = 2000;
    const std::uint64_t base = ctx.seed_for("survival");
    std::vector<SurvivalResult> res(replicas);
    parallel_for(
        replicas,
        [&](std::size_t i) {
            const std::uint64_t seed = derive_seed(base, i);
            const auto x0 = theory::d1_equilibrium_sample(p.n, p.lambda, derive_seed(seed, "initial"));
            res[i] = survival_time(p, x0, 100.0, derive_seed(seed, "stream"));
        },
        ctx.options().threads);
    bool ok = true;
    json pts = json::array();
    std::string summary;
    for (double t : {20.0, 40.0, 60.0}) {
        std::size_t alive = 0;
        for (const auto& s : res) alive += s.censored || s.time > t;
        const double frac = static_cast<double>(alive) / static_cast<double>(replicas);
        const double se = stats::proportion_se(frac, replicas);
        const double bound = theory::bound_survival(p.n, p.lambda, t);
        ok = ok && frac <= bound + 3 * se;
        pts.push_back({{"t", t}, {"survivor_fraction", frac}, {"se", se}, {"bound", bound}});
        if (!summary.empty()) summary += "; ";
        summary += "t=" + detail::fmt(t) + ": " + detail::fmt(frac) + " <= " + detail::fmt(bound);
    }
    r.passed = ok;
    r.observed = pts;
    r.expected = "survivor fraction <= 2 n exp(-alpha t)";
    r.tolerance = "3 SE";
    r.summary = summary;
    return r;
}

// 12. Mean-field fixed point and its agreement with integration and simulation.
inline CheckResult meanfield_agreement(Context& ctx) {
    CheckResult r;
    const auto fp = meanfield::fixed_point(0.5, 2, 12);
    double residual = 0.0;
    for (double v : meanfield::derivative(fp, 0.5, 2)) residual = std::max(residual, std::abs(v));
    const auto traj =
        meanfield::integrate(meanfield::State{std::vector<double>(12, 0.0)}, 0.5, 2, 50.0, 0.01, {5000, true});
    const double conv = meanfield::max_abs_diff(traj.states.back(), fp);

    const auto est = estimate_tail(ctx.moderate_run());
    const auto fp7 = meanfield::fixed_point(0.7, 2, 12);
    bool sim_ok = true;
    double worst = 0.0;
    for (std::uint32_t k = 1; k <= 12; ++k) {
        const double err = std::abs(est.u_hat(k) - fp7.at(k));
        sim_ok = sim_ok && err <= 0.01 + 3 * est.se(k);
        worst = std::max(worst, err);
    }
    r.passed = residual < 1e-12 && conv < 1e-6 && traj.step_halving_error < 1e-9 && sim_ok;
    r.observed = {{"fixed_point_residual", residual},
                  {"distance_at_T50", conv},
                  {"step_halving", traj.step_halving_error},
                  {"max_sim_deviation", worst}};
    r.expected = {{"fixed_point", fp.v}};
    r.tolerance = {{"residual", 1e-12}, {"convergence", 1e-6}, {"step_halving", 1e-9}, {"simulation", "0.01 + 3 SE"}};
    r.summary = "residual " + detail::fmt(residual) + ", |v_50 - v*| " + detail::fmt(conv) + ", halving " +
                detail::fmt(traj.step_halving_error) + ", sim dev " + detail::fmt(worst);
    return r;
}

// 13. Chernoff-type bounds against exact Poisson tails.
inline CheckResult chernoff_bounds(Context&) {
    CheckResult r;
    std::size_t comparisons = 0, failures = 0;
    for (double mu : {0.5, 1.0, 5.0, 20.0, 50.0}) {
        for (int i = 1; i <= 20; ++i) {
            const double eps = 0.05 * i;
            // Rounding toward including the boundary point makes the exact side larger.
            const auto lo = static_cast<std::int64_t>(std::floor(mu - eps * mu + 1e-9));
            const auto hi = static_cast<std::int64_t>(std::ceil(mu + eps * mu - 1e-9));
            failures += poisson::cdf(mu, lo) > theory::chernoff_lower(mu, eps);
            failures += poisson::upper(mu, hi) > theory::chernoff_upper(mu, eps);
            comparisons += 2;
        }
        const auto first = static_cast<std::int64_t>(std::ceil(2.0 * std::exp(1.0) * mu));
        for (std::int64_t x = first; x <= first + 60; ++x) {
            failures += poisson::upper(mu, x) > theory::chernoff_2x(mu, static_cast<double>(x));
            ++comparisons;
        }
    }
    r.passed = failures == 0;
    r.observed = {{"comparisons", comparisons}, {"failures", failures}};
    r.expected = {{"failures", 0}};
    r.tolerance = 0;
    r.summary = std::to_string(comparisons) + " comparisons, " + std::to_string(failures) + " failures";
    return r;
}

struct NamedCheck {
    int number;
    std::string name;
    std::string title;
    std::function<CheckResult(Context&)> run;
};

inline const std::vector<NamedCheck>& registry() {
    static const std::vector<NamedCheck> all{
        {1, "coupling_contraction", "coupling contraction and monotonicity", coupling_contraction},
        {2, "oracle_stationary", "stationary oracle equivalence", oracle_stationary},
        {3, "oracle_transient", "transient oracle equivalence", oracle_transient},
        {4, "d1_exact_law", "single-choice maximum law", d1_exact_law},
        {5, "balance_identity", "stationary balance identity", balance_identity},
        {6, "tail_law", "doubly exponential tail law", tail_law},
        {7, "two_point_max", "two-point maximum concentration", two_point_max},
        {8, "equilibrium_domination", "equilibrium tail bounds", equilibrium_domination},
        {9, "mixing_upper", "coupling-time decay", mixing_upper},
        {10, "mixing_lower", "mixing lower bound", mixing_lower},
        {11, "survival_bound", "initial-customer survival bound", survival_bound},
        {12, "meanfield", "mean-field limit", meanfield_agreement},
        {13, "chernoff", "Chernoff bounds", chernoff_bounds},
    };
    return all;
}

inline const NamedCheck* find(std::string_view name) {
    for (const auto& c : registry())
        if (c.name == name || std::to_string(c.number) == name) return &c;
    return nullptr;
}

inline CheckResult run(const NamedCheck& check, Context& ctx) {
    const auto start = std::chrono::steady_clock::now();
    CheckResult r;
    try {
        r = check.run(ctx);
    } catch (const std::exception& e) {
        r.passed = false;
        r.summary = std::string("exception: ") + e.what();
    }
    r.check = check.name;
    r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return r;
}

inline std::string format_line(const NamedCheck& check, const CheckResult& r) {
    std::ostringstream os;
    os << (r.passed ? "[PASS] " : "[FAIL] ") << check.number << ". " << check.name << " (" << check.title << "): "
       << r.summary << " [" << detail::fmt(r.seconds) << " s]";
    return os.str();
}

}  // namespace supersim::checks
