// Command-line front end for the calculators and experiments, plus the verification suite.

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "supersim/checks.hpp"
#include "supersim/coupling.hpp"
#include "supersim/io.hpp"
#include "supersim/meanfield.hpp"
#include "supersim/oracle.hpp"
#include "supersim/simulator.hpp"
#include "supersim/theory.hpp"

namespace {

using namespace supersim;
using json = nlohmann::json;

constexpr std::uint64_t kDefaultSeed = 20060101;

struct Common {
    std::uint32_t n = 1000;
    double lambda = 0.7;
    std::uint32_t d = 2;
    std::optional<std::uint64_t> seed;
    std::optional<double> warmup;
    double interval = 2.0;
    std::uint32_t samples = 200;
    std::optional<double> horizon;
    std::string out;
    std::string format = "json";

    ModelParams params() const {
        ModelParams p{n, lambda, d};
        p.validate();
        return p;
    }

    std::uint64_t resolved_seed() const {
        if (seed) return *seed;
        if (const char* s = std::getenv("SUPERSIM_SEED")) return std::stoull(s);
        return kDefaultSeed;
    }
};

void add_common(CLI::App* cmd, Common& c, const std::string& default_format) {
    c.format = default_format;
    cmd->add_option("--n", c.n, "number of servers")->check(CLI::PositiveNumber);
    cmd->add_option("--lambda", c.lambda, "arrival rate per server, in (0,1)");
    cmd->add_option("--d", c.d, "choices per arrival")->check(CLI::PositiveNumber);
    cmd->add_option("--seed", c.seed, "master seed (falls back to SUPERSIM_SEED)");
    cmd->add_option("--warmup", c.warmup, "burn-in time");
    cmd->add_option("--interval", c.interval, "time between snapshots")->check(CLI::PositiveNumber);
    cmd->add_option("--samples", c.samples, "number of samples or replicas");
    cmd->add_option("--horizon", c.horizon, "time horizon");
    cmd->add_option("--out", c.out, "output file (default stdout)");
    cmd->add_option("--format", c.format, "output format")->check(CLI::IsMember({"csv", "json"}));
}

// Writes to --out when given, otherwise to stdout.
template <class Fn>
void emit(const Common& c, Fn&& write) {
    if (c.out.empty()) {
        write(std::cout);
        std::cout.flush();
        return;
    }
    std::ofstream f(c.out);
    if (!f) throw std::runtime_error("cannot open " + c.out);
    write(f);
}

void emit_json(const Common& c, const json& j) {
    emit(c, [&](std::ostream& os) { os << j.dump(2) << '\n'; });
}

int cmd_predict(const Common& c) {
    emit_json(c, io::to_json(theory::predict(c.n, c.lambda, c.d)));
    return 0;
}

int cmd_simulate(const Common& c) {
    const auto p = c.params();
    SamplingPlan plan{c.warmup.value_or(default_warmup(p)), c.interval, c.samples};
    plan.validate();
    const auto snaps = run_trajectory(p, QueueState::empty(p.n), plan, c.resolved_seed());
    if (c.format == "csv") {
        emit(c, [&](std::ostream& os) { io::write_snapshots_csv(os, snaps); });
    } else {
        auto j = io::summary_json(p, plan, estimate_tail(snaps));
        j["warmup_z"] = warmup_z_score(snaps);
        emit_json(c, j);
    }
    return 0;
}

// Adjacent-pair coalescence: x is a warmed-up state, x+ adds one customer to
// a uniformly chosen queue, both driven by a shared stream.
int cmd_couple(const Common& c) {
    const auto p = c.params();
    const double warmup = c.warmup.value_or(default_warmup(p));
    const double horizon = c.horizon.value_or(default_censoring_horizon(p));
    const std::uint64_t base = c.resolved_seed();
    std::vector<double> times(c.samples);
    parallel_for(c.samples, [&](std::size_t r) {
        const std::uint64_t seed = derive_seed(base, r);
        QueueState x = evolve(QueueState::empty(p.n), EventStream{p, derive_seed(seed, "warmup"), warmup}, warmup);
        QueueState plus = x;
        Xoshiro256 pick(derive_seed(seed, "extra-customer"));
        plus.increment(pick.below(p.n));
        const auto res = coalescence_time(x, plus, EventStream{p, derive_seed(seed, "shared"), horizon});
        times[r] = res.censored ? std::numeric_limits<double>::infinity() : res.time;
    });
    if (c.format == "csv") {
        emit(c, [&](std::ostream& os) { io::write_coalescence_csv(os, times); });
        return 0;
    }
    std::vector<double> finite;
    for (double t : times)
        if (!std::isinf(t)) finite.push_back(t);
    const auto m = stats::iid_mean(finite);
    emit_json(c, {{"params", io::to_json(p)},
                  {"replicas", c.samples},
                  {"horizon", horizon},
                  {"censored", times.size() - finite.size()},
                  {"mean_uncensored", finite.empty() ? json(nullptr) : json(m.mean)},
                  {"se_uncensored", finite.empty() ? json(nullptr) : json(m.se)}});
    return 0;
}

int cmd_mix(const Common& c, double step) {
    const auto p = c.params();
    const double horizon = c.horizon.value_or(default_censoring_horizon(p));
    std::vector<double> grid;
    for (double t = 0.0; t < horizon; t += step) grid.push_back(t);
    grid.push_back(horizon);
    const auto prof = mixing_profile(p, grid, c.samples, c.resolved_seed(), {c.warmup, 0});
    if (prof.few_replicas_warning) std::cerr << "supersim: warning: fewer than 100 replicas\n";
    if (c.format == "csv") {
        emit(c, [&](std::ostream& os) { io::write_mixing_csv(os, prof); });
        return 0;
    }
    const auto fit = fit_decay(prof);
    json pts = json::array();
    for (const auto& pt : prof.points)
        pts.push_back({{"t", pt.t}, {"pr_neq", pt.pr_neq}, {"deficit", pt.deficit}, {"bound_lower", pt.bound_lower}});
    emit_json(c, {{"params", io::to_json(p)},
                  {"replicas", prof.replicas},
                  {"points", pts},
                  {"fit", {{"rate", -fit.slope}, {"r_squared", fit.r_squared}, {"points", fit.points}}}});
    return 0;
}

int cmd_meanfield(const Common& c, std::uint32_t levels, double dt) {
    if (c.lambda <= 0.0 || c.lambda >= 1.0) throw std::invalid_argument("lambda must lie in (0,1)");
    const std::uint32_t K = levels ? levels : meanfield::default_truncation(c.lambda, c.d);
    const auto fp = meanfield::fixed_point(c.lambda, c.d, K);
    if (c.format == "json") {
        emit_json(c, io::fixed_point_json(c.lambda, c.d, fp));
        return 0;
    }
    const double T = c.horizon.value_or(20.0);
    const auto steps = static_cast<std::size_t>(std::llround(T / dt));
    const std::size_t every = std::max<std::size_t>(1, static_cast<std::size_t>(std::llround(c.interval / dt)));
    const auto traj = meanfield::integrate(meanfield::State{std::vector<double>(K, 0.0)}, c.lambda, c.d,
                                           static_cast<double>(steps) * dt, dt, {every, false});
    emit(c, [&](std::ostream& os) { io::write_meanfield_csv(os, traj); });
    return 0;
}

// Exact capped chain. Stationary law by default; transient from the empty
// state when --horizon is given.
int cmd_oracle(const Common& c, std::uint32_t cap) {
    const oracle::CappedChainSpec spec{c.n, c.lambda, c.d, cap};
    spec.validate();
    const auto g = oracle::build_generator(spec);
    std::vector<double> dist;
    if (c.horizon)
        dist = oracle::transient(g, spec.encode(std::vector<std::uint32_t>(c.n, 0)), *c.horizon);
    else
        dist = oracle::stationary(g);
    if (c.format == "csv") {
        emit(c, [&](std::ostream& os) { io::write_distribution_csv(os, spec, dist); });
        return 0;
    }
    json j{{"params", io::to_json(ModelParams{c.n, c.lambda, c.d})},
           {"cap", cap},
           {"states", g.size()},
           {"u", oracle::tail_u(spec, dist)},
           {"boundary_mass", oracle::boundary_mass(spec, dist)}};
    if (c.horizon)
        j["t"] = *c.horizon;
    else
        j["residual"] = g.residual(dist);
    emit_json(c, j);
    return 0;
}

int cmd_verify(const Common& c, const std::vector<std::string>& names, bool quick) {
    checks::CheckOptions opt;
    opt.seed = c.resolved_seed();
    opt.quick = quick;
    std::vector<const checks::NamedCheck*> selected;
    if (names.empty()) {
        for (const auto& chk : checks::registry()) selected.push_back(&chk);
    } else {
        for (const auto& name : names) {
            const auto* chk = checks::find(name);
            if (!chk) throw std::invalid_argument("unknown check: " + name);
            selected.push_back(chk);
        }
    }
    checks::Context ctx(opt);
    json verdicts = json::array();
    bool all = true;
    for (const auto* chk : selected) {
        const auto r = checks::run(*chk, ctx);
        std::cerr << checks::format_line(*chk, r) << std::endl;
        verdicts.push_back(r.verdict());
        all = all && r.passed;
    }
    emit_json(c, verdicts);
    return all ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"supersim: supermarket-model simulator, oracles and verification suite"};
    app.require_subcommand(1);

    Common predict_c, sim_c, couple_c, mix_c, mf_c, oracle_c, verify_c;
    auto* predict = app.add_subcommand("predict", "closed-form predictions as JSON");
    add_common(predict, predict_c, "json");
    auto* simulate = app.add_subcommand("simulate", "equilibrium snapshots (csv) or tail summary (json)");
    add_common(simulate, sim_c, "json");
    auto* couple = app.add_subcommand("couple", "adjacent-pair coalescence times");
    add_common(couple, couple_c, "json");
    auto* mix = app.add_subcommand("mix", "coupling-based mixing profile from the empty state");
    add_common(mix, mix_c, "json");
    double step = 1.0;
    mix->add_option("--step", step, "grid spacing")->check(CLI::PositiveNumber);
    auto* mf = app.add_subcommand("meanfield", "mean-field fixed point (json) or trajectory (csv)");
    add_common(mf, mf_c, "json");
    std::uint32_t levels = 0;
    double dt = 0.01;
    mf->add_option("--levels", levels, "truncation level K (default: automatic)");
    mf->add_option("--dt", dt, "RK4 step")->check(CLI::PositiveNumber);
    auto* orc = app.add_subcommand("oracle", "exact distribution of the capped chain");
    add_common(orc, oracle_c, "json");
    oracle_c.n = 2;
    oracle_c.lambda = 0.5;
    std::uint32_t cap = 12;
    orc->add_option("--cap", cap, "queue-length cap");
    auto* verify = app.add_subcommand("verify", "run acceptance checks; exit 0 iff all pass");
    add_common(verify, verify_c, "json");
    std::vector<std::string> names;
    bool quick = false;
    verify->add_option("--check", names, "check name or number (repeatable)");
    verify->add_flag("--quick", quick, "reduced sample sizes");

    CLI11_PARSE(app, argc, argv);

    try {
        if (*predict) return cmd_predict(predict_c);
        if (*simulate) return cmd_simulate(sim_c);
        if (*couple) return cmd_couple(couple_c);
        if (*mix) return cmd_mix(mix_c, step);
        if (*mf) return cmd_meanfield(mf_c, levels, dt);
        if (*orc) return cmd_oracle(oracle_c, cap);
        if (*verify) return cmd_verify(verify_c, names, quick);
    } catch (const std::exception& e) {
        std::cerr << "supersim: error: " << e.what() << '\n';
        return 2;
    }
    return 0;
}
