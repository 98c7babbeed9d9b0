#pragma once

#include <json.hpp>

#include <algorithm>
#include <iomanip>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "supersim/coupling.hpp"
#include "supersim/meanfield.hpp"
#include "supersim/oracle.hpp"
#include "supersim/simulator.hpp"
#include "supersim/theory.hpp"

namespace supersim::io {

using json = nlohmann::json;

inline json to_json(const ModelParams& p) { return {{"n", p.n}, {"lambda", p.lambda}, {"d", p.d}}; }

inline json to_json(const SamplingPlan& p) {
    return {{"warmup", p.warmup}, {"interval", p.interval}, {"count", p.count}};
}

/// Columns t,total,max,ell_0..ell_K with K the largest level seen in any snapshot.
inline void write_snapshots_csv(std::ostream& os, std::span<const Snapshot> snaps) {
    std::size_t levels = 1;
    for (const auto& s : snaps) levels = std::max(levels, s.ell.size());
    os << "t,total,max";
    for (std::size_t k = 0; k < levels; ++k) os << ",ell_" << k;
    os << '\n' << std::setprecision(17);
    for (const auto& s : snaps) {
        os << s.t << ',' << s.total << ',' << s.max;
        for (std::size_t k = 0; k < levels; ++k) os << ',' << (k < s.ell.size() ? s.ell[k] : 0);
        os << '\n';
    }
}

inline json summary_json(const ModelParams& params, const SamplingPlan& plan, const TailEstimate& est) {
    json u = json::array(), se = json::array(), hist = json::object();
    for (std::size_t k = 0; k < est.levels(); ++k) {
        u.push_back(est.u_hat(k));
        se.push_back(est.se(k));
    }
    for (auto [m, c] : est.max_hist) hist[std::to_string(m)] = c;
    return {{"params", to_json(params)},
            {"plan", to_json(plan)},
            {"samples", est.samples},
            {"u", u},
            {"se", se},
            {"max_hist", hist},
            {"mean_total", est.total.mean},
            {"se_total", est.total.se}};
}

inline void write_mixing_csv(std::ostream& os, const MixingProfile& prof) {
    os << "t,pr_neq,se_neq,deficit,se_deficit,bound_lower\n" << std::setprecision(17);
    for (const auto& p : prof.points)
        os << p.t << ',' << p.pr_neq << ',' << p.se_neq << ',' << p.deficit << ',' << p.se_deficit << ','
           << p.bound_lower << '\n';
}

/// One column; censored samples are written as "inf".
inline void write_coalescence_csv(std::ostream& os, std::span<const double> times) {
    os << "coalescence_time\n" << std::setprecision(17);
    for (double t : times) {
        if (std::isinf(t))
            os << "inf\n";
        else
            os << t << '\n';
    }
}

inline void write_meanfield_csv(std::ostream& os, const meanfield::Trajectory& traj) {
    const std::size_t K = traj.states.empty() ? 0 : traj.states.front().levels();
    os << 't';
    for (std::size_t k = 1; k <= K; ++k) os << ",v" << k;
    os << '\n' << std::setprecision(17);
    for (std::size_t i = 0; i < traj.states.size(); ++i) {
        os << traj.times[i];
        for (double v : traj.states[i].v) os << ',' << v;
        os << '\n';
    }
}

inline json fixed_point_json(double lambda, std::uint32_t d, const meanfield::State& fp) {
    return {{"lambda", lambda}, {"d", d}, {"K", fp.levels()}, {"v", fp.v}};
}

inline void write_distribution_csv(std::ostream& os, const oracle::CappedChainSpec& spec, std::span<const double> dist) {
    os << "state_index";
    for (std::uint32_t j = 1; j <= spec.n; ++j) os << ",x" << j;
    os << ",prob\n" << std::setprecision(17);
    for (std::size_t i = 0; i < dist.size(); ++i) {
        os << i;
        for (auto v : spec.decode(i)) os << ',' << v;
        os << ',' << dist[i] << '\n';
    }
}

inline json to_json(const theory::PredictionReport& r) {
    json j{{"n", r.n},
           {"lambda", r.lambda},
           {"d", r.d},
           {"predicted_mode", r.mode},
           {"pre_asymptotic", r.pre_asymptotic},
           {"tails", r.tails}};
    j["i_d"] = r.i_d ? json(*r.i_d) : json(nullptr);
    j["m_d"] = r.m_d ? json(*r.m_d) : json(nullptr);
    j["lnln_n_over_ln_d"] = r.d >= 2 ? json(r.lnln_ratio) : json(nullptr);
    j["d1_max_cdf"] = r.d1_cdf;
    return j;
}

}  // namespace supersim::io
