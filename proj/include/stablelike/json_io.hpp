#pragma once

// JSON / CSV serialisation of verdicts, drift profiles, simulation diagnostics
// and check reports. Schemas are documented in docs/schemas.md.

#include <cstdio>
#include <ostream>
#include <string>

#include <json.hpp>

#include "checks.hpp"
#include "classifier.hpp"
#include "coeffs.hpp"
#include "generator.hpp"
#include "simulate.hpp"
#include "version.hpp"

namespace stablelike::io {

using json = nlohmann::ordered_json;

inline json versions() {
    return {{"tool", kVersion},
            {"json_schema", kSchemaVersion},
            {"rng", simulate::kGeneratorId}};
}

inline json to_json(const coeffs::ValidationReport& r) {
    auto range = [](const coeffs::Range& g) { return json{{"min", g.min}, {"max", g.max}}; };
    return {{"pass", r.pass},
            {"grid", {{"x_max", r.grid.x_max}, {"points", r.grid.points}, {"tail_octaves", r.grid.tail_octaves}}},
            {"alpha", range(r.alpha)},
            {"beta", range(r.beta)},
            {"gamma", range(r.gamma)},
            {"failures", r.failures},
            {"warnings", r.warnings}};
}

inline json to_json(const coeffs::SymbolTriple& t) {
    return {{"alpha", t.alpha.source()},
            {"beta", t.beta.source()},
            {"gamma", t.gamma.source()},
            {"alpha_inf", t.bounds.alpha_inf},
            {"alpha_sup", t.bounds.alpha_sup},
            {"gamma_inf", t.bounds.gamma_inf},
            {"gamma_sup", t.bounds.gamma_sup},
            {"beta_sup_abs", t.bounds.beta_sup_abs}};
}

inline json to_json(const classifier::ClassifyConfig& c) {
    return {{"grid", {{"x0", c.grid.x0}, {"ratio", c.grid.ratio}, {"count", c.grid.count}, {"two_sided", c.grid.two_sided}}},
            {"margin_tol", c.margin_tol},
            {"trend_tol", c.trend_tol},
            {"theta_levels", c.theta_levels},
            {"theta_rule", "alpha_inf*(1-2^-j), j=1..theta_levels, restricted to (1, alpha_inf)"},
            {"theta_recurrence_fraction", c.theta_recurrence_fraction},
            {"alpha_gate_tol", c.alpha_gate_tol}};
}

inline json to_json(const classifier::ConditionEvidence& ev) {
    const auto& e = ev.estimate;
    json j{{"id", ev.id}};
    if (ev.theta) j["theta"] = *ev.theta;
    j["kind"] = e.kind == classifier::LimitKind::Limsup ? "limsup" : "liminf";
    j["value"] = e.value;
    j["trend"] = e.trend;
    j["stabilized"] = ev.stabilized;
    j["monotone"] = e.monotone;
    j["certified"] = ev.certified;
    j["grid"] = {{"x", e.xs}, {"at_plus_x", e.pos}};
    if (!e.neg.empty()) j["grid"]["at_minus_x"] = e.neg;
    return j;
}

inline json to_json(const classifier::Verdict& v) {
    json j{{"schema", "stablelike.verdict/1"}, {"label", classifier::to_string(v.label)}, {"margin", v.margin}};
    j["fired"] = v.fired.empty() ? json(nullptr) : json(v.fired);
    if (v.eta) j["eta"] = *v.eta;
    j["alpha_liminf"] = v.alpha_liminf;
    j["conditions"] = json::array();
    for (const auto& c : v.conditions) j["conditions"].push_back(to_json(c));
    j["theta_trace"] = json::array();
    for (const auto& t : v.theta_trace)
        j["theta_trace"].push_back({{"theta", t.theta}, {"value", t.value}, {"trend", t.trend}, {"certified", t.certified}});
    j["caveats"] = v.caveats;
    j["config_echo"] = to_json(v.config);
    j["versions"] = versions();
    return j;
}

inline json to_json(const generator::QuadratureConfig& q) {
    return {{"abs_tol", q.abs_tol},
            {"rel_tol", q.rel_tol},
            {"core_split", q.core_split},
            {"tail_cut", q.tail_cut},
            {"max_subdivisions", q.max_subdivisions}};
}

inline json to_json(const generator::DriftProfile& p, const generator::TestFunction& V) {
    json j{{"schema", "stablelike.drift/1"},
           {"mode", generator::to_string(p.mode)},
           {"test_function", generator::to_string(V.kind)}};
    j["theta"] = V.kind == generator::TestKind::LogBarrier ? json(nullptr) : json(p.theta);
    j["tail_max_abs_residual"] = p.tail_max_abs_residual();
    j["partial"] = p.partial;
    j["points"] = json::array();
    for (const auto& q : p.points) {
        json pt{{"x", q.x}, {"scaled", q.scaled}, {"asymptote", q.asymptote}, {"residual", q.residual},
                {"quad_error", q.quad_error}, {"ok", q.ok}};
        if (!q.error.empty()) pt["error"] = q.error;
        j["points"].push_back(pt);
    }
    j["config_echo"] = to_json(p.config);
    j["versions"] = versions();
    return j;
}

inline void write_csv(std::ostream& os, const generator::DriftProfile& p) {
    os << "x,scaled,asymptote,residual,quad_error,ok\n";
    char buf[256];
    for (const auto& q : p.points) {
        std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g,%.17g,%.6g,%d\n", q.x, q.scaled, q.asymptote, q.residual,
                      q.quad_error, q.ok ? 1 : 0);
        os << buf;
    }
}

inline json to_json(const simulate::SimConfig& c) {
    return {{"m", c.m},
            {"horizon", c.horizon},
            {"n_paths", c.n_paths},
            {"seed", c.seed},
            {"x0", c.x0},
            {"compact_K", c.compact_K},
            {"record_stride", c.stride()},
            {"max_recorded", c.max_recorded}};
}

inline json to_json(const simulate::Diagnostics& d) {
    return {{"K", d.K},
            {"T", d.T},
            {"exact", d.exact},
            {"n_paths", d.n_paths},
            {"n_exited", d.n_exited},
            {"n_returned", d.n_returned},
            {"return_fraction", d.return_fraction},
            {"return_fraction_se", d.return_fraction_se},
            {"occupation_fraction", d.occupation_fraction},
            {"occupation_fraction_se", d.occupation_fraction_se},
            {"occupation_fraction_first_half", d.occupation_fraction_half},
            {"abs_terminal_quantiles", {{"0.5", d.q50}, {"0.9", d.q90}, {"0.99", d.q99}}}};
}

inline json to_json(const simulate::ProbeBands& b) {
    return {{"recurrent_return_min", b.recurrent_return_min},
            {"transient_return_max", b.transient_return_max},
            {"transient_median_min", b.transient_median_min},
            {"ergodic_occupation_min", b.ergodic_occupation_min},
            {"ergodic_window_drift_max", b.ergodic_window_drift_max}};
}

/// Thinned ensemble as path_id,step,time,state.
inline void write_csv(std::ostream& os, const simulate::PathEnsemble& e, std::size_t thin = 1) {
    if (thin == 0) thin = 1;
    os << "path_id,step,time,state\n";
    char buf[160];
    for (std::size_t p = 0; p < e.states.size(); ++p)
        for (std::size_t r = 0; r < e.states[p].size(); r += thin) {
            const std::size_t step = r * e.stride;
            std::snprintf(buf, sizeof buf, "%zu,%zu,%.17g,%.17g\n", p, step, e.time_of(step), e.states[p][r]);
            os << buf;
        }
}

inline json to_json(const std::vector<checks::CheckResult>& rs) {
    json arr = json::array();
    for (const auto& r : rs) {
        json j{{"suite", r.suite}, {"check", r.name}, {"tolerance", r.tolerance}, {"cases", r.cases},
               {"failed", r.failed}, {"max_error", r.max_error}, {"pass", r.pass()}};
        if (!r.error.empty()) j["error"] = r.error;
        j["failures"] = json::array();
        for (const auto& f : r.failures)
            j["failures"].push_back({{"inputs", f.inputs}, {"observed", f.observed}, {"expected", f.expected}});
        arr.push_back(j);
    }
    return {{"schema", "stablelike.check/1"}, {"pass", checks::all_pass(rs)}, {"results", arr}, {"versions", versions()}};
}

} // namespace stablelike::io
