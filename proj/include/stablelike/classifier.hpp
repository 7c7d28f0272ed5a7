#pragma once

// Recurrence / transience / ergodicity verdicts from the drift conditions,
// with limsup / liminf estimated on geometric escape grids.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "coeffs.hpp"
#include "errors.hpp"
#include "specfun.hpp"

namespace stablelike::classifier {

using coeffs::SymbolTriple;

struct GridSpec {
    double x0 = 10.0;
    double ratio = 2.0;
    int count = 12;
    bool two_sided = true;

    void check() const {
        if (!(x0 > 0.0)) throw PreconditionError("GridSpec: x0 must be > 0");
        if (!(ratio > 1.0)) throw PreconditionError("GridSpec: ratio must be > 1");
        if (count < 4) throw PreconditionError("GridSpec: count must be >= 4");
    }
    std::vector<double> points() const {
        std::vector<double> xs;
        for (int k = 0; k < count; ++k) xs.push_back(x0 * std::pow(ratio, k));
        return xs;
    }
    std::size_t tail_size() const { return static_cast<std::size_t>((count + 1) / 2); }
};

enum class Label { Recurrent, Transient, Ergodic, FErgodic, Inconclusive };

inline const char* to_string(Label l) noexcept {
    switch (l) {
    case Label::Recurrent: return "Recurrent";
    case Label::Transient: return "Transient";
    case Label::Ergodic: return "Ergodic";
    case Label::FErgodic: return "FErgodic";
    case Label::Inconclusive: return "Inconclusive";
    }
    return "?";
}

enum class LimitKind { Limsup, Liminf };

/// Tail estimate of limsup (max) or liminf (min) of f(x) as |x| -> infinity.
struct LimitEstimate {
    LimitKind kind = LimitKind::Limsup;
    double value = 0.0;
    /// Least-squares slope of the tail values against log2|x|, i.e. per octave.
    double trend = 0.0;
    /// Tail values move monotonically in the direction that only strengthens the bound.
    bool monotone = false;
    std::vector<double> xs;
    std::vector<double> pos;      // f(+x)
    std::vector<double> neg;      // f(-x), empty for one-sided grids
    std::vector<double> combined; // per-point max (limsup) or min (liminf) over signs
};

namespace detail {

inline double ls_slope(const std::vector<double>& t, const std::vector<double>& v) {
    const std::size_t n = t.size();
    if (n < 2) return 0.0;
    double mt = 0.0, mv = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        mt += t[i];
        mv += v[i];
    }
    mt /= n;
    mv /= n;
    double sxy = 0.0, sxx = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        sxy += (t[i] - mt) * (v[i] - mv);
        sxx += (t[i] - mt) * (t[i] - mt);
    }
    return sxx > 0.0 ? sxy / sxx : 0.0;
}

template <class F>
LimitEstimate estimate(F&& f, const GridSpec& g, LimitKind kind) {
    g.check();
    LimitEstimate e;
    e.kind = kind;
    e.xs = g.points();
    for (double x : e.xs) {
        const double vp = f(x);
        e.pos.push_back(vp);
        double v = vp;
        if (g.two_sided) {
            const double vn = f(-x);
            e.neg.push_back(vn);
            v = kind == LimitKind::Limsup ? std::max(vp, vn) : std::min(vp, vn);
        }
        if (!std::isfinite(v)) throw DomainError("limit estimate: non-finite value at |x| = " + std::to_string(x));
        e.combined.push_back(v);
    }
    const std::size_t n = e.xs.size();
    const std::size_t first = n - g.tail_size();
    std::vector<double> t, v;
    for (std::size_t i = first; i < n; ++i) {
        t.push_back(std::log2(e.xs[i]));
        v.push_back(e.combined[i]);
    }
    e.value = kind == LimitKind::Limsup ? *std::max_element(v.begin(), v.end()) : *std::min_element(v.begin(), v.end());
    e.trend = ls_slope(t, v);
    e.monotone = true;
    for (std::size_t i = 1; i < v.size(); ++i) {
        if (kind == LimitKind::Limsup && v[i] > v[i - 1]) e.monotone = false;
        if (kind == LimitKind::Liminf && v[i] < v[i - 1]) e.monotone = false;
    }
    return e;
}

} // namespace detail

template <class F>
LimitEstimate estimate_limsup(F&& f, const GridSpec& g) {
    return detail::estimate(std::forward<F>(f), g, LimitKind::Limsup);
}
template <class F>
LimitEstimate estimate_liminf(F&& f, const GridSpec& g) {
    return detail::estimate(std::forward<F>(f), g, LimitKind::Liminf);
}

struct ClassifyConfig {
    GridSpec grid;
    double margin_tol = 1e-3;
    /// Maximum |trend| per octave accepted as "stabilised".
    double trend_tol = 1e-3;
    /// theta_j = alpha_inf (1 - 2^{-j}), j = 1..theta_levels.
    int theta_levels = 6;
    /// Fixed theta for the secondary recurrence route, as a fraction of liminf alpha.
    double theta_recurrence_fraction = 0.25;
    /// Tolerance on the liminf alpha >= 1 hypothesis.
    double alpha_gate_tol = 1e-6;
};

struct ConditionEvidence {
    std::string id; // "1.2", "1.3", "1.4", "1.5", "2.2"
    std::optional<double> theta;
    LimitEstimate estimate;
    bool stabilized = false;
    /// value clears the threshold with the right sign and the tail is stable or monotone.
    bool certified = false;
};

struct ThetaTrace {
    double theta = 0.0;
    double value = 0.0;
    double trend = 0.0;
    bool certified = false;
};

struct Verdict {
    Label label = Label::Inconclusive;
    double margin = 0.0;
    /// Condition that decided the label (empty for Inconclusive).
    std::string fired;
    std::vector<ConditionEvidence> conditions;
    std::vector<ThetaTrace> theta_trace;
    std::vector<std::string> caveats;
    ClassifyConfig config;
    std::optional<double> eta;
    double alpha_liminf = 0.0;
};

namespace detail {

inline double sgn(double v) noexcept { return v > 0.0 ? 1.0 : (v < 0.0 ? -1.0 : 0.0); }

// E(alpha, theta) memo; the triple usually takes few distinct alpha values on a grid.
class ECache {
public:
    double get(double alpha, double theta) {
        const auto key = std::make_pair(alpha, theta);
        if (auto it = memo_.find(key); it != memo_.end()) return it->second;
        const double v = specfun::e_const({alpha, theta});
        memo_.emplace(key, v);
        return v;
    }

private:
    std::map<std::pair<double, double>, double> memo_;
};

struct Pointwise {
    double alpha, beta, c;
};

inline Pointwise at(const SymbolTriple& t, double x) {
    const double a = t.alpha(x);
    return {a, t.beta(x), coeffs::jump_intensity(a, t.gamma(x))};
}

inline double drift_term(const Pointwise& p, double x) {
    return sgn(x) * (p.alpha / p.c) * std::pow(std::fabs(x), p.alpha - 1.0) * p.beta;
}

inline ConditionEvidence certify(std::string id, std::optional<double> theta, LimitEstimate est,
                                 const ClassifyConfig& cfg) {
    ConditionEvidence ev;
    ev.id = std::move(id);
    ev.theta = theta;
    ev.stabilized = std::fabs(est.trend) <= cfg.trend_tol;
    const bool sign_ok =
        est.kind == LimitKind::Limsup ? est.value <= -cfg.margin_tol : est.value >= cfg.margin_tol;
    ev.certified = sign_ok && (ev.stabilized || est.monotone);
    ev.estimate = std::move(est);
    return ev;
}

inline void add_caveat(Verdict& v, const std::string& c) {
    if (std::find(v.caveats.begin(), v.caveats.end(), c) == v.caveats.end()) v.caveats.push_back(c);
}

// Only flagged when the sign is right but the tail has not settled.
inline void note_trend(Verdict& v, const ConditionEvidence& ev, double tol) {
    const auto& e = ev.estimate;
    const bool sign_ok = e.kind == LimitKind::Limsup ? e.value <= -tol : e.value >= tol;
    if (sign_ok && !ev.stabilized && !e.monotone) add_caveat(v, "non_stabilizing_trend:" + ev.id);
}

inline std::vector<double> theta_grid(double alpha_inf, int levels, double lower) {
    std::vector<double> out;
    for (int j = 1; j <= levels; ++j) {
        const double th = alpha_inf * (1.0 - std::ldexp(1.0, -j));
        if (th > lower && th < alpha_inf) out.push_back(th);
    }
    return out;
}

} // namespace detail

/// Recurrence/transience expression at x; ids "1.2" and "1.3" take its limsup and liminf.
inline double recurrence_expression(const SymbolTriple& t, double x) {
    const auto p = detail::at(t, x);
    return detail::drift_term(p, x) + specfun::pi_cot_half(p.alpha);
}

/// Ordered decision over the drift conditions. Requires a validated triple.
inline Verdict classify(const SymbolTriple& t, const ClassifyConfig& cfg = {}) {
    if (!t.validated) throw PreconditionError("classify: symbol triple must be validated first");
    cfg.grid.check();
    Verdict v;
    v.config = cfg;
    detail::ECache ecache;
    if (!cfg.grid.two_sided) detail::add_caveat(v, "one_sided_grid");

    auto rec = [&](double x) { return recurrence_expression(t, x); };

    // (a) transience
    auto ev13 = detail::certify("1.3", {}, estimate_liminf(rec, cfg.grid), cfg);
    detail::note_trend(v, ev13, cfg.margin_tol);

    // (b) recurrence, gated on liminf alpha >= 1
    const auto alpha_est = estimate_liminf([&](double x) { return t.alpha(x); }, cfg.grid);
    v.alpha_liminf = alpha_est.value;
    const bool alpha_gate = alpha_est.value >= 1.0 - cfg.alpha_gate_tol;
    if (!alpha_gate) detail::add_caveat(v, "liminf_alpha_below_one");
    auto ev12 = detail::certify("1.2", {}, estimate_limsup(rec, cfg.grid), cfg);
    detail::note_trend(v, ev12, cfg.margin_tol);

    // tail diagnostics: alpha = 1, one-sided disagreement, two-valued alpha
    {
        const std::size_t n = alpha_est.xs.size();
        const std::size_t first = n - cfg.grid.tail_size();
        bool near_one = false;
        double a_pos_lo = 2, a_pos_hi = 0, a_neg_lo = 2, a_neg_hi = 0;
        for (std::size_t i = first; i < n; ++i) {
            a_pos_lo = std::min(a_pos_lo, alpha_est.pos[i]);
            a_pos_hi = std::max(a_pos_hi, alpha_est.pos[i]);
            if (std::fabs(alpha_est.pos[i] - 1.0) < cfg.alpha_gate_tol) near_one = true;
            if (cfg.grid.two_sided) {
                a_neg_lo = std::min(a_neg_lo, alpha_est.neg[i]);
                a_neg_hi = std::max(a_neg_hi, alpha_est.neg[i]);
                if (std::fabs(alpha_est.neg[i] - 1.0) < cfg.alpha_gate_tol) near_one = true;
            }
        }
        if (near_one) detail::add_caveat(v, "alpha_equals_one_boundary");
        if (cfg.grid.two_sided) {
            const auto& e = ev12.estimate;
            double lo_pos = e.pos[first], hi_pos = e.pos[first], lo_neg = e.neg[first], hi_neg = e.neg[first];
            for (std::size_t i = first; i < n; ++i) {
                lo_pos = std::min(lo_pos, e.pos[i]);
                hi_pos = std::max(hi_pos, e.pos[i]);
                lo_neg = std::min(lo_neg, e.neg[i]);
                hi_neg = std::max(hi_neg, e.neg[i]);
            }
            const double tol = cfg.margin_tol;
            if ((hi_pos <= -tol && lo_neg >= tol) || (hi_neg <= -tol && lo_pos >= tol))
                detail::add_caveat(v, "tails_disagree");
            const bool pos_flat = a_pos_hi - a_pos_lo < cfg.alpha_gate_tol;
            const bool neg_flat = a_neg_hi - a_neg_lo < cfg.alpha_gate_tol;
            if (pos_flat && neg_flat && std::fabs(a_pos_lo - a_neg_lo) > cfg.alpha_gate_tol) {
                char buf[200];
                std::snprintf(buf, sizeof buf,
                              "two_valued_stability_index:left=%.6g,right=%.6g,sum=%.6g;"
                              "overshoot criterion (recurrent iff sum >= 2) is outside the sufficient conditions",
                              a_neg_lo, a_pos_lo, a_neg_lo + a_pos_lo);
                detail::add_caveat(v, buf);
            }
        }
    }

    // (d) secondary recurrence route at fixed small theta
    const double theta15 = cfg.theta_recurrence_fraction * std::min(alpha_est.value, t.bounds.alpha_inf);
    std::optional<ConditionEvidence> ev15;
    if (theta15 > 0.0) {
        auto f15 = [&](double x) {
            const auto p = detail::at(t, x);
            return detail::drift_term(p, x) + ecache.get(p.alpha, theta15);
        };
        ev15 = detail::certify("1.5", theta15, estimate_limsup(f15, cfg.grid), cfg);
        detail::note_trend(v, *ev15, cfg.margin_tol);
    }

    const bool transient = ev13.certified;
    const bool rec12 = alpha_gate && ev12.certified;
    const bool rec15 = alpha_gate && ev15 && ev15->certified;
    v.conditions.push_back(ev13);
    v.conditions.push_back(ev12);
    if (ev15) v.conditions.push_back(*ev15);

    if (transient && (rec12 || rec15)) {
        detail::add_caveat(v, "conflicting_conditions");
        v.label = Label::Inconclusive;
        return v;
    }
    if (transient) {
        v.label = Label::Transient;
        v.margin = ev13.estimate.value;
        v.fired = "1.3";
        return v;
    }
    if (rec12 || rec15) {
        v.label = Label::Recurrent;
        if (rec12) {
            v.fired = "1.2";
            v.margin = -ev12.estimate.value;
        } else {
            v.fired = "1.5";
            v.margin = -ev15->estimate.value;
        }
        // (c) ergodicity on the theta grid accumulating at alpha_inf
        const double ainf = t.bounds.alpha_inf;
        if (ainf > 1.0) {
            const auto thetas = detail::theta_grid(ainf, cfg.theta_levels, 1.0);
            std::vector<ConditionEvidence> evs;
            for (double th : thetas) {
                auto f14 = [&](double x) {
                    const auto p = detail::at(t, x);
                    return detail::drift_term(p, x) +
                           p.alpha / (th * p.c) * std::pow(std::fabs(x), p.alpha - th) + ecache.get(p.alpha, th);
                };
                auto ev = detail::certify("1.4", th, estimate_limsup(f14, cfg.grid), cfg);
                v.theta_trace.push_back({th, ev.estimate.value, ev.estimate.trend, ev.certified});
                evs.push_back(std::move(ev));
            }
            if (evs.size() >= 2) {
                const auto& top = evs.back();
                const auto& second = evs[evs.size() - 2];
                v.conditions.push_back(top);
                if (top.certified && second.certified) {
                    v.label = Label::Ergodic;
                    v.fired = "1.4";
                    v.margin = -top.estimate.value;
                } else {
                    detail::note_trend(v, top, cfg.margin_tol);
                }
            }
        }
        return v;
    }
    v.label = Label::Inconclusive;
    // Closest any condition came to deciding, signed (negative means wrong side).
    v.margin = std::max(ev13.estimate.value, -ev12.estimate.value);
    if (ev15) v.margin = std::max(v.margin, -ev15->estimate.value);
    return v;
}

/// f-ergodicity with f(x) = |x|^eta on the theta grid restricted to theta >= max(1, eta).
inline Verdict classify_f_ergodic(const SymbolTriple& t, double eta, const ClassifyConfig& cfg = {}) {
    if (!t.validated) throw PreconditionError("classify_f_ergodic: symbol triple must be validated first");
    const double ainf = t.bounds.alpha_inf;
    if (!(ainf > 1.0)) throw PreconditionError("classify_f_ergodic: requires alpha_inf > 1");
    if (!(eta > 0.0)) throw PreconditionError("classify_f_ergodic: eta must be > 0");
    if (!(eta < ainf)) throw PreconditionError("classify_f_ergodic: eta must be < alpha_inf");
    Verdict base = classify(t, cfg);
    Verdict v = base;
    v.eta = eta;
    v.theta_trace.clear();
    v.label = Label::Inconclusive;
    v.fired.clear();
    // theta must satisfy max(1, eta) <= theta < alpha_inf
    const auto thetas = detail::theta_grid(ainf, cfg.theta_levels, std::max(1.0, eta) - 1e-15);
    std::vector<ConditionEvidence> evs;
    detail::ECache ecache;
    for (double th : thetas) {
        auto f22 = [&](double x) {
            const auto p = detail::at(t, x);
            return detail::drift_term(p, x) +
                   p.alpha / (th * p.c) * std::pow(std::fabs(x), p.alpha - th + eta) + ecache.get(p.alpha, th);
        };
        auto ev = detail::certify("2.2", th, estimate_limsup(f22, cfg.grid), cfg);
        v.theta_trace.push_back({th, ev.estimate.value, ev.estimate.trend, ev.certified});
        evs.push_back(std::move(ev));
    }
    if (evs.size() < 2) {
        detail::add_caveat(v, "theta_grid_too_coarse_for_eta");
        return v;
    }
    v.conditions.push_back(evs.back());
    const bool ok22 = evs.back().certified && evs[evs.size() - 2].certified;
    if (base.label != Label::Ergodic) detail::add_caveat(v, "base_verdict_not_ergodic");
    if (!ok22) detail::note_trend(v, evs.back(), cfg.margin_tol);
    if (base.label == Label::Ergodic && ok22) {
        v.label = Label::FErgodic;
        v.fired = "2.2";
        v.margin = -evs.back().estimate.value;
    } else {
        v.margin = -evs.back().estimate.value;
    }
    return v;
}

/// Exact answer for constant symmetric symbols: recurrent iff alpha > 1.
inline Label constant_symbol_label(double alpha, double gamma) {
    if (!(alpha > 0.0 && alpha < 2.0)) throw DomainError("constant_symbol_label: alpha must lie in (0,2)");
    if (!(gamma > 0.0)) throw DomainError("constant_symbol_label: gamma must be > 0");
    if (alpha == 1.0) throw DomainError("constant_symbol_label: alpha = 1 is not decided by the drift conditions");
    return alpha > 1.0 ? Label::Recurrent : Label::Transient;
}

} // namespace stablelike::classifier
