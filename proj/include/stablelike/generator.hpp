#pragma once

// Numerical application of the stable-like generator
//   A V(x) = beta V'(x) + int (V(x+y) - V(x) - V'(x) y 1{|y|<=1}) c(x) / |y|^{alpha+1} dy
// to the three Lyapunov test functions, plus scaled drift profiles and their
// closed-form limits.
//
// The jump integral is symmetrised: with D(y) = V(x+y) + V(x-y) - 2V(x) it
// equals c int_0^inf D(y) y^{-1-alpha} dy, and the compensator drops out.
// [0, h] uses the Taylor form V''(x) y^2 with a V''' remainder bound, [h, Y]
// adaptive Gauss-Kronrod, and [Y, inf) a growth bound (or an exact series for
// the power function).

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "coeffs.hpp"
#include "errors.hpp"
#include "quadrature.hpp"
#include "specfun.hpp"
#include "summation.hpp"

namespace stablelike::generator {

using coeffs::SymbolTriple;

// ---------------------------------------------------------------------------
// Smoothing phi: even, C^2, phi(x) = |x| for |x| >= 1.

inline double phi(double x) noexcept {
    const double a = std::fabs(x);
    if (a >= 1.0) return a;
    const double s = x * x;
    return s * (1.875 + s * (-1.25 + s * 0.375));
}
inline double phi_d1(double x) noexcept {
    if (x >= 1.0) return 1.0;
    if (x <= -1.0) return -1.0;
    const double s = x * x;
    return x * (3.75 + s * (-5.0 + s * 2.25));
}
inline double phi_d2(double x) noexcept {
    if (std::fabs(x) >= 1.0) return 0.0;
    const double s = x * x;
    return 3.75 + s * (-15.0 + s * 11.25);
}
inline double phi_d3(double x) noexcept {
    if (std::fabs(x) >= 1.0) return 0.0;
    return x * (-30.0 + 45.0 * x * x);
}

namespace detail {
// phi(t) - 1 from the expansion about the knot |t| = 1, accurate near the knot.
inline double phi_minus_one(double t) noexcept {
    const double u = std::fabs(t) - 1.0;
    if (u >= 0.0) return u;
    return u * (1.0 + u * u * (2.5 + u * (4.375 + u * (2.25 + u * 0.375))));
}
} // namespace detail

/// phi(x + y) - phi(x) without cancellation for small |y|.
inline double phi_increment(double x, double y) noexcept {
    const double z = x + y;
    if (x >= 1.0 && z >= 1.0) return y;
    if (x <= -1.0 && z <= -1.0) return -y;
    if (std::fabs(x) < 1.0 && std::fabs(z) < 1.0) {
        // exact Taylor form of the degree-6 polynomial about x
        const double s = x * x;
        const double d1 = x * (3.75 + s * (-5.0 + s * 2.25));
        const double d2 = 3.75 + s * (-15.0 + s * 11.25);
        const double d3 = x * (-30.0 + 45.0 * s);
        const double d4 = -30.0 + 135.0 * s;
        const double d5 = 270.0 * x;
        return y * (d1 + y * (d2 / 2.0 + y * (d3 / 6.0 + y * (d4 / 24.0 + y * (d5 / 120.0 + y * 0.375)))));
    }
    return detail::phi_minus_one(z) - detail::phi_minus_one(x);
}

enum class TestKind { LogBarrier, BoundedPower, Power };

inline const char* to_string(TestKind k) noexcept {
    switch (k) {
    case TestKind::LogBarrier: return "log";
    case TestKind::BoundedPower: return "bounded_power";
    case TestKind::Power: return "power";
    }
    return "?";
}

struct Derivs {
    double v, d1, d2, d3;
};

/// V = g(phi): ln(1 + phi), 1 - (1 + phi)^{-theta}, or phi^theta.
struct TestFunction {
    TestKind kind = TestKind::LogBarrier;
    double theta = 0.0;
    /// Test hook: replace phi by 0, making V constant.
    bool zero_smoothing = false;

    static TestFunction log_barrier() { return {TestKind::LogBarrier, 0.0, false}; }
    static TestFunction bounded_power(double theta) {
        if (!(theta > 0.0 && theta < 1.0)) throw DomainError("bounded_power: theta must lie in (0,1)");
        return {TestKind::BoundedPower, theta, false};
    }
    static TestFunction power(double theta) {
        if (!(theta > 1.0 && theta < 2.0)) throw DomainError("power: theta must lie in (1,2)");
        return {TestKind::Power, theta, false};
    }

    // g and its first three derivatives at w (w = 1 + phi, or phi for Power).
    Derivs outer(double w) const {
        const double t = theta;
        switch (kind) {
        case TestKind::LogBarrier: return {std::log(w), 1.0 / w, -1.0 / (w * w), 2.0 / (w * w * w)};
        case TestKind::BoundedPower: {
            const double p = std::pow(w, -t);
            return {1.0 - p, t * p / w, -t * (t + 1.0) * p / (w * w), t * (t + 1.0) * (t + 2.0) * p / (w * w * w)};
        }
        case TestKind::Power: {
            if (w == 0.0) {
                const double inf = std::numeric_limits<double>::infinity();
                return {0.0, 0.0, t < 2.0 ? inf : 0.0, t < 3.0 ? inf : 0.0};
            }
            const double p = std::pow(w, t);
            return {p, t * p / w, t * (t - 1.0) * p / (w * w), t * (t - 1.0) * (t - 2.0) * p / (w * w * w)};
        }
        }
        return {0, 0, 0, 0};
    }

    double inner_shift() const noexcept { return kind == TestKind::Power ? 0.0 : 1.0; }

    /// V, V', V'', V''' at x by the chain rule.
    Derivs derivs(double x) const {
        if (zero_smoothing) return {outer(inner_shift()).v, 0.0, 0.0, 0.0};
        const double p0 = phi(x), p1 = phi_d1(x), p2 = phi_d2(x), p3 = phi_d3(x);
        if (kind == TestKind::Power && p0 == 0.0) {
            // phi ~ 1.875 x^2 near 0, so V ~ c |x|^{2 theta}; theta > 1 makes V' and V'' vanish.
            const double t = theta;
            const double inf = std::numeric_limits<double>::infinity();
            return {0.0, 0.0, 0.0, t < 1.5 ? inf : 0.0};
        }
        const Derivs g = outer(p0 + inner_shift());
        const double v2 = g.d2 * p1 * p1 + g.d1 * p2;
        const double v3 = g.d3 * p1 * p1 * p1 + 3.0 * g.d2 * p1 * p2 + g.d1 * p3;
        return {g.v, g.d1 * p1, v2, v3};
    }
    double value(double x) const { return derivs(x).v; }

    /// V(x + y) - V(x), computed from the phi increment to avoid cancellation.
    double increment(double x, double y) const {
        if (zero_smoothing) return 0.0;
        const double dphi = phi_increment(x, y);
        if (dphi == 0.0) return 0.0;
        const double t = theta;
        switch (kind) {
        case TestKind::LogBarrier: return std::log1p(dphi / (1.0 + phi(x)));
        case TestKind::BoundedPower: {
            const double w = 1.0 + phi(x);
            return -std::pow(w, -t) * std::expm1(-t * std::log1p(dphi / w));
        }
        case TestKind::Power: {
            const double p = phi(x);
            if (p == 0.0) return std::pow(phi(x + y), t);
            return std::pow(p, t) * std::expm1(t * std::log1p(dphi / p));
        }
        }
        return 0.0;
    }

    /// D(y) = V(x+y) + V(x-y) - 2 V(x).
    double symmetric_increment(double x, double y) const { return increment(x, y) + increment(x, -y); }
};

struct QuadratureConfig {
    double abs_tol = 1e-9;
    double rel_tol = 1e-10;
    double core_split = 1e-3;
    /// 0 selects Y_max adaptively from the certified tail bound; otherwise a fixed Y_max.
    double tail_cut = 0.0;
    std::size_t max_subdivisions = 2000;

    void check() const {
        if (!(abs_tol > 0.0)) throw PreconditionError("QuadratureConfig: abs_tol must be > 0");
        if (!(rel_tol >= 0.0)) throw PreconditionError("QuadratureConfig: rel_tol must be >= 0");
        if (!(core_split > 0.0 && core_split < 1.0)) throw PreconditionError("QuadratureConfig: h must lie in (0,1)");
        if (tail_cut < 0.0) throw PreconditionError("QuadratureConfig: tail_cut must be >= 0");
    }
};

/// Generator value with its parts. drift + small_jump + large_jump = value.
struct GeneratorTerms {
    double value = 0.0;
    double drift = 0.0;      // beta V'
    double small_jump = 0.0; // |y| <= 1, compensated
    double large_jump = 0.0; // |y| > 1
    double error_estimate = 0.0;
    double core_h = 0.0;
    double y_max = 0.0;
    double alpha = 0.0, beta = 0.0, gamma = 0.0, c = 0.0;
    bool converged = true;
};

namespace detail {

// Sampled max |V'''| on [x - h, x + h]; includes one-sided values at the phi
// kinks +-1. A factor 2 safety margin covers the sampling.
inline double sampled_d3_bound(const TestFunction& V, double x, double h) {
    double m = 0.0;
    constexpr int kSamples = 64;
    for (int i = 0; i <= kSamples; ++i) m = std::max(m, std::fabs(V.derivs(x - h + 2.0 * h * i / kSamples).d3));
    for (double k : {-1.0, 1.0}) {
        if (k > x - h && k < x + h) {
            const double e = 1e-12;
            m = std::max({m, std::fabs(V.derivs(k - e).d3), std::fabs(V.derivs(k + e).d3)});
        }
    }
    return 2.0 * m;
}

inline double sampled_d2_bound(const TestFunction& V, double x, double h) {
    double m = 0.0;
    constexpr int kSamples = 64;
    for (int i = 0; i <= kSamples; ++i) m = std::max(m, std::fabs(V.derivs(x - h + 2.0 * h * i / kSamples).d2));
    return 2.0 * m;
}

// Geometric breakpoints between a and b (ratio 2) plus the kink points of D.
inline std::vector<double> breakpoints(double a, double b, double x) {
    std::vector<double> bp{a, b};
    for (double y = 2.0 * a; y < b; y *= 2.0) bp.push_back(y);
    const double ax = std::fabs(x);
    for (double k : {std::fabs(ax - 1.0), ax, ax + 1.0, 1.0})
        if (k > a && k < b) bp.push_back(k);
    std::sort(bp.begin(), bp.end());
    bp.erase(std::unique(bp.begin(), bp.end()), bp.end());
    return bp;
}

struct TailResult {
    double y_max;
    double value; // contribution of [y_max, inf) without the c factor
    double bound; // certified bound on the error of `value`
};

// Exact far tail for V = phi^theta: for y >= |x| + 1,
// D(y) = (y + |x|)^theta + (y - |x|)^theta - 2 phi(x)^theta.
inline TailResult power_tail(double x, double alpha, double theta, double y_max) {
    const double ax = std::fabs(x);
    const double r2 = (ax / y_max) * (ax / y_max);
    CompensatedSum s;
    double xpow = 1.0; // |x|^{2k}
    double bound = 0.0;
    for (unsigned k = 0; k < 400; ++k) {
        const double term = 2.0 * specfun::gen_binom(theta, 2 * k) * xpow * std::pow(y_max, theta - alpha - 2.0 * k) /
                            (alpha + 2.0 * k - theta);
        s += term;
        xpow *= ax * ax;
        // |C(theta, j)| is non-increasing for j >= 1 when theta < 2, so later terms shrink by at least r2.
        bound = std::fabs(term) * r2 / (1.0 - r2);
        if (k >= 1 && bound <= 1e-17 * std::fabs(s.value())) break;
    }
    s += -2.0 * std::pow(phi(x), theta) * std::pow(y_max, -alpha) / alpha;
    return {y_max, s.value(), bound + 8.0 * std::numeric_limits<double>::epsilon() * std::fabs(s.value())};
}

// Smallest Y >= y_min with tail bound <= tau, by fixed-point iteration.
inline TailResult growth_tail(TestKind kind, double c, double alpha, double tau, double y_min, double fixed) {
    auto bound_at = [&](double Y) {
        if (kind == TestKind::LogBarrier) return 2.0 * c * std::pow(Y, -alpha) / alpha * (std::log(2.0 * Y) + 1.0 / alpha);
        return 2.0 * c * std::pow(Y, -alpha) / alpha;
    };
    if (fixed > 0.0) {
        const double Y = std::max(fixed, y_min);
        return {Y, 0.0, bound_at(Y)};
    }
    double Y = y_min;
    for (int it = 0; it < 60 && bound_at(Y) > tau; ++it) {
        double lf = kind == TestKind::LogBarrier ? std::log(2.0 * Y) + 1.0 / alpha : 1.0;
        double next = std::pow(2.0 * c * lf / (alpha * tau), 1.0 / alpha);
        Y = std::max(next, Y * 1.5);
        if (!std::isfinite(Y) || Y > 1e300) {
            Y = 1e300;
            break;
        }
    }
    return {Y, 0.0, bound_at(Y)};
}

} // namespace detail

/// Full decomposition of A V(x). Never throws on tolerance misses; see converged.
inline GeneratorTerms apply_generator_terms(const SymbolTriple& t, const TestFunction& V, double x,
                                            const QuadratureConfig& q = {}) {
    q.check();
    if (!std::isfinite(x)) throw DomainError("apply_generator: x must be finite");
    GeneratorTerms out;
    out.alpha = t.alpha(x);
    out.beta = t.beta(x);
    out.gamma = t.gamma(x);
    const double alpha = out.alpha;
    if (!(alpha > 0.0 && alpha < 2.0)) throw DomainError("apply_generator: alpha(x) outside (0,2)");
    if (!(out.gamma > 0.0)) throw DomainError("apply_generator: gamma(x) must be > 0");
    if (V.kind == TestKind::Power) {
        const double ainf = t.validated ? t.bounds.alpha_inf : alpha;
        if (!(V.theta < ainf) || !(V.theta < alpha))
            throw PreconditionError("apply_generator: power test function needs theta < alpha_inf");
    }
    const double c = coeffs::jump_intensity(alpha, out.gamma);
    out.c = c;
    const Derivs d0 = V.derivs(x);
    out.drift = out.beta * d0.d1;
    if (V.zero_smoothing) {
        out.value = out.drift;
        return out;
    }

    const double budget = q.abs_tol;
    const double tau = budget / 4.0; // per piece: core, [h,1], [1,Y], tail

    // Core [0, h].
    double h = q.core_split;
    double core = 0.0, core_err = std::numeric_limits<double>::infinity();
    for (int k = 0; k < 12; ++k) {
        const double m3 = detail::sampled_d3_bound(V, x, h);
        const double err = c * m3 * std::pow(h, 3.0 - alpha) / (3.0 * (3.0 - alpha));
        if (std::isfinite(err) && err <= tau) {
            core = d0.d2 * std::pow(h, 2.0 - alpha) / (2.0 - alpha);
            core_err = err;
            break;
        }
        h *= 0.25;
    }
    quad::Options opt;
    opt.abs_tol = tau;
    opt.rel_tol = q.rel_tol;
    opt.max_subdivisions = q.max_subdivisions;
    auto integrand = [&](double y) { return V.symmetric_increment(x, y) * std::pow(y, -1.0 - alpha); };
    if (!std::isfinite(core_err)) {
        // Taylor remainder not certifiable (V''' unbounded near x): integrate down to eps
        // and bound [0, eps] by max|V''| eps^{2-alpha}/(2-alpha).
        h = q.core_split;
        double eps = h;
        double m2 = 0.0;
        for (int k = 0; k < 200; ++k) {
            eps *= 0.5;
            m2 = detail::sampled_d2_bound(V, x, eps);
            if (c * m2 * std::pow(eps, 2.0 - alpha) / (2.0 - alpha) <= 0.5 * tau) break;
        }
        std::vector<double> bp{eps};
        for (double y = 2.0 * eps; y < h; y *= 2.0) bp.push_back(y);
        bp.push_back(h);
        quad::Options o2 = opt;
        o2.abs_tol = 0.5 * tau / c;
        const auto r = quad::integrate(integrand, std::span<const double>(bp), o2);
        core = r.value;
        core_err = c * (r.error + m2 * std::pow(eps, 2.0 - alpha) / (2.0 - alpha));
        out.converged = out.converged && r.converged;
    }
    out.core_h = h;

    // Far tail and Y_max.
    const double u = 1.0 + std::fabs(x);
    detail::TailResult tail;
    if (V.kind == TestKind::Power) {
        const double Y = std::max(q.tail_cut, 4.0 * u);
        tail = detail::power_tail(x, alpha, V.theta, Y);
        tail.bound *= c;
    } else {
        tail = detail::growth_tail(V.kind, c, alpha, tau, std::max(2.0 * u, 2.0), q.tail_cut);
    }
    out.y_max = tail.y_max;

    opt.abs_tol = tau / c;
    const auto bp_small = detail::breakpoints(h, 1.0, x);
    const auto bp_large = detail::breakpoints(1.0, tail.y_max, x);
    const auto rs = quad::integrate(integrand, std::span<const double>(bp_small), opt);
    const auto rl = quad::integrate(integrand, std::span<const double>(bp_large), opt);
    out.converged = out.converged && rs.converged && rl.converged;

    CompensatedSum small, large;
    small += core;
    small += rs.value;
    large += rl.value;
    large += tail.value;
    out.small_jump = c * small.value();
    out.large_jump = c * large.value();
    CompensatedSum total;
    total += out.drift;
    total += out.small_jump;
    total += out.large_jump;
    out.value = total.value();
    out.error_estimate = core_err + c * (rs.error + rl.error) + tail.bound;
    const double allowed = std::max(q.abs_tol, q.rel_tol * std::fabs(out.value));
    if (out.error_estimate > allowed) out.converged = false;
    return out;
}

/// A V(x). Throws ConvergenceError with the achieved estimate if the tolerance is missed.
inline double apply_generator(const SymbolTriple& t, const TestFunction& V, double x, const QuadratureConfig& q = {}) {
    const auto r = apply_generator_terms(t, V, x, q);
    if (!r.converged)
        throw ConvergenceError("apply_generator: tolerance not met at x = " + std::to_string(x) +
                                   " (error estimate " + std::to_string(r.error_estimate) + ")",
                               r.error_estimate, 0);
    return r.value;
}

// ---------------------------------------------------------------------------
// Drift profiles

enum class DriftMode { Recurrent, Transient, Ergodic };

inline const char* to_string(DriftMode m) noexcept {
    switch (m) {
    case DriftMode::Recurrent: return "recurrent";
    case DriftMode::Transient: return "transient";
    case DriftMode::Ergodic: return "ergodic";
    }
    return "?";
}

inline DriftMode drift_mode_from_string(const std::string& s) {
    if (s == "recurrent") return DriftMode::Recurrent;
    if (s == "transient") return DriftMode::Transient;
    if (s == "ergodic") return DriftMode::Ergodic;
    throw PreconditionError("unknown drift mode '" + s + "' (expected recurrent|transient|ergodic)");
}

inline TestKind kind_for(DriftMode m) noexcept {
    switch (m) {
    case DriftMode::Recurrent: return TestKind::LogBarrier;
    case DriftMode::Transient: return TestKind::BoundedPower;
    case DriftMode::Ergodic: return TestKind::Power;
    }
    return TestKind::LogBarrier;
}

inline double sgn(double v) noexcept { return v > 0.0 ? 1.0 : (v < 0.0 ? -1.0 : 0.0); }

/// Closed-form limit expression matching each profile scaling at x.
/// Recurrent:  sgn(x) (alpha/c) (1+|x|)^{alpha-1} beta + pi cot(pi alpha/2)
/// Transient:  sgn(x) (alpha/c) (1+|x|)^{alpha-1} beta + T(alpha, theta)
/// Ergodic:    sgn(x) (alpha/c) |x|^{alpha-1} beta + (alpha/(theta c)) |x|^{alpha-theta} + E(alpha, theta)
inline double asymptotic_rhs(const SymbolTriple& t, double x, DriftMode mode, std::optional<double> theta = {}) {
    const double a = t.alpha(x);
    const double b = t.beta(x);
    const double c = coeffs::c_of_x(t, x);
    const double ax = std::fabs(x);
    switch (mode) {
    case DriftMode::Recurrent: return sgn(x) * (a / c) * std::pow(1.0 + ax, a - 1.0) * b + specfun::pi_cot_half(a);
    case DriftMode::Transient:
        if (!theta) throw PreconditionError("asymptotic_rhs: transient mode needs theta");
        return sgn(x) * (a / c) * std::pow(1.0 + ax, a - 1.0) * b + specfun::transient_const(a, *theta);
    case DriftMode::Ergodic:
        if (!theta) throw PreconditionError("asymptotic_rhs: ergodic mode needs theta");
        return sgn(x) * (a / c) * std::pow(ax, a - 1.0) * b + a / (*theta * c) * std::pow(ax, a - *theta) +
               specfun::e_const({a, *theta});
    }
    return 0.0;
}

/// Profile scaling factor applied to A V (Ergodic additionally shifts A V by 1).
inline double profile_scale(double alpha, double c, double x, DriftMode mode, double theta) {
    const double ax = std::fabs(x);
    switch (mode) {
    case DriftMode::Recurrent: return alpha / c * std::pow(1.0 + ax, alpha);
    case DriftMode::Transient: return alpha / (theta * c) * std::pow(1.0 + ax, alpha + theta);
    case DriftMode::Ergodic: return alpha / (theta * c) * std::pow(ax, alpha - theta);
    }
    return 1.0;
}

struct DriftPoint {
    double x = 0.0;
    double scaled = 0.0;
    double asymptote = 0.0;
    double residual = 0.0;
    double quad_error = 0.0; // error estimate on the scaled value
    GeneratorTerms terms;
    bool ok = true;
    std::string error;
};

struct DriftProfile {
    DriftMode mode = DriftMode::Recurrent;
    double theta = 0.0;
    QuadratureConfig config;
    std::vector<DriftPoint> points;
    bool partial = false;

    /// max |residual| over the second half of the grid (by |x|).
    double tail_max_abs_residual() const {
        double m = 0.0;
        const std::size_t n = points.size();
        for (std::size_t i = n / 2; i < n; ++i)
            if (points[i].ok) m = std::max(m, std::fabs(points[i].residual));
        return m;
    }
};

/// Evaluate one profile point. The quadrature tolerance is applied to the scaled value.
inline DriftPoint drift_point(const SymbolTriple& t, const TestFunction& V, DriftMode mode, double x,
                              const QuadratureConfig& q) {
    DriftPoint p;
    p.x = x;
    try {
        const double a = t.alpha(x);
        const double c = coeffs::c_of_x(t, x);
        const double scale = profile_scale(a, c, x, mode, V.theta);
        QuadratureConfig qs = q;
        qs.abs_tol = q.abs_tol / scale;
        p.terms = apply_generator_terms(t, V, x, qs);
        const double shift = mode == DriftMode::Ergodic ? 1.0 : 0.0;
        p.scaled = scale * (p.terms.value + shift);
        p.quad_error = scale * p.terms.error_estimate;
        p.asymptote = asymptotic_rhs(t, x, mode, V.theta);
        p.residual = p.scaled - p.asymptote;
        if (!p.terms.converged) {
            p.ok = false;
            p.error = "quadrature tolerance not met";
        }
    } catch (const Error& e) {
        p.ok = false;
        p.error = e.what();
    }
    return p;
}

/// Scaled generator values along xs. Points are independent; with threads > 1 they
/// are distributed over worker threads and stored by index, so output does not
/// depend on the schedule.
inline DriftProfile drift_profile(const SymbolTriple& t, const TestFunction& V, DriftMode mode,
                                  const std::vector<double>& xs, const QuadratureConfig& q = {},
                                  unsigned threads = 1) {
    if (kind_for(mode) != V.kind)
        throw PreconditionError(std::string("drift_profile: mode ") + to_string(mode) + " requires the " +
                                to_string(kind_for(mode)) + " test function");
    for (std::size_t i = 1; i < xs.size(); ++i)
        if (!(std::fabs(xs[i]) > std::fabs(xs[i - 1])))
            throw PreconditionError("drift_profile: grid must be strictly increasing in |x|");
    q.check();
    DriftProfile prof;
    prof.mode = mode;
    prof.theta = V.theta;
    prof.config = q;
    prof.points.resize(xs.size());
    const unsigned nt = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(xs.size())));
    if (nt == 1) {
        for (std::size_t i = 0; i < xs.size(); ++i) prof.points[i] = drift_point(t, V, mode, xs[i], q);
    } else {
        std::vector<std::thread> pool;
        for (unsigned w = 0; w < nt; ++w)
            pool.emplace_back([&, w] {
                for (std::size_t i = w; i < xs.size(); i += nt) prof.points[i] = drift_point(t, V, mode, xs[i], q);
            });
        for (auto& th : pool) th.join();
    }
    for (const auto& p : prof.points)
        if (!p.ok) prof.partial = true;
    return prof;
}

/// x0 * ratio^k, k = 0..count-1.
inline std::vector<double> geometric_grid(double x0, double ratio, int count) {
    if (!(x0 > 0.0) || !(ratio > 1.0) || count < 1) throw PreconditionError("geometric_grid: need x0 > 0, ratio > 1");
    std::vector<double> xs;
    for (int k = 0; k < count; ++k) xs.push_back(x0 * std::pow(ratio, k));
    return xs;
}

// ---------------------------------------------------------------------------
// Auxiliary limits used by the drift asymptotics

struct LimitCheck {
    std::string name;
    std::string inputs;
    double value = 0.0;
    double threshold = 0.0;
    bool pass = false;
};

/// (1/x) sum_{n>=1} (1/n) (x/(1+x))^n, summed directly with a geometric tail bound.
inline double log_ratio_series(double x) {
    const double r = x / (1.0 + x);
    CompensatedSum s;
    double rn = 1.0;
    for (std::size_t n = 1; n < 100000000; ++n) {
        rn *= r;
        const double term = rn / static_cast<double>(n);
        s += term;
        const double tail = rn * r / ((static_cast<double>(n) + 1.0) * (1.0 - r));
        if (tail < 1e-17 * s.value()) break;
    }
    return s.value() / x;
}

/// (1/(1-alpha)) (1 - (x/(x+R))^{1-alpha}); the alpha = 1 limit is ln((x+R)/x).
inline double power_ratio_value(double alpha, double R, double x) {
    if (R == 0.0) return 0.0;
    if (alpha == 1.0) return std::log1p(R / x);
    return -std::expm1((1.0 - alpha) * std::log(x / (x + R))) / (1.0 - alpha);
}

inline std::vector<LimitCheck> auxiliary_limit_checks() {
    std::vector<LimitCheck> out;
    double prev = std::numeric_limits<double>::infinity();
    for (double x : {1e2, 1e3, 1e4}) {
        const double closed = std::log1p(x) / x;
        const double series = log_ratio_series(x);
        LimitCheck c;
        c.name = "log-series limit";
        c.inputs = "x=" + expr::detail::format_number(x);
        c.value = series;
        c.threshold = 1e-2;
        // Series agrees with ln(1+x)/x, decreases along the grid, and is small at the end.
        c.pass = std::fabs(series - closed) <= 1e-12 * closed && series < prev && (x < 1e4 || series < 1e-2);
        prev = series;
        out.push_back(c);
    }
    for (double alpha : {0.5, 1.3})
        for (double R : {0.0, 1.0, 2.0}) {
            LimitCheck c;
            c.name = "power-ratio limit";
            c.inputs = "alpha=" + expr::detail::format_number(alpha) + " R=" + expr::detail::format_number(R) +
                       " x=10000";
            c.value = power_ratio_value(alpha, R, 1e4);
            c.threshold = 1e-3;
            c.pass = R == 0.0 ? c.value == 0.0 : std::fabs(c.value) < 1e-3;
            out.push_back(c);
        }
    return out;
}

} // namespace stablelike::generator
