#pragma once

// Real-argument special functions: Gamma, digamma, Gauss 2F1, binomial
// coefficients, pi*cot(pi*a/2) and the ergodicity constant E(alpha, theta).

#include <algorithm>
#include <array>
#include <atomic>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numbers>
#include <string>
#include <utility>
#include <vector>

#include "errors.hpp"
#include "quadrature.hpp"
#include "summation.hpp"

namespace stablelike::specfun {

inline constexpr double kPi = std::numbers::pi;
inline constexpr double kEulerGamma = std::numbers::egamma;
/// Largest x with finite Gamma(x) in double precision.
inline constexpr double kGammaMaxArg = 171.62437695630272;

#ifdef STABLELIKE_FAULT_HOOKS
namespace fault {
/// Test-build only: corrupts digamma so that its recurrence check fails.
inline std::atomic<bool> digamma{false};
} // namespace fault
#endif

inline bool is_nonpositive_integer(double x) noexcept { return x <= 0.0 && x == std::floor(x); }

/// sin(pi x) with exact zeros at integers.
inline double sin_pi(double x) noexcept {
    if (x < 0.0) return -sin_pi(-x);
    double r = std::fmod(x, 2.0);
    if (r == 0.0 || r == 1.0) return 0.0;
    if (r == 0.5) return 1.0;
    if (r == 1.5) return -1.0;
    if (r > 1.0) return -sin_pi(r - 1.0);
    if (r > 0.5) r = 1.0 - r;
    return std::sin(kPi * r);
}

/// cos(pi x) with exact zeros at half-integers.
inline double cos_pi(double x) noexcept {
    x = std::fabs(x);
    double r = std::fmod(x, 2.0);
    if (r == 0.5 || r == 1.5) return 0.0;
    if (r == 0.0) return 1.0;
    if (r == 1.0) return -1.0;
    if (r > 1.0) return -cos_pi(r - 1.0);
    if (r > 0.5) return -cos_pi(1.0 - r);
    return std::cos(kPi * r);
}

namespace detail {

// Lanczos approximation, g = 7, n = 9.
inline constexpr double kLanczosG = 7.0;
inline constexpr std::array<double, 9> kLanczos = {
    0.99999999999980993,  676.5203681218851,     -1259.1392167224028,
    771.32342877765313,   -176.61502916214059,   12.507343278686905,
    -0.13857109526572012, 9.9843695780195716e-6, 1.5056327351493116e-7};

inline double lanczos_sum(double xm1) noexcept {
    double a = kLanczos[0];
    for (std::size_t i = 1; i < kLanczos.size(); ++i) a += kLanczos[i] / (xm1 + static_cast<double>(i));
    return a;
}

} // namespace detail

/// Gamma(x). Throws PoleError at non-positive integers, OverflowError above kGammaMaxArg.
inline double gamma_fn(double x) {
    if (std::isnan(x)) throw DomainError("gamma_fn: NaN argument");
    if (is_nonpositive_integer(x)) throw PoleError("gamma_fn: pole at " + std::to_string(x));
    if (x > kGammaMaxArg) throw OverflowError("gamma_fn: overflow for x = " + std::to_string(x));
    if (x < 0.5) {
        // Reflection: Gamma(x) Gamma(1-x) = pi / sin(pi x).
        return kPi / (sin_pi(x) * gamma_fn(1.0 - x));
    }
    if (x == std::floor(x) && x <= 30.0) {
        double f = 1.0;
        for (int k = 2; k < static_cast<int>(x); ++k) f *= k;
        return f;
    }
    const double xm1 = x - 1.0;
    const double t = xm1 + detail::kLanczosG + 0.5;
    const double half_pow = std::pow(t, 0.5 * (xm1 + 0.5));
    return std::sqrt(2.0 * kPi) * half_pow * std::exp(-t) * half_pow * detail::lanczos_sum(xm1);
}

/// ln|Gamma(x)|.
inline double log_gamma(double x) {
    if (std::isnan(x)) throw DomainError("log_gamma: NaN argument");
    if (is_nonpositive_integer(x)) throw PoleError("log_gamma: pole at " + std::to_string(x));
    if (x < 0.5) return std::log(kPi / std::fabs(sin_pi(x))) - log_gamma(1.0 - x);
    if (x < 20.0) return std::log(std::fabs(gamma_fn(x)));
    const double xm1 = x - 1.0;
    const double t = xm1 + detail::kLanczosG + 0.5;
    return 0.5 * std::log(2.0 * kPi) + (xm1 + 0.5) * std::log(t) - t + std::log(detail::lanczos_sum(xm1));
}

/// 1/Gamma(x); zero at the poles.
inline double recip_gamma(double x) {
    if (is_nonpositive_integer(x)) return 0.0;
    if (x > kGammaMaxArg) return 0.0;
    return 1.0 / gamma_fn(x);
}

/// Digamma psi(x): reflection for x < 0, upward recurrence, asymptotic series for x >= 10.
inline double digamma(double x) {
    if (std::isnan(x)) throw DomainError("digamma: NaN argument");
    if (is_nonpositive_integer(x)) throw PoleError("digamma: pole at " + std::to_string(x));
    if (x < 0.0) {
        // psi(1-x) - psi(x) = pi cot(pi x)
        return digamma(1.0 - x) - kPi * cos_pi(x) / sin_pi(x);
    }
    double shift = 0.0;
    CompensatedSum acc;
    while (x + shift < 10.0) {
        acc += 1.0 / (x + shift);
        shift += 1.0;
    }
    const double y = x + shift;
    const double inv2 = 1.0 / (y * y);
    const double series =
        inv2 * (1.0 / 12 - inv2 * (1.0 / 120 - inv2 * (1.0 / 252 - inv2 * (1.0 / 240 - inv2 * (1.0 / 132 - inv2 * (691.0 / 32760 - inv2 / 12.0))))));
    double r = std::log(y) - 0.5 / y - series - acc.value();
#ifdef STABLELIKE_FAULT_HOOKS
    if (fault::digamma.load(std::memory_order_relaxed)) r += 1e-6 * x;
#endif
    return r;
}

/// Generalized binomial coefficient theta(theta-1)...(theta-k+1)/k!.
inline double gen_binom(double theta, unsigned k) noexcept {
    double r = 1.0;
    for (unsigned j = 0; j < k; ++j) r *= (theta - j) / (j + 1.0);
    return r;
}

/// pi * cot(pi alpha / 2) on (0, 2); exactly zero at alpha = 1.
inline double pi_cot_half(double alpha) {
    if (!(alpha > 0.0 && alpha < 2.0)) throw DomainError("pi_cot_half: alpha must lie in (0,2)");
    if (alpha == 1.0) return 0.0;
    return kPi * cos_pi(0.5 * alpha) / sin_pi(0.5 * alpha);
}

struct SeriesResult {
    double value = 0.0;
    double tail_bound = 0.0;
    std::size_t terms = 0;
};

/// Partial-fraction route to pi cot(pi alpha / 2): with a = alpha/2,
/// 1/(a-1) + 1/a + sum_{n>=1} (1-2a)/((a+n)(1-a+n)) = psi(1-a) - psi(a) = pi cot(pi a).
/// Partial sum to N, then an Euler-Maclaurin tail; tail_bound covers the dropped terms.
/// alpha = 1 is rejected to keep the documented contract of the series form.
inline SeriesResult cot_series_detailed(double alpha) {
    if (!(alpha > 0.0 && alpha < 2.0)) throw DomainError("cot_series_check: alpha must lie in (0,2)");
    if (alpha == 1.0) throw DomainError("cot_series_check: alpha = 1 is excluded");
    const double a = 0.5 * alpha;
    constexpr int N = 2000;
    // (1-2a)/((a+n)(1-a+n)) = 1/(n+a) - 1/(n+1-a)
    auto f = [a](double n) { return 1.0 / (n + a) - 1.0 / (n + 1.0 - a); };
    auto d1 = [a](double n) { return -1.0 / ((n + a) * (n + a)) + 1.0 / ((n + 1.0 - a) * (n + 1.0 - a)); };
    auto d3 = [a](double n) { return -6.0 / std::pow(n + a, 4) + 6.0 / std::pow(n + 1.0 - a, 4); };
    auto d5 = [a](double n) { return -120.0 / std::pow(n + a, 6) + 120.0 / std::pow(n + 1.0 - a, 6); };
    CompensatedSum s;
    s += 1.0 / (a - 1.0);
    s += 1.0 / a;
    for (int n = 1; n <= N; ++n) s += f(n);
    const double n = N;
    // sum_{k>N} f(k) = int_N^inf f - f(N)/2 - f'(N)/12 + f'''(N)/720 - ...
    s += std::log((n + 1.0 - a) / (n + a));
    s += -0.5 * f(n);
    s += -d1(n) / 12.0;
    s += d3(n) / 720.0;
    SeriesResult r;
    r.value = s.value();
    r.tail_bound = std::fabs(d5(n)) / 30240.0 + 4.0 * std::numeric_limits<double>::epsilon() * std::fabs(r.value);
    r.terms = N + 2;
    return r;
}

inline double cot_series_check(double alpha) { return cot_series_detailed(alpha).value; }

// ---------------------------------------------------------------------------
// Gauss hypergeometric function

struct HypergeomParams {
    double a = 0.0, b = 0.0, c = 0.0, z = 0.0;
};

enum class Hyp2F1Strategy { Trivial, Series, Pfaff, Euler, GaussSum, Connection };

inline const char* to_string(Hyp2F1Strategy s) noexcept {
    switch (s) {
    case Hyp2F1Strategy::Trivial: return "trivial";
    case Hyp2F1Strategy::Series: return "series";
    case Hyp2F1Strategy::Pfaff: return "pfaff";
    case Hyp2F1Strategy::Euler: return "euler";
    case Hyp2F1Strategy::GaussSum: return "gauss_sum";
    case Hyp2F1Strategy::Connection: return "connection";
    }
    return "?";
}

struct Hyp2F1Result {
    double value = 0.0;
    Hyp2F1Strategy strategy = Hyp2F1Strategy::Trivial;
    /// Non-zero when the connection formula had to shift b off an integer collision.
    double b_perturbation = 0.0;
    double error_estimate = 0.0;
};

/// Defining power series; valid for |z| < 1. Stops on a ratio tail bound.
inline Hyp2F1Result gauss_2f1_series(const HypergeomParams& p, std::size_t max_terms = 1000000) {
    if (is_nonpositive_integer(p.c)) throw DomainError("gauss_2f1: c is a non-positive integer");
    if (!(std::fabs(p.z) < 1.0)) throw DomainError("gauss_2f1_series: requires |z| < 1");
    const double az = std::fabs(p.z);
    const double eps = 0.5 * std::numeric_limits<double>::epsilon();
    const double n0 = std::ceil(2.0 * std::max({std::fabs(p.a), std::fabs(p.b), std::fabs(p.c)})) + 2.0;
    CompensatedSum sum;
    double term = 1.0;
    double n = 0.0;
    sum += term;
    for (std::size_t k = 0; k < max_terms; ++k, n += 1.0) {
        term *= (p.a + n) * (p.b + n) / ((p.c + n) * (n + 1.0)) * p.z;
        if (term == 0.0) return {sum.value(), Hyp2F1Strategy::Series, 0.0, 0.0};
        sum += term;
        const double m = n + 1.0; // index of the term just added
        if (m >= n0) {
            const double rho = std::max(az * (m + 1.0 + std::fabs(p.a)) * (m + 1.0 + std::fabs(p.b)) /
                                            ((m + 1.0 - std::fabs(p.c)) * (m + 2.0)),
                                        az);
            if (rho < 1.0) {
                const double tail = std::fabs(term) * rho / (1.0 - rho);
                const double s = std::fabs(sum.value());
                if (tail <= eps * s || tail < 1e-300)
                    return {sum.value(), Hyp2F1Strategy::Series, 0.0, tail};
            }
        }
    }
    throw ConvergenceError("gauss_2f1_series: term budget exhausted", std::fabs(term), max_terms);
}

/// Euler integral representation; requires c > b > 0 (or c > a > 0, by symmetry) and z < 1.
inline Hyp2F1Result gauss_2f1_euler(const HypergeomParams& p) {
    double a = p.a, b = p.b;
    const double c = p.c, z = p.z;
    if (!(z < 1.0)) throw DomainError("gauss_2f1_euler: requires z < 1");
    if (!(c > b && b > 0.0)) {
        std::swap(a, b);
        if (!(c > b && b > 0.0)) throw DomainError("gauss_2f1_euler: requires c > b > 0 or c > a > 0");
    }
    const double d = c - b;
    quad::Options opt;
    opt.abs_tol = 1e-300;
    opt.rel_tol = 2e-13;
    opt.max_subdivisions = 4000;
    // t = s^{1/b} on [0, 1/2] absorbs t^{b-1}; 1 - t = v^{1/d} on [1/2, 1] absorbs (1-t)^{d-1}.
    auto left = [&](double s) {
        const double t = std::pow(s, 1.0 / b);
        return std::pow(1.0 - t, d - 1.0) * std::pow(1.0 - t * z, -a);
    };
    auto right = [&](double v) {
        const double u = std::pow(v, 1.0 / d);
        const double t = 1.0 - u;
        return std::pow(t, b - 1.0) * std::pow(u * z + (1.0 - z), -a);
    };
    const auto l = quad::integrate(left, 0.0, std::pow(0.5, b), opt);
    const auto r = quad::integrate(right, 0.0, std::pow(0.5, d), opt);
    const double integral = l.value / b + r.value / d;
    double pref;
    if (c < 150.0) {
        pref = gamma_fn(c) * recip_gamma(b) * recip_gamma(d);
    } else {
        pref = std::exp(log_gamma(c) - log_gamma(b) - log_gamma(d));
    }
    const double err = std::fabs(pref) * (l.error / b + r.error / d);
    if (!l.converged || !r.converged)
        throw ConvergenceError("gauss_2f1_euler: quadrature tolerance not met", err, l.intervals + r.intervals);
    return {pref * integral, Hyp2F1Strategy::Euler, 0.0, err};
}

/// Gauss summation at z = 1; requires c - a - b > 0.
inline Hyp2F1Result gauss_2f1_at_one(const HypergeomParams& p) {
    const double s = p.c - p.a - p.b;
    if (!(s > 0.0)) throw DomainError("gauss_2f1: z = 1 requires c - a - b > 0");
    const double v = gamma_fn(p.c) * gamma_fn(s) * recip_gamma(p.c - p.a) * recip_gamma(p.c - p.b);
    return {v, Hyp2F1Strategy::GaussSum, 0.0, 0.0};
}

inline Hyp2F1Result gauss_2f1_detailed(const HypergeomParams& p);

/// Connection formula mapping z to 1/z; requires z < -1 and b - a not an integer.
inline Hyp2F1Result gauss_2f1_connection(const HypergeomParams& p) {
    const double a = p.a, b = p.b, c = p.c, z = p.z;
    if (!(z < -1.0)) throw DomainError("gauss_2f1_connection: requires z < -1");
    if (b - a == std::floor(b - a)) throw DomainError("gauss_2f1_connection: b - a is an integer");
    const double w = 1.0 / z;
    const double gc = gamma_fn(c);
    const double coef1 = gc * gamma_fn(b - a) * recip_gamma(b) * recip_gamma(c - a);
    const double coef2 = gc * gamma_fn(a - b) * recip_gamma(a) * recip_gamma(c - b);
    double t1 = 0.0, t2 = 0.0;
    if (coef1 != 0.0) t1 = coef1 * std::pow(-z, -a) * gauss_2f1_detailed({a, 1.0 - c + a, 1.0 - b + a, w}).value;
    if (coef2 != 0.0) t2 = coef2 * std::pow(-z, -b) * gauss_2f1_detailed({b, 1.0 - c + b, 1.0 - a + b, w}).value;
    return {t1 + t2, Hyp2F1Strategy::Connection, 0.0, 0.0};
}

/// 2F1(a, b; c; z) for real arguments with z <= 1; see Hyp2F1Strategy for the route taken.
inline Hyp2F1Result gauss_2f1_detailed(const HypergeomParams& p) {
    if (!std::isfinite(p.a) || !std::isfinite(p.b) || !std::isfinite(p.c) || !std::isfinite(p.z))
        throw DomainError("gauss_2f1: non-finite parameter");
    if (is_nonpositive_integer(p.c)) throw DomainError("gauss_2f1: c is a non-positive integer");
    const double z = p.z;
    if (z == 0.0 || p.a == 0.0 || p.b == 0.0) return {1.0, Hyp2F1Strategy::Trivial, 0.0, 0.0};
    if (z > 1.0) throw DomainError("gauss_2f1: z > 1 is outside the supported domain");
    if (z == 1.0) return gauss_2f1_at_one(p);
    if (std::fabs(z) <= 0.5) return gauss_2f1_series(p);
    if (z >= -1.0 && z < -0.5) {
        if (z == -1.0 && !(p.c - p.a - p.b > -1.0))
            throw DomainError("gauss_2f1: z = -1 requires c - a - b > -1");
        // Pfaff: F(a,b;c;z) = (1-z)^{-a} F(a, c-b; c; z/(z-1)), z/(z-1) in [1/3, 1/2].
        auto r = gauss_2f1_series({p.a, p.c - p.b, p.c, z / (z - 1.0)});
        return {std::pow(1.0 - z, -p.a) * r.value, Hyp2F1Strategy::Pfaff, 0.0, r.error_estimate};
    }
    const bool euler_ok = (p.c > p.b && p.b > 0.0) || (p.c > p.a && p.a > 0.0);
    if (z > 0.5) {
        if (euler_ok) return gauss_2f1_euler(p);
        return gauss_2f1_series(p);
    }
    // z < -1
    if (p.b - p.a != std::floor(p.b - p.a)) return gauss_2f1_connection(p);
    if (euler_ok) return gauss_2f1_euler(p);
    constexpr double kShift = 1e-9;
    auto r = gauss_2f1_connection({p.a, p.b + kShift, p.c, z});
    r.b_perturbation = kShift;
    return r;
}

inline double gauss_2f1(const HypergeomParams& p) { return gauss_2f1_detailed(p).value; }

// ---------------------------------------------------------------------------
// E(alpha, theta)

struct EArgs {
    double alpha = 1.5;
    double theta = 0.5;
};

struct EConstDetail {
    double value = 0.0;
    /// Sum over i >= 1 of C(p, 2i) * 2 / (2i - alpha).
    double series = 0.0;
    double series_tail_bound = 0.0;
    double f_minus1 = 0.0;
    double f_plus1 = 0.0;
};

/// sum_{i>=1} C(p,2i) * 2/(2i - alpha) for p in (-1, 2), p != 0.
/// Terms decay like i^{-(p+2)}, i.e. only algebraically, so partial sums at
/// N0 * 2^j are Richardson-extrapolated using the known exponents -(p+1)-k.
/// tail_bound is the smallest difference between successive extrapolation levels.
inline SeriesResult binomial_even_series(double alpha, double p) {
    constexpr std::size_t kN0 = 32;
    constexpr int kLevels = 9;
    std::array<double, kLevels + 1> sums{};
    CompensatedSum s;
    double coef = 1.0; // C(p, k)
    unsigned k = 0;
    std::size_t i = 0;
    std::size_t next = kN0;
    for (int level = 0; level <= kLevels; ++level) {
        while (i < next) {
            coef *= (p - k) / (k + 1.0);
            ++k;
            coef *= (p - k) / (k + 1.0);
            ++k;
            ++i;
            s += coef * 2.0 / (2.0 * static_cast<double>(i) - alpha);
        }
        sums[level] = s.value();
        next *= 2;
    }
    // Richardson table, column by column; diag[k] uses k eliminated error terms.
    std::vector<double> col(sums.begin(), sums.end());
    std::vector<double> diag{col.back()};
    for (int kk = 0; kk < kLevels; ++kk) {
        const double f = std::pow(2.0, -(p + 1.0) - kk);
        std::vector<double> nxt(col.size() - 1);
        for (std::size_t j = 0; j + 1 < col.size(); ++j) nxt[j] = (col[j + 1] - f * col[j]) / (1.0 - f);
        col = std::move(nxt);
        diag.push_back(col.back());
    }
    SeriesResult r;
    r.terms = i;
    double scale = 0.0;
    for (double v : sums) scale = std::max(scale, std::fabs(v));
    r.value = diag[1];
    r.tail_bound = std::fabs(diag[1] - diag[0]);
    for (std::size_t j = 2; j < diag.size(); ++j) {
        const double d = std::fabs(diag[j] - diag[j - 1]);
        if (d < r.tail_bound) {
            r.tail_bound = d;
            r.value = diag[j];
        }
    }
    // Differences can vanish once the table saturates; keep a rounding floor.
    r.tail_bound = std::max(r.tail_bound, 16.0 * std::numeric_limits<double>::epsilon() * scale);
    return r;
}

/// The combined binomial/hypergeometric constant for exponent p in (-1, alpha), p != 0:
/// (alpha/p) * S - 2/p + alpha [F(-p, a-p, 1+a-p; -1) + F(...; 1)] / (p (alpha - p)).
/// p > 0 gives E(alpha, p); p = -theta gives the transient-side constant.
inline EConstDetail lyapunov_constant(double alpha, double p) {
    if (!(alpha > 0.0 && alpha < 2.0)) throw DomainError("lyapunov_constant: alpha must lie in (0,2)");
    if (!(p > -1.0 && p < alpha) || p == 0.0)
        throw DomainError("lyapunov_constant: exponent must lie in (-1, alpha) \\ {0}");
    EConstDetail d;
    const auto s = binomial_even_series(alpha, p);
    d.series = s.value;
    d.series_tail_bound = s.tail_bound;
    const HypergeomParams hm{-p, alpha - p, 1.0 + alpha - p, -1.0};
    const HypergeomParams hp{-p, alpha - p, 1.0 + alpha - p, 1.0};
    d.f_minus1 = gauss_2f1(hm);
    d.f_plus1 = gauss_2f1(hp);
    CompensatedSum v;
    v += alpha / p * d.series;
    v += -2.0 / p;
    v += alpha * (d.f_minus1 + d.f_plus1) / (p * (alpha - p));
    d.value = v.value();
    return d;
}

inline EConstDetail e_const_detailed(const EArgs& args) {
    if (!(args.alpha > 0.0 && args.alpha < 2.0)) throw DomainError("e_const: alpha must lie in (0,2)");
    if (!(args.theta > 0.0 && args.theta < args.alpha)) throw DomainError("e_const: theta must lie in (0, alpha)");
    return lyapunov_constant(args.alpha, args.theta);
}

/// E(alpha, theta), 0 < theta < alpha < 2.
inline double e_const(const EArgs& args) { return e_const_detailed(args).value; }

/// Transient-side constant
/// -(alpha/theta) sum C(-theta,2i) 2/(2i-alpha) + 2/theta - alpha [F(theta, a+theta, 1+a+theta; -1) + F(...;1)]/(theta(a+theta)),
/// which equals lyapunov_constant(alpha, -theta). Requires theta in (0, 1).
inline double transient_const(double alpha, double theta) {
    if (!(theta > 0.0 && theta < 1.0)) throw DomainError("transient_const: theta must lie in (0,1)");
    return lyapunov_constant(alpha, -theta).value;
}

} // namespace stablelike::specfun
