#pragma once

// Globally adaptive Gauss-Kronrod (10/21 point) integration over a list of
// breakpoints. Intervals with the largest local error are bisected first.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <limits>
#include <queue>
#include <span>
#include <string>
#include <vector>

#include "errors.hpp"
#include "summation.hpp"

namespace stablelike::quad {

struct Options {
    double abs_tol = 1e-10;
    double rel_tol = 0.0;
    std::size_t max_subdivisions = 2000;
};

struct Result {
    double value = 0.0;
    double error = 0.0;
    std::size_t evaluations = 0;
    std::size_t intervals = 0;
    bool converged = false;
};

namespace detail {

inline constexpr std::array<double, 11> kXgk = {
    0.995657163025808080735527280689003, 0.973906528517171720077964012084452,
    0.930157491355708226001207180059508, 0.865063366688984510732096688423493,
    0.780817726586416897063717578345042, 0.679409568299024406234327365114874,
    0.562757134668604683339000099272694, 0.433395394129247190799265943165784,
    0.294392862701460198131126603103866, 0.148874338981631210884826001129720,
    0.0};
inline constexpr std::array<double, 11> kWgk = {
    0.011694638867371874278064396062192, 0.032558162307964727478818972459390,
    0.054755896574351996031381300244580, 0.075039674810919952767043140916190,
    0.093125454583697605535065465083366, 0.109387158802297641899210590325805,
    0.123491976262065851077208292078301, 0.134709217311473325928054001771707,
    0.142775938577060080797094273138717, 0.147739104901338491374841515972068,
    0.149445554002916905664936468389821};
// Gauss weights for the odd-indexed Kronrod nodes.
inline constexpr std::array<double, 5> kWg = {
    0.066671344308688137593568809893332, 0.149451349150580593145776339657697,
    0.219086362515982043995534934228163, 0.269266719309996355091226921569469,
    0.295524224714752870173892994651338};

struct Piece {
    double a, b, value, error;
    bool operator<(const Piece& o) const { return error < o.error; }
};

template <class F>
Piece gk21(F& f, double a, double b) {
    const double center = 0.5 * (a + b);
    const double half = 0.5 * (b - a);
    const double fc = f(center);
    double resk = fc * kWgk[10];
    double resg = 0.0;
    double resabs = std::fabs(resk);
    std::array<double, 10> f1{}, f2{};
    for (int j = 0; j < 10; ++j) {
        const double dx = half * kXgk[j];
        f1[j] = f(center - dx);
        f2[j] = f(center + dx);
        const double s = f1[j] + f2[j];
        resk += kWgk[j] * s;
        resabs += kWgk[j] * (std::fabs(f1[j]) + std::fabs(f2[j]));
        if (j % 2 == 1) resg += kWg[j / 2] * s;
    }
    const double mean = 0.5 * resk;
    double resasc = kWgk[10] * std::fabs(fc - mean);
    for (int j = 0; j < 10; ++j)
        resasc += kWgk[j] * (std::fabs(f1[j] - mean) + std::fabs(f2[j] - mean));

    const double result = resk * half;
    resabs *= std::fabs(half);
    resasc *= std::fabs(half);
    double err = std::fabs((resk - resg) * half);
    if (resasc != 0.0 && err != 0.0) err = resasc * std::min(1.0, std::pow(200.0 * err / resasc, 1.5));
    const double eps = std::numeric_limits<double>::epsilon();
    if (resabs > std::numeric_limits<double>::min() / (50.0 * eps))
        err = std::max(50.0 * eps * resabs, err);
    return {a, b, result, err};
}

} // namespace detail

/// Integrate f over [bp.front(), bp.back()], treating every entry of bp as an
/// initial breakpoint. Never throws on non-convergence; check Result::converged.
template <class F>
Result integrate(F&& f, std::span<const double> bp, const Options& opt) {
    if (bp.size() < 2) return {0.0, 0.0, 0, 0, true};
    std::priority_queue<detail::Piece> heap;
    Result r;
    for (std::size_t i = 0; i + 1 < bp.size(); ++i) {
        if (!(bp[i + 1] > bp[i])) continue;
        heap.push(detail::gk21(f, bp[i], bp[i + 1]));
        r.evaluations += 21;
    }
    // Pieces too narrow to split further keep their error as-is.
    std::vector<detail::Piece> frozen;
    auto totals = [&](double& val, double& err) {
        CompensatedSum v, e;
        auto copy = heap;
        while (!copy.empty()) {
            v += copy.top().value;
            e += copy.top().error;
            copy.pop();
        }
        for (const auto& p : frozen) {
            v += p.value;
            e += p.error;
        }
        val = v.value();
        err = e.value();
    };
    double val = 0.0, err = 0.0;
    totals(val, err);
    std::size_t splits = 0;
    // Running totals avoid an O(n) pass per split; recomputed exactly at the end.
    while (err > std::max(opt.abs_tol, opt.rel_tol * std::fabs(val)) && !heap.empty()) {
        if (splits >= opt.max_subdivisions) break;
        detail::Piece worst = heap.top();
        heap.pop();
        const double mid = 0.5 * (worst.a + worst.b);
        if (!(mid > worst.a && mid < worst.b) ||
            (worst.b - worst.a) < 8.0 * std::numeric_limits<double>::epsilon() *
                                      std::max(std::fabs(worst.a), std::fabs(worst.b))) {
            frozen.push_back(worst);
            continue;
        }
        auto l = detail::gk21(f, worst.a, mid);
        auto rr = detail::gk21(f, mid, worst.b);
        r.evaluations += 42;
        ++splits;
        val += l.value + rr.value - worst.value;
        err += l.error + rr.error - worst.error;
        heap.push(l);
        heap.push(rr);
    }
    totals(val, err);
    r.value = val;
    r.error = err;
    r.intervals = heap.size() + frozen.size();
    r.converged = err <= std::max(opt.abs_tol, opt.rel_tol * std::fabs(val));
    return r;
}

template <class F>
Result integrate(F&& f, double a, double b, const Options& opt) {
    const std::array<double, 2> bp{a, b};
    return integrate(f, std::span<const double>(bp), opt);
}

/// Same as integrate() but raises ConvergenceError when the tolerance is missed.
template <class F>
Result integrate_or_throw(F&& f, std::span<const double> bp, const Options& opt, const std::string& what) {
    Result r = integrate(f, bp, opt);
    if (!r.converged)
        throw ConvergenceError(what + ": quadrature tolerance not met (error estimate " +
                                   std::to_string(r.error) + ")",
                               r.error, r.intervals);
    return r;
}

template <class F>
Result integrate_or_throw(F&& f, double a, double b, const Options& opt, const std::string& what) {
    const std::array<double, 2> bp{a, b};
    return integrate_or_throw(f, std::span<const double>(bp), opt, what);
}

} // namespace stablelike::quad
