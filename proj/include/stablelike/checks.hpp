#pragma once

// Self-check suites run by `stablelike check`. Each check is a named identity
// or property evaluated on a fixed-seed random grid.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "generator.hpp"
#include "specfun.hpp"

namespace stablelike::checks {

struct Failure {
    std::string inputs;
    double observed = 0.0;
    double expected = 0.0;
};

struct CheckResult {
    std::string suite;
    std::string name;
    std::string tolerance; // human-readable, e.g. "rel 1e-12"
    std::size_t cases = 0;
    std::size_t failed = 0;
    double max_error = 0.0;
    /// First few failures only.
    std::vector<Failure> failures;
    /// Set when the check threw instead of producing a number.
    std::string error;
    bool pass() const { return failed == 0 && error.empty(); }
};

namespace detail {

inline std::string fmt(double v) { return expr::detail::format_number(v); }

class Recorder {
public:
    Recorder(std::string suite, std::string name, std::string tol) {
        r_.suite = std::move(suite);
        r_.name = std::move(name);
        r_.tolerance = std::move(tol);
    }
    void record(bool ok, double err, const std::string& inputs, double observed, double expected) {
        ++r_.cases;
        if (std::isfinite(err)) r_.max_error = std::max(r_.max_error, err);
        else r_.max_error = err;
        if (!ok) {
            ++r_.failed;
            if (r_.failures.size() < 5) r_.failures.push_back({inputs, observed, expected});
        }
    }
    void rel(double observed, double expected, double tol, const std::string& inputs) {
        const double err = std::fabs(observed - expected) / std::max(std::fabs(expected), 1e-300);
        record(err <= tol, err, inputs, observed, expected);
    }
    void abs(double observed, double expected, double tol, const std::string& inputs) {
        const double err = std::fabs(observed - expected);
        record(err <= tol, err, inputs, observed, expected);
    }
    CheckResult take() { return std::move(r_); }
    CheckResult& result() { return r_; }

private:
    CheckResult r_;
};

template <class F>
CheckResult guarded(const std::string& suite, const std::string& name, const std::string& tol, F body) {
    Recorder rec(suite, name, tol);
    try {
        body(rec);
    } catch (const std::exception& e) {
        rec.result().error = e.what();
    }
    return rec.take();
}

inline double uniform(std::mt19937_64& g, double a, double b) {
    return a + (b - a) * (static_cast<double>(g() >> 11) * 0x1.0p-53);
}

} // namespace detail

inline std::vector<CheckResult> specfun_suite(std::uint64_t seed = 20240601) {
    using namespace specfun;
    using detail::fmt;
    std::vector<CheckResult> out;
    const std::string S = "specfun";
    std::mt19937_64 g(seed);

    out.push_back(detail::guarded(S, "gamma recurrence", "rel 1e-12", [&](detail::Recorder& r) {
        for (int i = 0; i < 200; ++i) {
            const double x = detail::uniform(g, 0.1, 50.0);
            r.rel(gamma_fn(x + 1.0), x * gamma_fn(x), 1e-12, "x=" + fmt(x));
        }
    }));
    out.push_back(detail::guarded(S, "gamma reflection", "rel 1e-12", [&](detail::Recorder& r) {
        for (int i = 0; i < 200; ++i) {
            const double x = detail::uniform(g, 1e-3, 1.0 - 1e-3);
            r.rel(gamma_fn(1.0 - x) * gamma_fn(x), kPi / std::sin(kPi * x), 1e-12, "x=" + fmt(x));
        }
    }));
    out.push_back(detail::guarded(S, "digamma recurrence", "abs 1e-10", [&](detail::Recorder& r) {
        for (int i = 0; i < 200; ++i) {
            const double x = detail::uniform(g, 0.1, 50.0);
            r.abs(digamma(1.0 + x), digamma(x) + 1.0 / x, 1e-10, "x=" + fmt(x));
        }
    }));
    out.push_back(detail::guarded(S, "digamma reflection", "abs 1e-10", [&](detail::Recorder& r) {
        for (int i = 0; i < 200; ++i) {
            const double x = detail::uniform(g, 0.01, 0.99);
            r.abs(digamma(1.0 - x), digamma(x) + kPi / std::tan(kPi * x), 1e-10, "x=" + fmt(x));
        }
    }));
    out.push_back(detail::guarded(S, "digamma at 1/2", "abs 1e-12", [&](detail::Recorder& r) {
        r.abs(digamma(0.5), -kEulerGamma - 2.0 * std::log(2.0), 1e-12, "x=0.5");
    }));
    out.push_back(detail::guarded(S, "hypergeometric series vs closed form", "rel 1e-12", [&](detail::Recorder& r) {
        for (int i = 0; i < 50; ++i) {
            const double z = detail::uniform(g, -0.5, 0.5);
            if (std::fabs(z) < 1e-6) continue;
            r.rel(gauss_2f1({1.0, 1.0, 2.0, z}), -std::log1p(-z) / z, 1e-12, "a=1 b=1 c=2 z=" + fmt(z));
        }
    }));
    out.push_back(detail::guarded(S, "hypergeometric connection", "rel 1e-9", [&](detail::Recorder& r) {
        for (int i = 0; i < 100; ++i) {
            double b = detail::uniform(g, 0.0, 2.0);
            if (std::fabs(b - 1.0) < 1e-3) b += 2e-3;
            if (b < 1e-3) b = 1e-3;
            const double z = detail::uniform(g, -50.0, -1.0 - 1e-9);
            const HypergeomParams p{1.0, b, b + 1.0, z};
            const double lhs = gauss_2f1_euler(p).value;
            const double rhs = gauss_2f1_connection(p).value;
            r.rel(rhs, lhs, 1e-9, "a=1 b=" + fmt(b) + " c=" + fmt(b + 1.0) + " z=" + fmt(z));
        }
    }));
    out.push_back(detail::guarded(S, "generalized binomial", "rel 1e-14", [&](detail::Recorder& r) {
        r.rel(gen_binom(0.5, 2), -0.125, 1e-14, "theta=0.5 k=2");
        r.rel(gen_binom(-0.3, 3), -0.3 * -1.3 * -2.3 / 6.0, 1e-14, "theta=-0.3 k=3");
        r.abs(gen_binom(0.7, 0), 1.0, 0.0, "theta=0.7 k=0");
    }));
    out.push_back(detail::guarded(S, "cotangent series", "abs 1e-8", [&](detail::Recorder& r) {
        for (int k = 1; k < 200; ++k) {
            const double a = 0.01 * k;
            if (std::fabs(a - 1.0) <= 0.01 + 1e-12) continue;
            r.abs(cot_series_check(a), pi_cot_half(a), 1e-8, "alpha=" + fmt(a));
        }
        r.abs(cot_series_check(1.999), pi_cot_half(1.999), 1e-8, "alpha=1.999");
    }));
    out.push_back(detail::guarded(S, "E increasing in theta", "strict", [&](detail::Recorder& r) {
        for (double a : {1.1, 1.3, 1.5, 1.7, 1.9}) {
            double prev = -std::numeric_limits<double>::infinity();
            for (int j = 1; j <= 9; ++j) {
                const double th = 0.1 * j * a;
                const double e = e_const({a, th});
                r.record(e > prev, e > prev ? 0.0 : prev - e, "alpha=" + fmt(a) + " theta=" + fmt(th), e, prev);
                prev = e;
            }
        }
    }));
    // The gap to the limit is linear in theta; a tenfold smaller theta must shrink it tenfold.
    out.push_back(detail::guarded(S, "E small-theta limit", "gap(1e-5) < 1e-3, ratio in [0.05,0.15]",
                                  [&](detail::Recorder& r) {
                                      for (double a : {1.1, 1.5, 1.9}) {
                                          const double lim = pi_cot_half(a);
                                          const double g4 = std::fabs(e_const({a, 1e-4}) - lim);
                                          const double g5 = std::fabs(e_const({a, 1e-5}) - lim);
                                          const double ratio = g5 / g4;
                                          const bool ok = g5 < 1e-3 && ratio >= 0.05 && ratio <= 0.15;
                                          r.record(ok, g5, "alpha=" + fmt(a) + " theta=1e-5", g5 + lim, lim);
                                      }
                                  }));
    return out;
}

inline std::vector<CheckResult> generator_suite() {
    using namespace generator;
    using detail::fmt;
    std::vector<CheckResult> out;
    const std::string S = "generator";

    out.push_back(detail::guarded(S, "auxiliary limits", "per check", [&](detail::Recorder& r) {
        for (const auto& c : auxiliary_limit_checks())
            r.record(c.pass, c.value, c.name + " " + c.inputs, c.value, c.threshold);
    }));
    out.push_back(detail::guarded(S, "smoothing C2 matching", "abs 1e-14", [&](detail::Recorder& r) {
        for (double s : {-1.0, 1.0}) {
            r.abs(phi(s), 1.0, 1e-14, "phi at " + fmt(s));
            r.abs(phi_d1(s), s, 1e-14, "phi' at " + fmt(s));
            r.abs(phi_d2(s), 0.0, 1e-14, "phi'' at " + fmt(s));
        }
        for (int k = -20; k <= 20; ++k) {
            const double x = 0.05 * k;
            const double v = phi(x);
            r.record(v >= 0.0 && v <= std::fabs(x) + 1e-15, 0.0, "0<=phi<=|x| at " + fmt(x), v, std::fabs(x));
        }
    }));
    out.push_back(detail::guarded(S, "constant test function", "exact 0", [&](detail::Recorder& r) {
        auto t = coeffs::make_triple("1.5", "0.3", "1");
        coeffs::require_valid(t);
        auto V = TestFunction::log_barrier();
        V.zero_smoothing = true;
        for (double x : {-7.0, 0.0, 3.0}) r.abs(apply_generator(t, V, x), 0.0, 0.0, "x=" + fmt(x));
    }));
    out.push_back(detail::guarded(S, "even symmetry", "abs 2e-9", [&](detail::Recorder& r) {
        auto t = coeffs::make_triple("1.4 + 0.3*tanh(x^2/50)", "0", "1 + 0.5*cos(x)");
        coeffs::require_valid(t);
        for (auto V : {TestFunction::log_barrier(), TestFunction::bounded_power(0.5)})
            for (double x : {0.3, 2.0, 17.0, 250.0})
                r.abs(apply_generator(t, V, x), apply_generator(t, V, -x), 2e-9,
                      std::string(to_string(V.kind)) + " x=" + fmt(x));
    }));
    out.push_back(detail::guarded(S, "recurrent scaling limit", "abs 0.05 at x=1e4", [&](detail::Recorder& r) {
        for (double a : {1.2, 1.5, 1.8})
            for (double b : {0.0, 0.3, -0.3}) {
                auto t = coeffs::make_triple(fmt(a), fmt(b), "1");
                coeffs::require_valid(t);
                const auto p = drift_point(t, TestFunction::log_barrier(), DriftMode::Recurrent, 1e4, {});
                r.abs(p.scaled, p.asymptote, 0.05, "alpha=" + fmt(a) + " beta=" + fmt(b));
            }
    }));
    out.push_back(detail::guarded(S, "ergodic scaling limit", "abs 0.05 at x=1e4", [&](detail::Recorder& r) {
        for (double a : {1.5, 1.8})
            for (double b : {0.0, -0.3}) {
                auto t = coeffs::make_triple(fmt(a), fmt(b), "1");
                coeffs::require_valid(t);
                const double th = 0.5 * (1.0 + a);
                const auto p = drift_point(t, TestFunction::power(th), DriftMode::Ergodic, 1e4, {});
                r.abs(p.scaled, p.asymptote, 0.05, "alpha=" + fmt(a) + " beta=" + fmt(b) + " theta=" + fmt(th));
            }
    }));
    return out;
}

inline std::vector<CheckResult> run_suite(const std::string& which) {
    if (which == "specfun") return specfun_suite();
    if (which == "generator") return generator_suite();
    if (which == "all") {
        auto a = specfun_suite();
        auto b = generator_suite();
        a.insert(a.end(), b.begin(), b.end());
        return a;
    }
    throw PreconditionError("unknown check suite '" + which + "' (expected specfun, generator or all)");
}

inline bool all_pass(const std::vector<CheckResult>& rs) {
    for (const auto& r : rs)
        if (!r.pass()) return false;
    return true;
}

/// Plain-text table; failures list inputs with observed vs expected.
inline std::string format_table(const std::vector<CheckResult>& rs) {
    std::string s;
    char buf[512];
    std::snprintf(buf, sizeof buf, "%-10s %-38s %6s %6s %11s  %s\n", "suite", "check", "cases", "failed", "max_err",
                  "tolerance");
    s += buf;
    for (const auto& r : rs) {
        std::snprintf(buf, sizeof buf, "%-10s %-38s %6zu %6zu %11.3g  %s  %s\n", r.suite.c_str(), r.name.c_str(),
                      r.cases, r.failed, r.max_error, r.tolerance.c_str(), r.pass() ? "PASS" : "FAIL");
        s += buf;
        if (!r.error.empty()) s += "    error: " + r.error + "\n";
        for (const auto& f : r.failures) {
            std::snprintf(buf, sizeof buf, "    %s: observed %.17g expected %.17g\n", f.inputs.c_str(), f.observed,
                          f.expected);
            s += buf;
        }
    }
    return s;
}

} // namespace stablelike::checks
