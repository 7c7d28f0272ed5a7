#pragma once

// Markov-chain approximation X^m with exponent p(x,xi)/m: exact symmetric
// stable increments frozen at the left state, plus drift beta/m.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <random>
#include <string>
#include <thread>
#include <vector>

#include "coeffs.hpp"
#include "errors.hpp"
#include "specfun.hpp"
#include "summation.hpp"

namespace stablelike::simulate {

using coeffs::SymbolTriple;
using Rng = std::mt19937_64;

inline constexpr const char* kGeneratorId = "std::mt19937_64 (seed_seq from SplitMix64 of (seed, path))";

struct SplitMix64 {
    std::uint64_t state;
    std::uint64_t next() noexcept {
        std::uint64_t z = (state += 0x9E3779B97F4A7C15ULL);
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
        return z ^ (z >> 31);
    }
};

/// Independent substream for (seed, stream).
inline Rng make_stream(std::uint64_t seed, std::uint64_t stream) {
    SplitMix64 a{seed};
    SplitMix64 b{seed ^ (0x9E3779B97F4A7C15ULL * (stream + 1))};
    std::uint32_t words[8];
    for (int i = 0; i < 4; ++i) {
        const std::uint64_t u = a.next() ^ b.next();
        words[2 * i] = static_cast<std::uint32_t>(u);
        words[2 * i + 1] = static_cast<std::uint32_t>(u >> 32);
    }
    std::seed_seq sq(std::begin(words), std::end(words));
    return Rng(sq);
}

/// Uniform on the open interval (0,1), 53 bits.
inline double uniform_open(Rng& rng) {
    return (static_cast<double>(rng() >> 11) + 0.5) * 0x1.0p-53;
}

/// Symmetric stable draw with E exp(i xi X) = exp(-|xi|^alpha), Chambers-Mallows-Stuck.
inline double sample_symmetric_stable(double alpha, Rng& rng) {
    if (!(alpha > 0.0 && alpha < 2.0)) throw DomainError("sample_symmetric_stable: alpha must lie in (0,2)");
    const double u = specfun::kPi * (uniform_open(rng) - 0.5);
    const double w = -std::log(uniform_open(rng));
    if (alpha == 1.0) return std::tan(u);
    const double au = alpha * u;
    return std::sin(au) / std::pow(std::cos(u), 1.0 / alpha) *
           std::pow(std::cos(u - au) / w, (1.0 - alpha) / alpha);
}

/// One chain increment with a given standard stable draw s (s = 0 gives the drift-only step).
inline double step_chain_with(const SymbolTriple& t, double x, int m, double s) {
    const double a = t.alpha(x);
    return x + t.beta(x) / m + std::pow(t.gamma(x) / m, 1.0 / a) * s;
}

inline double step_chain(const SymbolTriple& t, double x, int m, Rng& rng) {
    const double a = t.alpha(x);
    const double s = sample_symmetric_stable(a, rng);
    return x + t.beta(x) / m + std::pow(t.gamma(x) / m, 1.0 / a) * s;
}

struct SimConfig {
    int m = 100;
    double horizon = 1000.0;
    std::size_t n_paths = 400;
    std::uint64_t seed = 1;
    double x0 = 0.0;
    double compact_K = 10.0;
    /// Steps between recorded states; 0 means m (one record per unit time).
    std::size_t record_stride = 0;
    /// Cap on recorded doubles across the ensemble.
    std::size_t max_recorded = 50'000'000;
    unsigned threads = 1;

    void check() const {
        if (m < 1) throw PreconditionError("SimConfig: m must be >= 1");
        if (!(horizon > 0.0) || !std::isfinite(horizon)) throw PreconditionError("SimConfig: horizon must be > 0");
        if (n_paths < 1) throw PreconditionError("SimConfig: n_paths must be >= 1");
        if (!(compact_K > 0.0)) throw PreconditionError("SimConfig: compact_K must be > 0");
        if (!std::isfinite(x0)) throw PreconditionError("SimConfig: x0 must be finite");
    }
    std::size_t steps() const { return static_cast<std::size_t>(std::ceil(m * horizon - 1e-9)); }
    std::size_t stride() const { return record_stride ? record_stride : static_cast<std::size_t>(m); }
    std::size_t records_per_path() const { return steps() / stride() + 1; }
};

struct PathEnsemble {
    SimConfig config;
    std::size_t steps = 0;
    std::size_t stride = 1;
    /// states[path][r] is X at step r*stride.
    std::vector<std::vector<double>> states;
    /// in_K[path][r] counts steps k in 1..r*stride with |X_k| <= K.
    std::vector<std::vector<std::uint32_t>> in_K;
    std::vector<double> terminal;
    /// Step index of first exit from [-2K,2K]; -1 if never.
    std::vector<std::int64_t> first_exit;
    /// Step index of first re-entry into [-K,K] after first exit; -1 if never.
    std::vector<std::int64_t> first_return;
    std::vector<std::uint64_t> stream_ids;

    double time_of(std::size_t step) const { return static_cast<double>(step) / config.m; }
};

namespace detail {

struct FastSymbol {
    bool constant = false;
    double alpha = 0, beta = 0, scale = 0;
};

inline void run_path(const SymbolTriple& t, const SimConfig& cfg, const FastSymbol& fs, std::size_t p,
                     PathEnsemble& e) {
    Rng rng = make_stream(cfg.seed, p);
    const std::size_t n = e.steps, stride = e.stride;
    auto& rec = e.states[p];
    auto& cnt = e.in_K[p];
    const double K = cfg.compact_K;
    double x = cfg.x0;
    std::uint32_t inside = 0;
    std::int64_t exit_step = -1, return_step = -1;
    rec[0] = x;
    cnt[0] = 0;
    for (std::size_t k = 1; k <= n; ++k) {
        if (fs.constant)
            x = x + fs.beta + fs.scale * sample_symmetric_stable(fs.alpha, rng);
        else
            x = step_chain(t, x, cfg.m, rng);
        const double ax = std::fabs(x);
        if (ax <= K) {
            ++inside;
            if (exit_step >= 0 && return_step < 0) return_step = static_cast<std::int64_t>(k);
        }
        if (exit_step < 0 && ax > 2.0 * K) exit_step = static_cast<std::int64_t>(k);
        if (k % stride == 0) {
            rec[k / stride] = x;
            cnt[k / stride] = inside;
        }
    }
    e.terminal[p] = x;
    e.first_exit[p] = exit_step;
    e.first_return[p] = return_step;
    e.stream_ids[p] = p;
}

} // namespace detail

inline PathEnsemble simulate_ensemble(const SymbolTriple& t, const SimConfig& cfg) {
    if (!t.validated) throw PreconditionError("simulate_ensemble: symbol triple must be validated first");
    cfg.check();
    PathEnsemble e;
    e.config = cfg;
    e.steps = cfg.steps();
    e.stride = cfg.stride();
    const std::size_t R = cfg.records_per_path();
    if (R > cfg.max_recorded / cfg.n_paths)
        throw ResourceLimitError("simulate_ensemble: " + std::to_string(cfg.n_paths) + " paths x " +
                                 std::to_string(R) + " records exceeds the cap of " +
                                 std::to_string(cfg.max_recorded) + " recorded values");
    e.states.assign(cfg.n_paths, std::vector<double>(R, 0.0));
    e.in_K.assign(cfg.n_paths, std::vector<std::uint32_t>(R, 0));
    e.terminal.assign(cfg.n_paths, 0.0);
    e.first_exit.assign(cfg.n_paths, -1);
    e.first_return.assign(cfg.n_paths, -1);
    e.stream_ids.assign(cfg.n_paths, 0);

    detail::FastSymbol fs;
    if (t.is_constant()) {
        fs.constant = true;
        fs.alpha = t.alpha(0.0);
        fs.beta = t.beta(0.0) / cfg.m;
        fs.scale = std::pow(t.gamma(0.0) / cfg.m, 1.0 / fs.alpha);
    }

    const unsigned nt = std::max(1u, std::min<unsigned>(cfg.threads, static_cast<unsigned>(cfg.n_paths)));
    if (nt == 1) {
        for (std::size_t p = 0; p < cfg.n_paths; ++p) detail::run_path(t, cfg, fs, p, e);
        return e;
    }
    std::vector<std::thread> pool;
    std::vector<std::exception_ptr> errs(nt);
    for (unsigned w = 0; w < nt; ++w) {
        pool.emplace_back([&, w] {
            try {
                for (std::size_t p = w; p < cfg.n_paths; p += nt) detail::run_path(t, cfg, fs, p, e);
            } catch (...) {
                errs[w] = std::current_exception();
            }
        });
    }
    for (auto& th : pool) th.join();
    for (auto& ex : errs)
        if (ex) std::rethrow_exception(ex);
    return e;
}

/// Desk-scale bands used to read the probes; conventions, not theory.
struct ProbeBands {
    double recurrent_return_min = 0.9;
    double transient_return_max = 0.5;
    double transient_median_min = 100.0;
    double ergodic_occupation_min = 0.8;
    double ergodic_window_drift_max = 0.05;
};

struct Diagnostics {
    double K = 0.0;
    double T = 0.0;
    /// True when K equals the ensemble's tracked compact set, so exits/returns use every step.
    bool exact = true;
    std::size_t n_paths = 0;
    std::size_t n_exited = 0;
    std::size_t n_returned = 0;
    /// Returned / exited; NaN when no path exited.
    double return_fraction = std::numeric_limits<double>::quiet_NaN();
    double return_fraction_se = std::numeric_limits<double>::quiet_NaN();
    double occupation_fraction = 0.0;
    double occupation_fraction_se = 0.0;
    /// Same over [0, T/2], for the stabilisation probe.
    double occupation_fraction_half = 0.0;
    double q50 = 0.0, q90 = 0.0, q99 = 0.0;
};

namespace detail {

// type-7 quantile of sorted data
inline double quantile_sorted(const std::vector<double>& v, double q) {
    if (v.empty()) return std::numeric_limits<double>::quiet_NaN();
    const double h = (v.size() - 1) * q;
    const auto lo = static_cast<std::size_t>(std::floor(h));
    const std::size_t hi = std::min(lo + 1, v.size() - 1);
    return v[lo] + (h - lo) * (v[hi] - v[lo]);
}

inline double mean_se(const std::vector<double>& v, double& se) {
    CompensatedSum s;
    for (double x : v) s += x;
    const double mean = s.value() / v.size();
    CompensatedSum d;
    for (double x : v) d += (x - mean) * (x - mean);
    se = v.size() > 1 ? std::sqrt(d.value() / (v.size() - 1)) / std::sqrt(static_cast<double>(v.size())) : 0.0;
    return mean;
}

} // namespace detail

/// Probes at compact radius K up to time T (T <= horizon; 0 means the horizon).
inline Diagnostics diagnostics(const PathEnsemble& e, double K, double T = 0.0) {
    if (e.states.empty()) throw PreconditionError("diagnostics: empty ensemble");
    if (!(K > 0.0)) throw PreconditionError("diagnostics: K must be > 0");
    Diagnostics d;
    d.K = K;
    const double horizon = e.time_of(e.steps);
    d.T = T > 0.0 ? std::min(T, horizon) : horizon;
    d.n_paths = e.states.size();
    d.exact = K == e.config.compact_K;
    // last record at or before T
    const auto step_T = static_cast<std::size_t>(std::floor(d.T * e.config.m + 1e-9));
    const std::size_t rT = std::min(step_T / e.stride, e.states[0].size() - 1);
    const std::size_t rH = rT / 2;
    const std::size_t sT = rT * e.stride, sH = rH * e.stride;
    d.T = e.time_of(sT);

    std::vector<double> occ(d.n_paths), occ_half(d.n_paths), absT(d.n_paths);
    for (std::size_t p = 0; p < d.n_paths; ++p) {
        const auto& rec = e.states[p];
        absT[p] = std::fabs(rec[rT]);
        bool exited = false, returned = false;
        if (d.exact) {
            exited = e.first_exit[p] >= 0 && static_cast<std::size_t>(e.first_exit[p]) <= sT;
            returned = exited && e.first_return[p] >= 0 && static_cast<std::size_t>(e.first_return[p]) <= sT;
            occ[p] = sT ? static_cast<double>(e.in_K[p][rT]) / sT : 0.0;
            occ_half[p] = sH ? static_cast<double>(e.in_K[p][rH]) / sH : 0.0;
        } else {
            std::size_t in = 0, in_half = 0;
            for (std::size_t r = 1; r <= rT; ++r) {
                const double ax = std::fabs(rec[r]);
                if (ax <= K) {
                    ++in;
                    if (r <= rH) ++in_half;
                    if (exited) returned = true;
                }
                if (ax > 2.0 * K) exited = true;
            }
            occ[p] = rT ? static_cast<double>(in) / rT : 0.0;
            occ_half[p] = rH ? static_cast<double>(in_half) / rH : 0.0;
        }
        d.n_exited += exited;
        d.n_returned += returned;
    }
    if (d.n_exited > 0) {
        const double f = static_cast<double>(d.n_returned) / d.n_exited;
        d.return_fraction = f;
        d.return_fraction_se = std::sqrt(f * (1.0 - f) / d.n_exited);
    }
    d.occupation_fraction = detail::mean_se(occ, d.occupation_fraction_se);
    double se_half = 0.0;
    d.occupation_fraction_half = detail::mean_se(occ_half, se_half);
    std::sort(absT.begin(), absT.end());
    d.q50 = detail::quantile_sorted(absT, 0.5);
    d.q90 = detail::quantile_sorted(absT, 0.9);
    d.q99 = detail::quantile_sorted(absT, 0.99);
    return d;
}

} // namespace stablelike::simulate
