#pragma once

// Symbol triple (alpha(x), beta(x), gamma(x)), sampling-based validation,
// the jump intensity c(x), and the key = value symbol-file format.

#include <algorithm>
#include <cctype>
#include <cstdlib>
#include <cmath>
#include <cstddef>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "errors.hpp"
#include "expression.hpp"
#include "specfun.hpp"

namespace stablelike::coeffs {

using expr::CoefficientExpr;

/// Uniform grid on [-x_max, x_max], extended by a geometric tail out to x_max * 2^tail_octaves.
struct ValidationGrid {
    double x_max = 1e4;
    std::size_t points = 20001;
    int tail_octaves = 20;

    std::vector<double> samples() const {
        std::vector<double> xs;
        xs.reserve(points + 2 * static_cast<std::size_t>(tail_octaves));
        const double step = points > 1 ? 2.0 * x_max / static_cast<double>(points - 1) : 0.0;
        for (std::size_t i = 0; i < points; ++i) xs.push_back(-x_max + step * static_cast<double>(i));
        for (int k = 1; k <= tail_octaves; ++k) {
            const double v = std::ldexp(x_max, k);
            xs.push_back(v);
            xs.insert(xs.begin(), -v);
        }
        return xs;
    }
};

struct Bounds {
    double alpha_inf = 0.0;
    double alpha_sup = 0.0;
    double gamma_inf = 0.0;
    double gamma_sup = 0.0;
    double beta_sup_abs = 0.0;
};

struct Range {
    double min = 0.0;
    double max = 0.0;
};

struct ValidationReport {
    ValidationGrid grid;
    Range alpha, beta, gamma;
    bool alpha_ok = false;
    bool gamma_ok = false;
    bool beta_ok = false;
    bool pass = false;
    std::vector<std::string> failures;
    std::vector<std::string> warnings;
};

struct SymbolTriple {
    CoefficientExpr alpha;
    CoefficientExpr beta;
    CoefficientExpr gamma;
    Bounds bounds;
    bool validated = false;

    bool is_constant() const { return alpha.is_constant() && beta.is_constant() && gamma.is_constant(); }
};

inline SymbolTriple make_triple(std::string_view alpha, std::string_view beta, std::string_view gamma,
                                double blend_width = 1.0) {
    return {CoefficientExpr::parse(alpha, blend_width), CoefficientExpr::parse(beta, blend_width),
            CoefficientExpr::parse(gamma, blend_width), {}, false};
}

inline CoefficientExpr parse_coefficient(std::string_view src, double blend_width = 1.0) {
    if (src.empty()) throw SyntaxError("syntax error at offset 0: empty expression (expected operand)", 0, {"operand"});
    return CoefficientExpr::parse(src, blend_width);
}

inline double eval_coefficient(const CoefficientExpr& e, double x) {
    if (!std::isfinite(x)) throw EvalDomainError("eval_coefficient: x must be finite", x);
    return e(x);
}

/// Jump-kernel constant for stability index alpha and scale gamma:
/// gamma * alpha * 2^{alpha-1} Gamma((alpha+1)/2) / (sqrt(pi) Gamma(1 - alpha/2)).
inline double jump_intensity(double alpha, double gamma) {
    if (!(alpha > 0.0 && alpha < 2.0)) throw DomainError("jump_intensity: alpha must lie in (0,2)");
    return gamma * alpha * std::exp2(alpha - 1.0) * specfun::gamma_fn(0.5 * (alpha + 1.0)) /
           (std::sqrt(specfun::kPi) * specfun::gamma_fn(1.0 - 0.5 * alpha));
}

inline double c_of_x(const SymbolTriple& t, double x) { return jump_intensity(t.alpha(x), t.gamma(x)); }

namespace detail {

// Narrow [a, b] around the largest difference; a jump keeps a finite gap as the
// interval shrinks, a continuous function does not.
inline bool looks_like_jump(const CoefficientExpr& f, double a, double b, double gap_tol) {
    double fa = f(a), fb = f(b);
    for (int it = 0; it < 60 && (b - a) > 1e-12 * std::max(1.0, std::fabs(a)); ++it) {
        const double m = 0.5 * (a + b);
        const double fm = f(m);
        if (std::fabs(fm - fa) >= std::fabs(fb - fm)) {
            b = m;
            fb = fm;
        } else {
            a = m;
            fa = fm;
        }
    }
    return std::fabs(fb - fa) > gap_tol;
}

} // namespace detail

/// Sample all three coefficients on the grid, fill t.bounds, and report.
/// Evaluation errors propagate with the offending x.
inline ValidationReport validate_triple(SymbolTriple& t, const ValidationGrid& grid = {}) {
    ValidationReport rep;
    rep.grid = grid;
    if (grid.points < 2 || !(grid.x_max > 0.0)) throw ValidationError("validate_triple: degenerate grid");
    const auto xs = grid.samples();
    std::vector<double> va(xs.size()), vb(xs.size()), vg(xs.size());
    for (std::size_t i = 0; i < xs.size(); ++i) {
        va[i] = t.alpha(xs[i]);
        vb[i] = t.beta(xs[i]);
        vg[i] = t.gamma(xs[i]);
    }
    auto range = [](const std::vector<double>& v) {
        const auto [lo, hi] = std::minmax_element(v.begin(), v.end());
        return Range{*lo, *hi};
    };
    rep.alpha = range(va);
    rep.beta = range(vb);
    rep.gamma = range(vg);

    constexpr double kAlphaMargin = 1e-6;
    rep.alpha_ok = rep.alpha.min > kAlphaMargin && rep.alpha.max < 2.0 - kAlphaMargin;
    if (rep.alpha.min <= kAlphaMargin)
        rep.failures.push_back("alpha_inf out of (0,2): sampled min " + expr::detail::format_number(rep.alpha.min));
    if (rep.alpha.max >= 2.0 - kAlphaMargin)
        rep.failures.push_back("alpha_sup out of (0,2): sampled max " + expr::detail::format_number(rep.alpha.max));
    rep.gamma_ok = rep.gamma.min > 1e-9;
    if (!rep.gamma_ok)
        rep.failures.push_back("gamma_inf <= 1e-9: sampled min " + expr::detail::format_number(rep.gamma.min));
    const double bmax = std::max(std::fabs(rep.beta.min), std::fabs(rep.beta.max));
    rep.beta_ok = bmax <= 1e6;
    if (!rep.beta_ok) rep.failures.push_back("|beta| exceeds 1e6: sampled " + expr::detail::format_number(bmax));
    rep.pass = rep.alpha_ok && rep.gamma_ok && rep.beta_ok;

    for (const auto* e : {&t.alpha, &t.beta, &t.gamma})
        for (const auto& w : e->warnings()) rep.warnings.push_back(w);

    // Smoothness probe on the uniform part only; geometric tail spacing is too coarse.
    constexpr double kJumpScreen = 1e-2;
    constexpr double kGapTol = 1e-6;
    const char* names[] = {"alpha", "beta", "gamma"};
    const std::vector<double>* vals[] = {&va, &vb, &vg};
    const CoefficientExpr* exprs[] = {&t.alpha, &t.beta, &t.gamma};
    const std::size_t first = static_cast<std::size_t>(grid.tail_octaves);
    for (int c = 0; c < 3; ++c) {
        if (exprs[c]->is_constant()) continue;
        int probes = 0;
        for (std::size_t i = first; i + 1 < first + grid.points && probes < 50; ++i) {
            const double d = std::fabs((*vals[c])[i + 1] - (*vals[c])[i]);
            if (d <= kJumpScreen) continue;
            ++probes;
            if (detail::looks_like_jump(*exprs[c], xs[i], xs[i + 1], kGapTol)) {
                rep.warnings.push_back(std::string("smoothness: ") + names[c] + " appears to jump near x = " +
                                       expr::detail::format_number(xs[i]));
                break;
            }
        }
    }

    if (rep.pass) {
        t.bounds.alpha_inf = rep.alpha.min;
        t.bounds.alpha_sup = rep.alpha.max;
        t.bounds.gamma_inf = rep.gamma.min;
        t.bounds.gamma_sup = rep.gamma.max;
        t.bounds.beta_sup_abs = bmax;
        t.validated = true;
    } else {
        t.validated = false;
    }
    return rep;
}

/// Validate and throw ValidationError listing the failures.
inline ValidationReport require_valid(SymbolTriple& t, const ValidationGrid& grid = {}) {
    auto rep = validate_triple(t, grid);
    if (!rep.pass) {
        std::string msg = "symbol triple failed validation:";
        for (const auto& f : rep.failures) msg += " " + f + ";";
        throw ValidationError(msg);
    }
    return rep;
}

// ---------------------------------------------------------------------------
// Symbol files
//
//   # comment
//   alpha = 1.2 + 0.3*sin(x)
//   beta  = -tanh(x)
//   gamma = 1
//   grid.xmax = 1e4        (optional)
//   grid.points = 20001    (optional)
//   blend_width = 1        (optional, default width for 3-argument piece)

struct SymbolFile {
    std::string alpha, beta, gamma;
    ValidationGrid grid;
    double blend_width = 1.0;
    // Byte offsets of each expression inside the file, for diagnostics.
    std::size_t alpha_offset = 0, beta_offset = 0, gamma_offset = 0;
};

namespace detail {

inline std::string trim(std::string_view s, std::size_t& lead) {
    std::size_t b = 0, e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
    lead = b;
    return std::string(s.substr(b, e - b));
}

inline double parse_real(const std::string& v, std::size_t offset, const std::string& key) {
    char* end = nullptr;
    const double d = std::strtod(v.c_str(), &end);
    if (v.empty() || end != v.c_str() + v.size() || !std::isfinite(d))
        throw SyntaxError("symbol file: '" + key + "' expects a number at offset " + std::to_string(offset), offset,
                          {"number"});
    return d;
}

} // namespace detail

/// Parse symbol-file text. Offsets in errors are byte offsets into `text`.
inline SymbolFile parse_symbol_text(std::string_view text) {
    SymbolFile f;
    bool have_a = false, have_b = false, have_g = false;
    std::size_t pos = 0;
    int line_no = 0;
    while (pos <= text.size()) {
        std::size_t eol = text.find('\n', pos);
        if (eol == std::string_view::npos) eol = text.size();
        ++line_no;
        std::string_view line = text.substr(pos, eol - pos);
        if (const auto h = line.find('#'); h != std::string_view::npos) line = line.substr(0, h);
        std::size_t lead = 0;
        const std::string content = detail::trim(line, lead);
        if (!content.empty()) {
            const auto eq = line.find('=');
            if (eq == std::string_view::npos)
                throw SyntaxError("symbol file line " + std::to_string(line_no) + ": expected 'key = value'",
                                  pos + lead, {"="});
            std::size_t klead = 0, vlead = 0;
            const std::string key = detail::trim(line.substr(0, eq), klead);
            const std::string val = detail::trim(line.substr(eq + 1), vlead);
            const std::size_t voff = pos + eq + 1 + vlead;
            if (val.empty())
                throw SyntaxError("symbol file line " + std::to_string(line_no) + ": empty value for '" + key + "'",
                                  voff, {"value"});
            if (key == "alpha") {
                f.alpha = val;
                f.alpha_offset = voff;
                have_a = true;
            } else if (key == "beta") {
                f.beta = val;
                f.beta_offset = voff;
                have_b = true;
            } else if (key == "gamma") {
                f.gamma = val;
                f.gamma_offset = voff;
                have_g = true;
            } else if (key == "grid.xmax") {
                f.grid.x_max = detail::parse_real(val, voff, key);
            } else if (key == "grid.points") {
                const double p = detail::parse_real(val, voff, key);
                if (p < 2 || p != std::floor(p))
                    throw SyntaxError("symbol file: grid.points must be an integer >= 2", voff, {"integer"});
                f.grid.points = static_cast<std::size_t>(p);
            } else if (key == "blend_width") {
                f.blend_width = detail::parse_real(val, voff, key);
                if (f.blend_width < 0.0) throw SyntaxError("symbol file: blend_width must be >= 0", voff, {"number"});
            } else {
                throw SyntaxError("symbol file line " + std::to_string(line_no) + ": unknown key '" + key + "'",
                                  pos + klead, {"alpha", "beta", "gamma", "grid.xmax", "grid.points", "blend_width"});
            }
        }
        if (eol == text.size()) break;
        pos = eol + 1;
    }
    auto missing = [&](const char* k) {
        throw SyntaxError(std::string("symbol file: missing required key '") + k + "'", text.size(), {k});
    };
    if (!have_a) missing("alpha");
    if (!have_b) missing("beta");
    if (!have_g) missing("gamma");
    return f;
}

inline std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot open file '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

/// Parse the three expressions; syntax errors are re-based to file offsets.
inline SymbolTriple triple_from_file(const SymbolFile& f) {
    auto one = [&](const std::string& src, std::size_t base, const char* key) {
        try {
            return parse_coefficient(src, f.blend_width);
        } catch (const SyntaxError& e) {
            throw SyntaxError(std::string("symbol file key '") + key + "': " + e.what(), base + e.offset(),
                              e.expected());
        }
    };
    return {one(f.alpha, f.alpha_offset, "alpha"), one(f.beta, f.beta_offset, "beta"),
            one(f.gamma, f.gamma_offset, "gamma"), {}, false};
}

} // namespace stablelike::coeffs
