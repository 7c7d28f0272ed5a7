#pragma once

// Coefficient expressions in one variable x.
//
//   expr    := term  (('+' | '-') term)*
//   term    := unary (('*' | '/') unary)*
//   unary   := ('-' | '+') unary | power
//   power   := primary ('^' unary)?           right associative
//   primary := number | 'x' | 'pi' | name '(' expr (',' expr)* ')' | '(' expr ')'
//
// Functions: sin cos tanh exp ln abs sgn (1 arg), min max (2 args),
// piece(threshold, left, right[, width]).

#include <cctype>
#include <cmath>
#include <cstddef>
#include <cstdio>
#include <cstdlib>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "errors.hpp"

namespace stablelike::expr {

enum class Op { Const, Var, Neg, Add, Sub, Mul, Div, Pow, Call };
enum class Fn { Sin, Cos, Tanh, Exp, Ln, Abs, Min, Max, Sgn, Piece };

struct Node;
using NodePtr = std::shared_ptr<const Node>;

struct Node {
    Op op = Op::Const;
    double value = 0.0;
    Fn fn = Fn::Sin;
    std::vector<NodePtr> args;
    std::size_t offset = 0; // byte offset in the source
};

inline const char* fn_name(Fn f) noexcept {
    switch (f) {
    case Fn::Sin: return "sin";
    case Fn::Cos: return "cos";
    case Fn::Tanh: return "tanh";
    case Fn::Exp: return "exp";
    case Fn::Ln: return "ln";
    case Fn::Abs: return "abs";
    case Fn::Min: return "min";
    case Fn::Max: return "max";
    case Fn::Sgn: return "sgn";
    case Fn::Piece: return "piece";
    }
    return "?";
}

inline std::optional<Fn> fn_from_name(std::string_view s) noexcept {
    for (Fn f : {Fn::Sin, Fn::Cos, Fn::Tanh, Fn::Exp, Fn::Ln, Fn::Abs, Fn::Min, Fn::Max, Fn::Sgn, Fn::Piece})
        if (s == fn_name(f)) return f;
    return std::nullopt;
}

/// C^1 blend: 0 left of thr - w/2, 1 right of thr + w/2, cubic smoothstep between.
inline double smoothstep_blend(double x, double thr, double width) noexcept {
    if (width <= 0.0) return x < thr ? 0.0 : (x > thr ? 1.0 : 0.5);
    const double t = (x - thr) / width + 0.5;
    if (t <= 0.0) return 0.0;
    if (t >= 1.0) return 1.0;
    return t * t * (3.0 - 2.0 * t);
}

namespace detail {

inline double eval_node(const Node& n, double x) {
    switch (n.op) {
    case Op::Const: return n.value;
    case Op::Var: return x;
    case Op::Neg: return -eval_node(*n.args[0], x);
    case Op::Add: return eval_node(*n.args[0], x) + eval_node(*n.args[1], x);
    case Op::Sub: return eval_node(*n.args[0], x) - eval_node(*n.args[1], x);
    case Op::Mul: return eval_node(*n.args[0], x) * eval_node(*n.args[1], x);
    case Op::Div: {
        const double d = eval_node(*n.args[1], x);
        if (d == 0.0) throw EvalDomainError("division by zero at x = " + std::to_string(x), x);
        return eval_node(*n.args[0], x) / d;
    }
    case Op::Pow: {
        const double b = eval_node(*n.args[0], x);
        const double e = eval_node(*n.args[1], x);
        if (b < 0.0 && e != std::floor(e))
            throw EvalDomainError("negative base with non-integer exponent at x = " + std::to_string(x), x);
        if (b == 0.0 && e < 0.0) throw EvalDomainError("zero to a negative power at x = " + std::to_string(x), x);
        return std::pow(b, e);
    }
    case Op::Call: {
        const double a0 = eval_node(*n.args[0], x);
        switch (n.fn) {
        case Fn::Sin: return std::sin(a0);
        case Fn::Cos: return std::cos(a0);
        case Fn::Tanh: return std::tanh(a0);
        case Fn::Exp: return std::exp(a0);
        case Fn::Ln:
            if (!(a0 > 0.0)) throw EvalDomainError("ln of non-positive value at x = " + std::to_string(x), x);
            return std::log(a0);
        case Fn::Abs: return std::fabs(a0);
        case Fn::Sgn: return a0 > 0.0 ? 1.0 : (a0 < 0.0 ? -1.0 : 0.0);
        case Fn::Min: return std::fmin(a0, eval_node(*n.args[1], x));
        case Fn::Max: return std::fmax(a0, eval_node(*n.args[1], x));
        case Fn::Piece: {
            const double w = eval_node(*n.args[3], x);
            const double s = smoothstep_blend(x, a0, w);
            if (s == 0.0) return eval_node(*n.args[1], x);
            if (s == 1.0) return eval_node(*n.args[2], x);
            return (1.0 - s) * eval_node(*n.args[1], x) + s * eval_node(*n.args[2], x);
        }
        }
        break;
    }
    }
    return 0.0;
}

inline bool has_var(const Node& n) {
    if (n.op == Op::Var) return true;
    // piece blends in x even when all arguments are constant
    if (n.op == Op::Call && n.fn == Fn::Piece) return true;
    for (const auto& a : n.args)
        if (has_var(*a)) return true;
    return false;
}

// Coarse sign analysis for domain-risk warnings.
inline bool is_positive(const Node& n);
inline bool is_nonneg(const Node& n) {
    switch (n.op) {
    case Op::Const: return n.value >= 0.0;
    case Op::Add:
    case Op::Mul:
    case Op::Div: return is_nonneg(*n.args[0]) && is_nonneg(*n.args[1]);
    case Op::Pow:
        if (is_nonneg(*n.args[0])) return true;
        return n.args[1]->op == Op::Const && std::fmod(n.args[1]->value, 2.0) == 0.0;
    case Op::Call:
        if (n.fn == Fn::Abs || n.fn == Fn::Exp) return true;
        if (n.fn == Fn::Max) return is_nonneg(*n.args[0]) || is_nonneg(*n.args[1]);
        if (n.fn == Fn::Min) return is_nonneg(*n.args[0]) && is_nonneg(*n.args[1]);
        if (n.fn == Fn::Piece) return is_nonneg(*n.args[1]) && is_nonneg(*n.args[2]);
        return false;
    default: return is_positive(n);
    }
}
inline bool is_positive(const Node& n) {
    switch (n.op) {
    case Op::Const: return n.value > 0.0;
    case Op::Add:
        return (is_positive(*n.args[0]) && is_nonneg(*n.args[1])) ||
               (is_nonneg(*n.args[0]) && is_positive(*n.args[1]));
    case Op::Mul:
    case Op::Div: return is_positive(*n.args[0]) && is_positive(*n.args[1]);
    case Op::Pow: return is_positive(*n.args[0]);
    case Op::Call:
        if (n.fn == Fn::Exp) return true;
        if (n.fn == Fn::Max) return is_positive(*n.args[0]) || is_positive(*n.args[1]);
        if (n.fn == Fn::Min) return is_positive(*n.args[0]) && is_positive(*n.args[1]);
        if (n.fn == Fn::Piece) return is_positive(*n.args[1]) && is_positive(*n.args[2]);
        return false;
    default: return false;
    }
}
inline bool is_nonzero(const Node& n) {
    if (n.op == Op::Const) return n.value != 0.0;
    if (n.op == Op::Neg) return is_nonzero(*n.args[0]);
    if (n.op == Op::Mul) return is_nonzero(*n.args[0]) && is_nonzero(*n.args[1]);
    return is_positive(n);
}

inline std::string format_number(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

inline void print_node(const Node& n, std::string& out) {
    auto bin = [&](const char* op) {
        out += '(';
        print_node(*n.args[0], out);
        out += op;
        print_node(*n.args[1], out);
        out += ')';
    };
    switch (n.op) {
    case Op::Const: out += format_number(n.value); break;
    case Op::Var: out += 'x'; break;
    case Op::Neg:
        out += "(-";
        print_node(*n.args[0], out);
        out += ')';
        break;
    case Op::Add: bin(" + "); break;
    case Op::Sub: bin(" - "); break;
    case Op::Mul: bin(" * "); break;
    case Op::Div: bin(" / "); break;
    case Op::Pow: bin(" ^ "); break;
    case Op::Call:
        out += fn_name(n.fn);
        out += '(';
        for (std::size_t i = 0; i < n.args.size(); ++i) {
            if (i) out += ", ";
            print_node(*n.args[i], out);
        }
        out += ')';
        break;
    }
}

inline bool equal_nodes(const Node& a, const Node& b) {
    if (a.op != b.op || a.args.size() != b.args.size()) return false;
    if (a.op == Op::Const && a.value != b.value) return false;
    if (a.op == Op::Call && a.fn != b.fn) return false;
    for (std::size_t i = 0; i < a.args.size(); ++i)
        if (!equal_nodes(*a.args[i], *b.args[i])) return false;
    return true;
}

class Parser {
public:
    Parser(std::string_view src, double blend_width) : src_(src), blend_width_(blend_width) {}

    NodePtr parse_all(std::vector<std::string>& warnings) {
        warnings_ = &warnings;
        skip_ws();
        if (pos_ >= src_.size()) fail("empty expression", {"operand"});
        NodePtr e = parse_expr();
        skip_ws();
        if (pos_ < src_.size()) fail("unexpected trailing input", {"operator", "end of input"});
        return e;
    }

private:
    std::string_view src_;
    double blend_width_;
    std::size_t pos_ = 0;
    std::vector<std::string>* warnings_ = nullptr;

    [[noreturn]] void fail(const std::string& msg, std::vector<std::string> expected) const {
        std::string what = "syntax error at offset " + std::to_string(pos_) + ": " + msg;
        if (!expected.empty()) {
            what += " (expected ";
            for (std::size_t i = 0; i < expected.size(); ++i) {
                if (i) what += " | ";
                what += expected[i];
            }
            what += ')';
        }
        throw SyntaxError(what, pos_, std::move(expected));
    }

    void skip_ws() {
        while (pos_ < src_.size() && std::isspace(static_cast<unsigned char>(src_[pos_]))) ++pos_;
    }
    bool accept(char c) {
        skip_ws();
        if (pos_ < src_.size() && src_[pos_] == c) {
            ++pos_;
            return true;
        }
        return false;
    }
    void expect(char c, const char* what) {
        if (!accept(c)) fail(std::string("expected ") + what, {std::string(1, c)});
    }

    static NodePtr make(Op op, std::size_t off, std::vector<NodePtr> args = {}, double v = 0.0, Fn fn = Fn::Sin) {
        auto n = std::make_shared<Node>();
        n->op = op;
        n->value = v;
        n->fn = fn;
        n->args = std::move(args);
        n->offset = off;
        return n;
    }

    NodePtr parse_expr() {
        NodePtr lhs = parse_term();
        for (;;) {
            skip_ws();
            const std::size_t off = pos_;
            if (accept('+')) lhs = make(Op::Add, off, {lhs, parse_term()});
            else if (accept('-')) lhs = make(Op::Sub, off, {lhs, parse_term()});
            else return lhs;
        }
    }

    NodePtr parse_term() {
        NodePtr lhs = parse_unary();
        for (;;) {
            skip_ws();
            const std::size_t off = pos_;
            if (accept('*')) {
                lhs = make(Op::Mul, off, {lhs, parse_unary()});
            } else if (accept('/')) {
                NodePtr rhs = parse_unary();
                if (!is_nonzero(*rhs))
                    warnings_->push_back("domain risk: denominator at offset " + std::to_string(rhs->offset) +
                                         " is not provably non-zero");
                lhs = make(Op::Div, off, {lhs, rhs});
            } else {
                return lhs;
            }
        }
    }

    NodePtr parse_unary() {
        skip_ws();
        const std::size_t off = pos_;
        if (accept('-')) return make(Op::Neg, off, {parse_unary()});
        if (accept('+')) return parse_unary();
        return parse_power();
    }

    NodePtr parse_power() {
        NodePtr base = parse_primary();
        skip_ws();
        const std::size_t off = pos_;
        if (accept('^')) return make(Op::Pow, off, {base, parse_unary()});
        return base;
    }

    NodePtr parse_primary() {
        skip_ws();
        const std::size_t off = pos_;
        if (pos_ >= src_.size()) fail("unexpected end of input", {"operand"});
        const char ch = src_[pos_];
        if (std::isdigit(static_cast<unsigned char>(ch)) || ch == '.') return parse_number();
        if (accept('(')) {
            NodePtr e = parse_expr();
            expect(')', "')'");
            return e;
        }
        if (std::isalpha(static_cast<unsigned char>(ch)) || ch == '_') {
            std::size_t end = pos_;
            while (end < src_.size() &&
                   (std::isalnum(static_cast<unsigned char>(src_[end])) || src_[end] == '_'))
                ++end;
            const std::string_view name = src_.substr(pos_, end - pos_);
            if (name == "x") {
                pos_ = end;
                return make(Op::Var, off);
            }
            if (name == "pi") {
                pos_ = end;
                return make(Op::Const, off, {}, 3.141592653589793);
            }
            const auto fn = fn_from_name(name);
            if (!fn) fail("unknown identifier '" + std::string(name) + "'", {"x", "pi", "function name"});
            pos_ = end;
            return parse_call(*fn, off);
        }
        fail(std::string("unexpected character '") + ch + "'", {"operand"});
    }

    NodePtr parse_number() {
        const std::size_t off = pos_;
        const char* begin = src_.data() + pos_;
        std::size_t end = pos_;
        while (end < src_.size() && (std::isdigit(static_cast<unsigned char>(src_[end])) || src_[end] == '.')) ++end;
        if (end < src_.size() && (src_[end] == 'e' || src_[end] == 'E')) {
            std::size_t e = end + 1;
            if (e < src_.size() && (src_[e] == '+' || src_[e] == '-')) ++e;
            if (e < src_.size() && std::isdigit(static_cast<unsigned char>(src_[e]))) {
                end = e;
                while (end < src_.size() && std::isdigit(static_cast<unsigned char>(src_[end]))) ++end;
            }
        }
        const std::string text(begin, end - pos_);
        char* stop = nullptr;
        const double v = std::strtod(text.c_str(), &stop);
        if (stop != text.c_str() + text.size() || text == ".") fail("malformed number '" + text + "'", {"number"});
        if (!std::isfinite(v)) fail("number out of range '" + text + "'", {"finite number"});
        pos_ = end;
        return make(Op::Const, off, {}, v);
    }

    NodePtr parse_call(Fn fn, std::size_t off) {
        expect('(', "'(' after function name");
        std::vector<NodePtr> args;
        args.push_back(parse_expr());
        while (accept(',')) args.push_back(parse_expr());
        skip_ws();
        if (!accept(')')) fail("expected ')' or ','", {")", ","});
        std::size_t lo = 1, hi = 1;
        if (fn == Fn::Min || fn == Fn::Max) lo = hi = 2;
        if (fn == Fn::Piece) {
            lo = 3;
            hi = 4;
        }
        if (args.size() < lo || args.size() > hi) {
            pos_ = off;
            fail(std::string(fn_name(fn)) + " takes " + std::to_string(lo) +
                     (hi != lo ? "-" + std::to_string(hi) : "") + " argument(s), got " + std::to_string(args.size()),
                 {});
        }
        if (fn == Fn::Piece && args.size() == 3) args.push_back(make(Op::Const, off, {}, blend_width_));
        if (fn == Fn::Ln && !is_positive(*args[0]))
            warnings_->push_back("domain risk: ln argument at offset " + std::to_string(args[0]->offset) +
                                 " is not provably positive");
        return make(Op::Call, off, std::move(args), 0.0, fn);
    }
};

} // namespace detail

/// Immutable parsed expression. Copies share the tree.
class CoefficientExpr {
public:
    CoefficientExpr() : CoefficientExpr(constant(0.0)) {}

    static CoefficientExpr parse(std::string_view src, double blend_width = 1.0) {
        CoefficientExpr e;
        e.source_ = std::string(src);
        detail::Parser p(src, blend_width);
        e.root_ = p.parse_all(e.warnings_);
        e.fold();
        return e;
    }

    static CoefficientExpr constant(double v) {
        CoefficientExpr e(nullptr);
        auto n = std::make_shared<Node>();
        n->op = Op::Const;
        n->value = v;
        e.root_ = n;
        e.source_ = detail::format_number(v);
        e.fold();
        return e;
    }

    /// Evaluate at x. Throws EvalDomainError carrying x on ln/division/power failures
    /// or a non-finite result.
    double operator()(double x) const {
        if (folded_) return folded_value_;
        const double v = detail::eval_node(*root_, x);
        if (!std::isfinite(v)) throw EvalDomainError("non-finite value at x = " + std::to_string(x), x);
        return v;
    }
    double eval(double x) const { return (*this)(x); }

    bool is_constant() const noexcept { return folded_; }
    double constant_value() const noexcept { return folded_value_; }
    const std::string& source() const noexcept { return source_; }
    const std::vector<std::string>& warnings() const noexcept { return warnings_; }
    const Node& root() const noexcept { return *root_; }

    /// Canonical form: fully parenthesised binary operators, %.17g literals.
    std::string print() const {
        std::string out;
        detail::print_node(*root_, out);
        return out;
    }

    bool structurally_equal(const CoefficientExpr& o) const { return detail::equal_nodes(*root_, *o.root_); }

private:
    explicit CoefficientExpr(std::nullptr_t) {}

    void fold() {
        folded_ = false;
        if (detail::has_var(*root_)) return;
        try {
            const double v = detail::eval_node(*root_, 0.0);
            if (std::isfinite(v)) {
                folded_value_ = v;
                folded_ = true;
            }
        } catch (const EvalDomainError&) {
            // left unfolded; evaluation reports the error with its x
        }
    }

    NodePtr root_;
    std::string source_;
    std::vector<std::string> warnings_;
    bool folded_ = false;
    double folded_value_ = 0.0;
};

} // namespace stablelike::expr
