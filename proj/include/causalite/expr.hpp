#pragma once

#include <cmath>
#include <map>
#include <memory>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "causalite/rational.hpp"

namespace causalite {

/// Mechanism expression language. Expressions are immutable trees with
/// value semantics (cheap shared-structure copies), so mechanisms can be
/// rewritten symbolically by substitution without touching their source.
enum class ExprKind {
    Const,  // rational literal
    Var,    // reference to a model variable
    Add,    // n-ary sum
    Mul,    // n-ary product
    Neg,    // unary negation
    Relu,   // max(0, x)
    Xnor,   // boolean: 1 iff both operands equal (operands must be 0/1)
    And,    // boolean
    Or,     // boolean
    Not,    // boolean
    Eq,     // indicator [a = b] on rationals
    Leq,    // indicator [a <= b] on rationals
};

inline const char* expr_kind_name(ExprKind k) {
    switch (k) {
        case ExprKind::Const: return "const";
        case ExprKind::Var: return "var";
        case ExprKind::Add: return "add";
        case ExprKind::Mul: return "mul";
        case ExprKind::Neg: return "neg";
        case ExprKind::Relu: return "relu";
        case ExprKind::Xnor: return "xnor";
        case ExprKind::And: return "and";
        case ExprKind::Or: return "or";
        case ExprKind::Not: return "not";
        case ExprKind::Eq: return "eq";
        case ExprKind::Leq: return "leq";
    }
    return "?";
}

class EvalError : public std::runtime_error {
  public:
    explicit EvalError(const std::string& what) : std::runtime_error(what) {}
};

class Expr {
  public:
    Expr() : Expr(constant(0)) {}

    ExprKind kind() const { return node_->kind; }
    const Rat& value() const { return node_->value; }
    const std::string& var_name() const { return node_->name; }
    const std::vector<Expr>& children() const { return node_->children; }

    static Expr constant(Rat v) {
        auto n = std::make_shared<Node>();
        n->kind = ExprKind::Const;
        n->value = std::move(v);
        return Expr(std::move(n));
    }
    static Expr constant(long v) { return constant(Rat(v)); }

    static Expr var(std::string name) {
        auto n = std::make_shared<Node>();
        n->kind = ExprKind::Var;
        n->name = std::move(name);
        return Expr(std::move(n));
    }

    static Expr make(ExprKind kind, std::vector<Expr> children) {
        check_arity(kind, children.size());
        auto n = std::make_shared<Node>();
        n->kind = kind;
        n->children = std::move(children);
        return Expr(std::move(n));
    }

    static Expr add(std::vector<Expr> terms) { return make(ExprKind::Add, std::move(terms)); }
    static Expr mul(std::vector<Expr> factors) { return make(ExprKind::Mul, std::move(factors)); }
    static Expr neg(Expr e) { return make(ExprKind::Neg, {std::move(e)}); }
    static Expr relu(Expr e) { return make(ExprKind::Relu, {std::move(e)}); }
    static Expr xnor(Expr a, Expr b) { return make(ExprKind::Xnor, {std::move(a), std::move(b)}); }
    static Expr logical_and(Expr a, Expr b) { return make(ExprKind::And, {std::move(a), std::move(b)}); }
    static Expr logical_or(Expr a, Expr b) { return make(ExprKind::Or, {std::move(a), std::move(b)}); }
    static Expr logical_not(Expr e) { return make(ExprKind::Not, {std::move(e)}); }
    static Expr eq(Expr a, Expr b) { return make(ExprKind::Eq, {std::move(a), std::move(b)}); }
    static Expr leq(Expr a, Expr b) { return make(ExprKind::Leq, {std::move(a), std::move(b)}); }

    friend bool operator==(const Expr& a, const Expr& b) {
        if (a.node_ == b.node_) return true;
        if (a.kind() != b.kind()) return false;
        switch (a.kind()) {
            case ExprKind::Const: return a.value() == b.value();
            case ExprKind::Var: return a.var_name() == b.var_name();
            default: break;
        }
        if (a.children().size() != b.children().size()) return false;
        for (std::size_t i = 0; i < a.children().size(); ++i)
            if (!(a.children()[i] == b.children()[i])) return false;
        return true;
    }
    friend bool operator!=(const Expr& a, const Expr& b) { return !(a == b); }

  private:
    struct Node {
        ExprKind kind = ExprKind::Const;
        Rat value;
        std::string name;
        std::vector<Expr> children;
    };

    static void check_arity(ExprKind kind, std::size_t n) {
        switch (kind) {
            case ExprKind::Const:
            case ExprKind::Var:
                throw std::invalid_argument("const/var take no children");
            case ExprKind::Add:
            case ExprKind::Mul:
                if (n < 1) throw std::invalid_argument("add/mul need at least one operand");
                break;
            case ExprKind::Neg:
            case ExprKind::Relu:
            case ExprKind::Not:
                if (n != 1) throw std::invalid_argument("unary operator arity");
                break;
            case ExprKind::Xnor:
            case ExprKind::And:
            case ExprKind::Or:
            case ExprKind::Eq:
            case ExprKind::Leq:
                if (n != 2) throw std::invalid_argument("binary operator arity");
                break;
        }
    }

    explicit Expr(std::shared_ptr<Node> n) : node_(std::move(n)) {}
    std::shared_ptr<const Node> node_;
};

inline void collect_free_variables(const Expr& e, std::set<std::string>& out) {
    if (e.kind() == ExprKind::Var) {
        out.insert(e.var_name());
        return;
    }
    for (const auto& c : e.children()) collect_free_variables(c, out);
}

inline std::set<std::string> free_variables(const Expr& e) {
    std::set<std::string> out;
    collect_free_variables(e, out);
    return out;
}

/// Simultaneous substitution of variables by expressions.
inline Expr substitute(const Expr& e, const std::map<std::string, Expr>& repl) {
    switch (e.kind()) {
        case ExprKind::Const: return e;
        case ExprKind::Var: {
            auto it = repl.find(e.var_name());
            return it == repl.end() ? e : it->second;
        }
        default: break;
    }
    std::vector<Expr> kids;
    kids.reserve(e.children().size());
    bool changed = false;
    for (const auto& c : e.children()) {
        kids.push_back(substitute(c, repl));
        if (!(kids.back() == c)) changed = true;
    }
    if (!changed) return e;
    return Expr::make(e.kind(), std::move(kids));
}

/// Indicator comparisons may be evaluated with a tolerance band, for
/// certifying float-derived rotations. Values inside (eq_tol, margin) are
/// decided on the tight side but flagged, so callers can refuse to certify
/// an ambiguous run.
struct EvalOptions {
    bool toleranced = false;
    Rat eq_tol;   // |a-b| <= eq_tol counts as equal
    Rat margin;   // |a-b| >= margin counts as clearly unequal

    static EvalOptions exact() { return {}; }
    static EvalOptions tolerance(Rat eq_tol, Rat margin) {
        EvalOptions o;
        o.toleranced = true;
        o.eq_tol = std::move(eq_tol);
        o.margin = std::move(margin);
        return o;
    }
};

struct EvalStats {
    long margin_violations = 0;
};

namespace detail {

inline Rat as_boolean(const Rat& v, const char* where) {
    if (!rat_is_boolean(v))
        throw EvalError(std::string(where) + " applied to non-boolean operand " + rat_to_string(v));
    return v;
}

}  // namespace detail

template <typename Env>
Rat evaluate_with(const Expr& e, Env&& lookup, const EvalOptions& opts, EvalStats* stats) {
    switch (e.kind()) {
        case ExprKind::Const: return e.value();
        case ExprKind::Var: return lookup(e.var_name());
        case ExprKind::Add: {
            Rat acc = 0;
            for (const auto& c : e.children()) acc += evaluate_with(c, lookup, opts, stats);
            return acc;
        }
        case ExprKind::Mul: {
            Rat acc = 1;
            for (const auto& c : e.children()) acc *= evaluate_with(c, lookup, opts, stats);
            return acc;
        }
        case ExprKind::Neg: return -evaluate_with(e.children()[0], lookup, opts, stats);
        case ExprKind::Relu: {
            Rat v = evaluate_with(e.children()[0], lookup, opts, stats);
            return v < 0 ? Rat(0) : v;
        }
        case ExprKind::Xnor: {
            Rat a = detail::as_boolean(evaluate_with(e.children()[0], lookup, opts, stats), "xnor");
            Rat b = detail::as_boolean(evaluate_with(e.children()[1], lookup, opts, stats), "xnor");
            return a == b ? Rat(1) : Rat(0);
        }
        case ExprKind::And: {
            Rat a = detail::as_boolean(evaluate_with(e.children()[0], lookup, opts, stats), "and");
            Rat b = detail::as_boolean(evaluate_with(e.children()[1], lookup, opts, stats), "and");
            return (a == 1 && b == 1) ? Rat(1) : Rat(0);
        }
        case ExprKind::Or: {
            Rat a = detail::as_boolean(evaluate_with(e.children()[0], lookup, opts, stats), "or");
            Rat b = detail::as_boolean(evaluate_with(e.children()[1], lookup, opts, stats), "or");
            return (a == 1 || b == 1) ? Rat(1) : Rat(0);
        }
        case ExprKind::Not: {
            Rat a = detail::as_boolean(evaluate_with(e.children()[0], lookup, opts, stats), "not");
            return a == 0 ? Rat(1) : Rat(0);
        }
        case ExprKind::Eq: {
            Rat a = evaluate_with(e.children()[0], lookup, opts, stats);
            Rat b = evaluate_with(e.children()[1], lookup, opts, stats);
            if (!opts.toleranced) return a == b ? Rat(1) : Rat(0);
            Rat d = rat_abs(a - b);
            if (stats && d > opts.eq_tol && d < opts.margin) ++stats->margin_violations;
            return d <= opts.eq_tol ? Rat(1) : Rat(0);
        }
        case ExprKind::Leq: {
            Rat a = evaluate_with(e.children()[0], lookup, opts, stats);
            Rat b = evaluate_with(e.children()[1], lookup, opts, stats);
            if (!opts.toleranced) return a <= b ? Rat(1) : Rat(0);
            Rat d = a - b;  // signed distance above the threshold
            if (stats && d > opts.eq_tol && d < opts.margin) ++stats->margin_violations;
            return d <= opts.eq_tol ? Rat(1) : Rat(0);
        }
    }
    throw EvalError("unreachable expression kind");
}

inline Rat evaluate(const Expr& e, const std::map<std::string, Rat>& env,
                    const EvalOptions& opts = EvalOptions::exact(), EvalStats* stats = nullptr) {
    auto lookup = [&env](const std::string& name) -> Rat {
        auto it = env.find(name);
        if (it == env.end()) throw EvalError("unbound variable " + name);
        return it->second;
    };
    return evaluate_with(e, lookup, opts, stats);
}

/// Float-path evaluation for the alignment-search objective. Indicator
/// nodes decide with the given absolute tolerance.
template <typename Env>
double evaluate_double_with(const Expr& e, Env&& lookup, double tol) {
    switch (e.kind()) {
        case ExprKind::Const: return rat_to_double(e.value());
        case ExprKind::Var: return lookup(e.var_name());
        case ExprKind::Add: {
            double acc = 0;
            for (const auto& c : e.children()) acc += evaluate_double_with(c, lookup, tol);
            return acc;
        }
        case ExprKind::Mul: {
            double acc = 1;
            for (const auto& c : e.children()) acc *= evaluate_double_with(c, lookup, tol);
            return acc;
        }
        case ExprKind::Neg: return -evaluate_double_with(e.children()[0], lookup, tol);
        case ExprKind::Relu: {
            double v = evaluate_double_with(e.children()[0], lookup, tol);
            return v < 0 ? 0.0 : v;
        }
        case ExprKind::Xnor: {
            double a = evaluate_double_with(e.children()[0], lookup, tol);
            double b = evaluate_double_with(e.children()[1], lookup, tol);
            return ((a >= 0.5) == (b >= 0.5)) ? 1.0 : 0.0;
        }
        case ExprKind::And: {
            double a = evaluate_double_with(e.children()[0], lookup, tol);
            double b = evaluate_double_with(e.children()[1], lookup, tol);
            return (a >= 0.5 && b >= 0.5) ? 1.0 : 0.0;
        }
        case ExprKind::Or: {
            double a = evaluate_double_with(e.children()[0], lookup, tol);
            double b = evaluate_double_with(e.children()[1], lookup, tol);
            return (a >= 0.5 || b >= 0.5) ? 1.0 : 0.0;
        }
        case ExprKind::Not: {
            double a = evaluate_double_with(e.children()[0], lookup, tol);
            return a >= 0.5 ? 0.0 : 1.0;
        }
        case ExprKind::Eq: {
            double a = evaluate_double_with(e.children()[0], lookup, tol);
            double b = evaluate_double_with(e.children()[1], lookup, tol);
            return std::abs(a - b) <= tol ? 1.0 : 0.0;
        }
        case ExprKind::Leq: {
            double a = evaluate_double_with(e.children()[0], lookup, tol);
            double b = evaluate_double_with(e.children()[1], lookup, tol);
            return a - b <= tol ? 1.0 : 0.0;
        }
    }
    throw EvalError("unreachable expression kind");
}

// ---------------------------------------------------------------------------
// Parenthesized prefix syntax, e.g. (xnor (var A1) (var A2)).
// Serialization is canonical; parse(to_string(e)) == e.

inline void expr_to_stream(const Expr& e, std::ostream& os) {
    switch (e.kind()) {
        case ExprKind::Const:
            os << "(const " << rat_to_string(e.value()) << ")";
            return;
        case ExprKind::Var:
            os << "(var " << e.var_name() << ")";
            return;
        default: break;
    }
    os << "(" << expr_kind_name(e.kind());
    for (const auto& c : e.children()) {
        os << " ";
        expr_to_stream(c, os);
    }
    os << ")";
}

inline std::string expr_to_string(const Expr& e) {
    std::ostringstream os;
    expr_to_stream(e, os);
    return os.str();
}

class ExprParseError : public std::runtime_error {
  public:
    ExprParseError(std::size_t offset, const std::string& what)
        : std::runtime_error(what), offset_(offset) {}
    std::size_t offset() const { return offset_; }

  private:
    std::size_t offset_;
};

namespace detail {

struct ExprParser {
    std::string_view text;
    std::size_t pos = 0;

    void skip_ws() {
        while (pos < text.size() && (text[pos] == ' ' || text[pos] == '\t')) ++pos;
    }

    [[noreturn]] void fail(const std::string& msg) const { throw ExprParseError(pos, msg); }

    std::string_view token() {
        skip_ws();
        std::size_t start = pos;
        while (pos < text.size() && text[pos] != ' ' && text[pos] != '\t' && text[pos] != '(' &&
               text[pos] != ')')
            ++pos;
        if (pos == start) fail("expected token");
        return text.substr(start, pos - start);
    }

    void expect(char c) {
        skip_ws();
        if (pos >= text.size() || text[pos] != c)
            fail(std::string("expected '") + c + "'");
        ++pos;
    }

    bool peek(char c) {
        skip_ws();
        return pos < text.size() && text[pos] == c;
    }

    Expr parse() {
        expect('(');
        std::string_view head = token();
        if (head == "const") {
            std::string_view lit = token();
            auto v = rat_parse(lit);
            if (!v) fail("malformed rational '" + std::string(lit) + "'");
            expect(')');
            return Expr::constant(*v);
        }
        if (head == "var") {
            std::string name(token());
            expect(')');
            return Expr::var(std::move(name));
        }
        ExprKind kind;
        if (head == "add") kind = ExprKind::Add;
        else if (head == "mul") kind = ExprKind::Mul;
        else if (head == "neg") kind = ExprKind::Neg;
        else if (head == "relu") kind = ExprKind::Relu;
        else if (head == "xnor") kind = ExprKind::Xnor;
        else if (head == "and") kind = ExprKind::And;
        else if (head == "or") kind = ExprKind::Or;
        else if (head == "not") kind = ExprKind::Not;
        else if (head == "eq") kind = ExprKind::Eq;
        else if (head == "leq") kind = ExprKind::Leq;
        else fail("unknown operator '" + std::string(head) + "'");
        std::vector<Expr> kids;
        while (!peek(')')) {
            if (pos >= text.size()) fail("unterminated expression");
            kids.push_back(parse());
        }
        expect(')');
        try {
            return Expr::make(kind, std::move(kids));
        } catch (const std::invalid_argument& ex) {
            fail(ex.what());
        }
    }
};

}  // namespace detail

inline Expr parse_expression(std::string_view text) {
    detail::ExprParser p{text};
    Expr e = p.parse();
    p.skip_ws();
    if (p.pos != text.size()) throw ExprParseError(p.pos, "trailing input after expression");
    return e;
}

}  // namespace causalite
