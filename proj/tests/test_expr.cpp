#include <catch2/catch_amalgamated.hpp>

#include <random>

#include "causalite/expr.hpp"

using namespace causalite;

namespace {

Rat ev(const Expr& e, const std::map<std::string, Rat>& env = {}) { return evaluate(e, env); }

}  // namespace

TEST_CASE("rational parsing and canonical form") {
    CHECK(rat_to_string(*rat_parse("99/100")) == "99/100");
    CHECK(rat_to_string(*rat_parse("0.99")) == "99/100");
    CHECK(rat_to_string(*rat_parse("-3/6")) == "-1/2");
    CHECK(rat_to_string(*rat_parse("4")) == "4");
    CHECK(rat_to_string(*rat_parse("1.980")) == "99/50");
    CHECK(!rat_parse("1/0"));
    CHECK(!rat_parse("abc"));
    CHECK(!rat_parse(""));
    CHECK(!rat_parse("1.2.3"));
    CHECK(rat_from_double(0.5) == make_rat(1, 2));
}

TEST_CASE("boolean gates") {
    CHECK(ev(Expr::xnor(Expr::constant(0), Expr::constant(0))) == 1);
    CHECK(ev(Expr::xnor(Expr::constant(1), Expr::constant(1))) == 1);
    CHECK(ev(Expr::xnor(Expr::constant(0), Expr::constant(1))) == 0);
    CHECK(ev(Expr::logical_and(Expr::constant(1), Expr::constant(0))) == 0);
    CHECK(ev(Expr::logical_or(Expr::constant(1), Expr::constant(0))) == 1);
    CHECK(ev(Expr::logical_not(Expr::constant(0))) == 1);
    CHECK_THROWS_AS(ev(Expr::xnor(Expr::constant(make_rat(1, 2)), Expr::constant(0))),
                    EvalError);
}

TEST_CASE("relu and indicators are exact") {
    CHECK(ev(Expr::relu(Expr::constant(-2))) == 0);
    CHECK(ev(Expr::relu(Expr::constant(make_rat(3, 7)))) == make_rat(3, 7));
    CHECK(ev(Expr::leq(Expr::constant(make_rat(199, 100)), Expr::constant(0))) == 0);
    CHECK(ev(Expr::leq(Expr::constant(0), Expr::constant(0))) == 1);
    CHECK(ev(Expr::eq(Expr::constant(make_rat(99, 100)), Expr::constant(make_rat(99, 100)))) == 1);
}

TEST_CASE("arithmetic composes exactly") {
    // 0.99 + 0.99 + 0.01 = 1.99 with no rounding anywhere
    Expr sum = Expr::add({Expr::constant(make_rat(99, 100)), Expr::constant(make_rat(99, 100)),
                          Expr::constant(make_rat(1, 100))});
    CHECK(ev(sum) == make_rat(199, 100));
    Expr prod = Expr::mul({Expr::constant(make_rat(1, 3)), Expr::constant(3)});
    CHECK(ev(prod) == 1);
    CHECK(ev(Expr::neg(Expr::constant(make_rat(1, 3)))) == make_rat(-1, 3));
}

TEST_CASE("variables and unbound errors") {
    Expr e = Expr::add({Expr::var("X"), Expr::constant(1)});
    CHECK(ev(e, {{"X", Rat(2)}}) == 3);
    CHECK_THROWS_WITH(ev(e), Catch::Matchers::ContainsSubstring("unbound variable X"));
    CHECK(free_variables(e) == std::set<std::string>{"X"});
}

TEST_CASE("substitution rewrites mechanisms") {
    Expr e = Expr::xnor(Expr::var("A"), Expr::var("B"));
    Expr sub = substitute(e, {{"A", Expr::logical_not(Expr::var("C"))}});
    CHECK(expr_to_string(sub) == "(xnor (not (var C)) (var B))");
    // untouched expressions are returned as-is
    CHECK(substitute(e, {{"Z", Expr::constant(0)}}) == e);
}

TEST_CASE("toleranced indicators and the ambiguity margin") {
    EvalOptions tol = EvalOptions::tolerance(make_rat(1, 10000000), make_rat(1, 10000));
    EvalStats stats;
    Expr close = Expr::eq(Expr::constant(make_rat(1, 100000000)), Expr::constant(0));
    CHECK(evaluate(close, {}, tol, &stats) == 1);
    CHECK(stats.margin_violations == 0);

    Expr clear = Expr::eq(Expr::constant(1), Expr::constant(0));
    CHECK(evaluate(clear, {}, tol, &stats) == 0);
    CHECK(stats.margin_violations == 0);

    // inside the gray band: decided tight, but flagged
    Expr gray = Expr::eq(Expr::constant(make_rat(1, 100000)), Expr::constant(0));
    CHECK(evaluate(gray, {}, tol, &stats) == 0);
    CHECK(stats.margin_violations == 1);

    Expr leq_true = Expr::leq(Expr::constant(make_rat(-1, 2)), Expr::constant(0));
    CHECK(evaluate(leq_true, {}, tol, &stats) == 1);
    CHECK(stats.margin_violations == 1);  // unchanged
}

TEST_CASE("prefix syntax round trip") {
    const char* text = "(relu (add (mul (const 99/100) (var H2_3)) (neg (var H2_4))))";
    Expr e = parse_expression(text);
    CHECK(expr_to_string(e) == text);
    CHECK(parse_expression(expr_to_string(e)) == e);
}

TEST_CASE("parser accepts decimals and serializes canonically") {
    Expr e = parse_expression("(const 0.99)");
    CHECK(expr_to_string(e) == "(const 99/100)");
}

TEST_CASE("parser diagnostics") {
    CHECK_THROWS_AS(parse_expression("(frob (var A))"), ExprParseError);
    CHECK_THROWS_AS(parse_expression("(xnor (var A))"), ExprParseError);  // arity
    CHECK_THROWS_AS(parse_expression("(var A) junk"), ExprParseError);
    CHECK_THROWS_AS(parse_expression("(const 1/0)"), ExprParseError);
    try {
        parse_expression("(add (var A) (bogus))");
        FAIL("expected ExprParseError");
    } catch (const ExprParseError& ex) {
        CHECK(ex.offset() > 5);
    }
}

TEST_CASE("random expressions round trip through the parser") {
    std::mt19937_64 rng(7);
    auto gen = [&](auto&& self, int depth) -> Expr {
        if (depth >= 3 || rng() % 4 == 0) {
            if (rng() % 2 == 0) return Expr::constant(make_rat(long(rng() % 21) - 10,
                                                               long(rng() % 9) + 1));
            return Expr::var("V" + std::to_string(rng() % 5));
        }
        switch (rng() % 6) {
            case 0: return Expr::add({self(self, depth + 1), self(self, depth + 1)});
            case 1: return Expr::mul({self(self, depth + 1), self(self, depth + 1),
                                      self(self, depth + 1)});
            case 2: return Expr::neg(self(self, depth + 1));
            case 3: return Expr::relu(self(self, depth + 1));
            case 4: return Expr::eq(self(self, depth + 1), self(self, depth + 1));
            default: return Expr::leq(self(self, depth + 1), self(self, depth + 1));
        }
    };
    for (int i = 0; i < 200; ++i) {
        Expr e = gen(gen, 0);
        CHECK(parse_expression(expr_to_string(e)) == e);
    }
}
