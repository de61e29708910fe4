#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "hhcert/expr.hpp"
#include "hhcert/selftest.hpp"

using namespace hhcert;
using Catch::Approx;

TEST_CASE("parse produces the expected structure") {
    SECTION("x^2") {
        const auto e = expr::parse("x^2", 1);
        REQUIRE(e->kind == expr::NodeKind::Binary);
        REQUIRE(e->op == expr::BinOp::Pow);
        REQUIRE(e->lhs->kind == expr::NodeKind::Variable);
        REQUIRE(e->lhs->var_index == 0);
        REQUIRE(e->rhs->kind == expr::NodeKind::Literal);
        REQUIRE(e->rhs->literal == 2.0);
    }
    SECTION("1/x1 + 1/x2") {
        const auto e = expr::parse("1/x1 + 1/x2", 2);
        REQUIRE(e->kind == expr::NodeKind::Binary);
        REQUIRE(e->op == expr::BinOp::Add);
        REQUIRE(e->lhs->op == expr::BinOp::Div);
        REQUIRE(e->rhs->op == expr::BinOp::Div);
        REQUIRE(e->lhs->rhs->var_index == 0);
        REQUIRE(e->rhs->rhs->var_index == 1);
    }
    SECTION("sqrt(abs(x))") {
        const auto e = expr::parse("sqrt(abs(x))", 1);
        REQUIRE(e->kind == expr::NodeKind::Call);
        REQUIRE(e->func == expr::Func::Sqrt);
        REQUIRE(e->args[0]->kind == expr::NodeKind::Call);
        REQUIRE(e->args[0]->func == expr::Func::Abs);
        REQUIRE(e->args[0]->args[0]->kind == expr::NodeKind::Variable);
    }
}

TEST_CASE("evaluation goldens") {
    const expr::EvalEnv at3{1, {3.0}};
    const expr::EvalEnv at0{1, {0.0}};
    const expr::EvalEnv at1{1, {1.0}};
    REQUIRE(expr::eval(*expr::parse("x^2", 1), at3) == Approx(9.0));
    REQUIRE(expr::eval(*expr::parse("exp(x)", 1), at0) == Approx(1.0));
    REQUIRE(expr::eval(*expr::parse("log(x)", 1), at1) == Approx(0.0));
}

TEST_CASE("precedence goldens") {
    const expr::EvalEnv env{1, {0.0}};
    REQUIRE(expr::eval(*expr::parse("2+3*4", 1), env) == Approx(14.0));
    REQUIRE(expr::eval(*expr::parse("2^3^2", 1), env) == Approx(512.0));
    REQUIRE(expr::eval(*expr::parse("-2^2", 1), env) == Approx(-4.0));
    REQUIRE(expr::eval(*expr::parse("2^-1", 1), env) == Approx(0.5));
    REQUIRE(expr::eval(*expr::parse("2-3-4", 1), env) == Approx(-5.0));
    REQUIRE(expr::eval(*expr::parse("12/4/3", 1), env) == Approx(1.0));
    REQUIRE(expr::eval(*expr::parse("2*3^2", 1), env) == Approx(18.0));
}

TEST_CASE("print goldens") {
    REQUIRE(expr::print(*expr::parse("x^2", 1)) == "(x^2)");
    REQUIRE(expr::print(*expr::parse("1/x1+1/x2", 2)) == "((1/x1)+(1/x2))");
    REQUIRE(expr::print(*expr::parse("sqrt(abs(x))", 1)) == "(sqrt(abs(x)))");
}

TEST_CASE("print then parse is the identity on structure") {
    RandomStream rng(555);
    for (int trial = 0; trial < 1000; ++trial) {
        const int arity = 1 + static_cast<int>(rng.next_below(3));
        const auto e = selftest::random_expr(rng, arity, 8);
        const auto round = expr::parse(expr::print(*e), arity);
        REQUIRE(expr::structurally_equal(*e, *round));
    }
}

TEST_CASE("evaluation is pure") {
    const auto e = expr::parse("min(x1, x2) * exp(x1) - x2^3", 2);
    const expr::EvalEnv env{2, {0.3, -1.7}};
    const double a = expr::eval(*e, env);
    const double b = expr::eval(*e, env);
    REQUIRE(a == b);
}

TEST_CASE("parse errors carry positions and reasons") {
    using expr::ParseError;
    REQUIRE_THROWS_AS(expr::parse("", 1), ParseError);
    REQUIRE_THROWS_AS(expr::parse("2 +", 1), ParseError);
    REQUIRE_THROWS_AS(expr::parse("1 2", 1), ParseError);
    REQUIRE_THROWS_AS(expr::parse("(1+2", 1), ParseError);
    REQUIRE_THROWS_AS(expr::parse("y + 1", 1), ParseError);
    REQUIRE_THROWS_AS(expr::parse("foo(1)", 1), ParseError);
    REQUIRE_THROWS_AS(expr::parse("x3", 2), ParseError);
    REQUIRE_THROWS_AS(expr::parse("x", 2), ParseError);
    REQUIRE_THROWS_AS(expr::parse("min(1)", 1), ParseError);
    REQUIRE_THROWS_AS(expr::parse("abs(1, 2)", 1), ParseError);
    REQUIRE_THROWS_AS(expr::parse("2 $ 3", 1), ParseError);

    try {
        expr::parse("1 + @", 1);
        FAIL("expected ParseError");
    } catch (const ParseError& e) {
        REQUIRE(e.position() == 4);
    }
}

TEST_CASE("checked evaluation tags the offending subexpression") {
    const auto e = expr::parse("1 + log(x)", 1);
    const expr::EvalEnv env{1, {0.0}};
    REQUIRE(!std::isfinite(expr::eval(*e, env)));
    try {
        expr::eval_checked(*e, env);
        FAIL("expected EvalError");
    } catch (const expr::EvalError& err) {
        REQUIRE(err.subexpression() == "(log(x))");
        REQUIRE(err.inputs() == std::vector<double>{0.0});
    }
}
