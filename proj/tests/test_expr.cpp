#include <catch2/catch_amalgamated.hpp>

#include "sobocomp/expr.hpp"

using namespace sobocomp;

TEST_CASE("expression arithmetic") {
    auto e = Expr::parse("2*x + y^2 - 1/4");
    CHECK(e.eval({1.0, 2.0, 0.0}) == Catch::Approx(2 + 4 - 0.25));

    auto m = Expr::parse("min(x, 1-x)");
    CHECK(m.eval({0.3, 0, 0}) == Catch::Approx(0.3));
    CHECK(m.eval({0.8, 0, 0}) == Catch::Approx(0.2));

    auto t = Expr::parse("sin(2*pi*x)");
    CHECK(t.eval({0.25, 0, 0}) == Catch::Approx(1.0));
}

TEST_CASE("expression comparisons are 0/1 valued") {
    auto e = Expr::parse("x + y < 1");
    CHECK(e.eval({0.3, 0.3, 0}) == 1.0);
    CHECK(e.eval({0.8, 0.4, 0}) == 0.0);
}

TEST_CASE("expression rejects malformed input") {
    CHECK_THROWS_AS(Expr::parse("2 +"), Error);
    CHECK_THROWS_AS(Expr::parse("foo(x)"), Error);
    CHECK_THROWS_AS(Expr::parse("min(x)"), Error);
    CHECK_THROWS_AS(Expr::parse("(x"), Error);
    CHECK_THROWS_AS(Expr::parse("x @ y"), Error);
}

TEST_CASE("unary minus and powers bind as expected") {
    auto e = Expr::parse("-x^2");
    CHECK(e.eval({3, 0, 0}) == Catch::Approx(-9.0));
    auto f = Expr::parse("abs(x3) + exp(0)*2");
    CHECK(f.eval({0, 0, -4}) == Catch::Approx(6.0));
}
