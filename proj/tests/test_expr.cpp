#include <doctest.h>

#include <cmath>

#include "heatforms/expr.hpp"

using namespace heatforms;

TEST_SUITE("expr") {

TEST_CASE("parse and evaluate") {
    auto e = Expression::parse("1 + 0.5*x1*sin(x2) - pow(x2, 2)/4", 2);
    std::vector<double> x{2.0, M_PI / 2};
    CHECK(e.eval(x) == doctest::Approx(1 + 1.0 - M_PI * M_PI / 16).epsilon(1e-14));
    auto p = Expression::parse("x1^3", 1);
    CHECK(p.eval({2.0}) == doctest::Approx(8.0));
}

TEST_CASE("symbolic derivatives of any order") {
    auto e = Expression::parse("sin(x1)*exp(2*x1)", 1);
    auto d1 = e.derivative(0);
    auto d2 = d1.derivative(0);
    double x = 0.7;
    double f = std::sin(x) * std::exp(2 * x);
    double fp = (std::cos(x) + 2 * std::sin(x)) * std::exp(2 * x);
    double fpp = (4 * std::cos(x) + 3 * std::sin(x)) * std::exp(2 * x);
    CHECK(d1.eval({x}) == doctest::Approx(fp).epsilon(1e-14));
    CHECK(d2.eval({x}) == doctest::Approx(fpp).epsilon(1e-14));
}

TEST_CASE("pow derivative with non-constant exponent goes through exp/log") {
    auto e = Expression::parse("pow(x1, x1)", 1);
    double x = 1.3;
    CHECK(e.derivative(0).eval({x}) ==
          doctest::Approx(std::pow(x, x) * (std::log(x) + 1)).epsilon(1e-13));
}

TEST_CASE("parse errors are reported") {
    CHECK_THROWS_AS(Expression::parse("x3 + 1", 2), std::invalid_argument);
    CHECK_THROWS_AS(Expression::parse("sin(x1", 1), std::invalid_argument);
    CHECK_THROWS_AS(Expression::parse("2 +* 3", 1), std::invalid_argument);
    CHECK_THROWS_AS(Expression::parse("foo(x1)", 1), std::invalid_argument);
}

TEST_CASE("derivative of a constant metric entry is structurally zero") {
    auto e = Expression::parse("1", 2);
    CHECK(e.derivative(0).is_zero());
    CHECK(e.derivative(1).is_zero());
}

} // TEST_SUITE
