#include <doctest.h>

#include <cmath>

#include "cqw/expression.hpp"
#include "cqw/geometry.hpp"
#include "support.hpp"

using namespace cqw;

TEST_CASE("constant expression evaluates everywhere") {
  const auto e = MetricExpression::parse("1");
  CHECK(e.evaluate(0.0, 0.0, 0.0) == 1.0);
  CHECK(e.evaluate(3.0, -2.0, 7.5) == 1.0);
  CHECK(e.is_constant());
}

TEST_CASE("sine expression at the origin") {
  const auto e = MetricExpression::parse("1+0.3*sin(x)");
  CHECK(e.evaluate(0.0, 0.0, 0.0) == 1.0);
  CHECK(e.depends_on('x'));
  CHECK_FALSE(e.depends_on('y'));
  CHECK(e.evaluate(0.0, 1.0, 0.0) == doctest::Approx(1.0 + 0.3 * std::sin(1.0)).epsilon(1e-15));
}

TEST_CASE("gaussian expression matches exp(-1)") {
  const auto e = MetricExpression::parse("exp(-(x^2+y^2))");
  CHECK(std::abs(e.evaluate(0.0, 1.0, 0.0) - 0.36787944117144233) < 1e-16);
}

TEST_CASE("precedence and associativity") {
  auto v = [](const char* s) { return MetricExpression::parse(s).evaluate(0.0, 2.0, 3.0); };
  CHECK(v("1+2*3") == 7.0);
  CHECK(v("(1+2)*3") == 9.0);
  CHECK(v("8/4/2") == 1.0);
  CHECK(v("8-4-2") == 2.0);
  CHECK(v("2^3^2") == 64.0);
  CHECK(v("-2^2") == -4.0);
  CHECK(v("x^-1") == 0.5);
  CHECK(v("-x*y") == -6.0);
  CHECK(v("2*-x") == -4.0);
  CHECK(v("sqrt(y*3)") == 3.0);
  CHECK(v("tanh(0)") == 0.0);
  CHECK(v("cos(0)+t") == 1.0);
  CHECK(v("1e-3*1000") == doctest::Approx(1.0));
  CHECK(v(" x  +  y ") == 5.0);
}

TEST_CASE("parse errors report offsets") {
  auto offset_of = [](const char* s) -> long {
    try {
      MetricExpression::parse(s);
    } catch (const ParseError& e) {
      return static_cast<long>(e.offset());
    }
    return -1;
  };
  CHECK(offset_of("1+") == 2);
  CHECK(offset_of("1 + * 2") == 4);
  CHECK(offset_of("(1+2") == 4);
  CHECK(offset_of("1+2)") == 3);
  CHECK(offset_of("z+1") == 0);
  CHECK(offset_of("1+foo(x)") == 2);
  CHECK(offset_of("sin(x, y)") >= 5);
  CHECK(offset_of("sin()") >= 4);
  CHECK(offset_of("") == 0);
  CHECK_THROWS_AS(MetricExpression::parse("sin x"), ParseError);
}

TEST_CASE("print then parse evaluates identically") {
  const char* sources[] = {"1+0.3*sin(x)",          "exp(-(x^2+y^2))", "2^3^2",  "-x^2+y/3-t",
                           "sqrt(1+x*x)*cos(y-t)", "tanh(x)/(1+y^2)", "x-(y-t)", "-(-x)^-2+1e-3",
                           "0.1*sin(x)*sin(y)+1"};
  for (const char* s : sources) {
    const auto a = MetricExpression::parse(s);
    const auto b = MetricExpression::parse(a.print());
    CHECK(MetricExpression::parse(b.print()).print() == b.print());
    double worst = 0.0;
    for (int i = 0; i < 100; ++i) {
      const double t = test::uniform(-2, 2), x = test::uniform(0.5, 2), y = test::uniform(-2, 2);
      worst = std::max(worst, std::abs(a.evaluate(t, x, y) - b.evaluate(t, x, y)));
    }
    CHECK_MESSAGE(worst == 0.0, s);
  }
}

TEST_CASE("spacetime point overload") {
  const auto e = MetricExpression::parse("t+2*x+3*y");
  CHECK(e.evaluate(SpacetimePoint{1.0, 2.0, 3.0}) == 14.0);
}
