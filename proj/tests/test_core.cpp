#include <gtest/gtest.h>

#include <boost/multiprecision/cpp_int.hpp>

#include "ergolab/core.hpp"

using namespace ergolab;

TEST(Ratio, Reduces) {
  auto r = Ratio::make(6, -4);
  EXPECT_EQ(r.num, -3);
  EXPECT_EQ(r.den, 2);
  EXPECT_THROW(Ratio::make(1, 0), Error);
}

TEST(RealParse, FractionsAndDecimals) {
  auto a = Real::parse("1/3");
  ASSERT_TRUE(a.is_rational());
  EXPECT_EQ(*a.exact(), Ratio::make(1, 3));
  auto b = Real::parse("0.25");
  ASSERT_TRUE(b.is_rational());
  EXPECT_EQ(*b.exact(), Ratio::make(1, 4));
  auto c = Real::parse("0.41421356237309504880");
  EXPECT_FALSE(c.is_rational());
  EXPECT_DOUBLE_EQ(c.value(), 0.41421356237309504880);
}

TEST(RealParse, Expressions) {
  EXPECT_DOUBLE_EQ(Real::parse("sqrt(2)-1").value(), 0.41421356237309504880);
  EXPECT_FALSE(Real::parse("sqrt(2)-1").is_rational());
  EXPECT_NEAR(Real::parse("pi/4").value(), std::atan(1.0), 1e-16);
  auto r = Real::parse("(1+2)*3/4");
  ASSERT_TRUE(r.is_rational());
  EXPECT_EQ(*r.exact(), Ratio::make(9, 4));
  EXPECT_THROW(Real::parse("sqrt(2"), Error);
}

TEST(Convergents, GoldenRatio) {
  auto cs = convergents((1 + std::sqrt(5.0)) / 2, 100);
  // Fibonacci ratios
  std::vector<std::pair<int, int>> fib{{1, 1}, {2, 1}, {3, 2}, {5, 3}, {8, 5}, {13, 8}, {21, 13}, {34, 21}, {55, 34}, {89, 55}};
  ASSERT_GE(cs.size(), fib.size());
  for (std::size_t i = 0; i < fib.size(); ++i) {
    EXPECT_EQ(cs[i].num, fib[i].first);
    EXPECT_EQ(cs[i].den, fib[i].second);
  }
  EXPECT_FALSE(detect_rational(std::sqrt(2.0)).has_value());
  EXPECT_EQ(*detect_rational(3.0 / 7.0), Ratio::make(3, 7));
}

// Oracle: exact big-integer arithmetic on the dyadic expansion of t.
static double frac_oracle(long long m, double t) {
  namespace mp = boost::multiprecision;
  int ex = 0;
  double mant = std::frexp(t, &ex);
  mp::cpp_int M = static_cast<long long>(std::ldexp(mant, 53));
  int K = 53 - ex;
  mp::cpp_int prod = M * m;
  mp::cpp_int den = mp::cpp_int(1) << K;
  mp::cpp_int r = prod % den;
  if (r < 0) r += den;
  return static_cast<double>(r) / static_cast<double>(den);
}

TEST(FracTimes, MatchesBigIntegerOracle) {
  const double t = std::sqrt(2.0) - 1;
  for (long long m : {1LL, 7LL, 1000003LL, 99999999999LL, -123456789012LL, 100000000000000LL}) {
    EXPECT_NEAR(frac_times(m, Real(t)), frac_oracle(m, t), 1e-15) << m;
  }
  EXPECT_DOUBLE_EQ(frac_times(5, Real::ratio(1, 3)), 2.0 / 3.0);
  EXPECT_EQ(frac_times(6, Real::ratio(1, 3)), 0.0);
  EXPECT_EQ(frac_times(0, Real(0.3)), 0.0);
}

TEST(Exponential, QuarterTurnsExact) {
  EXPECT_EQ(e(0.0), cplx(1, 0));
  EXPECT_EQ(e(0.25), cplx(0, 1));
  EXPECT_EQ(e(0.5), cplx(-1, 0));
  EXPECT_EQ(e(0.75), cplx(0, -1));
  EXPECT_NEAR(std::abs(e(0.123) - std::polar(1.0, 2 * M_PI * 0.123)), 0.0, 1e-15);
}

TEST(Circle, WrapAndDistance) {
  EXPECT_DOUBLE_EQ(wrap01(-0.25), 0.75);
  EXPECT_DOUBLE_EQ(wrap01(1.5), 0.5);
  EXPECT_NEAR(circle_dist(0.95, 0.05), 0.1, 1e-15);
}

TEST(BlockSum, IndependentOfThreadCount) {
  auto term = [](std::int64_t n) { return 1.0 / static_cast<double>(n) + std::sin(static_cast<double>(n)); };
  set_threads(1);
  const double a = block_sum<double>(1, 200000, term);
  set_threads(8);
  const double b = block_sum<double>(1, 200000, term);
  set_threads(0);
  EXPECT_EQ(a, b);
  long double ref = 0;
  for (std::int64_t n = 1; n <= 200000; ++n) ref += term(n);
  EXPECT_NEAR(a, static_cast<double>(ref), 1e-9);
}

TEST(BlockMap, PropagatesExceptions) {
  set_threads(4);
  EXPECT_THROW(block_map(10, [](std::size_t b) -> int {
                 if (b == 7) throw Error(ErrorKind::budget, "x");
                 return 0;
               }),
               Error);
  set_threads(0);
}

TEST(CounterDraw, Reproducible) {
  EXPECT_EQ(counter_draw(1, 2), counter_draw(1, 2));
  EXPECT_NE(counter_draw(1, 2), counter_draw(1, 3));
  EXPECT_NE(counter_draw(1, 2), counter_draw(2, 2));
}

TEST(Schedule, Geometric) {
  auto s = geometric_schedule(1000);
  std::vector<std::int64_t> want{100, 200, 400, 800, 1000};
  EXPECT_EQ(s, want);
}
