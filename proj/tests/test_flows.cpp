#include <gtest/gtest.h>

#include <numbers>

#include "ergolab/flows.hpp"
#include "ergolab/random_families.hpp"

using namespace ergolab;

namespace {

using lcplx = std::complex<long double>;
constexpr long double kTwoPi = 2 * std::numbers::pi_v<long double>;

lcplx el(long double cycles) { return std::polar(1.0L, kTwoPi * (cycles - std::floor(cycles))); }

// (1/y) int_0^y f, composite Simpson with `steps` (even) panels
template <class F>
lcplx simpson_average(F f, long double y, std::int64_t steps) {
  const long double h = y / steps;
  lcplx s = f(0.0L) + f(y);
  for (std::int64_t i = 1; i < steps; ++i) s += (i % 2 ? 4.0L : 2.0L) * f(i * h);
  return s * (h / 3) / y;
}

std::vector<TimeChange> changes(std::initializer_list<const char*> specs) {
  std::vector<TimeChange> out;
  for (auto s : specs) out.push_back(parse_time_change(s));
  return out;
}

}  // namespace

TEST(TimeChange, ParseAndEvaluate) {
  auto a = parse_time_change("3*t^1.5*log^0.5+t");
  EXPECT_NEAR(double(a.value(4.0L)), 3 * 8 * std::sqrt(std::log(4.0)) + 4, 1e-12);
  EXPECT_NEAR(double(a.value(0.5L)), 0.5, 1e-15);
  auto b = parse_time_change("2^t");
  EXPECT_NEAR(double(b.value(10.0L)), 1024.0, 1e-12);
  EXPECT_NEAR(double(b.derivative(3.0L)), 8 * std::log(2.0), 1e-12);
  auto c = parse_time_change("t^2");
  for (long double t : {0.3L, 7.0L, 1000.0L}) {
    EXPECT_EQ(c.value(t), t * t);
    EXPECT_EQ(c.derivative(t), 2 * t);
  }
  EXPECT_THROW(parse_time_change("t^-1"), Error);
  EXPECT_THROW(parse_time_change("1^t"), Error);
  EXPECT_THROW(parse_time_change("t^"), Error);
  EXPECT_THROW(check_monotone(parse_time_change("5-t"), 10), Error);
}

TEST(TimeChange, GrowthSeparation) {
  EXPECT_TRUE(growth_separation(changes({"t", "t^2"})).ok);
  EXPECT_TRUE(growth_separation(changes({"2^t", "3^t", "4^t"})).ok);
  EXPECT_FALSE(growth_separation(changes({"t", "2^t"})).ok);
  EXPECT_FALSE(growth_separation(changes({"t^2", "t^2+t"})).ok);
  EXPECT_FALSE(growth_separation(changes({"t^2", "t"})).ok);
  EXPECT_FALSE(growth_separation(changes({"7"})).ok);
}

TEST(FlowSystem, ParseApplyCommute) {
  auto fs = parse_flows("1,0; 0,sqrt(2); 0.25,sqrt(3)");
  EXPECT_EQ(fs.flows(), 3u);
  EXPECT_EQ(fs.dim, 2u);
  EXPECT_THROW(parse_flows("1,0; 1"), Error);
  Point x{0.3, 0.9};
  for (double s : {0.1, 2.5, 17.3})
    for (double t : {0.37, 1.0, 9.9})
      for (std::size_t j = 0; j < 3; ++j)
        for (std::size_t k = 0; k < 3; ++k) {
          auto a = fs.apply(j, fs.apply(k, x, t), s), b = fs.apply(k, fs.apply(j, x, s), t);
          for (std::size_t i = 0; i < 2; ++i) EXPECT_LE(circle_dist(a[i], b[i]), 1e-12);
        }
}

TEST(Projection, Examples) {
  auto one = parse_flows("1");
  auto sys1 = one.torus();
  auto p = invariant_projection(one, 0, parse_observable(sys1, "0 2; 1 1"));
  ASSERT_EQ(p.terms().size(), 1u);
  EXPECT_EQ(p.coeff(Freq{0}), cplx(2.0));
  auto anti = parse_flows("1,-1");
  auto sys2 = anti.torus();
  auto q = invariant_projection(anti, 0, parse_observable(sys2, "1,1 1"));
  EXPECT_EQ(q.coeff(Freq{1, 1}), cplx(1.0));
  auto irr = parse_flows("1,sqrt(2)");
  auto r = invariant_projection(irr, 0, parse_observable(sys2, "1,1 1; 0,0 7"));
  ASSERT_EQ(r.terms().size(), 1u);
  EXPECT_EQ(r.coeff(Freq{0, 0}), cplx(7.0));
}

TEST(Projection, IdempotentAndInvariant) {
  auto fs = parse_flows("1,-2; 0.5,sqrt(2); 3,1/3");
  auto sys = fs.torus();
  for (std::uint64_t i = 0; i < 20; ++i) {
    TrigPoly f = random_trig_poly(sys, 8, i, 6, 8);
    f.add(Freq{2, 1}, 0.1);
    f.add(Freq{-2, 18}, 0.1);
    for (std::size_t j = 0; j < fs.flows(); ++j) {
      auto p = invariant_projection(fs, j, f);
      EXPECT_EQ(l2_mass(invariant_projection(fs, j, p) - p), 0.0);
      for (const auto& x : seeded_points(2, i, 4))
        for (double t : {0.1, 0.37, 1.0})
          EXPECT_LE(std::abs(evaluate(sys, p, fs.apply(j, x, t)) - evaluate(sys, p, x)), 1e-10);
    }
  }
}

TEST(Quadrature, PurePhaseClosedForm) {
  for (double lambda : {0.5, 1.0, 3.7, 10.0, 123.4, 1000.0}) {
    auto fs = parse_flows(std::to_string(lambda));
    auto obs = parse_observable(fs.torus(), "1 1");
    for (double y : {1.0, 37.5, 100.0}) {
      const cplx got = flow_average(fs, changes({"t"}), {obs}, Point{0.0}, y);
      const long double ly = static_cast<long double>(std::stod(std::to_string(lambda))) * y;
      const lcplx want = (el(ly) - 1.0L) / (lcplx(0, kTwoPi) * ly);
      EXPECT_NEAR(got.real(), double(want.real()), 1e-8) << lambda << " " << y;
      EXPECT_NEAR(got.imag(), double(want.imag()), 1e-8) << lambda << " " << y;
    }
  }
}

TEST(Quadrature, Examples) {
  auto fs = parse_flows("1");
  auto sys = fs.torus();
  const cplx lin = flow_average(fs, changes({"t"}), {parse_observable(sys, "1 1")}, Point{0.2}, 100);
  EXPECT_LE(std::abs(lin), 1 / (std::numbers::pi * 100) + 1e-12);
  for (double y : {0.5, 10.0, 1000.0})
    EXPECT_NEAR(std::abs(flow_average(fs, changes({"t^2"}), {Observable::constant(sys, cplx(0.3, 0.4))}, Point{0.7}, y) -
                         cplx(0.3, 0.4)),
                0.0, 1e-15);
  // Fresnel: (1/y) int_0^y e(t^2) dt
  const cplx fres = flow_average(fs, changes({"t^2"}), {parse_observable(sys, "1 1")}, Point{0.0}, 100);
  const lcplx want = simpson_average([](long double t) { return el(t * t); }, 100.0L, 4'000'000);
  EXPECT_NEAR(fres.real(), double(want.real()), 1e-9);
  EXPECT_NEAR(fres.imag(), double(want.imag()), 1e-9);
  EXPECT_LE(std::abs(fres), 0.01);
}

TEST(Quadrature, TwoFlowsAgainstSimpson) {
  auto fs = parse_flows("1,0; 0,sqrt(2)");
  auto sys = fs.torus();
  auto f1 = parse_observable(sys, "1,0 1"), f2 = parse_observable(sys, "0,1 1; 0,2 0.5 0.5");
  const double v2 = fs.speeds[1][1].value();
  for (const auto& x : seeded_points(2, 3, 3)) {
    const cplx got = flow_average(fs, changes({"t", "t^2"}), {f1, f2}, x, 40);
    auto integrand = [&](long double t) {
      const long double y2 = x[1] + t * t * v2;
      return el(x[0] + t) * (el(y2) + lcplx(0.5, 0.5) * el(2 * y2));
    };
    const lcplx want = simpson_average(integrand, 40.0L, 2'000'000);
    EXPECT_NEAR(std::abs(got - cplx(double(want.real()), double(want.imag()))), 0.0, 1e-8);
  }
}

TEST(Quadrature, ExponentialChangesAgainstSimpson) {
  auto fs = parse_flows("1,0,0; 0,1,0; 0,0,1");
  auto sys = fs.torus();
  auto f1 = parse_observable(sys, "1,0,0 1"), f2 = parse_observable(sys, "0,1,0 1"), f3 = parse_observable(sys, "0,0,-1 1");
  Point x{0.1, 0.5, 0.8};
  const cplx got = flow_average(fs, changes({"2^t", "3^t", "4^t"}), {f1, f2, f3}, x, 6);
  auto integrand = [&](long double t) {
    return el(x[0] + std::pow(2.0L, t) + x[1] + std::pow(3.0L, t) - x[2] - std::pow(4.0L, t));
  };
  const lcplx want = simpson_average(integrand, 6.0L, 6'000'000);
  EXPECT_NEAR(std::abs(got - cplx(double(want.real()), double(want.imag()))), 0.0, 1e-8);
}

TEST(Quadrature, BoundedAverages) {
  auto fs = parse_flows("1,0; 0.5,sqrt(3)");
  auto sys = fs.torus();
  for (std::uint64_t i = 0; i < 10; ++i) {
    auto f = random_trig_poly(sys, 31, 2 * i), g = random_trig_poly(sys, 31, 2 * i + 1);
    const cplx v = flow_average(fs, changes({"t", "t^1.5"}), {f, g}, seeded_points(2, i, 1)[0], 50);
    EXPECT_LE(std::abs(v), sup_bound(f) * sup_bound(g) + 1e-8);
  }
}

TEST(Quadrature, PanelBudget) {
  auto fs = parse_flows("1");
  QuadOptions opt;
  opt.panel_budget = 1000;
  opt.allow_tail = false;
  try {
    flow_average(fs, changes({"t^3"}), {parse_observable(fs.torus(), "1 1")}, Point{0.0}, 100, opt);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::budget);
  }
}

TEST(Diagnostic, TwoFlowPolynomial) {
  auto fs = parse_flows("1,0; 0,sqrt(2)");
  auto sys = fs.torus();
  auto rep = joint_flow_diagnostic(fs, changes({"t", "t^2"}), {parse_observable(sys, "1,0 1"), parse_observable(sys, "0,1 1")},
                                   seeded_points(2, 1), {100, 1000});
  EXPECT_TRUE(rep.hypothesis.ok);
  ASSERT_EQ(rep.xs.size(), 16u);
  for (const auto& t : rep.targets) EXPECT_EQ(t, cplx(0.0));
  for (double d : rep.distances.back()) EXPECT_LE(d, 0.05);
  EXPECT_TRUE(rep.pass);
}

TEST(Diagnostic, ConstantObservablesExact) {
  auto fs = parse_flows("1,0; 0,sqrt(2)");
  auto sys = fs.torus();
  auto rep = joint_flow_diagnostic(fs, changes({"t", "t^2"}),
                                   {Observable::constant(sys, 0.5), Observable::constant(sys, cplx(0, 2))},
                                   seeded_points(2, 1, 4), {1, 10, 100});
  for (const auto& row : rep.distances)
    for (double d : row) EXPECT_LE(d, 1e-15);
}

TEST(Diagnostic, ExponentialChanges) {
  auto fs = parse_flows("1,0,0; 0,1,0; 0,0,1");
  auto sys = fs.torus();
  auto rep = joint_flow_diagnostic(
      fs, changes({"2^t", "3^t", "4^t"}),
      {parse_observable(sys, "1,0,0 1"), parse_observable(sys, "0,1,0 1"), parse_observable(sys, "0,0,1 1")},
      seeded_points(3, 2, 4), {10, 30});
  EXPECT_TRUE(rep.hypothesis.ok);
  EXPECT_TRUE(rep.pass);
  EXPECT_LE(rep.tail_bounds.back(), 1e-5);
  for (double d : rep.distances.back()) EXPECT_LE(d, 0.05);
}

TEST(Diagnostic, HypothesisFlaggedButRuns) {
  auto fs = parse_flows("1,0; 0,1");
  auto sys = fs.torus();
  auto rep = joint_flow_diagnostic(fs, changes({"t", "2^t"}), {parse_observable(sys, "1,0 1"), parse_observable(sys, "0,1 1")},
                                   seeded_points(2, 1, 2), {10});
  EXPECT_FALSE(rep.hypothesis.ok);
  EXPECT_FALSE(rep.hypothesis.note.empty());
  EXPECT_EQ(rep.values.size(), 1u);
}

TEST(ChangeOfVariables, Examples) {
  auto one = change_of_variables_check(parse_profile("0 1"), parse_time_change("t^2"), {10, 100});
  for (std::size_t i = 0; i < 2; ++i) {
    EXPECT_EQ(one.plain[i], cplx(1.0));
    EXPECT_NEAR(std::abs(one.changed[i] - 1.0), 0.0, 1e-14);
  }
  auto sq = change_of_variables_check(parse_profile("1 1"), parse_time_change("t^2"), {200, 1000});
  EXPECT_TRUE(sq.pass);
  EXPECT_LE(sq.diffs.back(), 0.02);
  const lcplx fres = simpson_average([](long double t) { return el(t * t); }, 200.0L, 8'000'000);
  EXPECT_NEAR(std::abs(sq.changed[0] - cplx(double(fres.real()), double(fres.imag()))), 0.0, 1e-9);
  const lcplx geo = (el(200.0L) - 1.0L) / (lcplx(0, kTwoPi) * 200.0L);
  EXPECT_NEAR(std::abs(sq.plain[0] - cplx(double(geo.real()), double(geo.imag()))), 0.0, 1e-12);
  auto frac = change_of_variables_check(parse_profile("1 1"), parse_time_change("t^0.7"), {1000});
  EXPECT_TRUE(frac.pass);
  const lcplx want = simpson_average([](long double t) { return el(std::pow(t, 0.7L)); }, 1000.0L, 2'000'000);
  EXPECT_NEAR(std::abs(frac.changed[0] - cplx(double(want.real()), double(want.imag()))), 0.0, 1e-6);
  EXPECT_THROW(change_of_variables_check(parse_profile("1 1"), parse_time_change("5"), {10}), Error);
}

TEST(Stability, Examples) {
  auto fs = parse_flows("1");
  auto sys = fs.torus();
  auto f = parse_observable(sys, "1 1");
  auto b = parse_time_change("t^0.5");
  auto rep = stability_check(fs, 0, b, f, 1.0, Point{0.3}, {100, 1000, 10000});
  EXPECT_TRUE(rep.pass);
  EXPECT_LE(rep.values.back(), 0.05);
  EXPECT_LT(rep.values.back(), rep.values.front());
  const lcplx want = simpson_average(
      [](long double t) { return lcplx(std::norm(el(std::sqrt(t + 1)) - el(std::sqrt(t))), 0); }, 100.0L, 2'000'000);
  EXPECT_NEAR(rep.values.front(), double(want.real()), 1e-7);
  for (double v : stability_check(fs, 0, b, f, 0.0, Point{0.3}, {10, 100}).values) EXPECT_EQ(v, 0.0);
  for (double v : stability_check(fs, 0, b, Observable::constant(sys, 0.8), 1.0, Point{0.3}, {10, 100}).values)
    EXPECT_EQ(v, 0.0);
  try {
    stability_check(fs, 0, parse_time_change("t"), f, 1.0, Point{0.3}, {10});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::hypothesis);
  }
}
