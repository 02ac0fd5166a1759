#include <gtest/gtest.h>

#include <boost/multiprecision/cpp_dec_float.hpp>
#include <numbers>

#include "ergolab/ergodic_averages.hpp"
#include "ergolab/random_families.hpp"

using namespace ergolab;
using Big = boost::multiprecision::cpp_dec_float_50;

namespace {

const double kPi = std::numbers::pi;

std::vector<SequencePtr> seqs(std::initializer_list<const char*> specs) {
  std::vector<SequencePtr> out;
  for (auto s : specs) out.push_back(parse_sequence(s));
  return out;
}

// (1/N) sum e(phase(n)) with the fractional part taken at 50 digits
template <class Phase>
cplx phase_oracle(Phase phase, std::int64_t n_max) {
  std::complex<long double> s = 0;
  for (std::int64_t n = 1; n <= n_max; ++n) {
    Big p = phase(n);
    p -= boost::multiprecision::floor(p);
    const long double th = 2 * std::numbers::pi_v<long double> * static_cast<long double>(p);
    s += std::complex<long double>(std::cos(th), std::sin(th));
  }
  return {double(s.real() / n_max), double(s.imag() / n_max)};
}

// mu(A cap (A - n a)) for an arc of length len <= 1/2
double arc_overlap(double len, double shift) {
  const double d = circle_dist(shift, 0.0);
  return std::max(0.0, len - d);
}

}  // namespace

TEST(MultiAverage, ProductIdentityForConstants) {
  for (const char* sys_text : {"rotation sqrt(2)-1", "skew sqrt(3)", "product(cyclic 3; rotation 0.1)"}) {
    auto sys = parse_system(sys_text);
    TrigPoly a(sys.moduli()), b(sys.moduli());
    a.add(a.zero(), cplx(0.5, -0.25));
    b.add(b.zero(), cplx(-2.0, 1.0));
    for (std::int64_t n : {1, 17, 1000}) {
      auto v = multi_average(sys, seqs({"poly:1,0", "poly:1,0,0"}), {a, b}, n);
      ASSERT_EQ(v.value.terms().size(), 1u);
      EXPECT_EQ(v.value.coeff(v.value.zero()), cplx(0.5, -0.25) * cplx(-2.0, 1.0)) << sys_text;
    }
  }
}

TEST(MultiAverage, SingleSequenceGeometricClosedForm) {
  auto sys = parse_system("rotation sqrt(2)-1");
  const double al = sys.factors()[0].kind.index() == 0 ? std::get<RotationFactor>(sys.factors()[0].kind).angles[0].value() : 0;
  auto f = parse_observable(sys, "1 1; 2 0.5 -0.5; -3 0 0.25; 0 0.75");
  for (std::int64_t n : {1, 10, 999, 100000}) {
    auto v = multi_average(sys, seqs({"poly:1,0"}), {f}, n);
    for (const auto& [k, c] : f.trig().terms()) {
      cplx geo = 1.0;
      if (k[0] != 0) {
        const double t = k[0] * al;
        // (1/N) sum_{m=1}^N e(m t) = e((N+1) t / 2) sin(pi N t) / (N sin(pi t))
        geo = e(wrap01((n + 1) * t / 2)) * (std::sin(kPi * n * t) / (n * std::sin(kPi * t)));
      }
      EXPECT_NEAR(std::abs(v.value.coeff(k) - c * geo), 0.0, 1e-10) << n << " k=" << k[0];
    }
  }
}

TEST(MultiAverage, LinearRelationExactCancellation) {
  for (std::uint64_t i = 0; i < 10; ++i) {
    const double al = 0.05 + 0.9 * uniform01(99, i);
    auto sys = TorusSystem::rotation(Real(al));
    auto f1 = parse_observable(sys, "2 1"), f2 = parse_observable(sys, "-1 1");
    auto s = seqs({"poly:1,0", "poly:2,0"});
    for (std::int64_t n : {1, 10, 1000, 100000}) {
      const double d = distance_to_constant(multi_average(sys, s, {f1, f2}, n), 0.0);
      EXPECT_NEAR(d, 1.0, 1e-10);
    }
    auto rep = joint_ergodicity_diagnostic(sys, s, {f1, f2}, {100, 1000, 10000});
    EXPECT_EQ(rep.verdict, AverageVerdict::obstructed) << al;
    ASSERT_TRUE(rep.witness);
    EXPECT_NEAR(std::abs(rep.witness->coeff(Freq{1}) - 1.0), 0.0, 1e-10);
  }
}

TEST(MultiAverage, QuadraticWeylOracle) {
  auto sys = parse_system("rotation sqrt(2)-1");
  const Big al(std::get<RotationFactor>(sys.factors()[0].kind).angles[0].value());
  auto f = parse_observable(sys, "1 1");
  for (std::int64_t n : {100, 5000, 100000}) {
    auto v = multi_average(sys, seqs({"poly:1,0", "poly:1,0,0"}), {f, f}, n);
    const cplx want = phase_oracle([&](std::int64_t m) { return Big(Big(m + m * m) * al); }, n);
    EXPECT_NEAR(std::abs(v.value.coeff(Freq{2}) - want), 0.0, 1e-11) << n;
    EXPECT_NEAR(distance_to_constant(v, 0.0), std::abs(want), 1e-11);
    if (n == 100000) { EXPECT_LE(std::abs(want), 0.02); }
  }
}

TEST(MultiAverage, HardyPairOracle) {
  auto sys = parse_system("rotation sqrt(2)-1");
  const Big al(std::get<RotationFactor>(sys.factors()[0].kind).angles[0].value());
  auto f = parse_observable(sys, "1 1");
  const std::int64_t n = 3000;
  auto v = multi_average(sys, seqs({"gen:1*n^1.5", "gen:1*n^2.5"}), {f, f}, n);
  const cplx want = phase_oracle(
      [&](std::int64_t m) {
        Big x(m);
        Big a = boost::multiprecision::floor(x * boost::multiprecision::sqrt(x));
        Big b = boost::multiprecision::floor(x * x * boost::multiprecision::sqrt(x));
        return Big((a + b) * al);
      },
      n);
  EXPECT_NEAR(std::abs(v.value.coeff(Freq{2}) - want), 0.0, 1e-11);
}

TEST(MultiAverage, GenericMatchesDiagonal) {
  auto sys = parse_system("product(rotation sqrt(2)-1 0.3; cyclic 4)");
  auto f1 = parse_observable(sys, "1,0,1 1; 0,2,3 0.5 0.5"), f2 = parse_observable(sys, "-1,1,2 1; 0,0,0 0.3");
  auto s = seqs({"poly:1,0", "poly:1,1,0"});
  for (std::int64_t n : {1, 77, 1500}) {
    auto a = multi_average(sys, s, {f1, f2}, n), b = multi_average_generic(sys, s, {f1, f2}, n);
    EXPECT_LE(std::sqrt(l2_mass(a.value - b.value)), 1e-12) << n;
  }
}

TEST(MultiAverage, SkewTruncationGuard) {
  auto sys = parse_system("skew sqrt(2)");
  auto f = parse_observable(sys, "0,1 1");
  auto ok = multi_average(sys, seqs({"poly:1,0"}), {f}, 50, 64);
  EXPECT_EQ(ok.truncated_mass, 0.0);
  // skew pullbacks e(y + n x + ...) spread mass over N distinct frequencies
  EXPECT_NEAR(l2_mass(ok.value), 1.0 / 50, 1e-12);
  try {
    multi_average(sys, seqs({"poly:1,0"}), {f}, 200, 4);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::budget);
  }
}

TEST(MultiAverage, InputErrors) {
  auto sys = parse_system("rotation 0.3");
  auto f = parse_observable(sys, "1 1");
  EXPECT_THROW(multi_average(sys, seqs({"poly:1,0"}), {f, f}, 10), Error);
  EXPECT_THROW(multi_average(sys, seqs({"poly:1,0"}), {f}, 0), Error);
  EXPECT_THROW(joint_ergodicity_diagnostic(sys, seqs({"poly:1,0"}), {f}, {100, 10}), Error);
}

TEST(Diagnostic, VerdictRules) {
  auto sys = parse_system("rotation sqrt(2)-1");
  auto f = parse_observable(sys, "1 1");
  auto conv = joint_ergodicity_diagnostic(sys, seqs({"poly:1,0", "poly:1,0,0"}), {f, f}, geometric_schedule(100000));
  EXPECT_EQ(conv.verdict, AverageVerdict::converging_to_product);
  EXPECT_LE(conv.distances.back(), 0.05);
  EXPECT_LE(conv.distances.back(), 0.5 * conv.distances.front());
  for (double d : conv.distances) EXPECT_GE(d, 0.0);
  auto cyc = parse_system("cyclic 2");
  auto chi = parse_observable(cyc, "1 1");
  auto obs = joint_ergodicity_diagnostic(cyc, seqs({"poly:1,0", "poly:1,0,0"}), {chi, chi}, {10, 1000, 100000});
  EXPECT_EQ(obs.verdict, AverageVerdict::obstructed);
  for (double d : obs.distances) EXPECT_EQ(d, 1.0);
  ASSERT_TRUE(obs.witness);
  EXPECT_EQ(obs.witness->coeff(Freq{0}), cplx(1.0));
}

TEST(Krat, Examples) {
  auto rot = parse_system("rotation sqrt(2)-1");
  auto p = krat_projection(rot, parse_observable(rot, "0 2; 1 1"));
  ASSERT_EQ(p.terms().size(), 1u);
  EXPECT_EQ(p.coeff(Freq{0}), cplx(2.0));
  auto cyc = parse_system("cyclic 3");
  auto f = parse_observable(cyc, "0 1; 1 0.5 0.5; 2 -1");
  EXPECT_EQ(l2_mass(krat_projection(cyc, f) - f.trig()), 0.0);
  auto prod = parse_system("product(rotation sqrt(2)-1; cyclic 2)");
  auto g = parse_observable(prod, "1,1 1; 0,0 5; 0,1 2; 3,0 1");
  auto pg = krat_projection(prod, g);
  EXPECT_EQ(pg.terms().size(), 2u);
  EXPECT_EQ(pg.coeff(Freq{0, 0}), cplx(5.0));
  EXPECT_EQ(pg.coeff(Freq{0, 1}), cplx(2.0));
}

TEST(Krat, IdempotentAndResidualOrthogonal) {
  for (const char* s : {"rotation sqrt(2)-1 1/3", "product(rotation 0.25; cyclic 5)", "skew sqrt(5)", "rotation 0.1 sqrt(7)"}) {
    auto sys = parse_system(s);
    for (std::uint64_t i = 0; i < 20; ++i) {
      auto f = random_trig_poly(sys, 5, i);
      auto p = krat_projection(sys, f);
      EXPECT_EQ(l2_mass(krat_projection(sys, p) - p), 0.0);
      auto r = f - p;
      for (const auto& [k, c] : r.terms()) {
        auto form = eigen_frequency(sys, k);
        if (!form || c == cplx(0.0)) continue;
        EXPECT_FALSE(frequency_rationality(*form)) << s;
      }
    }
  }
}

TEST(Fw, Examples) {
  auto rot = parse_system("rotation sqrt(2)-1");
  auto f = parse_observable(rot, "1 1");
  auto rep = fw_residual_test(rot, f, f, geometric_schedule(100000));
  EXPECT_EQ(rep.verdict, AverageVerdict::converging_to_product);
  auto prod = parse_system("product(cyclic 2; rotation sqrt(2)-1)");
  const double al = std::get<RotationFactor>(prod.factors()[1].kind).angles[0].value();
  auto f1 = parse_observable(prod, "1,1 1"), f2 = parse_observable(prod, "1,0 1");
  auto r2 = fw_residual_test(prod, f1, f2, {100, 1000, 10000});
  for (std::size_t i = 0; i < r2.schedule.size(); ++i) {
    const auto n = r2.schedule[i];
    const cplx want = phase_oracle([&](std::int64_t m) { return Big(Big(m + m * m) / 2 + Big(m) * Big(al)); }, n);
    EXPECT_NEAR(r2.distances[i], std::abs(want), 1e-11);
  }
  EXPECT_LE(r2.distances.back(), 0.05);
  EXPECT_THROW(fw_residual_test(rot, parse_observable(rot, "0 1"), parse_observable(rot, "0 1; 1 1"), {10, 100}), Error);
}

TEST(Recurrence, ArcOverlapOracle) {
  auto sys = parse_system("rotation sqrt(3)");
  const double al = std::get<RotationFactor>(sys.factors()[0].kind).angles[0].value();
  auto A = IndicatorSet::arc(0.0, 0.5);
  auto rep = recurrence_average(sys, A, seqs({"poly:1,0"}), {1000, 100000}, 4096);
  for (std::size_t i = 0; i < rep.schedule.size(); ++i) {
    double s = 0;
    for (std::int64_t n = 1; n <= rep.schedule[i]; ++n) s += arc_overlap(0.5, wrap01(n * al));
    s /= rep.schedule[i];
    EXPECT_NEAR(rep.averages[i], s, 2.0 / 4096) << rep.schedule[i];
    EXPECT_GE(rep.averages[i], 0.0);
    EXPECT_LE(rep.averages[i], rep.mu + rep.quadrature_bound);
  }
  EXPECT_EQ(rep.mu, 0.5);
  EXPECT_EQ(rep.lower_bound, 0.25);
  EXPECT_NEAR(rep.averages.back(), 0.25, 0.02);
}

TEST(Recurrence, FastMatchesBrute) {
  auto sys = parse_system("rotation sqrt(2)-1 0.3");
  IndicatorSet A;
  A.axes = {{0.1, 0.6, {}}, {0.0, 0.25, {}}};
  auto s = seqs({"poly:1,0", "poly:1,0,0"});
  auto a = recurrence_average(sys, A, s, {50, 300}, 1024), b = recurrence_average_brute(sys, A, s, {50, 300}, 1024);
  for (std::size_t i = 0; i < 2; ++i) EXPECT_NEAR(a.averages[i], b.averages[i], 1e-12);
}

TEST(Recurrence, WholeAndEmpty) {
  auto sys = parse_system("rotation sqrt(2)-1");
  auto whole = recurrence_average(sys, IndicatorSet::whole(sys), seqs({"poly:1,0,0"}), {10, 1000}, 1024);
  for (double a : whole.averages) EXPECT_EQ(a, 1.0);
  auto empty = recurrence_average(sys, IndicatorSet::arc(0.3, 0.3), seqs({"poly:1,0,0"}), {10, 1000}, 1024);
  for (double a : empty.averages) EXPECT_EQ(a, 0.0);
}

TEST(Recurrence, Filtered) {
  auto cyc = parse_system("cyclic 2");
  auto rep = recurrence_filtered(cyc, IndicatorSet::residues({0}), seqs({"poly:1,0"}), 2, {10, 1000}, 1024);
  for (double a : rep.averages) EXPECT_EQ(a, 0.5);
  for (double m : rep.margins()) EXPECT_GT(m, 0.0);
  EXPECT_EQ(rep.densities.back(), 0.5);
  auto sq = recurrence_filtered(parse_system("rotation 0.3"), IndicatorSet::arc(0, 0.5), seqs({"poly:1,0,0"}), 4,
                                {1000}, 1024);
  EXPECT_EQ(sq.densities.back(), 0.5);
  auto rot = parse_system("rotation sqrt(3)");
  const double al = std::get<RotationFactor>(rot.factors()[0].kind).angles[0].value();
  auto f = recurrence_filtered(rot, IndicatorSet::arc(0, 0.25), seqs({"poly:1,0"}), 3, {300000}, 4096);
  double s = 0;
  for (std::int64_t m = 1; m <= 100000; ++m) s += arc_overlap(0.25, wrap01(m * 3 * al));
  EXPECT_NEAR(f.averages.back(), s / 100000, 2.0 / 4096);
  EXPECT_NEAR(f.averages.back(), 1.0 / 16, 0.02);
  EXPECT_THROW(recurrence_filtered(rot, IndicatorSet::arc(0, 0.25), seqs({"poly:2,1"}), 2, {100}, 1024), Error);
}

TEST(Recurrence, Preconditions) {
  auto sys = parse_system("rotation 0.3");
  EXPECT_THROW(recurrence_average(sys, IndicatorSet::arc(0, 0.5), seqs({"poly:1,0"}), {10}, 512), Error);
  IndicatorSet mask;
  mask.mask = std::vector<bool>{true, false};
  EXPECT_THROW(recurrence_average(sys, mask, seqs({"poly:1,0"}), {10}, 1024), Error);
  auto cyc = parse_system("cyclic 2");
  auto ok = recurrence_average(cyc, mask, seqs({"poly:2,0"}), {10}, 1024);
  EXPECT_EQ(ok.averages.back(), 0.5);
}
