// One line per acceptance criterion; exit status 1 if any fails.

#include <chrono>
#include <cstdio>
#include <functional>
#include <numbers>

#include "ergolab.hpp"

using namespace ergolab;

namespace {

// pinned tolerances
constexpr double kPairTol5 = 0.05;        // quadratic pair, N = 1e5
constexpr double kPairTol6 = 0.02;        // quadratic pair, N = 1e6
constexpr double kPairSeconds = 60.0;
constexpr double kLinearTol = 1e-10;
constexpr double kHardyTol = 0.05;
constexpr double kHardySeconds = 300.0;
constexpr double kSeminormSlack = 0.05;
constexpr double kEstimatorTol = 0.05;
constexpr double kVdcSlack = 1e-10;
constexpr double kInverseSlack = 0.05;
constexpr double kRecurTol = 0.02;
constexpr double kFlowJointTol = 0.05;
constexpr double kFlowCvTol = 0.02;
constexpr double kFlowStabilityTol = 0.05;
constexpr double kPurePhaseTol = 1e-8;

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::vector<SequencePtr> seqs(std::initializer_list<const char*> specs) {
  std::vector<SequencePtr> out;
  for (auto s : specs) out.push_back(parse_sequence(s));
  return out;
}

Outcome quadratic_pair() {
  const auto t0 = std::chrono::steady_clock::now();
  auto sys = parse_system("rotation sqrt(2)-1");
  auto f = parse_observable(sys, "1 1");
  auto s = seqs({"poly:1,0", "poly:1,0,0"});
  const double d5 = distance_to_constant(multi_average(sys, s, {f, f}, 100000), 0.0);
  const double d6 = distance_to_constant(multi_average(sys, s, {f, f}, 1000000), 0.0);
  const double secs = seconds_since(t0);
  return {d5 <= kPairTol5 && d6 <= kPairTol6 && secs <= kPairSeconds,
          fmt("d(1e5)=%.3g<=%.2g d(1e6)=%.3g<=%.2g time=%.1fs<=%.0fs", d5, kPairTol5, d6, kPairTol6, secs, kPairSeconds)};
}

Outcome rational_obstruction() {
  auto s = seqs({"poly:1,0", "poly:1,0,0"});
  std::vector<Real> t{Real::ratio(1, 2), Real::ratio(1, 2)};
  bool exact = true;
  for (std::int64_t n : {10, 1000, 100000}) exact = exact && exp_sum(s, t, n) == cplx(1.0);
  auto cyc = parse_system("cyclic 2");
  auto chi = parse_observable(cyc, "1 1");
  auto rep = joint_ergodicity_diagnostic(cyc, s, {chi, chi}, {10, 1000, 100000});
  return {exact && rep.verdict == AverageVerdict::obstructed,
          fmt("exp_sum==1 exactly: %s, cyclic verdict: %s", exact ? "yes" : "no", to_string(rep.verdict))};
}

Outcome linear_relation() {
  double worst = 0;
  for (const char* a : {"sqrt(2)-1", "sqrt(3)", "pi", "0.1234567891234", "sqrt(5)/3"}) {
    auto sys = parse_system(std::string("rotation ") + a);
    auto f1 = parse_observable(sys, "2 1"), f2 = parse_observable(sys, "-1 1");
    for (std::int64_t n : {1, 10, 1000, 100000})
      worst = std::max(worst, std::abs(distance_to_constant(multi_average(sys, seqs({"poly:1,0", "poly:2,0"}), {f1, f2}, n), 0.0) - 1.0));
  }
  return {worst <= kLinearTol, fmt("max |distance-1| = %.3g <= %.0e", worst, kLinearTol)};
}

Outcome hardy_pair() {
  const auto t0 = std::chrono::steady_clock::now();
  auto sys = parse_system("rotation sqrt(2)-1");
  auto f = parse_observable(sys, "1 1");
  const double d = distance_to_constant(multi_average(sys, seqs({"gen:1*n^1.5", "gen:1*n^2.5"}), {f, f}, 1000000), 0.0);
  const double secs = seconds_since(t0);
  return {d <= kHardyTol && secs <= kHardySeconds,
          fmt("d(1e6)=%.3g<=%.2g time=%.1fs<=%.0fs", d, kHardyTol, secs, kHardySeconds)};
}

Outcome seminorm_suite() {
  auto sys = parse_system("rotation sqrt(2)-1");
  auto chi = parse_observable(sys, "1 1");
  bool rigid = true;
  for (int s : {2, 3})
    for (std::int64_t n : {1, 2, 17, 256, 512}) rigid = rigid && seminorm_box(sys, chi, s, n).raw == 1.0;
  int mono_bad = 0;
  double worst_gap = 0;
  for (std::uint64_t i = 0; i < 20; ++i) {
    auto f = random_trig_poly(sys, 2024, i);
    if (!monotonicity_report(sys, f, 3, 256, kSeminormSlack).violations.empty()) ++mono_bad;
    for (int s : {1, 2, 3}) {
      const std::int64_t n = s == 3 ? 64 : 256;
      worst_gap = std::max(worst_gap, std::abs(seminorm_box(sys, f, s, n).value - seminorm_iterative(sys, f, s, {n}).value));
    }
  }
  return {rigid && mono_bad == 0 && worst_gap <= kEstimatorTol,
          fmt("(a) raw==1: %s (b) monotonicity violations %d/20 (c) box-iterative gap %.3g<=%.2g", rigid ? "yes" : "no",
              mono_bad, worst_gap, kEstimatorTol)};
}

Outcome inequality_suite() {
  double worst = -1e300;
  for (std::uint64_t idx = 0; idx < 500; ++idx) {
    auto fam = random_vector_family(2024, idx);
    auto r = vdc_bound(std::span<const std::vector<cplx>>(fam));
    worst = std::max(worst, r.lhs - r.rhs);
  }
  auto c = random_vector_family(2024, 0);
  auto rc = vdc_bound(std::span<const std::vector<cplx>>(c));
  const bool equality = std::abs(rc.lhs - 1) <= 1e-12 && std::abs(rc.rhs - 1) <= 1e-12;
  int gcs_bad = 0;
  auto sys = parse_system("rotation sqrt(2)-1");
  for (std::uint64_t fam = 0; fam < 100; ++fam) {
    const int s = fam % 2 ? 2 : 1;
    const std::int64_t n = s == 1 ? 32 : 8;
    std::vector<Observable> f;
    for (std::size_t k = 0; k < (std::size_t(1) << s); ++k) f.push_back(random_monomial(sys, fam, k, 3));
    auto g = [&](std::span<const std::int64_t> t) {
      std::uint64_t idx = 100;
      for (auto v : t) idx = idx * 64 + static_cast<std::uint64_t>(v);
      return Observable(random_monomial(sys, fam + 1000, idx, 2));
    };
    if (!gcs_check(sys, f, g, s, n).holds) ++gcs_bad;
  }
  return {worst <= kVdcSlack && equality && gcs_bad == 0,
          fmt("vdc max(lhs-rhs)=%.3g<=%.0e over 500, constant family equality: %s, gcs failures %d/100", worst,
              kVdcSlack, equality ? "yes" : "no", gcs_bad)};
}

Outcome soft_inverse_suite() {
  auto sys = parse_system("rotation sqrt(2)-1");
  int bad = 0;
  double worst = -1e300;
  for (std::uint64_t i = 0; i < 20; ++i) {
    auto r = soft_inverse(sys, random_trig_poly(sys, 77, i), 8, 256);
    worst = std::max(worst, r.lhs - r.correlation);
    if (!(r.lhs <= r.correlation + kInverseSlack)) ++bad;
  }
  return {bad == 0, fmt("max(|||f|||^4 - correlation)=%.3g <= %.2g, failures %d/20", worst, kInverseSlack, bad)};
}

Outcome recurrence_suite() {
  auto sys = parse_system("rotation sqrt(3)");
  const double al = std::get<RotationFactor>(sys.factors()[0].kind).angles[0].value();
  auto A = IndicatorSet::arc(0.0, 0.5);
  auto rep = recurrence_average(sys, A, seqs({"poly:1,0"}), {1000000}, 4096);
  const double avg = rep.averages.back();
  auto filt = recurrence_filtered(sys, A, seqs({"poly:1,0"}), 3, {1000000}, 4096);
  // oracle: mu(A cap (A - m 3a)) = max(0, 1/2 - ||3 m a||) averaged over m
  double oracle = 0;
  const std::int64_t count = 1000000 / 3;
  for (std::int64_t m = 1; m <= count; ++m) oracle += std::max(0.0, 0.5 - circle_dist(wrap01(3.0 * al * m), 0.0));
  oracle /= count;
  const double f = filt.averages.back();
  const bool ok = std::abs(avg - 0.25) <= kRecurTol && avg >= rep.lower_bound - kRecurTol && std::abs(f - oracle) <= kRecurTol;
  return {ok, fmt("average=%.4f (target 0.25 +- %.2g), filtered r=3 %.4f vs oracle %.4f", avg, kRecurTol, f, oracle)};
}

Outcome divisibility_suite() {
  const double a = divisibility_density({parse_sequence("poly:1,0,0")}, 4, 1000);
  const double b = divisibility_density({parse_sequence("poly:1,0")}, 3, 999);
  const double c = divisibility_density({parse_sequence("poly:1,0"), parse_sequence("poly:1,0,0")}, 2, 1000);
  return {a == 0.5 && b == 1.0 / 3.0 && c == 0.5, fmt("densities %.17g %.17g %.17g", a, b, c)};
}

Outcome flow_suite() {
  auto fs2 = parse_flows("1,0; 0,sqrt(2)");
  auto sys2 = fs2.torus();
  auto joint = joint_flow_diagnostic(fs2, {parse_time_change("t"), parse_time_change("t^2")},
                                     {parse_observable(sys2, "1,0 1"), parse_observable(sys2, "0,1 1")},
                                     seeded_points(2, 1), {1000}, kFlowJointTol);
  double worst_joint = 0;
  for (double d : joint.distances.back()) worst_joint = std::max(worst_joint, d);
  const bool a = joint.pass && joint.xs.size() == 16;
  auto cv = change_of_variables_check(parse_profile("1 1"), parse_time_change("t^2"), {1000}, kFlowCvTol);
  auto fs1 = parse_flows("1");
  auto st = stability_check(fs1, 0, parse_time_change("t^0.5"), parse_observable(fs1.torus(), "1 1"), 1.0, Point{0.3},
                            {10000}, kFlowStabilityTol);
  double worst_phase = 0;
  for (double lambda : {0.5, 1.0, 7.25, 100.0, 1000.0}) {
    auto fs = parse_flows(fmt("%.17g", lambda));
    for (double y : {1.0, 50.0, 100.0}) {
      const cplx got = flow_average(fs, {parse_time_change("t")}, {parse_observable(fs.torus(), "1 1")}, Point{0.0}, y);
      const cplx want = (e(frac_times(1, Real(lambda * y))) - 1.0) / cplx(0.0, 2 * std::numbers::pi * lambda * y);
      worst_phase = std::max(worst_phase, std::abs(got - want));
    }
  }
  const bool ok = a && cv.diffs.back() <= kFlowCvTol && st.values.back() <= kFlowStabilityTol && worst_phase <= kPurePhaseTol;
  return {ok, fmt("(a) worst x %.3g<=%.2g (b) cv diff %.3g<=%.2g (c) stability %.3g<=%.2g (d) phase err %.3g<=%.0e",
                  worst_joint, kFlowJointTol, cv.diffs.back(), kFlowCvTol, st.values.back(), kFlowStabilityTol,
                  worst_phase, kPurePhaseTol)};
}

Outcome determinism() {
  const char* text = R"([vdc]
kind = vdc
family = random
count = 60
seed = 17

[sub]
kind = seminorm
system = skew sqrt(2)
observable = 0,1 1; 1,0 0.5
s_max = 2
n = 64
estimator = subsampled
count = 20000
seed = 4

[avg]
kind = average
system = rotation sqrt(2)-1
seqs = poly:1,0; poly:1,0,0
observables = 1 1 | 1 1
schedule = 1000, 300000

[flow]
kind = flow
mode = joint
speeds = 1,0; 0,sqrt(2)
changes = t; t^2
observables = 1,0 1 | 0,1 1
x_seed = 3
y_schedule = 10, 100
)";
  auto cfg = parse_config(text);
  auto run = [&](int threads) {
    RunOptions opt;
    opt.threads = threads;
    return run_config(cfg, opt);
  };
  auto a = run(1), b = run(1), c = run(8);
  set_threads(0);
  bool bytes = true, fields = true;
  for (std::size_t i = 0; i < a.experiments.size(); ++i) {
    bytes = bytes && a.experiments[i].csv == b.experiments[i].csv && !a.experiments[i].csv.empty();
    fields = fields && a.experiments[i].csv == c.experiments[i].csv &&
             a.experiments[i].final_value == c.experiments[i].final_value &&
             a.experiments[i].extra == c.experiments[i].extra;
  }
  return {bytes && fields, fmt("repeat byte-identical: %s, threads 1 vs 8 identical: %s (%zu experiments)",
                               bytes ? "yes" : "no", fields ? "yes" : "no", a.experiments.size())};
}

}  // namespace

int main() {
  const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria{
      {"quadratic pair average on irrational rotation", quadratic_pair},
      {"rational obstruction", rational_obstruction},
      {"linear-relation obstruction", linear_relation},
      {"fractional-power pair average", hardy_pair},
      {"seminorm suite", seminorm_suite},
      {"inequality suite", inequality_suite},
      {"soft inverse", soft_inverse_suite},
      {"recurrence", recurrence_suite},
      {"divisibility densities", divisibility_suite},
      {"flow suite", flow_suite},
      {"determinism", determinism},
  };
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& ex) {
      o = {false, std::string("error: ") + ex.what()};
    }
    std::printf("criterion %2zu %s: %s  %s\n", i + 1, o.pass ? "PASS" : "FAIL", criteria[i].first, o.detail.c_str());
    std::fflush(stdout);
    failed += !o.pass;
  }
  std::printf("%d/%zu criteria passed\n", static_cast<int>(criteria.size()) - failed, criteria.size());
  return failed == 0 ? 0 : 1;
}
