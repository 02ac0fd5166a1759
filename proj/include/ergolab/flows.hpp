#pragma once

// Commuting translation flows T_j^t x = x + t v_j on a torus, flow averages
// (1/y) int_0^y prod_j f_j(T_j^{a_j(t)} x) dt by adaptive Gauss-Legendre
// panels, invariant projections, change-of-variables and stability checks.

#include "ergolab/measure_spaces.hpp"
#include "ergolab/sequences.hpp"

namespace ergolab {

// ---------------------------------------------------------------------------
// Time changes: sums of g * t^b * (log t)^e * B^t

struct TimeChange {
  std::vector<PowerTerm> terms;
  std::string text;
  std::vector<int> int_powers;  // exponent when it is a small integer, else -1

  void prepare() {
    int_powers.clear();
    for (const auto& t : terms) {
      const auto& r = t.power.exact;
      int ip = -1;
      if (mp::denominator(r) == 1 && r >= 0 && r <= 64) ip = static_cast<int>(mp::numerator(r));
      int_powers.push_back(ip);
    }
  }

  static long double ipow(long double t, int k) {
    long double r = 1;
    for (; k > 0; k >>= 1, t *= t)
      if (k & 1) r *= t;
    return r;
  }

  long double power(std::size_t i, long double t, long double shift) const {
    const long double b = terms[i].power.ld - shift;
    if (i < int_powers.size() && int_powers[i] >= 0 && int_powers[i] >= shift) return ipow(t, int_powers[i] - static_cast<int>(shift));
    return std::pow(t, b);
  }

  // Log factors vanish for t <= 1.
  long double value(long double t) const {
    long double v = 0;
    for (std::size_t i = 0; i < terms.size(); ++i) {
      const auto& term = terms[i];
      const long double g = term.coeff.ld;
      if (g == 0) continue;
      long double x = g;
      if (term.power.ld != 0) x *= power(i, t, 0);
      if (term.log_power.ld != 0) {
        if (t <= 1) continue;
        x *= std::pow(std::log(t), term.log_power.ld);
      }
      if (term.base) x *= std::exp(t * std::log(term.base->ld));
      v += x;
    }
    return v;
  }

  long double derivative(long double t) const {
    long double d = 0;
    for (std::size_t i = 0; i < terms.size(); ++i) {
      const auto& term = terms[i];
      const long double g = term.coeff.ld, b = term.power.ld, e = term.log_power.ld;
      if (g == 0) continue;
      const long double P = b == 0 ? 1.0L : power(i, t, 0);
      const long double dP = b == 0 ? 0.0L : b * power(i, t, 1);
      long double L = 1, dL = 0;
      if (e != 0) {
        if (t <= 1) continue;
        const long double lg = std::log(t);
        L = std::pow(lg, e);
        dL = e * std::pow(lg, e - 1) / t;
      }
      long double E = 1, dE = 0;
      if (term.base) {
        const long double lb = std::log(term.base->ld);
        E = std::exp(t * lb);
        dE = E * lb;
      }
      d += g * (dP * L * E + P * dL * E + P * L * dE);
    }
    return d;
  }
};

// "t^2", "2^t", "3*t^1.5*log^0.5+t", "0.5*t^0.7"
inline TimeChange parse_time_change(std::string_view s) {
  detail::Cursor cur(s, 0);
  TimeChange tc;
  tc.text = std::string(s);
  tc.terms = detail::parse_power_terms(cur, 't', true, true, true);
  if (!cur.done()) cur.fail("unexpected character");
  for (const auto& t : tc.terms) {
    if (t.power.exact < 0) throw Error(ErrorKind::parse, "time-change exponents must be >= 0");
    if (t.base && t.base->exact <= 1) throw Error(ErrorKind::parse, "exponential bases must exceed 1");
  }
  tc.prepare();
  return tc;
}

// Leading growth: exponential with rate ln B, or power t^b (log power as tiebreak).
struct Growth {
  bool exponential = false;
  double rate = 0.0;
  double log_power = 0.0;
};

inline Growth leading_growth(const TimeChange& a) {
  Growth g;
  bool any = false;
  for (const auto& t : a.terms) {
    if (t.coeff.ld == 0) continue;
    if (t.base) {
      const double r = std::log(static_cast<double>(t.base->ld));
      if (!g.exponential || r > g.rate) {
        g.exponential = true;
        g.rate = r;
        g.log_power = 0;
      }
      any = true;
    } else if (!g.exponential) {
      const double b = static_cast<double>(t.power.ld), e = static_cast<double>(t.log_power.ld);
      if (!any || b > g.rate || (b == g.rate && e > g.log_power)) {
        g.rate = b;
        g.log_power = e;
      }
      any = true;
    }
  }
  return g;
}

struct HypothesisCheck {
  bool ok = true;
  std::string note;
};

// Growth separation: a_1 grows at least like a power of t and consecutive
// changes satisfy a_{j+1}^d << a_j << a_{j+1}^{1-d}.
inline HypothesisCheck growth_separation(const std::vector<TimeChange>& changes) {
  HypothesisCheck h;
  std::vector<Growth> g;
  for (const auto& c : changes) g.push_back(leading_growth(c));
  for (std::size_t j = 0; j < g.size(); ++j) {
    if (!g[j].exponential && !(g[j].rate > 0)) {
      h.ok = false;
      h.note = "time change " + std::to_string(j + 1) + " has no positive leading exponent";
      return h;
    }
  }
  for (std::size_t j = 0; j + 1 < g.size(); ++j) {
    if (g[j].exponential != g[j + 1].exponential) {
      h.ok = false;
      h.note = "time changes " + std::to_string(j + 1) + " and " + std::to_string(j + 2) +
               " mix power and exponential growth";
      return h;
    }
    const double ratio = g[j].rate / g[j + 1].rate;
    if (!(ratio > 0 && ratio < 1)) {
      h.ok = false;
      h.note = "leading exponents of time changes " + std::to_string(j + 1) + " and " + std::to_string(j + 2) +
               " are not strictly increasing";
      return h;
    }
  }
  return h;
}

inline void check_monotone(const TimeChange& a, double y) {
  for (int i = 1; i <= 64; ++i) {
    const long double t = static_cast<long double>(y) * i / 64;
    if (!(a.derivative(t) > 0))
      throw Error(ErrorKind::precondition, "time change '" + a.text + "' is not increasing on (0, y]");
  }
}

// ---------------------------------------------------------------------------
// Flows

struct FlowSystem {
  std::size_t dim = 1;
  std::vector<std::vector<Real>> speeds;  // one speed vector per flow

  std::size_t flows() const { return speeds.size(); }
  void validate() const {
    if (speeds.empty()) throw Error(ErrorKind::precondition, "no flows");
    for (const auto& v : speeds) {
      if (v.size() != dim) throw Error(ErrorKind::precondition, "speed vector dimension mismatch");
      for (const auto& c : v)
        if (!std::isfinite(c.value())) throw Error(ErrorKind::precondition, "non-finite speed");
    }
  }
  std::vector<std::int64_t> moduli() const { return std::vector<std::int64_t>(dim, 0); }
  TorusSystem torus() const { return TorusSystem::rotation(std::vector<Real>(dim, Real::ratio(0, 1))); }

  // T_j^t x
  Point apply(std::size_t j, const Point& x, double t) const {
    Point out(dim);
    for (std::size_t i = 0; i < dim; ++i) out[i] = wrap01(x[i] + std::fmod(t * speeds[j][i].value(), 1.0));
    return out;
  }

  std::string to_text() const {
    std::string s;
    for (std::size_t j = 0; j < speeds.size(); ++j) {
      if (j) s += "; ";
      for (std::size_t i = 0; i < dim; ++i) s += (i ? "," : "") + speeds[j][i].to_text();
    }
    return s;
  }
};

// "1,0; 0,sqrt(2)"
inline FlowSystem parse_flows(const std::string& text) {
  FlowSystem fs;
  for (const auto& part : detail::split_top(text, ';')) {
    std::vector<Real> v;
    for (const auto& c : detail::split_top(part, ',')) v.push_back(Real::parse(detail::trim(c)));
    fs.speeds.push_back(std::move(v));
  }
  if (fs.speeds.empty()) throw Error(ErrorKind::parse, "no speed vectors");
  fs.dim = fs.speeds[0].size();
  fs.validate();
  return fs;
}

// k . v_j
inline long double frequency_along(const FlowSystem& fs, std::size_t j, const Freq& k) {
  long double w = 0;
  for (std::size_t i = 0; i < fs.dim; ++i)
    if (k[i] != 0) w += static_cast<long double>(k[i]) * static_cast<long double>(fs.speeds[j][i].value());
  return w;
}

// Monomials with k . v_j = 0: exact when v_j is rational, tolerance 1e-12
// otherwise.
inline TrigPoly invariant_projection(const FlowSystem& fs, std::size_t j, const Observable& f) {
  const TrigPoly& p = f.trig();
  TrigPoly out(p.moduli());
  bool rational = true;
  for (const auto& c : fs.speeds[j]) rational = rational && c.is_rational();
  for (const auto& [k, c] : p.terms()) {
    bool invariant;
    if (rational) {
      // sum k_i p_i / q_i == 0 over a common denominator
      mp::cpp_rational acc = 0;
      for (std::size_t i = 0; i < fs.dim; ++i) {
        const auto& r = *fs.speeds[j][i].exact();
        acc += mp::cpp_rational(k[i]) * mp::cpp_rational(r.num, r.den);
      }
      invariant = acc == 0;
    } else {
      invariant = std::abs(static_cast<double>(frequency_along(fs, j, k))) <= 1e-12;
    }
    if (invariant) out.add(k, c);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Oscillatory quadrature

namespace detail {

inline constexpr std::array<long double, 8> kGlNodes = {
    0.0950125098376374401853193354249581L, 0.2816035507792589132304605014604961L,
    0.4580167776572273863424194429835775L, 0.6178762444026437484466717640487910L,
    0.7554044083550030338951011948474422L, 0.8656312023878317438804678977123931L,
    0.9445750230732325760779884155346083L, 0.9894009349916499325961541734503326L};
inline constexpr std::array<long double, 8> kGlWeights = {
    0.1894506104550684962853967232082831L, 0.1826034150449235888667636679692199L,
    0.1691565193950025381893120790303600L, 0.1495959888165767320815017305474785L,
    0.1246289712555338720524762821920164L, 0.0951585116824927848099251076022463L,
    0.0622535239386478928628438369943776L, 0.0271524594117540948517805724560181L};

template <class F>
cplx gauss16(F&& f, long double a, long double b) {
  const long double mid = (a + b) / 2, half = (b - a) / 2;
  std::array<cplx, 16> v;
  for (std::size_t i = 0; i < 8; ++i) {
    v[2 * i] = static_cast<double>(kGlWeights[i]) * f(mid - half * kGlNodes[i]);
    v[2 * i + 1] = static_cast<double>(kGlWeights[i]) * f(mid + half * kGlNodes[i]);
  }
  return pairwise_sum(std::span<const cplx>(v)) * static_cast<double>(half);
}

}  // namespace detail

struct QuadOptions {
  std::uint64_t panel_budget = 100'000'000;
  double max_phase = 0.25;   // cycles per panel
  bool allow_tail = true;    // bound instead of integrate a monotone fast tail
  double cheap_cycles = 2.5e5;
  double tail_tol = 1e-6;    // relative to the average
};

struct QuadResult {
  std::vector<cplx> integrals;  // int_0^{y_k} for each schedule point
  std::vector<double> tail_bounds;
  std::uint64_t panels = 0;
};

// Integrals int_0^{y_k} of value(t) on panels where rate(t) * width <= max_phase;
// `phase` (if given) also bounds the variation across a panel.
template <class Value, class Rate, class Phase>
QuadResult oscillatory_integrals(Value&& value, Rate&& rate, Phase&& phase, const std::vector<double>& ys,
                                 double cut, const QuadOptions& opt) {
  QuadResult out;
  if (ys.empty()) return out;
  const long double y_max = ys.back();
  const long double max_width = y_max / 64;
  std::vector<cplx> chunks, current;
  current.reserve(8192);
  auto cumulative = [&] {
    std::vector<cplx> all = chunks;
    all.push_back(pairwise_sum(current));
    return pairwise_sum(all);
  };
  long double t = 0, w = std::min<long double>(max_width, 1e-3L);
  std::size_t next = 0;
  const long double stop = cut > 0 ? static_cast<long double>(cut) : y_max;
  while (next < ys.size()) {
    const long double target = std::min<long double>(ys[next], stop);
    while (t < target) {
      long double width = std::min(w, target - t);
      for (;;) {
        const long double b = t + width;
        long double d = 0;
        for (long double s : {t, t + width / 2, b}) {
          const long double r = std::fabs(rate(s));
          if (std::isfinite(r)) d = std::max(d, r);
        }
        long double var = d * width;
        const long double p0 = phase(t), p1 = phase(b);
        if (std::isfinite(p0) && std::isfinite(p1)) var = std::max(var, std::fabs(p1 - p0));
        if (var <= opt.max_phase || width < 1e-15L * std::max<long double>(1, t)) {
          current.push_back(detail::gauss16(value, t, b));
          if (current.size() == 8192) {
            chunks.push_back(pairwise_sum(current));
            current.clear();
          }
          if (++out.panels > opt.panel_budget)
            throw Error(ErrorKind::budget, "quadrature needs more than " + std::to_string(opt.panel_budget) +
                                               " panels; use a smaller y");
          t = b;
          if (var < opt.max_phase / 4) w = std::min(width * 2, max_width);
          else w = width;
          break;
        }
        width /= 2;
      }
    }
    if (ys[next] <= stop) {
      out.integrals.push_back(cumulative());
      out.tail_bounds.push_back(0.0);
    } else {
      // int_cut^y e(phase) with |phase'| >= lambda, phase' monotone
      const long double lambda = std::fabs(rate(stop));
      out.integrals.push_back(cumulative());
      out.tail_bounds.push_back(static_cast<double>(2.0L / (M_PI * lambda)));
    }
    ++next;
  }
  return out;
}

namespace detail {

// Where to stop integrating a monotone phase with many cycles: the first t
// past which the tail bound 2/(pi |phase'|) drops below tail_tol * y, or where
// the panel budget would run out. Cheap integrals are never cut.
inline double tail_cut(const std::function<long double(long double)>& phi,
                       const std::function<long double(long double)>& dphi, double y, const QuadOptions& opt) {
  if (!opt.allow_tail) return 0;
  const long double p0 = phi(0);
  const long double cycles = std::fabs(phi(y) - p0);
  if (std::isfinite(cycles) && cycles <= opt.cheap_cycles) return 0;
  const long double affordable = static_cast<long double>(opt.panel_budget) * opt.max_phase / 8;
  long double lo = 0, hi = y;
  for (int i = 0; i < 200; ++i) {
    const long double mid = (lo + hi) / 2;
    const long double c = std::fabs(phi(mid) - p0);
    if (std::isfinite(c) && c <= affordable) lo = mid;
    else hi = mid;
  }
  long double cut = lo;
  const long double lambda = 2.0L / (M_PI * opt.tail_tol * y);
  if (std::fabs(dphi(y)) >= lambda) {
    long double a = 0, b = y;
    for (int i = 0; i < 200; ++i) {
      const long double mid = (a + b) / 2;
      const long double d = std::fabs(dphi(mid));
      if (std::isfinite(d) && d >= lambda) b = mid;
      else a = mid;
    }
    cut = std::min(cut, b);
  }
  if (cut >= y) return 0;
  // phase' must be monotone with constant sign beyond the cut
  const long double d0 = dphi(cut);
  long double prev = std::fabs(d0);
  for (int i = 1; i <= 256; ++i) {
    const long double s = cut + (static_cast<long double>(y) - cut) * i / 256;
    const long double d = dphi(s);
    if (!std::isfinite(d)) break;
    if ((d > 0) != (d0 > 0) || std::fabs(d) < prev * (1 - 1e-12L)) {
      if (std::isfinite(cycles) && cycles <= affordable) return 0;
      throw Error(ErrorKind::budget, "phase is too oscillatory for the panel budget and not monotone; use a smaller y");
    }
    prev = std::fabs(d);
  }
  return static_cast<double>(cut);
}

}  // namespace detail

// (1/y_k) int_0^{y_k} e(phi(t)) dt for phi = sum_j w_j a_j(t).
struct PhaseAverage {
  std::vector<cplx> values;
  std::vector<double> tail_bounds;  // bounds on |average error| from tails
  std::uint64_t panels = 0;
};

inline PhaseAverage phase_average(const std::vector<long double>& w, const std::vector<const TimeChange*>& a,
                                  const std::vector<double>& ys, const QuadOptions& opt = {}) {
  PhaseAverage out;
  bool trivial = true;
  for (auto v : w) trivial = trivial && v == 0;
  if (trivial) {
    out.values.assign(ys.size(), 1.0);
    out.tail_bounds.assign(ys.size(), 0.0);
    return out;
  }
  auto phi = [&](long double t) {
    long double p = 0;
    for (std::size_t j = 0; j < w.size(); ++j)
      if (w[j] != 0) p += w[j] * a[j]->value(t);
    return p;
  };
  auto dphi = [&](long double t) {
    long double p = 0;
    for (std::size_t j = 0; j < w.size(); ++j)
      if (w[j] != 0) p += w[j] * a[j]->derivative(t);
    return p;
  };
  auto value = [&](long double t) {
    long double p = phi(t);
    return e(static_cast<double>(p - std::floor(p)));
  };
  const double cut = detail::tail_cut(phi, dphi, ys.back(), opt);
  auto q = oscillatory_integrals(value, dphi, phi, ys, cut, opt);
  out.panels = q.panels;
  for (std::size_t i = 0; i < ys.size(); ++i) {
    out.values.push_back(q.integrals[i] / ys[i]);
    out.tail_bounds.push_back(q.tail_bounds[i] / ys[i]);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Flow averages

struct FlowSeries {
  std::vector<double> ys;
  std::vector<cplx> values;
  std::vector<double> tail_bounds;
  std::uint64_t panels = 0;
};

namespace detail {

struct FlowCombo {
  cplx coeff;
  Freq k;  // total spatial frequency
  std::vector<long double> w;
};

inline std::vector<FlowCombo> flow_combos(const FlowSystem& fs, const std::vector<Observable>& obs) {
  std::vector<FlowCombo> combos{FlowCombo{1.0, Freq(fs.dim, 0), {}}};
  for (std::size_t j = 0; j < obs.size(); ++j) {
    std::vector<FlowCombo> next;
    for (const auto& c : combos)
      for (const auto& [k, a] : obs[j].trig().terms()) {
        FlowCombo d = c;
        d.coeff *= a;
        for (std::size_t i = 0; i < fs.dim; ++i) d.k[i] += k[i];
        d.w.push_back(frequency_along(fs, j, k));
        next.push_back(std::move(d));
      }
    combos = std::move(next);
  }
  return combos;
}

inline void check_flow_inputs(const FlowSystem& fs, const std::vector<TimeChange>& changes,
                              const std::vector<Observable>& obs, const std::vector<double>& ys) {
  fs.validate();
  if (changes.size() != fs.flows() || obs.size() != fs.flows())
    throw Error(ErrorKind::precondition, "need one time change and one observable per flow");
  if (ys.empty()) throw Error(ErrorKind::precondition, "empty y schedule");
  for (std::size_t i = 0; i < ys.size(); ++i)
    if (!(ys[i] > 0) || (i && ys[i] <= ys[i - 1])) throw Error(ErrorKind::precondition, "y schedule must be increasing and positive");
  for (const auto& f : obs)
    if (f.trig().moduli() != fs.moduli()) throw Error(ErrorKind::precondition, "observable/flow dimension mismatch");
  for (const auto& a : changes) check_monotone(a, ys.back());
}

}  // namespace detail

// Phase integrals per monomial combination, shared by every x.
struct FlowIntegrals {
  std::vector<detail::FlowCombo> combos;
  std::vector<PhaseAverage> averages;
  std::vector<double> ys;

  FlowSeries at(const Point& x) const {
    FlowSeries s;
    s.ys = ys;
    s.values.assign(ys.size(), cplx{});
    s.tail_bounds.assign(ys.size(), 0.0);
    for (std::size_t i = 0; i < ys.size(); ++i) {
      std::vector<cplx> terms;
      for (std::size_t c = 0; c < combos.size(); ++c) {
        double ph = 0;
        for (std::size_t d = 0; d < x.size(); ++d)
          if (combos[c].k[d] != 0) ph += frac_times(combos[c].k[d], Real(x[d]));
        terms.push_back(combos[c].coeff * e(wrap01(ph)) * averages[c].values[i]);
        s.tail_bounds[i] += std::abs(combos[c].coeff) * averages[c].tail_bounds[i];
      }
      s.values[i] = pairwise_sum(terms);
    }
    for (const auto& a : averages) s.panels += a.panels;
    return s;
  }
};

inline FlowIntegrals flow_integrals(const FlowSystem& fs, const std::vector<TimeChange>& changes,
                                    const std::vector<Observable>& obs, const std::vector<double>& ys,
                                    const QuadOptions& opt = {}) {
  detail::check_flow_inputs(fs, changes, obs, ys);
  FlowIntegrals fi;
  fi.ys = ys;
  fi.combos = detail::flow_combos(fs, obs);
  std::vector<const TimeChange*> a;
  for (const auto& c : changes) a.push_back(&c);
  for (const auto& c : fi.combos) fi.averages.push_back(phase_average(c.w, a, ys, opt));
  return fi;
}

inline cplx flow_average(const FlowSystem& fs, const std::vector<TimeChange>& changes,
                         const std::vector<Observable>& obs, const Point& x, double y, const QuadOptions& opt = {}) {
  return flow_integrals(fs, changes, obs, {y}, opt).at(x).values[0];
}

// 16 seeded points of the torus (or `count`).
inline std::vector<Point> seeded_points(std::size_t dim, std::uint64_t seed, std::size_t count = 16) {
  std::vector<Point> pts;
  for (std::size_t i = 0; i < count; ++i) {
    Point p(dim);
    for (std::size_t d = 0; d < dim; ++d)
      p[d] = std::ldexp(static_cast<double>(counter_draw(seed, i * dim + d) >> 11), -53);
    pts.push_back(std::move(p));
  }
  return pts;
}

struct FlowDiagnostic {
  std::vector<double> ys;
  std::vector<Point> xs;
  std::vector<cplx> targets;                   // prod_j f~_j(x)
  std::vector<std::vector<cplx>> values;       // [y][x]
  std::vector<std::vector<double>> distances;  // [y][x]
  std::vector<double> tail_bounds;             // worst over x, per y
  HypothesisCheck hypothesis;
  double tolerance = 0.05;
  bool pass = false;  // every x within tolerance at the last y
  std::uint64_t panels = 0;
};

inline FlowDiagnostic joint_flow_diagnostic(const FlowSystem& fs, const std::vector<TimeChange>& changes,
                                            const std::vector<Observable>& obs, const std::vector<Point>& xs,
                                            const std::vector<double>& ys, double tol = 0.05,
                                            const QuadOptions& opt = {}) {
  FlowDiagnostic rep;
  rep.hypothesis = growth_separation(changes);
  rep.ys = ys;
  rep.xs = xs;
  rep.tolerance = tol;
  auto fi = flow_integrals(fs, changes, obs, ys, opt);
  std::vector<TrigPoly> proj;
  for (std::size_t j = 0; j < obs.size(); ++j) proj.push_back(invariant_projection(fs, j, obs[j]));
  const TorusSystem shape = fs.torus();
  for (const auto& x : xs) {
    cplx t = 1.0;
    for (const auto& p : proj) t *= evaluate(shape, p, x);
    rep.targets.push_back(t);
  }
  rep.values.assign(ys.size(), {});
  rep.distances.assign(ys.size(), {});
  rep.tail_bounds.assign(ys.size(), 0.0);
  for (std::size_t i = 0; i < xs.size(); ++i) {
    auto s = fi.at(xs[i]);
    if (i == 0) rep.panels = s.panels;
    for (std::size_t k = 0; k < ys.size(); ++k) {
      rep.values[k].push_back(s.values[k]);
      rep.distances[k].push_back(std::abs(s.values[k] - rep.targets[i]));
      rep.tail_bounds[k] = std::max(rep.tail_bounds[k], s.tail_bounds[k]);
    }
  }
  rep.pass = !xs.empty();
  for (double d : rep.distances.back()) rep.pass = rep.pass && d <= tol;
  return rep;
}

// ---------------------------------------------------------------------------
// Change of variables

// f(t) = sum_m c_m e(lambda_m t)
struct Profile {
  std::vector<std::pair<cplx, double>> terms;  // (c, lambda)
};

inline Profile parse_profile(const std::string& text) {
  Profile p;
  for (auto line : detail::split_top(text, ';')) {
    line = detail::trim(line);
    if (line.empty()) continue;
    std::istringstream in(line);
    double lambda, re, im = 0;
    if (!(in >> lambda >> re)) throw Error(ErrorKind::parse, "profile term needs 'lambda re [im]': '" + line + "'");
    in >> im;
    p.terms.push_back({cplx(re, im), lambda});
  }
  return p;
}

struct CvReport {
  std::vector<double> ys;
  std::vector<cplx> plain;    // (1/y) int f(t) dt
  std::vector<cplx> changed;  // (1/y) int f(a(t)) dt
  std::vector<double> diffs;
  std::vector<double> tail_bounds;
  double tolerance = 0.02;
  bool pass = false;
};

inline CvReport change_of_variables_check(const Profile& f, const TimeChange& a, const std::vector<double>& ys,
                                          double tol = 0.02, const QuadOptions& opt = {}) {
  const Growth g = leading_growth(a);
  if (!g.exponential && !(g.rate > 0))
    throw Error(ErrorKind::hypothesis, "time change needs a positive leading exponent");
  check_monotone(a, ys.back());
  CvReport rep;
  rep.ys = ys;
  rep.tolerance = tol;
  rep.plain.assign(ys.size(), cplx{});
  rep.changed.assign(ys.size(), cplx{});
  rep.tail_bounds.assign(ys.size(), 0.0);
  const TimeChange identity = parse_time_change("t");
  for (const auto& [c, lambda] : f.terms) {
    std::vector<long double> w{static_cast<long double>(lambda)};
    for (std::size_t i = 0; i < ys.size(); ++i) {
      if (lambda == 0) {
        rep.plain[i] += c;
      } else {
        const double y = ys[i];
        // (e(lambda y) - 1) / (2 pi i lambda y), with the phase reduced exactly
        const cplx num = e(frac_times(1, Real(lambda * y))) - 1.0;
        rep.plain[i] += c * num / cplx(0.0, 2.0 * M_PI * lambda * y);
      }
    }
    auto pa = phase_average(w, {&a}, ys, opt);
    for (std::size_t i = 0; i < ys.size(); ++i) {
      rep.changed[i] += c * pa.values[i];
      rep.tail_bounds[i] += std::abs(c) * pa.tail_bounds[i];
    }
  }
  for (std::size_t i = 0; i < ys.size(); ++i) rep.diffs.push_back(std::abs(rep.plain[i] - rep.changed[i]));
  rep.pass = rep.diffs.back() <= tol;
  return rep;
}

// ---------------------------------------------------------------------------
// Stability under shifts

struct StabilityReport {
  std::vector<double> ys;
  std::vector<double> values;  // (1/y) int |f(T^{b(t+c)}x) - f(T^{b(t)}x)|^2 dt
  double tolerance = 0.05;
  bool pass = false;
};

inline StabilityReport stability_check(const FlowSystem& fs, std::size_t j, const TimeChange& b, const Observable& f,
                                       double c, const Point& x, const std::vector<double>& ys, double tol = 0.05,
                                       const QuadOptions& opt = {}) {
  const Growth g = leading_growth(b);
  if (g.exponential || !(g.rate > 0 && g.rate < 1))
    throw Error(ErrorKind::hypothesis, "leading exponent of b must lie strictly in (0,1)");
  if (j >= fs.flows()) throw Error(ErrorKind::precondition, "flow index out of range");
  check_monotone(b, ys.back() + std::abs(c));
  StabilityReport rep;
  rep.ys = ys;
  rep.tolerance = tol;
  const TrigPoly& p = f.trig();
  struct Mono {
    cplx c;
    long double w;
  };
  std::vector<Mono> monos;
  long double w_max = 0;
  const TorusSystem shape = fs.torus();
  for (const auto& [k, a] : p.terms()) {
    Mono m{a * e(monomial_phase(shape, k, x)), frequency_along(fs, j, k)};
    w_max = std::max(w_max, std::fabs(m.w));
    monos.push_back(m);
  }
  auto frac = [](long double v) { return static_cast<double>(v - std::floor(v)); };
  auto value = [&](long double t) {
    const long double b1 = b.value(t + c), b0 = b.value(t);
    cplx d = 0;
    for (const auto& m : monos)
      if (m.w != 0) d += m.c * (e(frac(m.w * b1)) - e(frac(m.w * b0)));
    return cplx(std::norm(d), 0.0);
  };
  auto rate = [&](long double t) {
    return w_max * std::max(std::fabs(b.derivative(t + c)), std::fabs(b.derivative(t)));
  };
  auto no_phase = [](long double) { return std::numeric_limits<long double>::quiet_NaN(); };
  auto q = oscillatory_integrals(value, rate, no_phase, ys, 0.0, opt);
  for (std::size_t i = 0; i < ys.size(); ++i) rep.values.push_back(q.integrals[i].real() / ys[i]);
  rep.pass = rep.values.back() <= tol;
  return rep;
}

}  // namespace ergolab
