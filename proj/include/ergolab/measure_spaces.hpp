#pragma once

// Explicit invertible measure-preserving systems (torus rotations, the
// skew product, cyclic shifts and their products), trigonometric-polynomial
// and grid-sampled observables, exact integration, spectra and
// eigenfunctions.

#include <map>
#include <memory>
#include <sstream>
#include <variant>

#include "ergolab/core.hpp"

namespace ergolab {

using Point = std::vector<double>;
using Freq = std::vector<std::int64_t>;

struct RotationFactor {
  std::vector<Real> angles;
};
// (x, y) -> (x + a, y + x)
struct SkewFactor {
  Real angle;
};
// j -> j + 1 mod order
struct CyclicFactor {
  std::int64_t order = 1;
};

struct Factor {
  std::variant<RotationFactor, SkewFactor, CyclicFactor> kind;
  std::size_t offset = 0;
  std::size_t width = 0;
};

class TorusSystem {
 public:
  static TorusSystem rotation(std::vector<Real> angles) {
    if (angles.empty()) throw Error(ErrorKind::precondition, "rotation needs dimension >= 1");
    for (auto& a : angles) a = a.mod1();
    TorusSystem s;
    s.push(Factor{RotationFactor{std::move(angles)}, 0, 0});
    return s;
  }
  static TorusSystem rotation(Real angle) { return rotation(std::vector<Real>{angle}); }
  static TorusSystem skew(Real angle) {
    TorusSystem s;
    s.push(Factor{SkewFactor{angle.mod1()}, 0, 0});
    return s;
  }
  static TorusSystem cyclic(std::int64_t order) {
    if (order < 1) throw Error(ErrorKind::precondition, "cyclic order must be >= 1");
    TorusSystem s;
    s.push(Factor{CyclicFactor{order}, 0, 0});
    return s;
  }
  static TorusSystem product(const std::vector<TorusSystem>& parts) {
    if (parts.empty()) throw Error(ErrorKind::precondition, "empty product");
    TorusSystem s;
    for (const auto& p : parts)
      for (const auto& f : p.factors_) s.push(f);
    return s;
  }

  std::size_t dim() const { return dim_; }
  const std::vector<Factor>& factors() const { return factors_; }

  // Per coordinate: 0 for a torus coordinate, r for a Z_r coordinate.
  const std::vector<std::int64_t>& moduli() const { return moduli_; }

  // True when every factor acts diagonally on characters (no skew factor).
  bool is_diagonal() const {
    return std::none_of(factors_.begin(), factors_.end(),
                        [](const Factor& f) { return std::holds_alternative<SkewFactor>(f.kind); });
  }

  std::string to_text() const {
    std::vector<std::string> parts;
    for (const auto& f : factors_) parts.push_back(factor_text(f));
    if (parts.size() == 1) return parts[0];
    std::string out = "product(";
    for (std::size_t i = 0; i < parts.size(); ++i) out += (i ? "; " : "") + parts[i];
    return out + ")";
  }

  friend bool operator==(const TorusSystem& a, const TorusSystem& b) { return a.to_text() == b.to_text(); }

 private:
  static std::string factor_text(const Factor& f) {
    if (auto* r = std::get_if<RotationFactor>(&f.kind)) {
      std::string out = "rotation";
      for (const auto& a : r->angles) out += " " + a.to_text();
      return out;
    }
    if (auto* s = std::get_if<SkewFactor>(&f.kind)) return "skew " + s->angle.to_text();
    return "cyclic " + std::to_string(std::get<CyclicFactor>(f.kind).order);
  }

  void push(Factor f) {
    f.offset = dim_;
    if (auto* r = std::get_if<RotationFactor>(&f.kind)) {
      f.width = r->angles.size();
      moduli_.insert(moduli_.end(), f.width, 0);
    } else if (std::holds_alternative<SkewFactor>(f.kind)) {
      f.width = 2;
      moduli_.insert(moduli_.end(), 2, 0);
    } else {
      f.width = 1;
      moduli_.push_back(std::get<CyclicFactor>(f.kind).order);
    }
    dim_ += f.width;
    factors_.push_back(std::move(f));
  }

  std::vector<Factor> factors_;
  std::vector<std::int64_t> moduli_;
  std::size_t dim_ = 0;
};

// T^n(point). Torus coordinates live in [0,1); cyclic coordinates hold the
// integer residue.
inline Point iterate(const TorusSystem& sys, const Point& x, std::int64_t n) {
  if (x.size() != sys.dim()) throw Error(ErrorKind::precondition, "point dimension mismatch");
  Point out = x;
  for (const auto& f : sys.factors()) {
    const std::size_t o = f.offset;
    if (auto* r = std::get_if<RotationFactor>(&f.kind)) {
      for (std::size_t i = 0; i < r->angles.size(); ++i)
        out[o + i] = wrap01(x[o + i] + frac_times(n, r->angles[i]));
    } else if (auto* s = std::get_if<SkewFactor>(&f.kind)) {
      const int128 tri = static_cast<int128>(n) * (n - 1) / 2;
      out[o] = wrap01(x[o] + frac_times(n, s->angle));
      out[o + 1] = wrap01(x[o + 1] + frac_times(n, Real(x[o])) + frac_times(tri, s->angle));
    } else {
      const std::int64_t r = std::get<CyclicFactor>(f.kind).order;
      auto j = static_cast<std::int64_t>(x[o]);
      out[o] = static_cast<double>((((j + n) % r) + r) % r);
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Observables

struct FreqLess {
  bool operator()(const Freq& a, const Freq& b) const { return a < b; }
};

class TrigPoly {
 public:
  TrigPoly() = default;
  explicit TrigPoly(std::vector<std::int64_t> moduli) : moduli_(std::move(moduli)) {}

  std::size_t dim() const { return moduli_.size(); }
  const std::vector<std::int64_t>& moduli() const { return moduli_; }
  const std::map<Freq, cplx, FreqLess>& terms() const { return terms_; }
  std::size_t size() const { return terms_.size(); }

  Freq normalize(Freq k) const {
    if (k.size() != moduli_.size()) throw Error(ErrorKind::precondition, "frequency dimension mismatch");
    for (std::size_t i = 0; i < k.size(); ++i)
      if (moduli_[i] > 0) k[i] = ((k[i] % moduli_[i]) + moduli_[i]) % moduli_[i];
    return k;
  }

  void add(const Freq& k, cplx c) {
    if (c == cplx{}) return;
    auto key = normalize(k);
    auto [it, inserted] = terms_.try_emplace(std::move(key), c);
    if (!inserted) {
      it->second += c;
      if (it->second == cplx{}) terms_.erase(it);
    }
  }

  cplx coeff(const Freq& k) const {
    auto it = terms_.find(normalize(k));
    return it == terms_.end() ? cplx{} : it->second;
  }

  Freq zero() const { return Freq(moduli_.size(), 0); }

 private:
  std::vector<std::int64_t> moduli_;
  std::map<Freq, cplx, FreqLess> terms_;
};

struct SamplePlan {
  std::vector<Point> points;
  std::vector<double> weights;

  void validate() const {
    if (points.size() != weights.size()) throw Error(ErrorKind::precondition, "plan length mismatch");
    for (double w : weights)
      if (!(w >= 0.0)) throw Error(ErrorKind::precondition, "negative plan weight");
    double total = pairwise_sum(weights);
    if (std::abs(total - 1.0) > 1e-12) throw Error(ErrorKind::precondition, "plan weights must sum to 1");
  }
};

struct GridSampled {
  std::vector<cplx> values;
  std::shared_ptr<const SamplePlan> plan;
};

class Observable {
 public:
  Observable() : backend_(TrigPoly{}) {}
  Observable(TrigPoly p) : backend_(std::move(p)) {}
  Observable(GridSampled g) : backend_(std::move(g)) {}

  static Observable constant(const TorusSystem& sys, cplx c) {
    TrigPoly p(sys.moduli());
    p.add(p.zero(), c);
    return p;
  }
  static Observable monomial(const TorusSystem& sys, const Freq& k, cplx c = 1.0) {
    TrigPoly p(sys.moduli());
    p.add(k, c);
    return p;
  }

  bool is_trig() const { return std::holds_alternative<TrigPoly>(backend_); }
  const TrigPoly& trig() const {
    if (auto* p = std::get_if<TrigPoly>(&backend_)) return *p;
    throw Error(ErrorKind::unsupported_backend, "operation needs a TrigPoly observable");
  }
  const GridSampled& grid() const {
    if (auto* g = std::get_if<GridSampled>(&backend_)) return *g;
    throw Error(ErrorKind::unsupported_backend, "operation needs a GridSampled observable");
  }

 private:
  std::variant<TrigPoly, GridSampled> backend_;
};

inline TrigPoly operator+(const TrigPoly& a, const TrigPoly& b) {
  TrigPoly out = a;
  for (const auto& [k, c] : b.terms()) out.add(k, c);
  return out;
}

inline TrigPoly operator-(const TrigPoly& a, const TrigPoly& b) {
  TrigPoly out = a;
  for (const auto& [k, c] : b.terms()) out.add(k, -c);
  return out;
}

inline TrigPoly operator*(cplx s, const TrigPoly& a) {
  TrigPoly out(a.moduli());
  for (const auto& [k, c] : a.terms()) out.add(k, s * c);
  return out;
}

inline TrigPoly operator*(const TrigPoly& a, const TrigPoly& b) {
  TrigPoly out(a.moduli());
  for (const auto& [ka, ca] : a.terms())
    for (const auto& [kb, cb] : b.terms()) {
      Freq k(ka.size());
      for (std::size_t i = 0; i < k.size(); ++i) k[i] = ka[i] + kb[i];
      out.add(k, ca * cb);
    }
  return out;
}

// Complex conjugate: c_k e(kx) -> conj(c_k) e(-kx).
inline TrigPoly conj(const TrigPoly& a) {
  TrigPoly out(a.moduli());
  for (const auto& [k, c] : a.terms()) {
    Freq neg(k.size());
    for (std::size_t i = 0; i < k.size(); ++i) neg[i] = -k[i];
    out.add(neg, std::conj(c));
  }
  return out;
}

// Phase picked up by e(k.x) under T^n and the frequency it lands on.
inline std::pair<double, Freq> pull_monomial(const TorusSystem& sys, const Freq& k, std::int64_t n) {
  double phase = 0.0;
  Freq out = k;
  for (const auto& f : sys.factors()) {
    const std::size_t o = f.offset;
    if (auto* r = std::get_if<RotationFactor>(&f.kind)) {
      for (std::size_t i = 0; i < r->angles.size(); ++i)
        phase += frac_times(static_cast<int128>(n) * k[o + i], r->angles[i]);
    } else if (auto* s = std::get_if<SkewFactor>(&f.kind)) {
      const int128 tri = static_cast<int128>(n) * (n - 1) / 2;
      const int128 mult = static_cast<int128>(k[o]) * n + static_cast<int128>(k[o + 1]) * tri;
      phase += frac_times(mult, s->angle);
      const int128 kx = static_cast<int128>(k[o]) + static_cast<int128>(n) * k[o + 1];
      if (kx > INT64_MAX || kx < INT64_MIN) throw Error(ErrorKind::overflow, "skew frequency overflow");
      out[o] = static_cast<std::int64_t>(kx);
    } else {
      const std::int64_t r = std::get<CyclicFactor>(f.kind).order;
      phase += frac_times(static_cast<int128>(n) * k[o], Real::ratio(1, r));
    }
  }
  return {wrap01(phase), out};
}

// T^n f = f o T^n, exact on the TrigPoly backend.
inline Observable pullback(const TorusSystem& sys, const Observable& f, std::int64_t n) {
  if (!f.is_trig())
    throw Error(ErrorKind::unsupported_backend, "pullback needs TrigPoly; use iterate and re-sample");
  const TrigPoly& p = f.trig();
  TrigPoly out(p.moduli());
  for (const auto& [k, c] : p.terms()) {
    auto [phase, k2] = pull_monomial(sys, k, n);
    out.add(k2, c * e(phase));
  }
  return out;
}

inline cplx integrate(const Observable& f, const SamplePlan* plan = nullptr) {
  if (f.is_trig()) return f.trig().coeff(f.trig().zero());
  const GridSampled& g = f.grid();
  const SamplePlan* p = plan ? plan : g.plan.get();
  if (!p) throw Error(ErrorKind::precondition, "GridSampled integration needs a plan");
  if (p->weights.size() != g.values.size()) throw Error(ErrorKind::precondition, "plan/values length mismatch");
  std::vector<cplx> terms(g.values.size());
  for (std::size_t i = 0; i < terms.size(); ++i) terms[i] = p->weights[i] * g.values[i];
  return pairwise_sum(terms);
}

// Sum of squared coefficient magnitudes (Parseval).
inline double l2_mass(const TrigPoly& p) {
  std::vector<double> sq;
  sq.reserve(p.size());
  for (const auto& [k, c] : p.terms()) sq.push_back(std::norm(c));
  return pairwise_sum(sq);
}

inline double l2_distance(const Observable& f, const Observable& g) {
  if (f.is_trig() != g.is_trig()) throw Error(ErrorKind::unsupported_backend, "backend mismatch");
  if (f.is_trig()) {
    if (f.trig().moduli() != g.trig().moduli()) throw Error(ErrorKind::precondition, "state space mismatch");
    return std::sqrt(l2_mass(f.trig() - g.trig()));
  }
  const auto& a = f.grid();
  const auto& b = g.grid();
  if (a.values.size() != b.values.size() || !a.plan)
    throw Error(ErrorKind::precondition, "grid observables on different plans");
  std::vector<double> sq(a.values.size());
  for (std::size_t i = 0; i < sq.size(); ++i) sq[i] = a.plan->weights[i] * std::norm(a.values[i] - b.values[i]);
  return std::sqrt(pairwise_sum(sq));
}

inline double l2_norm(const Observable& f) {
  if (f.is_trig()) return std::sqrt(l2_mass(f.trig()));
  const auto& g = f.grid();
  std::vector<double> sq(g.values.size());
  for (std::size_t i = 0; i < sq.size(); ++i) sq[i] = g.plan->weights[i] * std::norm(g.values[i]);
  return std::sqrt(pairwise_sum(sq));
}

// Phase k.x of a monomial at a point, mod 1.
inline double monomial_phase(const TorusSystem& sys, const Freq& k, const Point& x) {
  double phase = 0.0;
  const auto& mod = sys.moduli();
  for (std::size_t i = 0; i < k.size(); ++i) {
    if (k[i] == 0) continue;
    if (mod[i] > 0)
      phase += frac_times(static_cast<int128>(k[i]) * static_cast<std::int64_t>(x[i]), Real::ratio(1, mod[i]));
    else
      phase += frac_times(k[i], Real(x[i]));
  }
  return wrap01(phase);
}

inline cplx evaluate(const TorusSystem& sys, const TrigPoly& f, const Point& x) {
  std::vector<cplx> terms;
  terms.reserve(f.size());
  for (const auto& [k, c] : f.terms()) terms.push_back(c * e(monomial_phase(sys, k, x)));
  return pairwise_sum(terms);
}

inline double sup_bound(const TrigPoly& f) {
  double s = 0.0;
  for (const auto& [k, c] : f.terms()) s += std::abs(c);
  return s;
}

// Uniform grid on the state space with about m points (torus axes split
// evenly, cyclic coordinates enumerated exactly).
inline SamplePlan uniform_grid(const TorusSystem& sys, std::int64_t m) {
  const auto& mod = sys.moduli();
  std::size_t torus_axes = std::count(mod.begin(), mod.end(), 0);
  std::int64_t per_axis =
      torus_axes == 0 ? 1 : std::max<std::int64_t>(1, std::llround(std::pow(double(m), 1.0 / double(torus_axes))));
  std::vector<std::int64_t> sizes(mod.size());
  std::int64_t total = 1;
  for (std::size_t i = 0; i < mod.size(); ++i) {
    sizes[i] = mod[i] > 0 ? mod[i] : per_axis;
    total *= sizes[i];
  }
  SamplePlan plan;
  plan.points.reserve(total);
  std::vector<std::int64_t> idx(mod.size(), 0);
  for (std::int64_t c = 0; c < total; ++c) {
    Point p(mod.size());
    for (std::size_t i = 0; i < mod.size(); ++i)
      p[i] = mod[i] > 0 ? static_cast<double>(idx[i]) : static_cast<double>(idx[i]) / static_cast<double>(sizes[i]);
    plan.points.push_back(std::move(p));
    for (std::size_t i = mod.size(); i-- > 0;) {
      if (++idx[i] < sizes[i]) break;
      idx[i] = 0;
    }
  }
  plan.weights.assign(total, 1.0 / static_cast<double>(total));
  return plan;
}

inline Observable sample(const TorusSystem& sys, const TrigPoly& f, std::shared_ptr<const SamplePlan> plan) {
  GridSampled g;
  g.values.reserve(plan->points.size());
  for (const auto& p : plan->points) g.values.push_back(evaluate(sys, f, p));
  g.plan = std::move(plan);
  return g;
}

inline bool is_unimodular(const TorusSystem& sys, const TrigPoly& f, std::int64_t probe = 256, double tol = 1e-12) {
  auto plan = uniform_grid(sys, probe);
  for (const auto& p : plan.points)
    if (std::abs(std::abs(evaluate(sys, f, p)) - 1.0) > tol) return false;
  return true;
}

// ---------------------------------------------------------------------------
// Spectrum and eigenfunctions

// An eigenfrequency held as an integer combination of base angles, so that
// phases a(n) * t can be reduced exactly.
struct Frequency {
  std::vector<std::pair<Real, std::int64_t>> parts;

  static Frequency of(const Real& t) { return Frequency{{{t, 1}}}; }
  double value() const {
    double v = 0.0;
    for (const auto& [base, m] : parts) v += frac_times(m, base);
    return wrap01(v);
  }
  bool is_zero() const {
    return std::all_of(parts.begin(), parts.end(), [](const auto& p) { return p.second == 0 || p.first.value() == 0.0; });
  }
};

struct SpectrumEntry {
  double t = 0.0;
  std::optional<Ratio> rational;
  Freq generator;
  Frequency form;
};

struct SpectrumSet {
  std::vector<SpectrumEntry> entries;
  std::int64_t k_max = 0;
};

// Exact eigenfrequency of the character e(k.x) if it is an eigenfunction.
inline std::optional<Frequency> eigen_frequency(const TorusSystem& sys, const Freq& k) {
  Frequency form;
  for (const auto& f : sys.factors()) {
    const std::size_t o = f.offset;
    if (auto* r = std::get_if<RotationFactor>(&f.kind)) {
      for (std::size_t i = 0; i < r->angles.size(); ++i)
        if (k[o + i] != 0) form.parts.push_back({r->angles[i], k[o + i]});
    } else if (auto* s = std::get_if<SkewFactor>(&f.kind)) {
      if (k[o + 1] != 0) return std::nullopt;
      if (k[o] != 0) form.parts.push_back({s->angle, k[o]});
    } else {
      const std::int64_t r = std::get<CyclicFactor>(f.kind).order;
      if (k[o] % r != 0) form.parts.push_back({Real::ratio(1, r), k[o]});
    }
  }
  return form;
}

// Rationality of an exact frequency: exact when every participating base
// angle is rational, continued-fraction detection otherwise.
inline std::optional<Ratio> frequency_rationality(const Frequency& form) {
  bool all_exact = true;
  int128 num = 0, den = 1;
  for (const auto& [base, m] : form.parts) {
    if (m == 0) continue;
    const auto& r = base.exact();
    if (!r) {
      all_exact = false;
      break;
    }
    // num/den + m * p/q
    int128 p = static_cast<int128>(m) * r->num, q = r->den;
    num = num * q + p * den;
    den = den * q;
    int128 a = num < 0 ? -num : num, b = den;
    while (b != 0) {
      int128 t = a % b;
      a = b;
      b = t;
    }
    if (a > 1) {
      num /= a;
      den /= a;
    }
    if (den > (int128(1) << 62)) {
      all_exact = false;
      break;
    }
  }
  if (all_exact) {
    int128 reduced = ((num % den) + den) % den;
    return Ratio::make(static_cast<std::int64_t>(reduced), static_cast<std::int64_t>(den));
  }
  return detect_rational(form.value());
}

inline SpectrumSet spectrum(const TorusSystem& sys, std::int64_t k_max) {
  if (k_max < 1) throw Error(ErrorKind::precondition, "K_max must be >= 1");
  // candidate generators per factor, then the product (truncated sumset)
  std::vector<Freq> gens{Freq{}};
  for (const auto& f : sys.factors()) {
    std::vector<Freq> local;
    if (auto* r = std::get_if<RotationFactor>(&f.kind)) {
      local.push_back(Freq(r->angles.size(), 0));
      for (std::size_t i = 0; i < r->angles.size(); ++i) {
        std::vector<Freq> grown;
        for (const auto& g : local)
          for (std::int64_t v = -k_max; v <= k_max; ++v) {
            Freq h = g;
            h[i] = v;
            grown.push_back(h);
          }
        local = std::move(grown);
      }
    } else if (std::holds_alternative<SkewFactor>(f.kind)) {
      for (std::int64_t v = -k_max; v <= k_max; ++v) local.push_back(Freq{v, 0});
    } else {
      const std::int64_t r = std::get<CyclicFactor>(f.kind).order;
      for (std::int64_t j = 0; j < r; ++j) local.push_back(Freq{j});
    }
    std::vector<Freq> next;
    for (const auto& g : gens)
      for (const auto& l : local) {
        Freq h = g;
        h.insert(h.end(), l.begin(), l.end());
        next.push_back(std::move(h));
      }
    gens = std::move(next);
  }
  // put the zero generator first, then dedupe by eigenvalue
  std::stable_sort(gens.begin(), gens.end(), [](const Freq& a, const Freq& b) {
    auto norm = [](const Freq& k) {
      std::int64_t s = 0;
      for (auto v : k) s = std::max<std::int64_t>(s, v < 0 ? -v : v);
      return s;
    };
    return norm(a) < norm(b);
  });
  SpectrumSet out;
  out.k_max = k_max;
  for (const auto& g : gens) {
    auto form = eigen_frequency(sys, g);
    if (!form) continue;
    SpectrumEntry entry{form->value(), frequency_rationality(*form), g, *form};
    bool dup = std::any_of(out.entries.begin(), out.entries.end(), [&](const SpectrumEntry& x) {
      if (x.rational && entry.rational) return *x.rational == *entry.rational;
      return circle_dist(x.t, entry.t) <= 1e-14;
    });
    if (!dup) out.entries.push_back(std::move(entry));
  }
  return out;
}

struct EigenfunctionSpec {
  SpectrumEntry frequency;
  Observable chi;
};

inline EigenfunctionSpec eigenfunction(const TorusSystem& sys, const Freq& generator) {
  if (generator.size() != sys.dim()) throw Error(ErrorKind::precondition, "generator dimension mismatch");
  auto form = eigen_frequency(sys, generator);
  if (!form) throw Error(ErrorKind::precondition, "generator is not an eigenfunction for this system");
  SpectrumEntry entry{form->value(), frequency_rationality(*form), generator, *form};
  return EigenfunctionSpec{std::move(entry), Observable::monomial(sys, generator)};
}

// Coefficientwise check of T chi = e(t) chi.
inline bool eigenfunction_check(const TorusSystem& sys, const EigenfunctionSpec& spec, double tol = 1e-12) {
  const auto lhs = pullback(sys, spec.chi, 1).trig();
  const auto rhs = e(spec.frequency.t) * spec.chi.trig();
  return std::sqrt(l2_mass(lhs - rhs)) <= tol;
}

// ---------------------------------------------------------------------------
// Text form: "rotation a1 a2", "skew a", "cyclic r", "product(A; B)";
// observables as lines "k1,...,kd re im".

namespace detail {
inline std::string trim(std::string s) {
  s.erase(0, s.find_first_not_of(" \t\r\n"));
  s.erase(s.find_last_not_of(" \t\r\n") + 1);
  return s;
}

inline std::vector<std::string> split_top(const std::string& s, char sep) {
  std::vector<std::string> out;
  int depth = 0;
  std::string cur;
  for (char c : s) {
    if (c == '(') ++depth;
    if (c == ')') --depth;
    if (c == sep && depth == 0) {
      out.push_back(trim(cur));
      cur.clear();
    } else {
      cur += c;
    }
  }
  out.push_back(trim(cur));
  return out;
}
}  // namespace detail

inline TorusSystem parse_system(const std::string& text) {
  std::string s = detail::trim(text);
  if (s.rfind("product", 0) == 0) {
    auto open = s.find('(');
    if (open == std::string::npos || s.back() != ')')
      throw Error(ErrorKind::parse, "product needs parentheses: '" + s + "'");
    std::vector<TorusSystem> parts;
    for (const auto& p : detail::split_top(s.substr(open + 1, s.size() - open - 2), ';')) parts.push_back(parse_system(p));
    return TorusSystem::product(parts);
  }
  std::istringstream in(s);
  std::string kind;
  in >> kind;
  std::vector<std::string> args;
  for (std::string a; in >> a;) args.push_back(a);
  if (kind == "rotation") {
    if (args.empty()) throw Error(ErrorKind::parse, "rotation needs at least one angle");
    std::vector<Real> angles;
    for (const auto& a : args) angles.push_back(Real::parse(a));
    return TorusSystem::rotation(angles);
  }
  if (kind == "skew") {
    if (args.size() != 1) throw Error(ErrorKind::parse, "skew needs one angle");
    return TorusSystem::skew(Real::parse(args[0]));
  }
  if (kind == "cyclic") {
    if (args.size() != 1) throw Error(ErrorKind::parse, "cyclic needs one order");
    auto r = Real::parse(args[0]);
    if (!r.exact() || r.exact()->den != 1) throw Error(ErrorKind::parse, "cyclic order must be an integer");
    return TorusSystem::cyclic(r.exact()->num);
  }
  throw Error(ErrorKind::parse, "unknown system kind '" + kind + "'");
}

// One coefficient line "k1,...,kd re im".
inline void parse_coefficient_line(const std::string& line, TrigPoly& into) {
  std::istringstream in(line);
  std::string ks, re, im;
  if (!(in >> ks >> re)) throw Error(ErrorKind::parse, "coefficient line needs 'k1,...,kd re [im]': '" + line + "'");
  if (!(in >> im)) im = "0";
  Freq k;
  for (const auto& part : detail::split_top(ks, ',')) {
    std::size_t used = 0;
    try {
      k.push_back(std::stoll(part, &used));
    } catch (const std::exception&) {
      used = std::string::npos;
    }
    if (used != part.size()) throw Error(ErrorKind::parse, "bad frequency '" + ks + "'");
  }
  if (k.size() != into.dim())
    throw Error(ErrorKind::parse, "frequency '" + ks + "' has dimension " + std::to_string(k.size()) + ", expected " +
                                      std::to_string(into.dim()));
  into.add(k, cplx(Real::parse(re).value(), Real::parse(im).value()));
}

// Coefficient table separated by newlines or ';'.
inline Observable parse_observable(const TorusSystem& sys, const std::string& text) {
  TrigPoly p(sys.moduli());
  std::string norm = text;
  std::replace(norm.begin(), norm.end(), ';', '\n');
  std::istringstream in(norm);
  for (std::string line; std::getline(in, line);) {
    line = detail::trim(line);
    if (line.empty() || line[0] == '#') continue;
    parse_coefficient_line(line, p);
  }
  return p;
}

inline std::string observable_to_text(const TrigPoly& p, const char* sep = "\n") {
  std::string out;
  bool first = true;
  for (const auto& [k, c] : p.terms()) {
    if (!first) out += sep;
    first = false;
    for (std::size_t i = 0; i < k.size(); ++i) out += (i ? "," : "") + std::to_string(k[i]);
    char buf[80];
    std::snprintf(buf, sizeof buf, " %.17g %.17g", c.real(), c.imag());
    out += buf;
  }
  return out;
}

struct SystemDocument {
  TorusSystem system;
  std::vector<Observable> observables;
};

inline std::string write_document(const SystemDocument& doc) {
  std::string out = "system: " + doc.system.to_text() + "\n";
  for (const auto& f : doc.observables) out += "observable:\n" + observable_to_text(f.trig()) + "\n";
  return out;
}

inline SystemDocument read_document(const std::string& text) {
  std::istringstream in(text);
  std::optional<TorusSystem> sys;
  std::vector<std::string> blocks;
  for (std::string line; std::getline(in, line);) {
    std::string t = detail::trim(line);
    if (t.empty() || t[0] == '#') continue;
    if (t.rfind("system:", 0) == 0) {
      sys = parse_system(t.substr(7));
    } else if (t == "observable:") {
      blocks.emplace_back();
    } else {
      if (blocks.empty()) throw Error(ErrorKind::parse, "coefficient line before 'observable:'");
      blocks.back() += t + "\n";
    }
  }
  if (!sys) throw Error(ErrorKind::parse, "document has no 'system:' line");
  SystemDocument doc{*sys, {}};
  for (const auto& b : blocks) doc.observables.push_back(parse_observable(*sys, b));
  return doc;
}

}  // namespace ergolab
