#pragma once

// Multiple ergodic averages E_{n in [N]} T^{a_1(n)} f_1 ... T^{a_l(n)} f_l on
// TrigPoly observables, joint-ergodicity diagnostics, rational Kronecker
// projections and multiple-recurrence averages.

#include <unordered_map>

#include "ergolab/exponential_sums.hpp"

namespace ergolab {

struct AverageValue {
  TrigPoly value;               // A_N with |k|_inf <= D_max on torus axes
  double truncated_mass = 0.0;  // squared L2 mass of the dropped frequencies
  double total_mass = 0.0;
};

namespace detail {

struct FreqHash {
  std::size_t operator()(const Freq& k) const {
    std::uint64_t h = 0x51ed270b27fd0c3dULL;
    for (auto v : k) h = splitmix64(h ^ static_cast<std::uint64_t>(v));
    return static_cast<std::size_t>(h);
  }
};

inline bool within_cap(const Freq& k, const std::vector<std::int64_t>& moduli, std::int64_t d_max) {
  for (std::size_t i = 0; i < k.size(); ++i)
    if (moduli[i] == 0 && (k[i] > d_max || k[i] < -d_max)) return false;
  return true;
}

inline void check_inputs(const TorusSystem& sys, const std::vector<SequencePtr>& seqs,
                         const std::vector<Observable>& obs, std::int64_t n) {
  if (seqs.size() != obs.size()) throw Error(ErrorKind::precondition, "need one observable per sequence");
  if (seqs.empty()) throw Error(ErrorKind::precondition, "need at least one sequence");
  if (n < 1) throw Error(ErrorKind::precondition, "N must be >= 1");
  for (const auto& f : obs) {
    if (!f.is_trig()) throw Error(ErrorKind::unsupported_backend, "multiple averages need TrigPoly observables");
    if (f.trig().moduli() != sys.moduli()) throw Error(ErrorKind::precondition, "observable/system mismatch");
  }
}

// Split a full average into the capped part and the truncated mass.
inline AverageValue truncate(const TorusSystem& sys, std::vector<std::pair<Freq, cplx>> full, std::int64_t n,
                             std::int64_t d_max) {
  AverageValue out;
  out.value = TrigPoly(sys.moduli());
  std::vector<double> kept_sq, drop_sq;
  const double inv = 1.0 / static_cast<double>(n);
  for (auto& [k, c] : full) {
    c *= inv;
    if (within_cap(k, sys.moduli(), d_max)) {
      out.value.add(k, c);
      kept_sq.push_back(std::norm(c));
    } else {
      drop_sq.push_back(std::norm(c));
    }
  }
  out.truncated_mass = pairwise_sum(drop_sq);
  out.total_mass = pairwise_sum(kept_sq) + out.truncated_mass;
  if (out.truncated_mass > 0.1 * out.total_mass && out.truncated_mass > 1e-6)
    throw Error(ErrorKind::budget, "truncated L2 mass " + std::to_string(out.truncated_mass) + " exceeds 10% of " +
                                       std::to_string(out.total_mass) +
                                       "; use smaller observables or a larger D_max");
  return out;
}

// Diagonal systems: every monomial is an eigenfunction, so each monomial
// combination contributes (prod c) * exp_sum * e((k_1+...+k_l).x).
inline AverageValue average_diagonal(const TorusSystem& sys, const std::vector<SequencePtr>& seqs,
                                     const std::vector<Observable>& obs, std::int64_t n_max, std::int64_t d_max) {
  struct Combo {
    cplx coeff;
    Freq out;
    std::vector<Frequency> forms;
  };
  std::vector<Combo> combos{Combo{1.0, Freq(sys.dim(), 0), {}}};
  for (const auto& f : obs) {
    std::vector<Combo> next;
    for (const auto& c : combos)
      for (const auto& [k, a] : f.trig().terms()) {
        Combo d = c;
        d.coeff *= a;
        for (std::size_t i = 0; i < k.size(); ++i) d.out[i] += k[i];
        d.forms.push_back(*eigen_frequency(sys, k));
        next.push_back(std::move(d));
      }
    combos = std::move(next);
    if (combos.size() > 100'000) throw Error(ErrorKind::budget, "too many monomial combinations");
  }
  std::vector<PhasePlan> plans;
  std::vector<std::size_t> live;  // combos with a non-constant phase
  for (std::size_t c = 0; c < combos.size(); ++c) {
    plans.emplace_back(combos[c].forms);
    if (!plans.back().bases.empty()) live.push_back(c);
  }
  std::vector<cplx> sums(combos.size(), cplx(static_cast<double>(n_max), 0.0));
  if (!live.empty()) {
    const std::size_t l = seqs.size();
    const auto blocks = static_cast<std::size_t>((n_max + kBlockSize - 1) / kBlockSize);
    auto partials = block_map(blocks, [&](std::size_t b) {
      const std::int64_t lo = 1 + static_cast<std::int64_t>(b) * kBlockSize;
      const std::int64_t hi = std::min(n_max, lo + kBlockSize - 1);
      const auto len = static_cast<std::size_t>(hi - lo + 1);
      std::vector<std::int64_t> vals(len * l);
      for (std::size_t i = 0; i < len; ++i)
        for (std::size_t j = 0; j < l; ++j) vals[i * l + j] = eval(*seqs[j], lo + static_cast<std::int64_t>(i));
      std::vector<cplx> out(live.size()), buf(len);
      for (std::size_t c = 0; c < live.size(); ++c) {
        const auto& plan = plans[live[c]];
        for (std::size_t i = 0; i < len; ++i)
          buf[i] = e(plan.phase(std::span<const std::int64_t>(vals.data() + i * l, l)));
        out[c] = pairwise_sum(buf);
      }
      return out;
    });
    std::vector<cplx> col(blocks);
    for (std::size_t c = 0; c < live.size(); ++c) {
      for (std::size_t b = 0; b < blocks; ++b) col[b] = partials[b][c];
      sums[live[c]] = pairwise_sum(col);
    }
  }
  std::map<Freq, cplx, FreqLess> acc;
  TrigPoly shape(sys.moduli());
  for (std::size_t c = 0; c < combos.size(); ++c) acc[shape.normalize(combos[c].out)] += combos[c].coeff * sums[c];
  std::vector<std::pair<Freq, cplx>> full(acc.begin(), acc.end());
  return truncate(sys, std::move(full), n_max, d_max);
}

// General route: explicit pullback products for every n.
inline AverageValue average_generic(const TorusSystem& sys, const std::vector<SequencePtr>& seqs,
                                    const std::vector<Observable>& obs, std::int64_t n_max, std::int64_t d_max) {
  std::size_t per_n = 1;
  for (const auto& f : obs) per_n *= std::max<std::size_t>(1, f.trig().size());
  if (static_cast<double>(per_n) * static_cast<double>(n_max) > 2e8)
    throw Error(ErrorKind::budget, "pullback product work exceeds 2e8 monomial operations");
  using Map = std::unordered_map<Freq, cplx, FreqHash>;
  const auto blocks = static_cast<std::size_t>((n_max + kBlockSize - 1) / kBlockSize);
  auto partials = block_map(blocks, [&](std::size_t b) {
    const std::int64_t lo = 1 + static_cast<std::int64_t>(b) * kBlockSize;
    const std::int64_t hi = std::min(n_max, lo + kBlockSize - 1);
    Map m;
    for (std::int64_t n = lo; n <= hi; ++n) {
      TrigPoly prod = Observable::constant(sys, 1.0).trig();
      for (std::size_t j = 0; j < seqs.size(); ++j) prod = prod * pullback(sys, obs[j], eval(*seqs[j], n)).trig();
      for (const auto& [k, c] : prod.terms()) m[k] += c;
    }
    std::vector<std::pair<Freq, cplx>> sorted(m.begin(), m.end());
    std::sort(sorted.begin(), sorted.end(), [](const auto& x, const auto& y) { return x.first < y.first; });
    return sorted;
  });
  std::map<Freq, std::vector<cplx>, FreqLess> gathered;
  for (const auto& part : partials)
    for (const auto& [k, c] : part) gathered[k].push_back(c);
  std::vector<std::pair<Freq, cplx>> full;
  full.reserve(gathered.size());
  for (const auto& [k, cs] : gathered) full.emplace_back(k, pairwise_sum(cs));
  return truncate(sys, std::move(full), n_max, d_max);
}

}  // namespace detail

inline AverageValue multi_average(const TorusSystem& sys, const std::vector<SequencePtr>& seqs,
                                  const std::vector<Observable>& obs, std::int64_t n_max, std::int64_t d_max = 64) {
  detail::check_inputs(sys, seqs, obs, n_max);
  if (sys.is_diagonal()) return detail::average_diagonal(sys, seqs, obs, n_max, d_max);
  return detail::average_generic(sys, seqs, obs, n_max, d_max);
}

// Same average forced through explicit pullbacks.
inline AverageValue multi_average_generic(const TorusSystem& sys, const std::vector<SequencePtr>& seqs,
                                          const std::vector<Observable>& obs, std::int64_t n_max,
                                          std::int64_t d_max = 64) {
  detail::check_inputs(sys, seqs, obs, n_max);
  return detail::average_generic(sys, seqs, obs, n_max, d_max);
}

// L2 distance from A_N to a constant, counting truncated mass.
inline double distance_to_constant(const AverageValue& a, cplx target) {
  TrigPoly t(a.value.moduli());
  t.add(t.zero(), target);
  return std::sqrt(l2_mass(a.value - t) + a.truncated_mass);
}

// ---------------------------------------------------------------------------
// Diagnostics

enum class AverageVerdict { converging_to_product, obstructed, inconclusive };

inline const char* to_string(AverageVerdict v) {
  switch (v) {
    case AverageVerdict::converging_to_product: return "converging-to-product";
    case AverageVerdict::obstructed: return "obstructed";
    default: return "inconclusive";
  }
}

struct AverageReport {
  std::vector<std::int64_t> schedule;
  std::vector<double> distances;
  std::vector<double> truncated;
  AverageVerdict verdict = AverageVerdict::inconclusive;
  std::optional<TrigPoly> witness;  // stable limit when obstructed
  cplx target = 0.0;
  double tolerance = 0.05;
  std::string note;
};

inline AverageVerdict classify(const std::vector<double>& d, double tol, const AverageValue* prev,
                               const AverageValue* last) {
  if (d.empty()) return AverageVerdict::inconclusive;
  const double fin = d.back();
  if (fin <= tol && fin <= 0.5 * d.front()) return AverageVerdict::converging_to_product;
  if (d.size() >= 2 && fin > tol && std::abs(fin - d[d.size() - 2]) <= tol && prev && last) {
    const double drift = std::sqrt(l2_mass(last->value - prev->value) + last->truncated_mass + prev->truncated_mass);
    if (drift <= tol) return AverageVerdict::obstructed;
  }
  return AverageVerdict::inconclusive;
}

inline AverageReport average_diagnostic(const TorusSystem& sys, const std::vector<SequencePtr>& seqs,
                                        const std::vector<Observable>& obs, const std::vector<std::int64_t>& schedule,
                                        double tol, cplx target, std::int64_t d_max = 64) {
  if (schedule.empty()) throw Error(ErrorKind::precondition, "empty schedule");
  for (std::size_t i = 1; i < schedule.size(); ++i)
    if (schedule[i] <= schedule[i - 1]) throw Error(ErrorKind::precondition, "schedule must be increasing");
  AverageReport rep;
  rep.schedule = schedule;
  rep.tolerance = tol;
  rep.target = target;
  std::optional<AverageValue> prev, last;
  for (auto n : schedule) {
    prev = std::move(last);
    last = multi_average(sys, seqs, obs, n, d_max);
    rep.distances.push_back(distance_to_constant(*last, target));
    rep.truncated.push_back(last->truncated_mass);
  }
  rep.verdict = classify(rep.distances, tol, prev ? &*prev : nullptr, &*last);
  if (rep.verdict == AverageVerdict::obstructed) rep.witness = last->value;
  return rep;
}

inline AverageReport joint_ergodicity_diagnostic(const TorusSystem& sys, const std::vector<SequencePtr>& seqs,
                                                 const std::vector<Observable>& obs,
                                                 const std::vector<std::int64_t>& schedule, double tol = 0.05,
                                                 std::int64_t d_max = 64) {
  detail::check_inputs(sys, seqs, obs, schedule.empty() ? 1 : schedule.front());
  cplx prod = 1.0;
  for (const auto& f : obs) prod *= integrate(f);
  auto rep = average_diagnostic(sys, seqs, obs, schedule, tol, prod, d_max);
  rep.note = "conclusion checked on this instance; the seminorm-estimate hypothesis is not verified";
  return rep;
}

// ---------------------------------------------------------------------------
// Rational Kronecker factor

inline TrigPoly krat_projection(const TorusSystem& sys, const Observable& f, std::int64_t q_max = 1'000'000) {
  const TrigPoly& p = f.trig();
  TrigPoly out(p.moduli());
  for (const auto& [k, c] : p.terms()) {
    auto form = eigen_frequency(sys, k);
    if (!form) continue;
    auto r = frequency_rationality(*form);
    if (r && r->den <= q_max) out.add(k, c);
  }
  return out;
}

inline AverageReport fw_residual_test(const TorusSystem& sys, const Observable& f1, const Observable& f2,
                                      const std::vector<std::int64_t>& schedule, double tol = 0.05,
                                      std::int64_t q_max = 1'000'000, std::int64_t d_max = 64) {
  const double p1 = std::sqrt(l2_mass(krat_projection(sys, f1, q_max)));
  const double p2 = std::sqrt(l2_mass(krat_projection(sys, f2, q_max)));
  if (p1 > 1e-12 && p2 > 1e-12)
    throw Error(ErrorKind::precondition, "neither observable is orthogonal to the rational Kronecker factor "
                                         "(projection norms " + std::to_string(p1) + ", " + std::to_string(p2) + ")");
  std::vector<SequencePtr> seqs{parse_sequence("poly:1,0"), parse_sequence("poly:1,0,0")};
  return average_diagnostic(sys, seqs, {f1, f2}, schedule, tol, 0.0, d_max);
}

// ---------------------------------------------------------------------------
// Recurrence

// Arcs and boxes on torus coordinates, residue sets on cyclic ones, or an
// explicit mask on a finite (all-cyclic) space.
struct IndicatorSet {
  struct Axis {
    double lo = 0.0, hi = 1.0;            // torus: [lo, hi) mod 1, hi - lo in [0,1]
    std::vector<std::int64_t> residues;   // cyclic
  };
  std::vector<Axis> axes;
  std::optional<std::vector<bool>> mask;  // indexed by the mixed-radix residue tuple

  static IndicatorSet arc(double lo, double hi) {
    IndicatorSet s;
    s.axes.push_back(Axis{lo, hi, {}});
    return s;
  }
  static IndicatorSet residues(std::vector<std::int64_t> r) {
    IndicatorSet s;
    s.axes.push_back(Axis{0, 0, std::move(r)});
    return s;
  }
  static IndicatorSet whole(const TorusSystem& sys) {
    IndicatorSet s;
    for (auto m : sys.moduli()) {
      Axis a;
      if (m > 0)
        for (std::int64_t j = 0; j < m; ++j) a.residues.push_back(j);
      s.axes.push_back(a);
    }
    return s;
  }

  void validate(const TorusSystem& sys) const {
    const auto& mod = sys.moduli();
    if (mask) {
      std::int64_t total = 1;
      for (auto m : mod) {
        if (m == 0) throw Error(ErrorKind::precondition, "masks are only defined on finite spaces");
        total *= m;
      }
      if (static_cast<std::int64_t>(mask->size()) != total) throw Error(ErrorKind::precondition, "mask size mismatch");
      return;
    }
    if (axes.size() != mod.size()) throw Error(ErrorKind::precondition, "indicator dimension mismatch");
    for (std::size_t i = 0; i < mod.size(); ++i) {
      if (mod[i] == 0 && !(axes[i].hi - axes[i].lo >= 0.0 && axes[i].hi - axes[i].lo <= 1.0))
        throw Error(ErrorKind::precondition, "arc length must lie in [0,1]");
      if (mod[i] > 0)
        for (auto r : axes[i].residues)
          if (r < 0 || r >= mod[i]) throw Error(ErrorKind::precondition, "residue out of range");
    }
  }

  bool contains(const TorusSystem& sys, const Point& x) const {
    const auto& mod = sys.moduli();
    if (mask) {
      std::int64_t idx = 0;
      for (std::size_t i = 0; i < mod.size(); ++i) idx = idx * mod[i] + static_cast<std::int64_t>(x[i]);
      return (*mask)[static_cast<std::size_t>(idx)];
    }
    for (std::size_t i = 0; i < mod.size(); ++i) {
      const auto& a = axes[i];
      if (mod[i] > 0) {
        if (std::find(a.residues.begin(), a.residues.end(), static_cast<std::int64_t>(x[i])) == a.residues.end())
          return false;
      } else {
        const double len = a.hi - a.lo;
        if (len >= 1.0) continue;
        if (!(wrap01(x[i] - a.lo) < len)) return false;
      }
    }
    return true;
  }

  double measure(const TorusSystem& sys) const {
    const auto& mod = sys.moduli();
    if (mask) return static_cast<double>(std::count(mask->begin(), mask->end(), true)) / mask->size();
    double mu = 1.0;
    for (std::size_t i = 0; i < mod.size(); ++i) {
      if (mod[i] > 0) {
        std::vector<std::int64_t> r = axes[i].residues;
        std::sort(r.begin(), r.end());
        r.erase(std::unique(r.begin(), r.end()), r.end());
        mu *= static_cast<double>(r.size()) / static_cast<double>(mod[i]);
      } else {
        mu *= axes[i].hi - axes[i].lo;
      }
    }
    return mu;
  }

  std::string to_text() const {
    if (mask) {
      std::string s = "mask ";
      for (bool b : *mask) s += b ? '1' : '0';
      return s;
    }
    std::string s;
    for (const auto& a : axes) {
      if (!s.empty()) s += " x ";
      if (!a.residues.empty() || a.hi == a.lo) {
        s += "{";
        for (std::size_t i = 0; i < a.residues.size(); ++i) s += (i ? "," : "") + std::to_string(a.residues[i]);
        s += "}";
      } else {
        char buf[64];
        std::snprintf(buf, sizeof buf, "[%.17g,%.17g)", a.lo, a.hi);
        s += buf;
      }
    }
    return s;
  }
};

struct RecurrenceReport {
  std::string set_text;
  double mu = 0.0;
  std::vector<std::int64_t> schedule;
  std::vector<double> averages;
  std::vector<double> densities;  // filtered runs: |S_r cap [N]| / N
  double lower_bound = 0.0;       // mu^(l+1)
  double quadrature_bound = 0.0;
  std::size_t grid_points = 0;
  std::vector<double> margins() const {
    std::vector<double> m;
    for (double a : averages) m.push_back(a - lower_bound);
    return m;
  }
};

namespace detail {

// Number of k in [0, m) with k/m in [lo, hi), 0 <= lo <= hi <= 1.
inline std::int64_t grid_count(double lo, double hi, std::int64_t m) {
  auto first = [&](double v) { return static_cast<std::int64_t>(std::ceil(v * static_cast<double>(m))); };
  return std::max<std::int64_t>(0, std::min(first(hi), m) - std::max<std::int64_t>(first(lo), 0));
}

using Intervals = std::vector<std::pair<double, double>>;

inline Intervals arc_intervals(double lo, double len) {
  if (len >= 1.0) return {{0.0, 1.0}};
  const double a = wrap01(lo);
  const double b = a + len;
  if (b <= 1.0) return {{a, b}};
  return {{a, 1.0}, {0.0, b - 1.0}};
}

inline Intervals intersect(const Intervals& x, const Intervals& y) {
  Intervals out;
  for (const auto& [a, b] : x)
    for (const auto& [c, d] : y) {
      double lo = std::max(a, c), hi = std::min(b, d);
      if (lo < hi) out.emplace_back(lo, hi);
    }
  return out;
}

// Per-n hit counts: grid points x with x in A and T^{a_j(n)} x in A for all j.
// Counts are integers, so schedule averages are exact prefix sums.
inline std::vector<std::int64_t> recurrence_counts(const TorusSystem& sys, const IndicatorSet& A,
                                                   const std::vector<SequencePtr>& seqs, std::int64_t n_max,
                                                   const SamplePlan& plan, bool fast_arc, std::int64_t m) {
  const auto blocks = static_cast<std::size_t>((n_max + kBlockSize - 1) / kBlockSize);
  std::vector<std::size_t> in_a;
  if (!fast_arc)
    for (std::size_t i = 0; i < plan.points.size(); ++i)
      if (A.contains(sys, plan.points[i])) in_a.push_back(i);
  auto parts = block_map(blocks, [&](std::size_t b) {
    const std::int64_t lo = 1 + static_cast<std::int64_t>(b) * kBlockSize;
    const std::int64_t hi = std::min(n_max, lo + kBlockSize - 1);
    std::vector<std::int64_t> out;
    out.reserve(static_cast<std::size_t>(hi - lo + 1));
    for (std::int64_t n = lo; n <= hi; ++n) {
      if (fast_arc) {
        const Real& alpha = std::get<RotationFactor>(sys.factors()[0].kind).angles[0];
        const double len = A.axes[0].hi - A.axes[0].lo;
        Intervals cur = arc_intervals(A.axes[0].lo, len);
        for (const auto& s : seqs) {
          // x + {a alpha} in A  <=>  x in A - {a alpha}
          const double shift = frac_times(eval(*s, n), alpha);
          cur = intersect(cur, arc_intervals(A.axes[0].lo - shift, len));
        }
        std::int64_t c = 0;
        for (const auto& [a, bb] : cur) c += grid_count(a, bb, m);
        out.push_back(c);
      } else {
        std::vector<std::int64_t> shifts;
        for (const auto& s : seqs) shifts.push_back(eval(*s, n));
        std::int64_t c = 0;
        for (auto i : in_a) {
          bool ok = true;
          for (auto sh : shifts)
            if (!A.contains(sys, iterate(sys, plan.points[i], sh))) {
              ok = false;
              break;
            }
          c += ok;
        }
        out.push_back(c);
      }
    }
    return out;
  });
  std::vector<std::int64_t> all;
  all.reserve(static_cast<std::size_t>(n_max));
  for (auto& p : parts) all.insert(all.end(), p.begin(), p.end());
  return all;
}

inline RecurrenceReport recurrence_impl(const TorusSystem& sys, const IndicatorSet& A,
                                        const std::vector<SequencePtr>& seqs, std::int64_t r,
                                        const std::vector<std::int64_t>& schedule, std::int64_t m, bool brute) {
  if (m < 1024) throw Error(ErrorKind::precondition, "grid size M must be >= 2^10");
  if (schedule.empty()) throw Error(ErrorKind::precondition, "empty schedule");
  for (std::size_t i = 1; i < schedule.size(); ++i)
    if (schedule[i] <= schedule[i - 1]) throw Error(ErrorKind::precondition, "schedule must be increasing");
  if (seqs.empty()) throw Error(ErrorKind::precondition, "need at least one sequence");
  A.validate(sys);
  const bool fast = !brute && !A.mask && sys.factors().size() == 1 &&
                    std::holds_alternative<RotationFactor>(sys.factors()[0].kind) && sys.dim() == 1;
  SamplePlan plan;
  if (!fast) plan = uniform_grid(sys, m);
  const std::int64_t grid = fast ? m : static_cast<std::int64_t>(plan.points.size());
  const std::int64_t n_max = schedule.back();
  auto counts = recurrence_counts(sys, A, seqs, n_max, plan, fast, m);
  std::vector<char> keep;
  if (r > 1) {
    keep.resize(static_cast<std::size_t>(n_max));
    for (std::int64_t n = 1; n <= n_max; ++n) {
      bool ok = true;
      for (const auto& s : seqs) ok = ok && eval(*s, n) % r == 0;
      keep[n - 1] = ok;
    }
  }
  RecurrenceReport rep;
  rep.set_text = A.to_text();
  rep.mu = A.measure(sys);
  rep.schedule = schedule;
  rep.grid_points = static_cast<std::size_t>(grid);
  rep.lower_bound = std::pow(rep.mu, static_cast<double>(seqs.size() + 1));
  double axis_sum = 0.0;
  if (!A.mask) {
    const auto& mod = sys.moduli();
    const std::size_t torus_axes = std::count(mod.begin(), mod.end(), 0);
    if (torus_axes > 0) {
      const double per_axis = fast ? static_cast<double>(m)
                                   : std::max<double>(1, std::llround(std::pow(double(m), 1.0 / double(torus_axes))));
      axis_sum = static_cast<double>(torus_axes) / per_axis;
    }
  }
  rep.quadrature_bound = 2.0 * static_cast<double>(seqs.size() + 1) * axis_sum;
  std::int64_t sum = 0, members = 0;
  std::size_t next = 0;
  for (std::int64_t n = 1; n <= n_max; ++n) {
    if (r <= 1 || keep[n - 1]) {
      sum += counts[n - 1];
      ++members;
    }
    if (n == schedule[next]) {
      if (r > 1) rep.densities.push_back(static_cast<double>(members) / static_cast<double>(n));
      rep.averages.push_back(members == 0 ? 0.0
                                          : static_cast<double>(sum) /
                                                (static_cast<double>(members) * static_cast<double>(grid)));
      ++next;
    }
  }
  return rep;
}

}  // namespace detail

inline RecurrenceReport recurrence_average(const TorusSystem& sys, const IndicatorSet& A,
                                           const std::vector<SequencePtr>& seqs,
                                           const std::vector<std::int64_t>& schedule, std::int64_t m = 4096) {
  return detail::recurrence_impl(sys, A, seqs, 1, schedule, m, false);
}

// Grid enumeration for every n (oracle for the arc-counting path).
inline RecurrenceReport recurrence_average_brute(const TorusSystem& sys, const IndicatorSet& A,
                                                 const std::vector<SequencePtr>& seqs,
                                                 const std::vector<std::int64_t>& schedule, std::int64_t m = 4096) {
  return detail::recurrence_impl(sys, A, seqs, 1, schedule, m, true);
}

inline RecurrenceReport recurrence_filtered(const TorusSystem& sys, const IndicatorSet& A,
                                            const std::vector<SequencePtr>& seqs, std::int64_t r,
                                            const std::vector<std::int64_t>& schedule, std::int64_t m = 4096) {
  if (r < 1) throw Error(ErrorKind::precondition, "r must be >= 1");
  if (divisibility_count(seqs, r, schedule.back()) == 0)
    throw Error(ErrorKind::precondition, "S_r is empty up to N_max");
  auto rep = detail::recurrence_impl(sys, A, seqs, r, schedule, m, false);
  if (r == 1) rep.densities.assign(rep.schedule.size(), 1.0);
  return rep;
}

}  // namespace ergolab
