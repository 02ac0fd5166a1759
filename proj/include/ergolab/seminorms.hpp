#pragma once

// Finite-N Gowers-Host-Kra seminorm estimates, the multiplicative derivative
// Delta_n f = T^n f * conj(f), monotonicity and inverse-correlation
// diagnostics, and the Gowers-Cauchy-Schwarz inequality.

#include <bit>
#include <functional>

#include "ergolab/ergodic_averages.hpp"

namespace ergolab {

struct DeltaResult {
  TrigPoly value;
  double truncated_mass = 0.0;
};

inline DeltaResult delta_capped(const TorusSystem& sys, const Observable& f, std::span<const std::int64_t> ns,
                                std::int64_t d_max) {
  TrigPoly g = f.trig();
  for (auto n : ns) g = pullback(sys, g, n).trig() * conj(g);
  DeltaResult out{TrigPoly(g.moduli()), 0.0};
  std::vector<double> kept, drop;
  for (const auto& [k, c] : g.terms()) {
    if (detail::within_cap(k, g.moduli(), d_max)) {
      out.value.add(k, c);
      kept.push_back(std::norm(c));
    } else {
      drop.push_back(std::norm(c));
    }
  }
  out.truncated_mass = pairwise_sum(drop);
  const double total = pairwise_sum(kept) + out.truncated_mass;
  if (out.truncated_mass > 0.1 * total && out.truncated_mass > 1e-6)
    throw Error(ErrorKind::budget, "truncated L2 mass of Delta exceeds 10%; raise D_max");
  return out;
}

// Delta_{n_1} ... Delta_{n_s} f, exact.
inline TrigPoly delta(const TorusSystem& sys, const Observable& f, std::span<const std::int64_t> ns) {
  TrigPoly g = f.trig();
  for (auto n : ns) g = pullback(sys, g, n).trig() * conj(g);
  return g;
}

inline TrigPoly delta(const TorusSystem& sys, const Observable& f, std::initializer_list<std::int64_t> ns) {
  std::vector<std::int64_t> v(ns);
  return delta(sys, f, std::span<const std::int64_t>(v));
}

// sum_k a_k b_{-k} = integral of a*b
inline cplx integral_product(const TrigPoly& a, const TrigPoly& b) {
  const TrigPoly& small = a.size() <= b.size() ? a : b;
  const TrigPoly& big = a.size() <= b.size() ? b : a;
  std::vector<cplx> terms;
  for (const auto& [k, c] : small.terms()) {
    Freq neg(k.size());
    for (std::size_t i = 0; i < k.size(); ++i) neg[i] = -k[i];
    cplx d = big.coeff(neg);
    if (d != cplx{}) terms.push_back(c * d);
  }
  return pairwise_sum(terms);
}

enum class Estimator { box, iterative, subsampled };

inline const char* to_string(Estimator e) {
  switch (e) {
    case Estimator::box: return "box";
    case Estimator::iterative: return "iterative";
    default: return "subsampled";
  }
}

struct SeminormEstimate {
  int s = 1;
  std::int64_t n = 0;
  Estimator estimator = Estimator::box;
  std::uint64_t count = 0;  // subsampled tuples
  std::uint64_t seed = 0;
  std::vector<std::int64_t> levels;  // iterative: N per level, innermost first
  double raw = 0.0;                  // estimate of ||f||_s^{2^s}
  double imag = 0.0;                 // imaginary part of the box average
  double value = 0.0;                // max(raw,0)^{1/2^s}
};

struct SeminormOptions {
  double budget = 1e8;  // tuple evaluations
};

namespace detail {

inline double clip_root(double raw, int s) { return std::pow(std::max(raw, 0.0), 1.0 / std::ldexp(1.0, s)); }

// Integral of Delta_{n} f for f a combination of eigenfunctions:
//   sum over monomial 2^s-tuples with vanishing total frequency of
//   (coefficient product) * e(sum_i n_i Phi_i),
// grouped by the exact phase vector (Phi_1..Phi_s).
struct EigenExpansion {
  std::vector<Real> bases;
  struct Group {
    std::vector<std::int64_t> mult;  // s * bases.size(): Phi_i = sum_b mult[i*B+b] * bases[b]
    cplx coeff;
  };
  std::vector<Group> groups;
  std::uint64_t tuples = 0;

  double phase(const Group& g, std::span<const std::int64_t> ns) const {
    const std::size_t nb = bases.size();
    double p = 0.0;
    for (std::size_t i = 0; i < ns.size(); ++i)
      for (std::size_t b = 0; b < nb; ++b)
        if (g.mult[i * nb + b] != 0) p += frac_times(static_cast<int128>(ns[i]) * g.mult[i * nb + b], bases[b]);
    return wrap01(p);
  }
};

inline bool all_eigen(const TorusSystem& sys, const TrigPoly& f) {
  for (const auto& [k, c] : f.terms())
    if (!eigen_frequency(sys, k)) return false;
  return true;
}

inline EigenExpansion eigen_expansion(const TorusSystem& sys, const TrigPoly& f, int s, double budget) {
  EigenExpansion ex;
  struct Mono {
    Freq k;
    cplx c;
    std::vector<std::int64_t> mult;
  };
  std::vector<Mono> monos;
  for (const auto& [k, c] : f.terms()) {
    auto form = *eigen_frequency(sys, k);
    std::vector<std::int64_t> m(ex.bases.size(), 0);
    for (const auto& [base, mm] : form.parts) {
      std::size_t idx = 0;
      while (idx < ex.bases.size() && !(ex.bases[idx] == base)) ++idx;
      if (idx == ex.bases.size()) {
        ex.bases.push_back(base);
        m.push_back(0);
        for (auto& prev : monos) prev.mult.push_back(0);
      }
      m[idx] += mm;
    }
    monos.push_back(Mono{k, c, std::move(m)});
  }
  for (auto& m : monos) m.mult.resize(ex.bases.size(), 0);
  const std::size_t nb = ex.bases.size();
  const std::size_t corners = std::size_t(1) << s;
  const double work = std::pow(static_cast<double>(monos.size()), static_cast<double>(corners - 1));
  if (work > budget)
    throw Error(ErrorKind::budget, "monomial tuple count " + std::to_string(work) + " exceeds budget");
  ex.tuples = static_cast<std::uint64_t>(work);
  if (monos.empty()) return ex;
  // lookup for the closing corner
  std::map<Freq, std::size_t, FreqLess> index;
  for (std::size_t i = 0; i < monos.size(); ++i) index[f.normalize(monos[i].k)] = i;
  std::map<std::vector<std::int64_t>, cplx> acc;
  // corners 0..corners-2 chosen freely, corner (all ones) closes the sum.
  // sign of corner eps is (-1)^(s-|eps|); conjugated when s-|eps| is odd.
  std::vector<int> sign(corners);
  for (std::size_t eps = 0; eps < corners; ++eps) sign[eps] = ((s - std::popcount(eps)) % 2 == 0) ? 1 : -1;
  std::vector<std::size_t> pick(corners - 1, 0);
  const std::size_t dim = f.dim();
  for (;;) {
    Freq total(dim, 0);
    for (std::size_t eps = 0; eps + 1 < corners; ++eps)
      for (std::size_t i = 0; i < dim; ++i) total[i] += sign[eps] * monos[pick[eps]].k[i];
    Freq need(dim);
    for (std::size_t i = 0; i < dim; ++i) need[i] = -total[i];  // sign of the last corner is +1
    auto it = index.find(f.normalize(need));
    if (it != index.end()) {
      std::vector<std::int64_t> key(static_cast<std::size_t>(s) * nb, 0);
      cplx coeff = 1.0;
      for (std::size_t eps = 0; eps < corners; ++eps) {
        const Mono& m = eps + 1 < corners ? monos[pick[eps]] : monos[it->second];
        coeff *= sign[eps] > 0 ? m.c : std::conj(m.c);
        for (int i = 0; i < s; ++i)
          if (eps >> i & 1)
            for (std::size_t b = 0; b < nb; ++b) key[static_cast<std::size_t>(i) * nb + b] += sign[eps] * m.mult[b];
      }
      acc[key] += coeff;
    }
    std::size_t pos = 0;
    while (pos < pick.size() && ++pick[pos] == monos.size()) pick[pos++] = 0;
    if (pos == pick.size()) break;
  }
  for (auto& [key, c] : acc)
    if (c != cplx{}) ex.groups.push_back({key, c});
  return ex;
}

// (1/N) sum_{n=1}^N e(n Phi) for Phi = sum_b mult[b] bases[b].
inline cplx mean_character(const std::vector<Real>& bases, std::span<const std::int64_t> mult, std::int64_t n) {
  bool zero = true;
  for (auto m : mult) zero = zero && m == 0;
  if (zero) return 1.0;
  cplx s = block_sum<cplx>(1, n, [&](std::int64_t k) {
    double p = 0.0;
    for (std::size_t b = 0; b < bases.size(); ++b)
      if (mult[b] != 0) p += frac_times(static_cast<int128>(k) * mult[b], bases[b]);
    return e(wrap01(p));
  });
  return s / static_cast<double>(n);
}

inline cplx box_factorized(const EigenExpansion& ex, int s, std::int64_t n) {
  const std::size_t nb = ex.bases.size();
  std::map<std::vector<std::int64_t>, cplx> cache;
  std::vector<cplx> terms;
  terms.reserve(ex.groups.size());
  for (const auto& g : ex.groups) {
    cplx prod = g.coeff;
    for (int i = 0; i < s; ++i) {
      std::vector<std::int64_t> key(g.mult.begin() + i * nb, g.mult.begin() + (i + 1) * nb);
      auto it = cache.find(key);
      if (it == cache.end()) it = cache.emplace(key, mean_character(ex.bases, key, n)).first;
      prod *= it->second;
    }
    terms.push_back(prod);
  }
  return pairwise_sum(terms);
}

inline std::vector<std::int64_t> tuple_of(std::uint64_t index, int s, std::int64_t n) {
  std::vector<std::int64_t> t(static_cast<std::size_t>(s));
  for (int i = 0; i < s; ++i) {
    t[i] = static_cast<std::int64_t>(index % static_cast<std::uint64_t>(n)) + 1;
    index /= static_cast<std::uint64_t>(n);
  }
  return t;
}

inline cplx box_generic(const TorusSystem& sys, const Observable& f, int s, std::int64_t n) {
  const auto total = static_cast<std::uint64_t>(std::pow(static_cast<double>(n), s) + 0.5);
  const std::int64_t blocks = static_cast<std::int64_t>((total + kBlockSize - 1) / kBlockSize);
  auto parts = block_map(static_cast<std::size_t>(blocks), [&](std::size_t b) {
    const std::uint64_t lo = b * kBlockSize;
    const std::uint64_t hi = std::min<std::uint64_t>(total, lo + kBlockSize);
    std::vector<cplx> buf;
    buf.reserve(hi - lo);
    for (std::uint64_t idx = lo; idx < hi; ++idx) {
      auto t = tuple_of(idx, s, n);
      TrigPoly d = delta(sys, f, std::span<const std::int64_t>(t));
      buf.push_back(d.coeff(d.zero()));
    }
    return pairwise_sum(buf);
  });
  return pairwise_sum(parts) / static_cast<double>(total);
}

}  // namespace detail

// E_{n in [N]^s} integral of Delta_n f.
inline SeminormEstimate seminorm_box(const TorusSystem& sys, const Observable& f, int s, std::int64_t n,
                                     const SeminormOptions& opt = {}) {
  if (s < 1) throw Error(ErrorKind::precondition, "s must be >= 1");
  if (n < 1) throw Error(ErrorKind::precondition, "N must be >= 1");
  const TrigPoly& p = f.trig();
  SeminormEstimate out;
  out.s = s;
  out.n = n;
  cplx v;
  if (detail::all_eigen(sys, p)) {
    auto ex = detail::eigen_expansion(sys, p, s, opt.budget);
    const double work = static_cast<double>(ex.groups.size()) * s;
    if (work > opt.budget) throw Error(ErrorKind::budget, "box evaluation exceeds budget");
    v = detail::box_factorized(ex, s, n);
  } else {
    if (std::pow(static_cast<double>(n), s) > opt.budget)
      throw Error(ErrorKind::budget, "N^s = " + std::to_string(std::pow(double(n), s)) +
                                         " exceeds the tuple budget; use the subsampled estimator");
    v = detail::box_generic(sys, f, s, n);
  }
  out.raw = v.real();
  out.imag = v.imag();
  out.value = detail::clip_root(out.raw, s);
  return out;
}

// Seeded uniform sample of [N]^s.
inline SeminormEstimate seminorm_subsampled(const TorusSystem& sys, const Observable& f, int s, std::int64_t n,
                                            std::uint64_t count, std::uint64_t seed,
                                            const SeminormOptions& opt = {}) {
  if (s < 1) throw Error(ErrorKind::precondition, "s must be >= 1");
  if (n < 1 || count < 1) throw Error(ErrorKind::precondition, "N and count must be >= 1");
  const TrigPoly& p = f.trig();
  std::optional<detail::EigenExpansion> ex;
  if (detail::all_eigen(sys, p)) ex = detail::eigen_expansion(sys, p, s, opt.budget);
  const auto blocks = static_cast<std::size_t>((count + kBlockSize - 1) / kBlockSize);
  auto parts = block_map(blocks, [&](std::size_t b) {
    const std::uint64_t lo = b * kBlockSize;
    const std::uint64_t hi = std::min<std::uint64_t>(count, lo + kBlockSize);
    std::vector<cplx> buf;
    std::vector<std::int64_t> t(static_cast<std::size_t>(s));
    for (std::uint64_t idx = lo; idx < hi; ++idx) {
      for (int i = 0; i < s; ++i)
        t[i] = static_cast<std::int64_t>(counter_draw(seed, idx * static_cast<std::uint64_t>(s) + i) %
                                         static_cast<std::uint64_t>(n)) + 1;
      if (ex) {
        std::vector<cplx> terms;
        for (const auto& g : ex->groups) terms.push_back(g.coeff * e(ex->phase(g, t)));
        buf.push_back(pairwise_sum(terms));
      } else {
        TrigPoly d = delta(sys, f, std::span<const std::int64_t>(t));
        buf.push_back(d.coeff(d.zero()));
      }
    }
    return pairwise_sum(buf);
  });
  cplx v = pairwise_sum(parts) / static_cast<double>(count);
  SeminormEstimate out;
  out.s = s;
  out.n = n;
  out.estimator = Estimator::subsampled;
  out.count = count;
  out.seed = seed;
  out.raw = v.real();
  out.imag = v.imag();
  out.value = detail::clip_root(out.raw, s);
  return out;
}

namespace detail {

// ||g||_1^2 ~ ||(1/N) sum_{n<=N} T^n g||^2 (mean ergodic theorem).
inline double base_level(const TorusSystem& sys, const TrigPoly& g, std::int64_t n) {
  std::map<Freq, std::vector<cplx>, FreqLess> acc;
  for (const auto& [k, c] : g.terms()) {
    if (auto form = eigen_frequency(sys, k)) {
      std::vector<Real> bases;
      std::vector<std::int64_t> mult;
      for (const auto& [b, m] : form->parts) {
        bases.push_back(b);
        mult.push_back(m);
      }
      acc[k].push_back(c * mean_character(bases, mult, n));
    } else {
      for (std::int64_t m = 1; m <= n; ++m) {
        auto [phase, k2] = pull_monomial(sys, k, m);
        acc[g.normalize(k2)].push_back(c * e(phase) / static_cast<double>(n));
      }
    }
  }
  std::vector<double> sq;
  for (const auto& [k, cs] : acc) sq.push_back(std::norm(pairwise_sum(cs)));
  return pairwise_sum(sq);
}

// ||g||_s^{2^s} with levels[0..s-1] (levels[0] is the base).
inline double iterate_level(const TorusSystem& sys, const TrigPoly& g, int s, const std::vector<std::int64_t>& levels) {
  if (s == 1) return base_level(sys, g, levels[0]);
  const std::int64_t n = levels[static_cast<std::size_t>(s - 1)];
  std::vector<double> vals(static_cast<std::size_t>(n));
  for (std::int64_t m = 1; m <= n; ++m) {
    TrigPoly d = pullback(sys, g, m).trig() * conj(g);
    vals[m - 1] = iterate_level(sys, d, s - 1, levels);
  }
  return pairwise_sum(vals) / static_cast<double>(n);
}

}  // namespace detail

// ||f||_{s}^{2^s} = lim E_{n in [N_s]} ||Delta_n f||_{s-1}^{2^{s-1}}, with the
// base level from the mean ergodic average.
inline SeminormEstimate seminorm_iterative(const TorusSystem& sys, const Observable& f, int s,
                                           std::vector<std::int64_t> levels, const SeminormOptions& opt = {}) {
  if (s < 1) throw Error(ErrorKind::precondition, "s must be >= 1");
  if (levels.size() == 1) levels.assign(static_cast<std::size_t>(s), levels[0]);
  if (levels.size() != static_cast<std::size_t>(s)) throw Error(ErrorKind::precondition, "need one N per level");
  double work = 1.0;
  for (auto n : levels) {
    if (n < 1) throw Error(ErrorKind::precondition, "level N must be >= 1");
    work *= static_cast<double>(n);
  }
  if (work > opt.budget) throw Error(ErrorKind::budget, "iterative estimator exceeds budget");
  SeminormEstimate out;
  out.s = s;
  out.n = levels.back();
  out.estimator = Estimator::iterative;
  out.levels = levels;
  out.raw = detail::iterate_level(sys, f.trig(), s, levels);
  out.value = detail::clip_root(out.raw, s);
  return out;
}

struct MonotonicityReport {
  std::vector<SeminormEstimate> estimates;  // s = 1..s_max
  std::vector<int> violations;              // s with value_s > value_{s+1} + slack
  double slack = 0.05;
};

inline MonotonicityReport monotonicity_report(const TorusSystem& sys, const Observable& f, int s_max,
                                              std::int64_t n, double slack = 0.05, const SeminormOptions& opt = {}) {
  if (s_max < 1) throw Error(ErrorKind::precondition, "s_max must be >= 1");
  MonotonicityReport rep;
  rep.slack = slack;
  for (int s = 1; s <= s_max; ++s) rep.estimates.push_back(seminorm_box(sys, f, s, n, opt));
  for (std::size_t i = 0; i + 1 < rep.estimates.size(); ++i)
    if (rep.estimates[i].value > rep.estimates[i + 1].value + slack) rep.violations.push_back(static_cast<int>(i + 1));
  return rep;
}

// ---------------------------------------------------------------------------
// Inverse correlation

namespace detail {

// |f| <= 1 everywhere: trivially from the coefficient sum, otherwise on a
// probe grid.
inline void require_bounded(const TorusSystem& sys, const TrigPoly& f, const char* what) {
  if (sup_bound(f) <= 1.0 + 1e-12) return;
  auto plan = uniform_grid(sys, 4096);
  for (const auto& x : plan.points)
    if (std::abs(evaluate(sys, f, x)) > 1.0 + 1e-9)
      throw Error(ErrorKind::precondition, std::string(what) + " exceeds 1 in sup norm");
}

}  // namespace detail

struct SoftInverseResult {
  Freq chi;                  // generator of the best eigenfunction
  cplx rotation = 1.0;       // unimodular constant multiplying it
  double correlation = 0.0;  // Re integral f * rotation * chi
  SeminormEstimate box;      // seminorm_box(f, 2, N)
  double lhs = 0.0;          // max(raw,0) = value^4
  bool holds = false;        // lhs <= correlation + 0.05
};

inline SoftInverseResult soft_inverse(const TorusSystem& sys, const Observable& f, std::int64_t k_max,
                                      std::int64_t n = 256, const SeminormOptions& opt = {}) {
  const TrigPoly& p = f.trig();
  detail::require_bounded(sys, p, "observable");
  SoftInverseResult out;
  out.chi = p.zero();
  // integral f * e(k.x) = c_{-k}; other characters correlate to 0
  double best = -1.0;
  auto consider = [&](const Freq& k) {
    Freq neg(k.size());
    for (std::size_t i = 0; i < k.size(); ++i) neg[i] = -k[i];
    const cplx c = p.coeff(neg);
    if (std::abs(c) > best) {
      best = std::abs(c);
      out.chi = p.normalize(k);
      out.rotation = c == cplx{} ? cplx(1.0) : std::conj(c) / std::abs(c);
    }
  };
  consider(p.zero());
  for (const auto& [k, c] : p.terms()) {
    if (!eigen_frequency(sys, k)) continue;
    bool in_range = true;
    for (std::size_t i = 0; i < k.size(); ++i)
      if (p.moduli()[i] == 0 && (k[i] > k_max || -k[i] > k_max)) in_range = false;
    if (!in_range) continue;
    Freq neg(k.size());
    for (std::size_t i = 0; i < k.size(); ++i) neg[i] = -k[i];
    consider(neg);
  }
  out.correlation = best;
  out.box = seminorm_box(sys, f, 2, n, opt);
  out.lhs = std::max(out.box.raw, 0.0);
  out.holds = out.lhs <= out.correlation + 0.05;
  return out;
}

// ---------------------------------------------------------------------------
// Gowers-Cauchy-Schwarz

struct GcsResult {
  double lhs = 0.0;       // |E_n integral prod_eps T^{eps.n} f_eps * g_n|
  double lhs_power = 0.0; // lhs^{2^s}
  double rhs = 0.0;       // real part of the right-hand side
  double rhs_imag = 0.0;
  bool holds = false;     // lhs_power <= rhs + 1e-8
};

// f[eps] indexed by the bitmask of eps (bit i = eps_i); g(n) for n in [N]^s.
// Right-hand side:
//   E_{n,n'} integral f_1 * prod_{eps != 0} C^{|eps|} T^{eps.(n'-n)} f_1
//            * T^{-|n|}( prod_eps C^{|eps|} g_{n^eps} ),
// n^eps taking n'_i where eps_i = 1 and n_i elsewhere.
inline GcsResult gcs_check(const TorusSystem& sys, const std::vector<Observable>& f,
                           const std::function<Observable(std::span<const std::int64_t>)>& g, int s,
                           std::int64_t n) {
  if (s != 1 && s != 2) throw Error(ErrorKind::precondition, "s must be 1 or 2");
  const std::size_t corners = std::size_t(1) << s;
  if (f.size() != corners) throw Error(ErrorKind::precondition, "need 2^s functions f_eps");
  for (const auto& fe : f) detail::require_bounded(sys, fe.trig(), "f_eps");
  const auto cells = static_cast<std::uint64_t>(std::pow(static_cast<double>(n), s) + 0.5);
  std::vector<TrigPoly> gs;
  gs.reserve(cells);
  for (std::uint64_t idx = 0; idx < cells; ++idx) {
    auto t = detail::tuple_of(idx, s, n);
    gs.push_back(g(std::span<const std::int64_t>(t)).trig());
  }
  auto cell_index = [&](std::span<const std::int64_t> t) {
    std::uint64_t idx = 0;
    for (int i = s; i-- > 0;) idx = idx * static_cast<std::uint64_t>(n) + static_cast<std::uint64_t>(t[i] - 1);
    return idx;
  };
  // left side
  std::vector<cplx> left;
  for (std::uint64_t idx = 0; idx < cells; ++idx) {
    auto t = detail::tuple_of(idx, s, n);
    TrigPoly prod = gs[idx];
    for (std::size_t eps = 0; eps < corners; ++eps) {
      std::int64_t shift = 0;
      for (int i = 0; i < s; ++i)
        if (eps >> i & 1) shift += t[i];
      prod = prod * pullback(sys, f[eps], shift).trig();
    }
    left.push_back(prod.coeff(prod.zero()));
  }
  GcsResult out;
  out.lhs = std::abs(pairwise_sum(left) / static_cast<double>(cells));
  out.lhs_power = std::pow(out.lhs, static_cast<double>(corners));
  // F_h depends on h = n' - n only
  const TrigPoly& f1 = f[corners - 1].trig();
  std::map<std::vector<std::int64_t>, TrigPoly> fh;
  auto f_of = [&](const std::vector<std::int64_t>& h) -> const TrigPoly& {
    auto it = fh.find(h);
    if (it != fh.end()) return it->second;
    TrigPoly prod = f1;
    for (std::size_t eps = 1; eps < corners; ++eps) {
      std::int64_t shift = 0;
      for (int i = 0; i < s; ++i)
        if (eps >> i & 1) shift += h[i];
      TrigPoly term = pullback(sys, f1, shift).trig();
      if (std::popcount(eps) % 2 == 1) term = conj(term);
      prod = prod * term;
    }
    return fh.emplace(h, std::move(prod)).first->second;
  };
  std::vector<cplx> right;
  right.reserve(cells * cells);
  std::vector<std::int64_t> h(static_cast<std::size_t>(s)), ne(static_cast<std::size_t>(s));
  for (std::uint64_t a = 0; a < cells; ++a) {
    auto t = detail::tuple_of(a, s, n);
    std::int64_t total = 0;
    for (auto v : t) total += v;
    for (std::uint64_t b = 0; b < cells; ++b) {
      auto t2 = detail::tuple_of(b, s, n);
      for (int i = 0; i < s; ++i) h[i] = t2[i] - t[i];
      TrigPoly gp = Observable::constant(sys, 1.0).trig();
      for (std::size_t eps = 0; eps < corners; ++eps) {
        for (int i = 0; i < s; ++i) ne[i] = (eps >> i & 1) ? t2[i] : t[i];
        const TrigPoly& ge = gs[cell_index(ne)];
        gp = gp * (std::popcount(eps) % 2 == 1 ? conj(ge) : ge);
      }
      right.push_back(integral_product(f_of(h), pullback(sys, gp, -total).trig()));
    }
  }
  const cplx r = pairwise_sum(right) / (static_cast<double>(cells) * static_cast<double>(cells));
  out.rhs = r.real();
  out.rhs_imag = r.imag();
  out.holds = out.lhs_power <= out.rhs + 1e-8;
  return out;
}

}  // namespace ergolab
