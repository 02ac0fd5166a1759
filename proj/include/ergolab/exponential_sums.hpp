#pragma once

// Exponential sums E_{n in [N]} e(a_1(n) t_1 + ... + a_l(n) t_l), the
// equidistribution verdict over a system's spectrum, Weyl-type rational
// detection and the van der Corput inequality.

#include <random>

#include "ergolab/measure_spaces.hpp"
#include "ergolab/sequences.hpp"

namespace ergolab {

namespace detail {

// Distinct base angles and the integer multiplier each sequence applies to
// them, so that sum_j a_j(n) t_j is reduced mod 1 from exact integers.
struct PhasePlan {
  std::vector<Real> bases;
  std::vector<std::vector<std::int64_t>> mult;  // [seq][base]

  PhasePlan(std::span<const Frequency> freqs) : mult(freqs.size()) {
    for (std::size_t j = 0; j < freqs.size(); ++j)
      for (const auto& [base, m] : freqs[j].parts) {
        if (m == 0) continue;
        std::size_t idx = 0;
        while (idx < bases.size() && !(bases[idx] == base)) ++idx;
        if (idx == bases.size()) {
          bases.push_back(base);
          for (auto& row : mult) row.push_back(0);
        }
        mult[j][idx] += m;
      }
  }

  double phase(std::span<const std::int64_t> values) const {
    double p = 0.0;
    for (std::size_t i = 0; i < bases.size(); ++i) {
      int128 total = 0;
      for (std::size_t j = 0; j < values.size(); ++j) total += static_cast<int128>(values[j]) * mult[j][i];
      p += frac_times(total, bases[i]);
    }
    return wrap01(p);
  }
};

}  // namespace detail

// (1/N) sum_{n=1}^N e(sum_j a_j(n) t_j)
inline cplx exp_sum(std::span<const SequencePtr> seqs, std::span<const Frequency> freqs, std::int64_t n_max) {
  if (seqs.size() != freqs.size()) throw Error(ErrorKind::precondition, "sequence/frequency count mismatch");
  if (n_max < 1) throw Error(ErrorKind::precondition, "N must be >= 1");
  detail::PhasePlan plan(freqs);
  if (plan.bases.empty()) return 1.0;
  cplx total = block_sum<cplx>(1, n_max, [&](std::int64_t n) {
    std::int64_t vals[16];
    std::vector<std::int64_t> big;
    std::span<std::int64_t> values;
    if (seqs.size() <= 16) {
      values = std::span<std::int64_t>(vals, seqs.size());
    } else {
      big.resize(seqs.size());
      values = big;
    }
    for (std::size_t j = 0; j < seqs.size(); ++j) values[j] = eval(*seqs[j], n);
    return e(plan.phase(values));
  });
  return total / static_cast<double>(n_max);
}

inline cplx exp_sum(std::span<const SequencePtr> seqs, std::span<const Real> ts, std::int64_t n_max) {
  std::vector<Frequency> freqs;
  for (const auto& t : ts) freqs.push_back(Frequency::of(t));
  return exp_sum(seqs, freqs, n_max);
}

struct ExpSumSeries {
  std::vector<std::int64_t> schedule;
  std::vector<cplx> values;
};

inline ExpSumSeries exp_sum_series(std::span<const SequencePtr> seqs, std::span<const Frequency> freqs,
                                   const std::vector<std::int64_t>& schedule) {
  ExpSumSeries out;
  out.schedule = schedule;
  for (auto n : schedule) out.values.push_back(exp_sum(seqs, freqs, n));
  return out;
}

inline std::string to_csv(const ExpSumSeries& s) {
  std::string out = "N,re,im,abs\n";
  char buf[128];
  for (std::size_t i = 0; i < s.schedule.size(); ++i) {
    std::snprintf(buf, sizeof buf, "%lld,%.17g,%.17g,%.17g\n", static_cast<long long>(s.schedule[i]),
                  s.values[i].real(), s.values[i].imag(), std::abs(s.values[i]));
    out += buf;
  }
  return out;
}

// ---------------------------------------------------------------------------
// Equidistribution over a spectrum

enum class EquidistMode { full, irrational_only };

struct EquidistRecord {
  std::vector<double> t;
  double abs = 0.0;
  bool pass = false;
};

struct EquidistVerdict {
  std::vector<EquidistRecord> records;
  EquidistMode mode = EquidistMode::full;
  double tolerance = 0.0;
  std::int64_t n_max = 0;
  std::uint64_t tuple_count = 0;  // qualifying tuples before sampling
  bool sampled = false;
  bool pass = true;
};

struct EquidistOptions {
  std::uint64_t cap = 1'000'000;
  bool sample = false;
  std::uint64_t seed = 0;
};

inline EquidistVerdict equidist_verdict(const std::vector<SequencePtr>& seqs, const SpectrumSet& spec,
                                        EquidistMode mode, std::int64_t n_max, double tol,
                                        const EquidistOptions& opt = {}) {
  if (spec.entries.empty()) throw Error(ErrorKind::precondition, "empty spectrum");
  const std::size_t l = seqs.size();
  const std::size_t m = spec.entries.size();
  long double total = std::pow(static_cast<long double>(m), static_cast<long double>(l));
  // enumerate all index tuples, keep the qualifying ones
  auto qualifies = [&](const std::vector<std::size_t>& idx) {
    bool all_zero = true, all_rational = true;
    for (auto i : idx) {
      const auto& en = spec.entries[i];
      if (!(en.rational && en.rational->num == 0)) all_zero = false;
      if (!en.rational) all_rational = false;
    }
    return mode == EquidistMode::full ? !all_zero : !all_rational;
  };
  EquidistVerdict out;
  out.mode = mode;
  out.tolerance = tol;
  out.n_max = n_max;
  std::vector<std::vector<std::size_t>> tuples;
  if (total > static_cast<long double>(opt.cap) * 16 && !opt.sample)
    throw Error(ErrorKind::budget, "spectrum tuple count " + std::to_string(static_cast<double>(total)) +
                                       " exceeds cap " + std::to_string(opt.cap));
  if (total <= static_cast<long double>(opt.cap) * 16) {
    std::vector<std::size_t> idx(l, 0);
    for (std::uint64_t c = 0; c < static_cast<std::uint64_t>(total); ++c) {
      if (qualifies(idx)) tuples.push_back(idx);
      for (std::size_t i = l; i-- > 0;) {
        if (++idx[i] < m) break;
        idx[i] = 0;
      }
    }
    out.tuple_count = tuples.size();
  } else {
    out.tuple_count = static_cast<std::uint64_t>(total);
  }
  if (out.tuple_count > opt.cap || tuples.size() < out.tuple_count) {
    if (!opt.sample)
      throw Error(ErrorKind::budget, "spectrum tuple count " + std::to_string(out.tuple_count) + " exceeds cap " +
                                         std::to_string(opt.cap) + " (enable sampling)");
    // seeded uniform sample of qualifying tuples
    std::vector<std::vector<std::size_t>> picked;
    std::uint64_t counter = 0;
    while (picked.size() < opt.cap) {
      std::vector<std::size_t> idx(l);
      for (auto& v : idx) v = counter_draw(opt.seed, counter++) % m;
      if (qualifies(idx)) picked.push_back(idx);
    }
    tuples = std::move(picked);
    out.sampled = true;
  }
  for (const auto& idx : tuples) {
    std::vector<Frequency> freqs;
    EquidistRecord rec;
    for (auto i : idx) {
      freqs.push_back(spec.entries[i].form);
      rec.t.push_back(spec.entries[i].t);
    }
    rec.abs = std::abs(exp_sum(seqs, freqs, n_max));
    rec.pass = rec.abs <= tol;
    out.pass = out.pass && rec.pass;
    out.records.push_back(std::move(rec));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Weyl-type rational detection

struct WeylConfig {
  std::int64_t q_max = 10'000;  // denominator bound Q
  double c = 10.0;              // |t - p/q| <= C / N^i
};

struct WeylWitness {
  double sum_abs = 0.0;
  bool fired = false;             // |sum| >= threshold
  std::optional<Ratio> rational;  // only when fired
};

inline WeylWitness weyl_detect(const Real& t, int degree, std::int64_t n_max, double threshold,
                               const WeylConfig& cfg = {}) {
  if (!(threshold > 0 && threshold <= 1)) throw Error(ErrorKind::precondition, "threshold must lie in (0,1]");
  if (n_max < 10) throw Error(ErrorKind::precondition, "N must be >= 10");
  if (degree < 1) throw Error(ErrorKind::precondition, "degree must be >= 1");
  cplx s = block_sum<cplx>(1, n_max, [&](std::int64_t n) {
    int128 p = 1;
    for (int i = 0; i < degree; ++i) p *= n;
    return e(frac_times(p, t));
  });
  WeylWitness out;
  out.sum_abs = std::abs(s) / static_cast<double>(n_max);
  out.fired = out.sum_abs >= threshold;
  if (!out.fired) return out;
  const double bound = cfg.c / std::pow(static_cast<double>(n_max), degree);
  const double tv = t.value();
  // smallest-denominator convergent inside the window
  for (const auto& c : convergents(tv, cfg.q_max)) {
    if (std::abs(tv - c.value()) <= bound) {
      out.rational = Ratio::make(c.num, c.den);
      break;
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// van der Corput

struct VdcResult {
  double lhs = 0.0;
  double rhs = 0.0;
};

// lhs = ||(1/N) sum v_n||^2,
// rhs = (2/N) sum_{m=1}^N Re((1/N) sum_{n=1}^{N-m} <v_{n+m}, v_n>) + 1/N.
template <class V, class Inner>
VdcResult vdc_bound(std::span<const V> v, Inner&& inner) {
  const std::size_t n = v.size();
  if (n == 0) throw Error(ErrorKind::precondition, "empty family");
  for (const auto& x : v)
    if (std::sqrt(std::real(inner(x, x))) > 1.0 + 1e-12) throw Error(ErrorKind::precondition, "vector norm exceeds 1");
  const double inv = 1.0 / static_cast<double>(n);
  // <S,S> with S = sum v_n, expanded in a fixed order
  std::vector<double> lag(n);
  for (std::size_t m = 0; m < n; ++m) {
    std::vector<double> terms;
    terms.reserve(n - m);
    for (std::size_t i = 0; i + m < n; ++i) terms.push_back(std::real(inner(v[i + m], v[i])));
    lag[m] = pairwise_sum(terms);
  }
  VdcResult out;
  std::vector<double> rest(lag.begin() + 1, lag.end());
  const double off = pairwise_sum(rest);
  out.lhs = (lag[0] + 2.0 * off) * inv * inv;
  out.rhs = 2.0 * inv * (off * inv) + inv;
  return out;
}

template <class V>
VdcResult vdc_bound(std::span<const V> v) {
  return vdc_bound(v, [](const V& a, const V& b) {
    if constexpr (std::is_same_v<V, cplx>) {
      return a * std::conj(b);
    } else {
      cplx s = 0;
      for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * std::conj(b[i]);
      return s;
    }
  });
}

}  // namespace ergolab
