#pragma once

// Integer sequences a: N -> Z given declaratively: integer polynomials,
// floors of generalized polynomials and floors of power-times-log sums,
// plus integer combinations of those.
//
// String grammar (whitespace is not allowed inside a spec):
//
//   poly:<c_d>,...,<c_1>,<c_0>        integer coefficients, highest degree first
//   gen:<term>(+|-)<term>...          term := [<num>*]n[^<num>]         exponent > 0
//   hardy:<term>(+|-)<term>...        term := [<num>*]<f>(*<f>)*,  f := n[^<num>] | log[^<num>]
//   combo:<int>*(<spec>)(+|-)<int>*(<spec>)...
//
// <num> is a decimal literal ("1.5", "-0.25", "2e-3"). Floors are evaluated
// exactly: a long-double pass certified by an error bound, then quad
// precision, then 256-bit arithmetic with an exact rational check for
// values that land on integers.

#include <quadmath.h>

#include <memory>
#include <variant>

#include <boost/multiprecision/cpp_bin_float.hpp>
#include <boost/multiprecision/cpp_int.hpp>

#include "ergolab/core.hpp"

namespace ergolab {

namespace mp = boost::multiprecision;
using BigRational = mp::cpp_rational;
using Float256 = mp::number<mp::cpp_bin_float<256, mp::digit_base_2>, mp::et_off>;

// A decimal literal kept in exact and machine forms.
struct Number {
  std::string text;
  long double ld = 0;
  BigRational exact = 0;

  static Number from_int(std::int64_t v) {
    Number n;
    n.text = std::to_string(v);
    n.ld = static_cast<long double>(v);
    n.exact = v;
    return n;
  }
  double value() const { return static_cast<double>(ld); }
};

struct PowerTerm {
  Number coeff;                 // c
  Number power;                 // b   in n^b (0 when absent)
  Number log_power;             // e   in (log n)^e (0 when absent)
  std::optional<Number> base;   // B   in B^t (time changes only)
};

struct SequenceSpec;
using SequencePtr = std::shared_ptr<const SequenceSpec>;

struct PolyInt {
  std::vector<std::int64_t> coeffs;  // highest degree first
};
struct FloorGeneralized {
  std::vector<PowerTerm> terms;
};
struct FloorHardy {
  std::vector<PowerTerm> terms;
};
struct LinearCombo {
  std::vector<std::pair<std::int64_t, SequencePtr>> parts;
};

struct SequenceSpec {
  std::variant<PolyInt, FloorGeneralized, FloorHardy, LinearCombo> form;
  std::string text;
};

// ---------------------------------------------------------------------------
// Parsing

namespace detail {

class Cursor {
 public:
  Cursor(std::string_view s, std::size_t offset) : s_(s), offset_(offset) {}

  bool done() const { return pos_ >= s_.size(); }
  char peek() const { return done() ? '\0' : s_[pos_]; }
  std::size_t pos() const { return pos_; }
  bool eat(char c) {
    if (peek() != c) return false;
    ++pos_;
    return true;
  }
  bool eat(std::string_view word) {
    if (s_.substr(pos_, word.size()) != word) return false;
    pos_ += word.size();
    return true;
  }
  [[noreturn]] void fail(const std::string& msg) const {
    throw Error(ErrorKind::parse, "column " + std::to_string(offset_ + pos_ + 1) + ": " + msg);
  }
  void expect(char c, const char* what) {
    if (!eat(c)) fail(std::string("expected ") + what);
  }
  std::string_view rest() const { return s_.substr(pos_); }
  void advance(std::size_t k) { pos_ += k; }
  std::size_t offset() const { return offset_; }

  bool at_number() const {
    char c = peek();
    if (c >= '0' && c <= '9') return true;
    if (c == '.' && pos_ + 1 < s_.size() && std::isdigit(static_cast<unsigned char>(s_[pos_ + 1]))) return true;
    if ((c == '-' || c == '+') && pos_ + 1 < s_.size())
      return std::isdigit(static_cast<unsigned char>(s_[pos_ + 1])) || s_[pos_ + 1] == '.';
    return false;
  }

  Number number(const char* what) {
    std::size_t start = pos_;
    std::string digits;
    bool neg = false;
    if (peek() == '+' || peek() == '-') neg = s_[pos_++] == '-';
    std::string mant;
    int frac_digits = 0;
    bool dot = false;
    while (!done()) {
      char c = peek();
      if (std::isdigit(static_cast<unsigned char>(c))) {
        mant += c;
        if (dot) ++frac_digits;
      } else if (c == '.' && !dot) {
        dot = true;
      } else {
        break;
      }
      ++pos_;
    }
    if (mant.empty()) {
      pos_ = start;
      fail(std::string("expected ") + what);
    }
    long exp10 = 0;
    if ((peek() == 'e' || peek() == 'E') && pos_ + 1 < s_.size() &&
        (std::isdigit(static_cast<unsigned char>(s_[pos_ + 1])) ||
         ((s_[pos_ + 1] == '-' || s_[pos_ + 1] == '+') && pos_ + 2 < s_.size() &&
          std::isdigit(static_cast<unsigned char>(s_[pos_ + 2]))))) {
      ++pos_;
      bool eneg = false;
      if (peek() == '+' || peek() == '-') eneg = s_[pos_++] == '-';
      std::string ed;
      while (std::isdigit(static_cast<unsigned char>(peek()))) ed += s_[pos_++];
      exp10 = std::stol(ed);
      if (eneg) exp10 = -exp10;
    }
    Number n;
    n.text = std::string(s_.substr(start, pos_ - start));
    mp::cpp_int num(mant);
    mp::cpp_int ten_pow = mp::pow(mp::cpp_int(10), static_cast<unsigned>(std::abs(exp10 - frac_digits)));
    if (exp10 - frac_digits >= 0)
      n.exact = BigRational(num * ten_pow);
    else
      n.exact = BigRational(num, ten_pow);
    if (neg) n.exact = -n.exact;
    n.ld = std::strtold(n.text.c_str(), nullptr);
    return n;
  }

  std::int64_t integer(const char* what) {
    std::size_t start = pos_;
    if (peek() == '+' || peek() == '-') ++pos_;
    if (!std::isdigit(static_cast<unsigned char>(peek()))) {
      pos_ = start;
      fail(std::string("expected ") + what);
    }
    while (std::isdigit(static_cast<unsigned char>(peek()))) ++pos_;
    try {
      return std::stoll(std::string(s_.substr(start, pos_ - start)));
    } catch (const std::exception&) {
      pos_ = start;
      fail("integer out of range");
    }
  }

 private:
  std::string_view s_;
  std::size_t offset_;
  std::size_t pos_ = 0;
};

// Sum of power terms in the variable `var`; `logs` admits log factors,
// `exps` admits B^var factors, `constants` admits bare numbers.
inline void negate_number(Number& n) {
  n.exact = -n.exact;
  n.ld = -n.ld;
  if (n.text[0] == '-')
    n.text = n.text.substr(1);
  else
    n.text = "-" + (n.text[0] == '+' ? n.text.substr(1) : n.text);
}

inline std::vector<PowerTerm> parse_power_terms(Cursor& cur, char var, bool logs, bool exps, bool constants = false) {
  std::vector<PowerTerm> terms;
  bool first = true;
  while (true) {
    bool negate = false;
    if (!first) {
      if (cur.eat('+')) {
      } else if (cur.eat('-')) {
        negate = true;
      } else {
        break;
      }
    } else if (cur.peek() == '-' && !cur.at_number()) {
      cur.eat('-');
      negate = true;
    }
    first = false;
    PowerTerm t;
    t.coeff = Number::from_int(1);
    t.power = Number::from_int(0);
    t.log_power = Number::from_int(0);
    bool have_factor = false;
    if (cur.at_number()) {
      Number c = cur.number("coefficient");
      if (exps && cur.peek() == '^') {
        // B^t with implicit coefficient 1
        cur.eat('^');
        if (!cur.eat(var)) cur.fail(std::string("expected '") + var + "' after base");
        t.base = c;
        have_factor = true;
      } else {
        t.coeff = c;
        if (!cur.eat('*')) {
          if (!constants) cur.fail("expected '*'");
          if (negate) negate_number(t.coeff);
          terms.push_back(t);
          continue;
        }
      }
    }
    while (true) {
      if (have_factor && !cur.eat('*')) break;
      if (cur.eat(var)) {
        if (cur.eat('^'))
          t.power = cur.number("exponent after '^'");
        else
          t.power = Number::from_int(1);
      } else if (logs && cur.eat("log")) {
        if (cur.eat('^'))
          t.log_power = cur.number("exponent after '^'");
        else
          t.log_power = Number::from_int(1);
      } else if (exps && cur.at_number()) {
        Number b = cur.number("base");
        if (!cur.eat('^') || !cur.eat(var)) cur.fail(std::string("expected '^") + var + "'");
        t.base = b;
      } else {
        cur.fail(std::string("expected '") + var + "'" + (logs ? " or 'log'" : ""));
      }
      have_factor = true;
    }
    if (negate) negate_number(t.coeff);
    terms.push_back(t);
  }
  if (terms.empty()) cur.fail("expected a term");
  return terms;
}

inline SequencePtr parse_sequence_at(std::string_view s, std::size_t offset);

}  // namespace detail

inline SequencePtr parse_sequence(std::string_view s) { return detail::parse_sequence_at(s, 0); }

namespace detail {

inline SequencePtr parse_sequence_at(std::string_view s, std::size_t offset) {
  auto spec = std::make_shared<SequenceSpec>();
  spec->text = std::string(s);
  auto colon = s.find(':');
  if (colon == std::string_view::npos)
    throw Error(ErrorKind::parse, "column " + std::to_string(offset + 1) + ": expected '<kind>:'");
  std::string_view kind = s.substr(0, colon);
  Cursor cur(s.substr(colon + 1), offset + colon + 1);
  if (kind == "poly") {
    PolyInt p;
    do {
      p.coeffs.push_back(cur.integer("integer coefficient"));
    } while (cur.eat(','));
    if (!cur.done()) cur.fail("unexpected character");
    spec->form = p;
  } else if (kind == "gen") {
    FloorGeneralized g{parse_power_terms(cur, 'n', false, false)};
    if (!cur.done()) cur.fail("unexpected character");
    for (const auto& t : g.terms)
      if (t.power.exact <= 0) throw Error(ErrorKind::parse, "gen terms need an exponent > 0");
    spec->form = g;
  } else if (kind == "hardy") {
    FloorHardy h{parse_power_terms(cur, 'n', true, false)};
    if (!cur.done()) cur.fail("unexpected character");
    for (const auto& t : h.terms)
      if (t.power.exact < 0 || (t.power.exact == 0 && t.log_power.exact <= 0))
        throw Error(ErrorKind::parse, "hardy terms need n^b with b > 0, or b = 0 with a positive log power");
    spec->form = h;
  } else if (kind == "combo") {
    LinearCombo c;
    bool first = true;
    while (!cur.done()) {
      std::int64_t sign = 1;
      if (!first) {
        if (cur.eat('-'))
          sign = -1;
        else
          cur.expect('+', "'+' or '-'");
      }
      first = false;
      std::int64_t w = sign * cur.integer("integer weight");
      cur.expect('*', "'*'");
      std::size_t open = cur.pos();
      cur.expect('(', "'('");
      int depth = 1;
      std::size_t start = cur.pos();
      while (!cur.done() && depth > 0) {
        if (cur.peek() == '(') ++depth;
        if (cur.peek() == ')') --depth;
        if (depth > 0) cur.advance(1);
      }
      if (depth != 0) {
        Cursor at(s.substr(colon + 1), offset + colon + 1);
        at.advance(open);
        at.fail("unbalanced '('");
      }
      std::string_view inner = s.substr(colon + 1 + start, cur.pos() - start);
      cur.expect(')', "')'");
      c.parts.push_back({w, parse_sequence_at(inner, offset + colon + 1 + start)});
    }
    if (c.parts.empty()) cur.fail("expected a weighted sub-sequence");
    spec->form = c;
  } else {
    throw Error(ErrorKind::parse, "column " + std::to_string(offset + 1) + ": unknown sequence kind '" +
                                      std::string(kind) + "'");
  }
  return spec;
}

// ---------------------------------------------------------------------------
// Floor evaluation tiers

struct TierResult {
  bool certified = false;
  std::int64_t value = 0;
};

inline std::int64_t checked_floor(long double v) {
  if (!(std::fabs(v) < 9.2e18L)) throw Error(ErrorKind::overflow, "sequence value exceeds int64");
  return static_cast<std::int64_t>(std::floor(v));
}

inline TierResult floor_long_double(const std::vector<PowerTerm>& terms, std::int64_t n) {
  const long double x = static_cast<long double>(n);
  const long double lg = std::log(x);
  long double v = 0, mag = 0;
  for (const auto& t : terms) {
    long double term = t.coeff.ld;
    if (t.power.ld != 0) term *= std::pow(x, t.power.ld);
    if (t.log_power.ld != 0) term = n == 1 ? 0.0L : term * std::pow(lg, t.log_power.ld);
    v += term;
    mag += std::fabs(term);
  }
  const long double err = mag * std::ldexp(1.0L, -52) + std::ldexp(1.0L, -60);
  const long double fl = std::floor(v);
  const long double dist = std::min(v - fl, fl + 1 - v);
  if (dist > std::max(err, std::ldexp(1.0L, -40))) return {true, checked_floor(v)};
  return {};
}

inline TierResult floor_quad(const std::vector<PowerTerm>& terms, std::int64_t n) {
  const __float128 x = static_cast<__float128>(n);
  const __float128 lg = logq(x);
  __float128 v = 0, mag = 0;
  for (const auto& t : terms) {
    __float128 c = strtoflt128(t.coeff.text.c_str(), nullptr);
    __float128 term = c;
    if (t.power.ld != 0) term *= powq(x, strtoflt128(t.power.text.c_str(), nullptr));
    if (t.log_power.ld != 0) term = n == 1 ? 0 : term * powq(lg, strtoflt128(t.log_power.text.c_str(), nullptr));
    v += term;
    mag += fabsq(term);
  }
  const __float128 err = mag * ldexpq(1.0Q, -100) + ldexpq(1.0Q, -110);
  const __float128 fl = floorq(v);
  const __float128 dist = fminq(v - fl, fl + 1 - v);
  if (dist > fmaxq(err, ldexpq(1.0Q, -40))) {
    if (!(fabsq(v) < 9.2e18Q)) throw Error(ErrorKind::overflow, "sequence value exceeds int64");
    return {true, static_cast<std::int64_t>(fl)};
  }
  return {};
}

// Exact value when every term is rational at n (c * r^p with n = r^q).
inline std::optional<BigRational> exact_value(const std::vector<PowerTerm>& terms, std::int64_t n) {
  BigRational sum = 0;
  for (const auto& t : terms) {
    if (t.coeff.exact == 0) continue;
    if (t.log_power.exact != 0) {
      if (n == 1) continue;
      return std::nullopt;
    }
    const mp::cpp_int p = mp::numerator(t.power.exact);
    const mp::cpp_int q = mp::denominator(t.power.exact);
    if (q > 64) {
      if (n == 1) {
        sum += t.coeff.exact;
        continue;
      }
      return std::nullopt;
    }
    const unsigned qq = static_cast<unsigned>(q);
    auto r = static_cast<std::int64_t>(std::llround(std::pow(static_cast<double>(n), 1.0 / qq)));
    std::optional<std::int64_t> root;
    for (std::int64_t cand = std::max<std::int64_t>(1, r - 1); cand <= r + 1; ++cand)
      if (mp::pow(mp::cpp_int(cand), qq) == n) root = cand;
    if (!root) return std::nullopt;
    const bool neg = p < 0;
    const auto pa = static_cast<unsigned>(neg ? -p : p);
    mp::cpp_int pw = mp::pow(mp::cpp_int(*root), pa);
    BigRational v = neg ? BigRational(mp::cpp_int(1), pw) : BigRational(pw);
    sum += t.coeff.exact * v;
  }
  return sum;
}

inline std::int64_t floor_rational(const BigRational& v) {
  mp::cpp_int num = mp::numerator(v), den = mp::denominator(v);
  mp::cpp_int q = num / den;
  if (num < 0 && q * den != num) q -= 1;
  if (q > INT64_MAX || q < INT64_MIN) throw Error(ErrorKind::overflow, "sequence value exceeds int64");
  return static_cast<std::int64_t>(q);
}

inline std::int64_t floor_terms(const std::vector<PowerTerm>& terms, std::int64_t n) {
  if (auto r = floor_long_double(terms, n); r.certified) return r.value;
  if (auto r = floor_quad(terms, n); r.certified) return r.value;
  if (auto ex = exact_value(terms, n)) return floor_rational(*ex);
  const Float256 x(n);
  const Float256 lg = mp::log(x);
  Float256 v = 0, mag = 0;
  for (const auto& t : terms) {
    Float256 term = Float256(t.coeff.exact);
    if (t.power.exact != 0) term *= mp::pow(x, Float256(t.power.exact));
    if (t.log_power.exact != 0) term = n == 1 ? Float256(0) : term * mp::pow(lg, Float256(t.log_power.exact));
    v += term;
    mag += mp::abs(term);
  }
  const Float256 fl = mp::floor(v);
  const Float256 lo = v - fl, hi = fl + 1 - v;
  const Float256 dist = lo < hi ? lo : hi;
  const Float256 rel = mag * mp::ldexp(Float256(1), -240), floor_band = mp::ldexp(Float256(1), -100);
  const Float256 band = rel > floor_band ? rel : floor_band;
  if (dist <= band)
    throw Error(ErrorKind::ambiguous_floor, "floor of sequence at n=" + std::to_string(n) +
                                                " is within the guard band of an integer at 256-bit precision");
  if (mp::abs(v) > Float256(9.2e18)) throw Error(ErrorKind::overflow, "sequence value exceeds int64");
  return static_cast<std::int64_t>(fl);
}

}  // namespace detail

// [a(n)] for n >= 1.
inline std::int64_t eval(const SequenceSpec& seq, std::int64_t n) {
  if (n < 1) throw Error(ErrorKind::precondition, "sequences are evaluated at n >= 1");
  if (auto* p = std::get_if<PolyInt>(&seq.form)) {
    int128 acc = 0;
    for (auto c : p->coeffs) {
      acc = acc * n + c;
      if (acc > int128(INT64_MAX) || acc < int128(INT64_MIN)) throw Error(ErrorKind::overflow, "polynomial overflow");
    }
    return static_cast<std::int64_t>(acc);
  }
  if (auto* g = std::get_if<FloorGeneralized>(&seq.form)) return detail::floor_terms(g->terms, n);
  if (auto* h = std::get_if<FloorHardy>(&seq.form)) return detail::floor_terms(h->terms, n);
  const auto& c = std::get<LinearCombo>(seq.form);
  int128 acc = 0;
  for (const auto& [w, sub] : c.parts) {
    acc += static_cast<int128>(w) * eval(*sub, n);
    if (acc > int128(INT64_MAX) || acc < int128(INT64_MIN)) throw Error(ErrorKind::overflow, "combination overflow");
  }
  return static_cast<std::int64_t>(acc);
}

// ---------------------------------------------------------------------------
// Growth classes

enum class GrowthVerdict { polynomial_degree, tempered, t_plus_p, unclassified };

struct GrowthClass {
  GrowthVerdict verdict = GrowthVerdict::unclassified;
  int degree = 0;        // k for PolynomialDegree(k) / Tempered(k)
  double slope = 0.0;    // measured log-log slope
};

inline std::vector<std::int64_t> geometric_probes(std::int64_t t0, std::int64_t t1, int count) {
  std::vector<std::int64_t> pts;
  const double r = std::log(double(t1) / double(t0));
  for (int i = 0; i < count; ++i) {
    auto t = static_cast<std::int64_t>(std::llround(double(t0) * std::exp(r * i / (count - 1))));
    if (pts.empty() || t > pts.back()) pts.push_back(t);
  }
  return pts;
}

inline double ls_slope(const std::vector<double>& xs, const std::vector<double>& ys) {
  const double n = static_cast<double>(xs.size());
  const double mx = std::accumulate(xs.begin(), xs.end(), 0.0) / n;
  const double my = std::accumulate(ys.begin(), ys.end(), 0.0) / n;
  double sxy = 0, sxx = 0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sxy += (xs[i] - mx) * (ys[i] - my);
    sxx += (xs[i] - mx) * (xs[i] - mx);
  }
  return sxy / sxx;
}

namespace detail {
inline void split_combo(const SequenceSpec& s, bool& has_poly, bool& has_other) {
  if (auto* c = std::get_if<LinearCombo>(&s.form)) {
    for (const auto& [w, sub] : c->parts)
      if (w != 0) split_combo(*sub, has_poly, has_other);
  } else if (auto* p = std::get_if<PolyInt>(&s.form)) {
    if (p->coeffs.size() > 1) has_poly = true;
  } else {
    has_other = true;
  }
}
}  // namespace detail

inline GrowthClass growth_classify(const SequenceSpec& seq, std::int64_t t0, std::int64_t t1) {
  if (t0 < 1 || double(t1) / double(t0) < 100.0) throw Error(ErrorKind::precondition, "probe range needs T1/T0 >= 100");
  std::vector<double> xs, ys;
  for (auto t : geometric_probes(t0, t1, 32)) {
    auto v = eval(seq, t);
    if (v <= 0) throw Error(ErrorKind::precondition, "non-positive sequence value at t=" + std::to_string(t));
    xs.push_back(std::log(double(t)));
    ys.push_back(std::log(double(v)));
  }
  GrowthClass out;
  out.slope = ls_slope(xs, ys);
  if (auto* p = std::get_if<PolyInt>(&seq.form)) {
    std::size_t lead = 0;
    while (lead + 1 < p->coeffs.size() && p->coeffs[lead] == 0) ++lead;
    out.verdict = GrowthVerdict::polynomial_degree;
    out.degree = static_cast<int>(p->coeffs.size() - 1 - lead);
    return out;
  }
  if (std::holds_alternative<LinearCombo>(seq.form)) {
    bool has_poly = false, has_other = false;
    detail::split_combo(seq, has_poly, has_other);
    if (has_poly && has_other) {
      out.verdict = GrowthVerdict::t_plus_p;
      out.degree = static_cast<int>(std::floor(out.slope));
      return out;
    }
  }
  const double k = std::floor(out.slope);
  if (out.slope > k + 0.01 && out.slope < k + 0.99) {
    out.verdict = GrowthVerdict::tempered;
    out.degree = static_cast<int>(k);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Logarithmic distance from a rational polynomial (heuristic trend test)

enum class TrendVerdict { diverging, bounded, inconclusive };

inline const char* to_string(TrendVerdict v) {
  switch (v) {
    case TrendVerdict::diverging: return "diverging";
    case TrendVerdict::bounded: return "bounded";
    default: return "inconclusive";
  }
}

struct TrendReport {
  std::vector<std::int64_t> probes;
  std::vector<double> ratios;  // |a(t) - p(t)| / log t
  double slope = 0.0;          // least-squares slope of log ratio vs log t
  TrendVerdict verdict = TrendVerdict::inconclusive;
};

inline TrendReport log_distance_trend(const SequenceSpec& seq, const std::vector<Real>& poly, std::int64_t t0,
                                      std::int64_t t1, int points = 24) {
  if (points < 20) throw Error(ErrorKind::precondition, "trend test needs at least 20 probe points");
  if (t0 < 2) t0 = 2;
  TrendReport out;
  out.probes = geometric_probes(t0, t1, points);
  if (out.probes.size() < 20) throw Error(ErrorKind::precondition, "probe range too narrow for 20 distinct points");
  std::vector<double> xs, ys;
  for (auto t : out.probes) {
    long double p = 0;
    for (const auto& c : poly) p = p * static_cast<long double>(t) + static_cast<long double>(c.value());
    long double diff = std::fabs(static_cast<long double>(eval(seq, t)) - p);
    double ratio = static_cast<double>(diff / std::log(static_cast<long double>(t)));
    out.ratios.push_back(ratio);
    if (ratio > 0) {
      xs.push_back(std::log(double(t)));
      ys.push_back(std::log(ratio));
    }
  }
  if (xs.size() * 2 < out.probes.size()) {
    out.verdict = TrendVerdict::bounded;
    return out;
  }
  out.slope = ls_slope(xs, ys);
  if (out.slope > 0.1)
    out.verdict = TrendVerdict::diverging;
  else if (out.slope < -0.1)
    out.verdict = TrendVerdict::bounded;
  return out;
}

// ---------------------------------------------------------------------------
// Divisibility

inline std::int64_t divisibility_count(const std::vector<SequencePtr>& seqs, std::int64_t r, std::int64_t n_max) {
  if (r < 1) throw Error(ErrorKind::precondition, "modulus must be >= 1");
  std::int64_t count = 0;
  for (std::int64_t n = 1; n <= n_max; ++n) {
    bool all = true;
    for (const auto& s : seqs)
      if (eval(*s, n) % r != 0) {
        all = false;
        break;
      }
    count += all;
  }
  return count;
}

inline double divisibility_density(const std::vector<SequencePtr>& seqs, std::int64_t r, std::int64_t n_max) {
  if (n_max < 1) throw Error(ErrorKind::precondition, "N must be >= 1");
  return static_cast<double>(divisibility_count(seqs, r, n_max)) / static_cast<double>(n_max);
}

}  // namespace ergolab
