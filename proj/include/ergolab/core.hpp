#pragma once

// Shared numeric plumbing: errors, exact rationals, angle arithmetic mod 1,
// the unit character e(t), pairwise summation and the fixed-order block
// reducer every averaging loop goes through.

#include <algorithm>
#include <atomic>
#include <cctype>
#include <cmath>
#include <complex>
#include <cstdint>
#include <cstdlib>
#include <functional>
#include <numeric>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <thread>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

namespace ergolab {

inline constexpr const char* kVersion = "0.3.1";

using cplx = std::complex<double>;
using int128 = __int128;
using uint128 = unsigned __int128;

enum class ErrorKind {
  parse,
  precondition,
  unsupported_backend,
  budget,
  ambiguous_floor,
  overflow,
  hypothesis,
  io,
};

inline const char* to_string(ErrorKind k) {
  switch (k) {
    case ErrorKind::parse: return "parse";
    case ErrorKind::precondition: return "precondition";
    case ErrorKind::unsupported_backend: return "unsupported-backend";
    case ErrorKind::budget: return "budget";
    case ErrorKind::ambiguous_floor: return "ambiguous-floor";
    case ErrorKind::overflow: return "overflow";
    case ErrorKind::hypothesis: return "hypothesis";
    case ErrorKind::io: return "io";
  }
  return "unknown";
}

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}
  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

// ---------------------------------------------------------------------------
// Rationals

struct Ratio {
  std::int64_t num = 0;
  std::int64_t den = 1;

  static Ratio make(std::int64_t p, std::int64_t q) {
    if (q == 0) throw Error(ErrorKind::parse, "zero denominator");
    if (q < 0) {
      p = -p;
      q = -q;
    }
    std::int64_t g = std::gcd(p < 0 ? -p : p, q);
    if (g == 0) g = 1;
    return Ratio{p / g, q / g};
  }
  double value() const { return static_cast<double>(num) / static_cast<double>(den); }
  friend bool operator==(const Ratio&, const Ratio&) = default;
};

// Continued-fraction convergents p/q of x with q <= max_den.
inline std::vector<Ratio> convergents(double x, std::int64_t max_den) {
  std::vector<Ratio> out;
  double r = x;
  // h_{-1}=1, h_{-2}=0, k_{-1}=0, k_{-2}=1
  int128 h1 = 1, h2 = 0, k1 = 0, k2 = 1;
  for (int iter = 0; iter < 64; ++iter) {
    double a = std::floor(r);
    if (std::abs(a) > 9e15) break;
    auto ai = static_cast<std::int64_t>(a);
    int128 h = ai * h1 + h2;
    int128 k = ai * k1 + k2;
    if (k > max_den) break;
    out.push_back(Ratio{static_cast<std::int64_t>(h), static_cast<std::int64_t>(k)});
    h2 = h1;
    h1 = h;
    k2 = k1;
    k1 = k;
    double frac = r - a;
    if (frac <= 0.0) break;
    r = 1.0 / frac;
  }
  return out;
}

// Rational p/q with q <= max_den within tol of x, if the continued fraction
// expansion produces one.
inline std::optional<Ratio> detect_rational(double x, std::int64_t max_den = 1'000'000,
                                            double tol = 1e-14) {
  for (const auto& c : convergents(x, max_den)) {
    if (std::abs(x - c.value()) <= tol * std::max(1.0, std::abs(x))) return Ratio::make(c.num, c.den);
  }
  return std::nullopt;
}

// ---------------------------------------------------------------------------
// Real: a double that remembers an exact rational form when it has one.

class Real {
 public:
  Real() = default;
  explicit Real(double v) : value_(v) {}
  explicit Real(Ratio r) : value_(r.value()), ratio_(r) {}
  static Real ratio(std::int64_t p, std::int64_t q) { return Real(Ratio::make(p, q)); }

  // Accepts "p/q" or a decimal literal. Decimals whose exact reduced
  // denominator is <= 10^6 are tagged rational; longer decimals fall back to
  // continued-fraction detection with the same denominator bound.
  static Real parse(std::string_view text) {
    std::string s(text);
    auto trim = [](std::string& t) {
      t.erase(0, t.find_first_not_of(" \t"));
      t.erase(t.find_last_not_of(" \t") + 1);
    };
    trim(s);
    if (s.empty()) throw Error(ErrorKind::parse, "empty number");
    Real out;
    out.text_ = s;
    if (s.find_first_of("sp()*") != std::string::npos) {
      std::size_t pos = 0;
      long double v = expr(s, pos);
      if (pos != s.size()) throw Error(ErrorKind::parse, "column " + std::to_string(pos + 1) + ": unexpected '" + s.substr(pos) + "'");
      out.value_ = static_cast<double>(v);
      if (!std::isfinite(out.value_)) throw Error(ErrorKind::parse, "non-finite number '" + s + "'");
      out.ratio_ = detect_rational(out.value_);
      return out;
    }
    if (auto slash = s.find('/'); slash != std::string::npos) {
      std::size_t p1 = 0, p2 = 0;
      std::int64_t p = 0, q = 0;
      try {
        p = std::stoll(s.substr(0, slash), &p1);
        q = std::stoll(s.substr(slash + 1), &p2);
      } catch (const std::exception&) {
        throw Error(ErrorKind::parse, "malformed rational '" + s + "'");
      }
      if (p1 != slash || p2 != s.size() - slash - 1)
        throw Error(ErrorKind::parse, "malformed rational '" + s + "'");
      out.ratio_ = Ratio::make(p, q);
      out.value_ = out.ratio_->value();
      return out;
    }
    std::size_t used = 0;
    try {
      out.value_ = std::stod(s, &used);
    } catch (const std::exception&) {
      throw Error(ErrorKind::parse, "malformed number '" + s + "'");
    }
    if (used != s.size()) throw Error(ErrorKind::parse, "malformed number '" + s + "'");
    if (!std::isfinite(out.value_)) throw Error(ErrorKind::parse, "non-finite number '" + s + "'");
    out.ratio_ = exact_decimal(s);
    if (!out.ratio_) out.ratio_ = detect_rational(out.value_);
    return out;
  }

  double value() const { return value_; }
  const std::optional<Ratio>& exact() const { return ratio_; }
  bool is_rational() const { return ratio_.has_value(); }

  // Representative in [0,1).
  Real mod1() const {
    Real out = *this;
    out.text_.clear();
    if (ratio_) {
      std::int64_t q = ratio_->den;
      std::int64_t p = ((ratio_->num % q) + q) % q;
      out.ratio_ = Ratio::make(p, q);
      out.value_ = out.ratio_->value();
    } else {
      out.value_ = value_ - std::floor(value_);
      if (out.value_ >= 1.0) out.value_ = 0.0;
    }
    return out;
  }

  std::string to_text() const {
    if (!text_.empty()) return text_;
    if (ratio_) {
      if (ratio_->den == 1) return std::to_string(ratio_->num);
      return std::to_string(ratio_->num) + "/" + std::to_string(ratio_->den);
    }
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", value_);
    return buf;
  }

  friend bool operator==(const Real& a, const Real& b) {
    if (a.ratio_ && b.ratio_) return *a.ratio_ == *b.ratio_;
    return a.value_ == b.value_ && a.ratio_.has_value() == b.ratio_.has_value();
  }

 private:
  // expr := term (('+'|'-') term)*, term := atom (('*'|'/') atom)*,
  // atom := number | 'pi' | 'sqrt(' expr ')' | '(' expr ')' | '-' atom
  static long double expr(const std::string& s, std::size_t& i) {
    long double v = term(s, i);
    while (i < s.size() && (s[i] == '+' || s[i] == '-')) {
      char op = s[i++];
      long double r = term(s, i);
      v = op == '+' ? v + r : v - r;
    }
    return v;
  }
  static long double term(const std::string& s, std::size_t& i) {
    long double v = atom(s, i);
    while (i < s.size() && (s[i] == '*' || s[i] == '/')) {
      char op = s[i++];
      long double r = atom(s, i);
      v = op == '*' ? v * r : v / r;
    }
    return v;
  }
  static long double atom(const std::string& s, std::size_t& i) {
    while (i < s.size() && s[i] == ' ') ++i;
    auto fail = [&](const char* what) {
      return Error(ErrorKind::parse, "column " + std::to_string(i + 1) + ": " + what);
    };
    if (i >= s.size()) throw fail("expected a number");
    long double v;
    if (s[i] == '-') {
      ++i;
      v = -atom(s, i);
    } else if (s.compare(i, 5, "sqrt(") == 0) {
      i += 5;
      v = std::sqrt(expr(s, i));
      if (i >= s.size() || s[i] != ')') throw fail("expected ')'");
      ++i;
    } else if (s.compare(i, 2, "pi") == 0) {
      i += 2;
      v = 3.141592653589793238462643383279502884L;
    } else if (s[i] == '(') {
      ++i;
      v = expr(s, i);
      if (i >= s.size() || s[i] != ')') throw fail("expected ')'");
      ++i;
    } else {
      std::size_t j = i;
      while (j < s.size() && (std::isdigit(static_cast<unsigned char>(s[j])) || s[j] == '.')) ++j;
      if (j == i) throw fail("expected a number");
      v = std::stold(s.substr(i, j - i));
      i = j;
    }
    while (i < s.size() && s[i] == ' ') ++i;
    return v;
  }

  static std::optional<Ratio> exact_decimal(const std::string& s) {
    // plain [sign]digits[.digits] only; exponent notation goes through detection
    if (s.find_first_of("eE") != std::string::npos) return std::nullopt;
    std::size_t i = 0;
    bool neg = false;
    if (s[i] == '+' || s[i] == '-') neg = s[i++] == '-';
    int128 num = 0;
    int128 den = 1;
    bool dot = false;
    for (; i < s.size(); ++i) {
      char c = s[i];
      if (c == '.') {
        if (dot) return std::nullopt;
        dot = true;
        continue;
      }
      if (c < '0' || c > '9') return std::nullopt;
      if (num > int128(1) << 100 || den > int128(1) << 100) return std::nullopt;
      num = num * 10 + (c - '0');
      if (dot) den *= 10;
    }
    int128 a = num, b = den;
    while (b != 0) {
      int128 t = a % b;
      a = b;
      b = t;
    }
    if (a == 0) a = 1;
    num /= a;
    den /= a;
    if (den > 1'000'000) return std::nullopt;
    if (num > int128(INT64_MAX)) return std::nullopt;
    return Ratio::make(neg ? -static_cast<std::int64_t>(num) : static_cast<std::int64_t>(num),
                       static_cast<std::int64_t>(den));
  }

  double value_ = 0.0;
  std::optional<Ratio> ratio_;
  std::string text_;
};

// ---------------------------------------------------------------------------
// Angle arithmetic

// {m * t} in [0,1), computed exactly from the binary (or rational) form of t,
// so that large integer multipliers do not lose the fractional part.
inline double frac_times(int128 m, const Real& t) {
  if (m == 0) return 0.0;
  if (const auto& r = t.exact()) {
    const int128 q = r->den;
    int128 mm = m % q;
    if (mm < 0) mm += q;
    int128 pp = r->num % q;
    if (pp < 0) pp += q;
    int128 prod = (mm * pp) % q;
    double out = static_cast<double>(prod) / static_cast<double>(q);
    return out >= 1.0 ? 0.0 : out;
  }
  double v = t.value();
  if (v == 0.0) return 0.0;
  if (v < 0) {
    v = -v;
    m = -m;
  }
  int e = 0;
  double mant = std::frexp(v, &e);  // v = mant * 2^e, mant in [0.5,1)
  auto M = static_cast<std::uint64_t>(std::ldexp(mant, 53));
  int K = 53 - e;  // v = M * 2^-K
  if (K <= 0) return 0.0;
  double out;
  if (K <= 127) {
    uint128 prod = static_cast<uint128>(m) * static_cast<uint128>(M);  // wraps mod 2^128
    uint128 mask = (uint128(1) << K) - 1;
    prod &= mask;
    out = std::ldexp(static_cast<double>(prod), -K);
  } else {
    using boost::multiprecision::cpp_int;
    cpp_int mm = 0;
    bool neg = m < 0;
    uint128 mag = neg ? static_cast<uint128>(-m) : static_cast<uint128>(m);
    mm = static_cast<std::uint64_t>(mag >> 64);
    mm <<= 64;
    mm += static_cast<std::uint64_t>(mag);
    if (neg) mm = -mm;
    cpp_int modulus = cpp_int(1) << K;
    cpp_int prod = (mm * M) % modulus;
    if (prod < 0) prod += modulus;
    // keep the top 64 bits for the conversion
    int shift = K - 64;
    out = std::ldexp(static_cast<double>(static_cast<std::uint64_t>(prod >> shift)), -64);
  }
  return out >= 1.0 ? 0.0 : out;
}

inline double wrap01(double x) {
  double y = x - std::floor(x);
  return y >= 1.0 ? 0.0 : y;
}

// Circular distance between two points of R/Z.
inline double circle_dist(double a, double b) {
  double d = wrap01(a - b);
  return std::min(d, 1.0 - d);
}

// e(t) = exp(2 pi i t), exact at multiples of 1/4.
inline cplx e(double t) {
  double u = wrap01(t);
  double q = std::nearbyint(4.0 * u);
  double r = u - 0.25 * q;  // |r| <= 1/8
  double c = std::cos(2.0 * M_PI * r);
  double s = std::sin(2.0 * M_PI * r);
  if (r == 0.0) {
    c = 1.0;
    s = 0.0;
  }
  switch (static_cast<int>(q) & 3) {
    case 0: return {c, s};
    case 1: return {-s, c};
    case 2: return {-c, -s};
    default: return {s, -c};
  }
}

// ---------------------------------------------------------------------------
// Fixed-order summation

template <class T>
T pairwise_sum(std::span<const T> xs) {
  if (xs.empty()) return T{};
  if (xs.size() <= 8) {
    T acc = xs[0];
    for (std::size_t i = 1; i < xs.size(); ++i) acc += xs[i];
    return acc;
  }
  std::size_t half = xs.size() / 2;
  return pairwise_sum(xs.subspan(0, half)) + pairwise_sum(xs.subspan(half));
}

template <class T>
T pairwise_sum(const std::vector<T>& xs) {
  return pairwise_sum(std::span<const T>(xs));
}

// ---------------------------------------------------------------------------
// Threads

namespace detail {
inline std::atomic<int>& thread_setting() {
  static std::atomic<int> value{0};
  return value;
}
}  // namespace detail

inline void set_threads(int k) { detail::thread_setting() = std::max(0, k); }

inline int thread_count() {
  int k = detail::thread_setting();
  if (k > 0) return k;
  if (const char* env = std::getenv("ERGOLAB_THREADS")) {
    int v = std::atoi(env);
    if (v > 0) return v;
  }
  unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : static_cast<int>(hw);
}

// Runs fn(b) for b in [0, blocks) and returns the results in block order.
// The partition never depends on the thread count.
template <class F>
auto block_map(std::size_t blocks, F&& fn) -> std::vector<decltype(fn(std::size_t{}))> {
  using R = decltype(fn(std::size_t{}));
  std::vector<R> out(blocks);
  int k = std::min<int>(thread_count(), static_cast<int>(std::max<std::size_t>(blocks, 1)));
  if (k <= 1) {
    for (std::size_t b = 0; b < blocks; ++b) out[b] = fn(b);
    return out;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::exception_ptr> errors(k);
  std::vector<std::thread> pool;
  pool.reserve(k);
  for (int w = 0; w < k; ++w) {
    pool.emplace_back([&, w] {
      try {
        for (std::size_t b = next++; b < blocks; b = next++) out[b] = fn(b);
      } catch (...) {
        errors[w] = std::current_exception();
        next = blocks;
      }
    });
  }
  for (auto& t : pool) t.join();
  for (auto& err : errors)
    if (err) std::rethrow_exception(err);
  return out;
}

inline constexpr std::int64_t kBlockSize = 8192;

// Pairwise sum of term(n) for n = first..last inclusive, blocked.
template <class T, class F>
T block_sum(std::int64_t first, std::int64_t last, F&& term) {
  if (last < first) return T{};
  const std::int64_t count = last - first + 1;
  const auto blocks = static_cast<std::size_t>((count + kBlockSize - 1) / kBlockSize);
  auto partials = block_map(blocks, [&](std::size_t b) {
    std::int64_t lo = first + static_cast<std::int64_t>(b) * kBlockSize;
    std::int64_t hi = std::min(last, lo + kBlockSize - 1);
    std::vector<T> buf;
    buf.reserve(static_cast<std::size_t>(hi - lo + 1));
    for (std::int64_t n = lo; n <= hi; ++n) buf.push_back(term(n));
    return pairwise_sum(buf);
  });
  return pairwise_sum(partials);
}

// ---------------------------------------------------------------------------
// Counter-based random numbers (reproducible under any parallel schedule)

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

inline std::uint64_t counter_draw(std::uint64_t seed, std::uint64_t counter) {
  return splitmix64(splitmix64(seed) ^ (counter * 0xd1b54a32d192ed03ULL));
}

// Geometric schedule ceil(base * 2^k) up to and including n_max.
inline std::vector<std::int64_t> geometric_schedule(std::int64_t n_max, double base = 100.0) {
  std::vector<std::int64_t> out;
  for (int k = 0;; ++k) {
    auto n = static_cast<std::int64_t>(std::ceil(base * std::ldexp(1.0, k)));
    if (n >= n_max) break;
    out.push_back(n);
  }
  out.push_back(n_max);
  return out;
}

}  // namespace ergolab
