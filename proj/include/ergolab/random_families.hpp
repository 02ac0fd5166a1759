#pragma once

// Seeded random inputs for property runs: trigonometric polynomials with
// sup norm <= 1, unimodular monomials and vector families.

#include "ergolab/measure_spaces.hpp"

namespace ergolab {

inline double uniform01(std::uint64_t seed, std::uint64_t counter) {
  return std::ldexp(static_cast<double>(counter_draw(seed, counter) >> 11), -53);
}

namespace detail {

inline Freq random_freq(const TorusSystem& sys, std::uint64_t seed, std::uint64_t& counter, int degree) {
  Freq k;
  for (auto m : sys.moduli()) {
    const std::uint64_t r = counter_draw(seed, counter++);
    if (m > 0) k.push_back(static_cast<std::int64_t>(r % static_cast<std::uint64_t>(m)));
    else k.push_back(static_cast<std::int64_t>(r % static_cast<std::uint64_t>(2 * degree + 1)) - degree);
  }
  return k;
}

}  // namespace detail

// Up to `max_terms` monomials of degree <= `degree` with coefficients scaled
// so that the coefficient sum (hence the sup norm) is at most 1.
inline TrigPoly random_trig_poly(const TorusSystem& sys, std::uint64_t seed, std::uint64_t index, int degree = 4,
                                 int max_terms = 5) {
  std::uint64_t counter = index << 16;
  const int n_terms = 1 + static_cast<int>(counter_draw(seed, counter++) % static_cast<std::uint64_t>(max_terms));
  TrigPoly p(sys.moduli());
  for (int t = 0; t < n_terms; ++t) {
    Freq k = detail::random_freq(sys, seed, counter, degree);
    const double re = 2 * uniform01(seed, counter++) - 1;
    const double im = 2 * uniform01(seed, counter++) - 1;
    p.add(k, cplx(re, im));
  }
  double total = 0;
  for (const auto& [k, c] : p.terms()) total += std::abs(c);
  if (total > 1.0) p = cplx(1.0 / total) * p;
  return p;
}

// e(theta) e(k.x) with random k and theta.
inline TrigPoly random_monomial(const TorusSystem& sys, std::uint64_t seed, std::uint64_t index, int degree = 4) {
  std::uint64_t counter = index << 16;
  TrigPoly p(sys.moduli());
  Freq k = detail::random_freq(sys, seed, counter, degree);
  p.add(k, e(uniform01(seed, counter++)));
  return p;
}

// Family `index` of vectors in C^d with norms <= 1; index 0 is the constant
// family v_n = 1.
inline std::vector<std::vector<cplx>> random_vector_family(std::uint64_t seed, std::uint64_t index) {
  std::uint64_t counter = index << 20;
  if (index == 0) return std::vector<std::vector<cplx>>(50, std::vector<cplx>{1.0});
  const auto n = static_cast<std::size_t>(8 + counter_draw(seed, counter++) % 505);
  const auto d = static_cast<std::size_t>(1 + counter_draw(seed, counter++) % 8);
  const auto shape = counter_draw(seed, counter++) % 3;
  const double alpha = uniform01(seed, counter++);
  std::vector<std::vector<cplx>> v(n, std::vector<cplx>(d));
  for (std::size_t i = 0; i < n; ++i) {
    double norm = 0;
    for (std::size_t j = 0; j < d; ++j) {
      if (shape == 0) {
        // e(n alpha (j+1)), scaled below
        v[i][j] = e(wrap01(static_cast<double>(i + 1) * alpha * static_cast<double>(j + 1)));
      } else {
        v[i][j] = cplx(2 * uniform01(seed, counter) - 1, 2 * uniform01(seed, counter + 1) - 1);
        counter += 2;
      }
      norm += std::norm(v[i][j]);
    }
    norm = std::sqrt(norm);
    const double target = shape == 2 ? uniform01(seed, counter++) : 1.0;
    if (norm > 0)
      for (auto& c : v[i]) c *= target / norm;
  }
  return v;
}

}  // namespace ergolab
