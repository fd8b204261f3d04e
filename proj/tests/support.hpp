#pragma once

// Test oracles written independently of the library algorithms.

#include <cmath>
#include <complex>
#include <random>
#include <vector>

#include "mpconv/ensemble.hpp"
#include "mpconv/matrix.hpp"

namespace testsupport {

using mpconv::cplx;

inline mpconv::RealMatrix random_symmetric(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 eng(seed);
  std::normal_distribution<double> g;
  mpconv::RealMatrix m(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j <= i; ++j) m(i, j) = m(j, i) = g(eng);
  return m;
}

inline mpconv::SampleMatrix random_sample(std::size_t p, std::size_t n, std::uint64_t seed,
                                          mpconv::EntryDist dist = mpconv::EntryDist::gaussian()) {
  mpconv::EnsembleConfig c;
  c.n = n;
  c.p = p;
  c.entry_dist = dist;
  c.base_seed = seed;
  return mpconv::sample_matrix(c, 0);
}

inline mpconv::SampleMatrix explicit_sample(const mpconv::RealMatrix& entries) {
  mpconv::SampleMatrix x;
  x.entries = entries;
  x.config.p = entries.rows();
  x.config.n = entries.cols();
  return x;
}

// Gauss-Jordan with full pivoting.
inline mpconv::ComplexMatrix gauss_jordan_inverse(mpconv::ComplexMatrix a) {
  const std::size_t n = a.rows();
  mpconv::ComplexMatrix inv = mpconv::ComplexMatrix::identity(n);
  for (std::size_t c = 0; c < n; ++c) {
    std::size_t piv = c;
    for (std::size_t r = c + 1; r < n; ++r)
      if (std::abs(a(r, c)) > std::abs(a(piv, c))) piv = r;
    for (std::size_t k = 0; k < n; ++k) {
      std::swap(a(c, k), a(piv, k));
      std::swap(inv(c, k), inv(piv, k));
    }
    const cplx d = a(c, c);
    for (std::size_t k = 0; k < n; ++k) {
      a(c, k) /= d;
      inv(c, k) /= d;
    }
    for (std::size_t r = 0; r < n; ++r) {
      if (r == c) continue;
      const cplx f = a(r, c);
      for (std::size_t k = 0; k < n; ++k) {
        a(r, k) -= f * a(c, k);
        inv(r, k) -= f * inv(c, k);
      }
    }
  }
  return inv;
}

inline mpconv::ComplexMatrix shifted(const mpconv::RealMatrix& m, cplx z) {
  mpconv::ComplexMatrix out(m.rows(), m.cols());
  for (std::size_t i = 0; i < m.rows(); ++i)
    for (std::size_t j = 0; j < m.cols(); ++j) out(i, j) = m(i, j) - (i == j ? z : cplx{});
  return out;
}

// Number of eigenvalues of the tridiagonal (d, e) below x (Sturm count).
inline std::size_t sturm_count(const std::vector<double>& d, const std::vector<double>& e, double x) {
  std::size_t count = 0;
  double q = 1.0;
  for (std::size_t i = 0; i < d.size(); ++i) {
    const double off = i == 0 ? 0.0 : e[i - 1] * e[i - 1];
    q = d[i] - x - (i == 0 ? 0.0 : off / q);
    if (q == 0.0) q = -1e-300;
    if (q < 0.0) ++count;
  }
  return count;
}

inline std::vector<double> bisection_eigenvalues(const std::vector<double>& d,
                                                 const std::vector<double>& e) {
  double lo = 0.0, hi = 0.0;
  for (std::size_t i = 0; i < d.size(); ++i) {
    const double r = (i > 0 ? std::abs(e[i - 1]) : 0.0) + (i < e.size() ? std::abs(e[i]) : 0.0);
    lo = std::min(lo, d[i] - r);
    hi = std::max(hi, d[i] + r);
  }
  std::vector<double> out;
  for (std::size_t k = 0; k < d.size(); ++k) {
    double a = lo - 1.0, b = hi + 1.0;
    for (int it = 0; it < 200; ++it) {
      const double m = 0.5 * (a + b);
      if (sturm_count(d, e, m) > k)
        b = m;
      else
        a = m;
    }
    out.push_back(0.5 * (a + b));
  }
  return out;
}

}  // namespace testsupport
