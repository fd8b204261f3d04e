#include "mpconv/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <ostream>

#include "mpconv/errors.hpp"
#include "mpconv/io.hpp"

namespace mpconv {

namespace {

constexpr int kMaxQlIterations = 60;

void require_symmetric(const RealMatrix& m) {
  if (!m.square()) throw ContractError("eigensolver: matrix is not square");
  const double tol = 1e-12 * max_abs(m);
  for (std::size_t i = 0; i < m.rows(); ++i)
    for (std::size_t j = 0; j < i; ++j)
      if (std::abs(m(i, j) - m(j, i)) > tol)
        throw ContractError("eigensolver: matrix is not symmetric");
}

// Householder tridiagonalization after the EISPACK tred2 procedure.
// `a` holds the symmetric matrix; since the algorithm addresses V[r][c]
// along columns we keep V transposed (V[r][c] = a[c*n + r]) so that all
// O(n^3) inner loops are contiguous. On exit d is the diagonal and
// e[1..n-1] the subdiagonal; with `accumulate` the rows of `a` hold the
// transformation (row c = column c of the orthogonal factor).
void householder(std::vector<double>& a, std::size_t n, std::vector<double>& d,
                 std::vector<double>& e, bool accumulate) {
  auto V = [&](std::size_t r, std::size_t c) -> double& { return a[c * n + r]; };
  d.assign(n, 0.0);
  e.assign(n, 0.0);
  for (std::size_t j = 0; j < n; ++j) d[j] = V(n - 1, j);

  for (std::size_t i = n - 1; i > 0; --i) {
    double scale = 0.0, h = 0.0;
    for (std::size_t k = 0; k < i; ++k) scale += std::abs(d[k]);
    if (scale == 0.0) {
      e[i] = d[i - 1];
      for (std::size_t j = 0; j < i; ++j) {
        d[j] = V(i - 1, j);
        V(i, j) = 0.0;
        V(j, i) = 0.0;
      }
    } else {
      for (std::size_t k = 0; k < i; ++k) {
        d[k] /= scale;
        h += d[k] * d[k];
      }
      double f = d[i - 1];
      double g = std::sqrt(h);
      if (f > 0) g = -g;
      e[i] = scale * g;
      h -= f * g;
      d[i - 1] = f - g;
      for (std::size_t j = 0; j < i; ++j) e[j] = 0.0;

      for (std::size_t j = 0; j < i; ++j) {
        f = d[j];
        V(j, i) = f;
        const double* col = &a[j * n];
        g = e[j] + col[j] * f;
        for (std::size_t k = j + 1; k < i; ++k) {
          g += col[k] * d[k];
          e[k] += col[k] * f;
        }
        e[j] = g;
      }
      f = 0.0;
      for (std::size_t j = 0; j < i; ++j) {
        e[j] /= h;
        f += e[j] * d[j];
      }
      const double hh = f / (h + h);
      for (std::size_t j = 0; j < i; ++j) e[j] -= hh * d[j];
      for (std::size_t j = 0; j < i; ++j) {
        f = d[j];
        g = e[j];
        double* col = &a[j * n];
        for (std::size_t k = j; k < i; ++k) col[k] -= (f * e[k] + g * d[k]);
        d[j] = V(i - 1, j);
        V(i, j) = 0.0;
      }
    }
    d[i] = h;
  }

  if (!accumulate) {
    for (std::size_t j = 0; j < n; ++j) d[j] = V(j, j);
    e[0] = 0.0;
    return;
  }

  for (std::size_t i = 0; i + 1 < n; ++i) {
    V(n - 1, i) = V(i, i);
    V(i, i) = 1.0;
    const double h = d[i + 1];
    const double* vi1 = &a[(i + 1) * n];
    if (h != 0.0) {
      for (std::size_t k = 0; k <= i; ++k) d[k] = vi1[k] / h;
      for (std::size_t j = 0; j <= i; ++j) {
        double* vj = &a[j * n];
        double g = 0.0;
        for (std::size_t k = 0; k <= i; ++k) g += vi1[k] * vj[k];
        for (std::size_t k = 0; k <= i; ++k) vj[k] -= g * d[k];
      }
    }
    for (std::size_t k = 0; k <= i; ++k) V(k, i + 1) = 0.0;
  }
  for (std::size_t j = 0; j < n; ++j) {
    d[j] = V(n - 1, j);
    V(n - 1, j) = 0.0;
  }
  V(n - 1, n - 1) = 1.0;
  e[0] = 0.0;
}

// Implicit-shift QL on the tridiagonal (d, e) after EISPACK tql2. With
// `vectors` non-null, rotations are applied to its rows.
void tridiagonal_ql(std::vector<double>& d, std::vector<double>& e, std::vector<double>* vectors) {
  const std::size_t n = d.size();
  if (n == 0) return;
  for (std::size_t i = 1; i < n; ++i) e[i - 1] = e[i];
  e[n - 1] = 0.0;

  double f = 0.0, tst1 = 0.0;
  const double eps = std::numeric_limits<double>::epsilon();
  for (std::size_t l = 0; l < n; ++l) {
    tst1 = std::max(tst1, std::abs(d[l]) + std::abs(e[l]));
    std::size_t m = l;
    while (m < n - 1 && std::abs(e[m]) > eps * tst1) ++m;

    if (m > l) {
      int iter = 0;
      do {
        if (++iter > kMaxQlIterations)
          throw NumericalError("eigensolver: QL iteration did not converge");
        double g = d[l];
        double p = (d[l + 1] - g) / (2.0 * e[l]);
        double r = std::hypot(p, 1.0);
        if (p < 0) r = -r;
        d[l] = e[l] / (p + r);
        d[l + 1] = e[l] * (p + r);
        const double dl1 = d[l + 1];
        double h = g - d[l];
        for (std::size_t i = l + 2; i < n; ++i) d[i] -= h;
        f += h;

        p = d[m];
        double c = 1.0, c2 = 1.0, c3 = 1.0;
        const double el1 = e[l + 1];
        double s = 0.0, s2 = 0.0;
        for (std::size_t ii = m; ii-- > l;) {
          c3 = c2;
          c2 = c;
          s2 = s;
          g = c * e[ii];
          h = c * p;
          r = std::hypot(p, e[ii]);
          e[ii + 1] = s * r;
          s = e[ii] / r;
          c = p / r;
          p = c * d[ii] - s * g;
          d[ii + 1] = h + s * (c * g + s * d[ii]);
          if (vectors) {
            double* vi = vectors->data() + ii * n;
            double* vi1 = vectors->data() + (ii + 1) * n;
            for (std::size_t k = 0; k < n; ++k) {
              const double t = vi1[k];
              vi1[k] = s * vi[k] + c * t;
              vi[k] = c * vi[k] - s * t;
            }
          }
        }
        p = -s * s2 * c3 * el1 * e[l] / dl1;
        e[l] = s * p;
        d[l] = c * p;
      } while (std::abs(e[l]) > eps * tst1);
    }
    d[l] += f;
    e[l] = 0.0;
  }
}

}  // namespace

Tridiagonal tridiagonalize(const RealMatrix& m) {
  require_symmetric(m);
  const std::size_t n = m.rows();
  Tridiagonal t;
  if (n == 0) return t;
  std::vector<double> a(m.data().begin(), m.data().end());
  std::vector<double> d, e;
  householder(a, n, d, e, false);
  t.diag = d;
  t.offdiag.assign(e.begin() + 1, e.end());
  return t;
}

Spectrum symmetric_eigenvalues(const RealMatrix& m) {
  require_symmetric(m);
  const std::size_t n = m.rows();
  Spectrum s{{}, n};
  if (n == 0) return s;
  std::vector<double> a(m.data().begin(), m.data().end());
  std::vector<double> d, e;
  householder(a, n, d, e, false);
  tridiagonal_ql(d, e, nullptr);
  std::sort(d.begin(), d.end());
  s.eigenvalues = std::move(d);
  return s;
}

EigenDecomposition symmetric_eigen(const RealMatrix& m) {
  require_symmetric(m);
  const std::size_t n = m.rows();
  EigenDecomposition out;
  if (n == 0) return out;
  std::vector<double> a(m.data().begin(), m.data().end());
  std::vector<double> d, e;
  householder(a, n, d, e, true);
  tridiagonal_ql(d, e, &a);

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](auto i, auto j) { return d[i] < d[j]; });
  out.values.resize(n);
  out.vectors = RealMatrix(n, n);
  for (std::size_t r = 0; r < n; ++r) {
    out.values[r] = d[order[r]];
    std::copy_n(a.begin() + static_cast<std::ptrdiff_t>(order[r] * n), n,
                out.vectors.row(r).begin());
  }
  return out;
}

double eigen_residual(const RealMatrix& m, const EigenDecomposition& eig) {
  const std::size_t n = m.rows();
  double worst = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const auto v = eig.vectors.row(i);
    double norm2 = 0.0;
    for (std::size_t r = 0; r < n; ++r) {
      double mv = 0.0;
      for (std::size_t c = 0; c < n; ++c) mv += m(r, c) * v[c];
      const double diff = mv - eig.values[i] * v[r];
      norm2 += diff * diff;
    }
    worst = std::max(worst, std::sqrt(norm2));
  }
  return worst;
}

Spectrum covariance_spectrum(const CovarianceMatrix& w) {
  Spectrum s = symmetric_eigenvalues(w.values);
  double norm = 0.0;
  for (double v : s.eigenvalues) norm = std::max(norm, std::abs(v));
  const double floor = -1e-10 * norm;
  for (double& v : s.eigenvalues) {
    if (v < floor) throw NumericalError("covariance spectrum has a negative eigenvalue");
    if (v < 0.0) v = 0.0;
  }
  return s;
}

EmpiricalCDF EmpiricalCDF::from_samples(std::vector<double> samples) {
  std::vector<std::pair<double, std::uint64_t>> atoms;
  atoms.reserve(samples.size());
  for (double v : samples) atoms.emplace_back(v, 1);
  return from_weighted(std::move(atoms));
}

EmpiricalCDF EmpiricalCDF::from_weighted(std::vector<std::pair<double, std::uint64_t>> atoms) {
  if (atoms.empty()) throw ContractError("empirical CDF of an empty sample");
  for (const auto& a : atoms)
    if (std::isnan(a.first)) throw ContractError("empirical CDF: NaN sample");
  std::sort(atoms.begin(), atoms.end(),
            [](const auto& a, const auto& b) { return a.first < b.first; });
  EmpiricalCDF f;
  std::uint64_t running = 0;
  for (const auto& [x, w] : atoms) {
    running += w;
    if (!f.jumps_.empty() && f.jumps_.back() == x) {
      f.counts_.back() = running;
    } else {
      f.jumps_.push_back(x);
      f.counts_.push_back(running);
    }
  }
  f.total_ = running;
  return f;
}

double EmpiricalCDF::operator()(double x) const {
  const auto it = std::upper_bound(jumps_.begin(), jumps_.end(), x);
  if (it == jumps_.begin()) return 0.0;
  return cumulative_at(static_cast<std::size_t>(it - jumps_.begin()) - 1);
}

double EmpiricalCDF::left_limit(double x) const {
  const auto it = std::lower_bound(jumps_.begin(), jumps_.end(), x);
  if (it == jumps_.begin()) return 0.0;
  return cumulative_at(static_cast<std::size_t>(it - jumps_.begin()) - 1);
}

double EmpiricalCDF::cumulative_at(std::size_t i) const {
  return static_cast<double>(counts_[i]) / static_cast<double>(total_);
}

std::vector<double> EmpiricalCDF::cumulative() const {
  std::vector<double> c(jumps_.size());
  for (std::size_t i = 0; i < c.size(); ++i) c[i] = cumulative_at(i);
  return c;
}

EmpiricalCDF esd(const Spectrum& spec) { return EmpiricalCDF::from_samples(spec.eigenvalues); }

EmpiricalCDF pooled_esd(std::span<const Spectrum> spectra) {
  if (spectra.empty()) throw ContractError("pooled ESD of no spectra");
  const std::size_t dim = spectra.front().eigenvalues.size();
  std::vector<double> all;
  all.reserve(dim * spectra.size());
  for (const auto& s : spectra) {
    if (s.eigenvalues.size() != dim) throw ContractError("pooled ESD: spectra differ in size");
    all.insert(all.end(), s.eigenvalues.begin(), s.eigenvalues.end());
  }
  return EmpiricalCDF::from_samples(std::move(all));
}

EmpiricalCDF symmetrize_cdf(const EmpiricalCDF& f) {
  if (f.jump_points().front() < 0.0)
    throw ContractError("symmetrize_cdf: distribution has negative support");
  std::vector<std::pair<double, std::uint64_t>> atoms;
  atoms.reserve(2 * f.size());
  std::uint64_t prev = 0;
  for (std::size_t i = 0; i < f.size(); ++i) {
    const std::uint64_t mass = f.count_at(i) - prev;
    prev = f.count_at(i);
    const double t = f.jump_points()[i];
    if (t == 0.0) {
      atoms.emplace_back(0.0, 2 * mass);
    } else {
      const double r = std::sqrt(t);
      atoms.emplace_back(-r, mass);
      atoms.emplace_back(r, mass);
    }
  }
  return EmpiricalCDF::from_weighted(std::move(atoms));
}

void write_csv(std::ostream& out, const EmpiricalCDF& f) {
  out << "x,F\n";
  for (std::size_t i = 0; i < f.size(); ++i)
    out << io::format_double(f.jump_points()[i]) << ',' << io::format_double(f.cumulative_at(i))
        << '\n';
}

}  // namespace mpconv
