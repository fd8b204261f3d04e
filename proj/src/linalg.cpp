#include "mpconv/linalg.hpp"

#include <cmath>
#include <numeric>

#include "mpconv/errors.hpp"

namespace mpconv {

ComplexLU::ComplexLU(ComplexMatrix a) : lu_(std::move(a)), perm_(lu_.rows()) {
  if (!lu_.square()) throw ContractError("LU of a non-square matrix");
  const std::size_t n = lu_.rows();
  std::iota(perm_.begin(), perm_.end(), 0);
  for (std::size_t k = 0; k < n; ++k) {
    std::size_t piv = k;
    double best = std::abs(lu_(k, k));
    for (std::size_t i = k + 1; i < n; ++i) {
      const double v = std::abs(lu_(i, k));
      if (v > best) {
        best = v;
        piv = i;
      }
    }
    if (best == 0.0) throw NumericalError("LU: matrix is singular");
    if (piv != k) {
      std::swap_ranges(lu_.row(k).begin(), lu_.row(k).end(), lu_.row(piv).begin());
      std::swap(perm_[k], perm_[piv]);
    }
    const cplx inv_pivot = 1.0 / lu_(k, k);
    const auto rk = lu_.row(k);
    for (std::size_t i = k + 1; i < n; ++i) {
      auto ri = lu_.row(i);
      const cplx m = ri[k] * inv_pivot;
      ri[k] = m;
      if (m == cplx{}) continue;
      for (std::size_t j = k + 1; j < n; ++j) ri[j] -= m * rk[j];
    }
  }
}

std::vector<cplx> ComplexLU::solve(std::span<const cplx> rhs) const {
  const std::size_t n = lu_.rows();
  if (rhs.size() != n) throw ContractError("LU solve: dimension mismatch");
  std::vector<cplx> x(n);
  for (std::size_t i = 0; i < n; ++i) x[i] = rhs[perm_[i]];
  for (std::size_t i = 0; i < n; ++i) {
    const auto ri = lu_.row(i);
    cplx s = x[i];
    for (std::size_t j = 0; j < i; ++j) s -= ri[j] * x[j];
    x[i] = s;
  }
  for (std::size_t i = n; i-- > 0;) {
    const auto ri = lu_.row(i);
    cplx s = x[i];
    for (std::size_t j = i + 1; j < n; ++j) s -= ri[j] * x[j];
    x[i] = s / ri[i];
  }
  return x;
}

std::vector<cplx> ComplexLU::inverse_column(std::size_t j) const {
  std::vector<cplx> e(lu_.rows());
  e[j] = 1.0;
  return solve(e);
}

ComplexMatrix ComplexLU::inverse() const {
  const std::size_t n = lu_.rows();
  ComplexMatrix inv(n, n);
  for (std::size_t j = 0; j < n; ++j) {
    const auto col = inverse_column(j);
    for (std::size_t i = 0; i < n; ++i) inv(i, j) = col[i];
  }
  return inv;
}

ComplexMatrix shift(const RealMatrix& m, cplx z) {
  ComplexMatrix out(m.rows(), m.cols());
  for (std::size_t i = 0; i < m.rows(); ++i)
    for (std::size_t j = 0; j < m.cols(); ++j) out(i, j) = m(i, j);
  for (std::size_t i = 0; i < std::min(m.rows(), m.cols()); ++i) out(i, i) -= z;
  return out;
}

ComplexMatrix to_complex(const RealMatrix& m) { return shift(m, 0.0); }

ComplexMatrix multiply(const ComplexMatrix& a, const ComplexMatrix& b) {
  if (a.cols() != b.rows()) throw ContractError("multiply: dimension mismatch");
  ComplexMatrix c(a.rows(), b.cols());
  for (std::size_t i = 0; i < a.rows(); ++i) {
    auto ci = c.row(i);
    const auto ai = a.row(i);
    for (std::size_t k = 0; k < a.cols(); ++k) {
      const cplx aik = ai[k];
      if (aik == cplx{}) continue;
      const auto bk = b.row(k);
      for (std::size_t j = 0; j < b.cols(); ++j) ci[j] += aik * bk[j];
    }
  }
  return c;
}

double identity_residual(const ComplexMatrix& a, const ComplexMatrix& b) {
  const ComplexMatrix p = multiply(a, b);
  double worst = 0.0;
  for (std::size_t i = 0; i < p.rows(); ++i)
    for (std::size_t j = 0; j < p.cols(); ++j)
      worst = std::max(worst, std::abs(p(i, j) - (i == j ? cplx{1.0} : cplx{})));
  return worst;
}

}  // namespace mpconv
