#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <vector>

#include "mpconv/ensemble.hpp"
#include "mpconv/matrix.hpp"

namespace mpconv {

struct Spectrum {
  std::vector<double> eigenvalues;  // ascending
  std::size_t source_dim = 0;
};

struct Tridiagonal {
  std::vector<double> diag;
  std::vector<double> offdiag;  // size n-1, offdiag[i] couples i and i+1
};

struct EigenDecomposition {
  std::vector<double> values;  // ascending
  RealMatrix vectors;          // row i is the unit eigenvector of values[i]
};

/// Householder reduction to tridiagonal form (orthogonally similar to m).
Tridiagonal tridiagonalize(const RealMatrix& m);

/// Eigenvalues by Householder tridiagonalization and implicit-shift QL.
/// Throws ContractError if m is not symmetric to 1e-12 * max|m|, and
/// NumericalError if QL fails to converge.
Spectrum symmetric_eigenvalues(const RealMatrix& m);

/// Same algorithm with accumulated eigenvectors.
EigenDecomposition symmetric_eigen(const RealMatrix& m);

/// max_i ||M v_i - mu_i v_i||.
double eigen_residual(const RealMatrix& m, const EigenDecomposition& eig);

/// Spectrum of W with eigenvalues in [-1e-10 ||W||, 0) clamped to 0.
Spectrum covariance_spectrum(const CovarianceMatrix& w);

/// Right-continuous step CDF. Masses are stored as integer counts so that
/// the final value is exactly 1 and tie merging is exact.
class EmpiricalCDF {
 public:
  /// Equal mass at every sample; equal values merge into one jump.
  static EmpiricalCDF from_samples(std::vector<double> samples);
  /// Jump points with integer weights (need not be sorted or distinct).
  static EmpiricalCDF from_weighted(std::vector<std::pair<double, std::uint64_t>> atoms);

  double operator()(double x) const;
  double left_limit(double x) const;

  std::span<const double> jump_points() const { return jumps_; }
  std::vector<double> cumulative() const;
  double cumulative_at(std::size_t i) const;
  std::uint64_t count_at(std::size_t i) const { return counts_[i]; }
  std::uint64_t total_count() const { return total_; }
  std::size_t size() const { return jumps_.size(); }

 private:
  std::vector<double> jumps_;
  std::vector<std::uint64_t> counts_;  // cumulative counts after each jump
  std::uint64_t total_ = 0;
};

EmpiricalCDF esd(const Spectrum& spec);

/// Average of the ESDs of equally sized spectra: the ESD of their union.
EmpiricalCDF pooled_esd(std::span<const Spectrum> spectra);

/// CDF of sign * sqrt(xi) for xi ~ F and an independent fair sign:
/// F~(x) = (1 + sgn(x) F(x^2)) / 2. Requires F supported on [0, inf).
EmpiricalCDF symmetrize_cdf(const EmpiricalCDF& f);

/// CSV with header "x,F", one row per jump point (post-jump value).
void write_csv(std::ostream& out, const EmpiricalCDF& f);

}  // namespace mpconv
