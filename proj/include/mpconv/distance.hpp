#pragma once

// Kolmogorov distances between step CDFs and limit laws, Monte Carlo
// estimators of sup|E F_p - F_y| and E sup|F_p - F_y|, and the raw
// Stieltjes-transform functionals that bound a Kolmogorov distance.

#include <functional>
#include <span>
#include <vector>

#include "mpconv/ensemble.hpp"
#include "mpconv/kernels.hpp"
#include "mpconv/mp_law.hpp"
#include "mpconv/spectral.hpp"

namespace mpconv {

enum class Side { left_limit, right_value };

struct KolmogorovResult {
  double delta = 0.0;
  double arg_x = 0.0;
  Side side = Side::right_value;
};

/// A monotone CDF with finitely many (known) atoms; continuous elsewhere.
struct CdfEvaluator {
  std::function<double(double)> cdf;
  std::vector<double> atoms;
};

CdfEvaluator mp_cdf_evaluator(const MPLaw& law);
CdfEvaluator symmetrized_mp_cdf_evaluator(const MPLaw& law);

/// Exact sup_x |F(x) - G(x)|: checks F and its left limit at every jump
/// of F and at every atom of G. Throws ContractError if G decreases.
KolmogorovResult kolmogorov_step_vs_cdf(const EmpiricalCDF& f, const CdfEvaluator& g);

/// Exact sup_x |F(x) - G(x)| for two step CDFs.
KolmogorovResult kolmogorov_step_vs_step(const EmpiricalCDF& f, const EmpiricalCDF& g);

struct McEstimate {
  double value = 0.0;
  double std_error = 0.0;
};

/// Spectra of W for replicates [first, first + count), computed in parallel.
std::vector<Spectrum> sample_spectra(const EnsembleConfig& config, std::size_t count,
                                     std::size_t first = 0, Execution exec = Execution::parallel);

/// [lo, hi) index ranges of the batches used for standard errors.
std::vector<std::pair<std::size_t, std::size_t>> batch_ranges(std::size_t replicates);

struct DistanceSummary {
  KolmogorovResult delta_p;        // sup |mean ESD - F_y|
  double se_p = 0.0;
  double delta_p_star = 0.0;       // mean of sup |ESD - F_y|
  double se_star = 0.0;
  std::vector<double> per_replicate;
};

/// Both distances from an already sampled replicate set.
DistanceSummary distances_from_spectra(std::span<const Spectrum> spectra, const MPLaw& law,
                                       Execution exec = Execution::parallel);

std::pair<KolmogorovResult, double> delta_p_mc(const EnsembleConfig& config, std::size_t replicates,
                                               Execution exec = Execution::parallel);

McEstimate delta_p_star_mc(const EnsembleConfig& config, std::size_t replicates,
                           Execution exec = Execution::parallel);

using Transform = std::function<cplx(cplx)>;

/// Symmetrized empirical transform (1/N) sum z / (lambda - z^2) over the
/// pooled covariance eigenvalues.
Transform symmetrized_empirical_transform(std::span<const Spectrum> spectra);

struct SmoothingReport {
  double v = 0.0;
  double V = 0.0;
  double x_lo = 0.0;
  double x_hi = 0.0;
  double term_horizontal = 0.0;      // int |s - t| du at height V
  double horizontal_tail = 0.0;      // truncation estimate beyond +-5
  double term_vertical = 0.0;        // sup_x |Re int_v^V (s - t)(x + iu) du|
  double vertical_arg_x = 0.0;
  double term_v = 0.0;
};

/// Raw functionals (no constants). Integrals by adaptive Simpson to 1e-8;
/// the horizontal integral runs over [x_lo - 5, x_hi + 5].
SmoothingReport smoothing_terms(const Transform& s_emp, const Transform& s_law, double v,
                                double V, double x_lo, double x_hi,
                                std::size_t vertical_grid = 101);

}  // namespace mpconv
