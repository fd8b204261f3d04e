#pragma once

// Resolvent R(z) = (H - zI)^{-1} of the Hermitization and numerical audits
// of the identities built on it: the block inverse, the two trace
// relations, Schur complements, trace interlacing, and the per-row
// decomposition of 1/R_jj that leads to the perturbed fixed-point
// equation  s = -1/(z + y s + (y-1)/z) + delta.
//
// Indexing: H has order n + p. Positions [0, n) form the first block
// (columns of X), positions [n, n + p) the second block (rows of X).
// The fixed-point decomposition is exact for rows of the second block,
// with D(z) = z + y s_hat + (y-1)/z and
//   1/R_jj = -D + eps_j,  eps_j = eps1 + eps2 + eps3 + eps4,
//   eps1 = -(1/n) sum_{k != l} x_k x_l R^(j)_kl
//   eps2 = -(1/n) sum_k (x_k^2 - 1) R^(j)_kk
//   eps3 =  (1/n) (Tr_1 R - Tr_1 R^(j))
//   eps4 =  y s_hat + (y-1)/z - (1/n) Tr_1 R
// where x is the standardized row j of X and Tr_1 the trace over the
// first block. Consequently R_jj = -(1 - eps_j R_jj) / D.

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "json.hpp"
#include "mpconv/ensemble.hpp"
#include "mpconv/kernels.hpp"
#include "mpconv/linalg.hpp"
#include "mpconv/mp_law.hpp"

namespace mpconv {

inline constexpr double kInverseResidualTol = 1e-9;
inline constexpr double kBlockFormulaTol = 1e-8;
inline constexpr double kTraceIdentityTol = 1e-9;
inline constexpr double kSchurTol = 1e-8;
inline constexpr double kInterlacingSlack = 1e-12;
inline constexpr double kRowIdentityTol = 1e-8;

struct ResolventSample {
  ComplexPoint z;
  std::vector<cplx> diag;
  cplx trace;
  cplx trace_first;   // over the first n positions
  cplx trace_second;  // over the last p positions
  std::size_t n = 0;
  std::size_t p = 0;
  double inverse_residual = 0.0;
};

/// Full inverse of H - zI. Checks max|(H - zI)R - I| <= 1e-9
/// (NumericalError) and |R_jj| <= 1/v, Im Tr R > 0 (IdentityViolation).
ComplexMatrix resolvent_matrix(const RealMatrix& h, ComplexPoint z, double* residual = nullptr);

ResolventSample resolvent(const HermitizationMatrix& h, ComplexPoint z);

/// Max elementwise deviation between the direct inverse and the block
/// closed form with Y = X^T / sqrt(n p_n):
///   [ z (Y Y^T - z^2)^{-1}    Y (Y^T Y - z^2)^{-1}   ]
///   [ (Y^T Y - z^2)^{-1} Y^T  z (Y^T Y - z^2)^{-1}   ]
/// Throws IdentityViolation above 1e-8.
double verify_block_formula(const SampleMatrix& x, ComplexPoint z);

struct TraceResiduals {
  double first = 0.0;   // (1/n)Tr_1 = (1/n)Tr_2 + (y-1)/z
  double second = 0.0;  // (1/p)Tr_2 = (1/y)(1/n)Tr_1 + (1-y)/(y z)
};

/// Throws IdentityViolation above 1e-9.
TraceResiduals trace_identities(const ResolventSample& r, double y, ComplexPoint z);

/// |1/R_jj - (H_jj - z - h_j^T (H^(j) - z)^{-1} h_j)|. Throws above 1e-8.
double schur_check(const HermitizationMatrix& h, ComplexPoint z, std::size_t j);

struct InterlacingResult {
  double lhs = 0.0;    // |Tr R - Tr R^(k)|
  double bound = 0.0;  // 1/v
};

/// Traces from the eigenvalues of H and of H with row/column k deleted.
/// Throws IdentityViolation if lhs > 1/v + 1e-12.
InterlacingResult interlacing_check(const HermitizationMatrix& h, ComplexPoint z, std::size_t k);

/// (1/p) sum over covariance eigenvalues of z / (lambda - z^2): the
/// per-sample symmetrized transform, equal to (1/p) Tr_2 R.
cplx symmetrized_trace(std::span<const double> covariance_eigenvalues, cplx z);

struct EpsilonRow {
  std::size_t row = 0;  // index into the rows of X
  cplx eps1, eps2, eps3, eps4;
  cplx eps_definition;  // D + 1/R_jj
  cplx r_jj;
  double identity_residual = 0.0;       // |R_jj + (1 - eps_j R_jj)/D|
  double decomposition_residual = 0.0;  // |sum of terms - eps_definition|
};

struct EpsilonDecomposition {
  ComplexPoint z;
  cplx s_hat;
  cplx denominator;  // D
  cplx sample_transform;  // (1/p) Tr_2 R
  std::vector<EpsilonRow> rows;
  cplx delta_p;          // (1/(p D)) sum_j eps_j R_jj over all p rows
  cplx master_residual;  // s_hat + 1/D - delta_p
  double max_identity_residual = 0.0;
  double max_decomposition_residual = 0.0;
};

/// Per-row decomposition for the listed rows (deleted-row resolvents by
/// direct inversion). Throws IdentityViolation if a row identity residual
/// exceeds 1e-8.
EpsilonDecomposition epsilon_decomposition(const SampleMatrix& x, ComplexPoint z, cplx s_hat,
                                           std::span<const std::size_t> rows);

/// Deterministic choice of `count` distinct rows of [0, p) for a replicate.
std::vector<std::size_t> audit_rows(const EnsembleConfig& config, std::uint64_t replicate,
                                    std::size_t count);

struct EpsilonEnsembleReport {
  ComplexPoint z;
  std::size_t replicates = 0;
  cplx s_hat;          // pass 1, replicates [0, N)
  cplx s_hat_heldout;  // pass 2, replicates [N, 2N)
  cplx mean_delta_p;   // pass 2
  cplx master_residual;       // s_hat + 1/D(s_hat) - mean delta over pass 2
  cplx master_residual_same;  // same, with delta averaged over pass 1
  std::size_t audited_rows = 0;
  double max_identity_residual = 0.0;
  double max_decomposition_residual = 0.0;
  double max_eps3_scaled = 0.0;  // max |eps3| n v (bound: 1)
  double max_delta_route_gap = 0.0;  // |delta from R diagonal - (t + 1/D)|
};

/// Two-pass protocol. Pass 1 estimates s_hat; pass 2 runs on held-out
/// replicates, audits `rows_per_replicate` rows on the first
/// `audit_replicates` of them, and accumulates delta_p.
EpsilonEnsembleReport epsilon_ensemble(const EnsembleConfig& config, ComplexPoint z,
                                       std::size_t replicates, std::size_t audit_replicates,
                                       std::size_t rows_per_replicate,
                                       Execution exec = Execution::parallel);

// ---------------------------------------------------------------------------
// Lemma bound sweep

struct RowMoments {
  cplx eps1, eps2, eps3;
  cplx r_jj;  // R_{n+j, n+j}
};

/// Spectral evaluation of eps1..eps3 for one row of X: eigendecomposition
/// of the first-block Gram matrix plus a rank-one (Sherman-Morrison)
/// correction for the deleted row. Used by the sweep; the direct route is
/// epsilon_decomposition.
class DeletedRowEvaluator {
 public:
  explicit DeletedRowEvaluator(const SampleMatrix& x);

  RowMoments row(std::size_t j, cplx z) const;
  /// (1/n) sum_k |R_kk|^2 over the first block.
  double mean_first_block_diag_sq(cplx z) const;
  /// (1/p) Tr_2 R.
  cplx symmetrized_trace(cplx z) const;

 private:
  std::size_t n_, p_;
  double scale_;
  RealMatrix entries_;      // p x n, raw
  std::vector<double> lambda_;
  RealMatrix vectors_;      // rows: eigenvectors of the n x n Gram matrix
};

struct LemmaSweepConfig {
  EntryDist entry_dist = EntryDist::rademacher();
  double y = 1.0;
  std::optional<double> sparsity;
  std::vector<std::size_t> ns{64, 128, 256, 512};
  std::vector<double> us;           // empty: quartiles of [sqrt a, sqrt b]
  std::optional<double> v_scale;    // c in v = c n^{-1/2}; default 2 sqrt(M4)
  std::vector<double> fixed_vs{0.5};
  std::size_t replicates = 100;
  std::size_t rows_per_replicate = 16;  // 0: trace moments only
  std::uint64_t base_seed = 0;
};

struct LemmaSweepRow {
  std::size_t n = 0, p = 0;
  double u = 0.0, v = 0.0;
  cplx s_hat;
  double e_eps1_sq = 0.0, e_eps2_sq = 0.0;
  double max_eps3_scaled = 0.0;
  double e_eps4_sq = 0.0, e_eps4_4th = 0.0;
  double mean_rkk_sq = 0.0;
  double rate_eps12 = 0.0;        // (1 + |s|)/(n v)
  double bound_eps4 = 0.0;        // 4/(n v^2)
  double rate_eps4 = 0.0;         // M4 (1 + |s|)/(n^2 v^3)
  double rate_eps4_4th = 0.0;     // M4 (1 + |s|)/(n^3 v^5)
  double ratio_eps1 = 0.0, ratio_eps2 = 0.0, ratio_eps4_bound = 0.0, ratio_eps4 = 0.0,
         ratio_eps4_4th = 0.0;
  bool eps4_bound_holds = true;
  bool scaled_v = false;  // v from the n^{-1/2} schedule
  bool row_moments = false;
};

struct LemmaSweepReport {
  LemmaSweepConfig config;
  std::vector<LemmaSweepRow> rows;
  /// Largest max/min ratio of `field` across n, over the u values, for the
  /// rows with fixed height v_fixed (nullopt: the scaled schedule).
  double max_band(double LemmaSweepRow::*field, std::optional<double> v_fixed) const;
};

LemmaSweepReport lemma_bound_sweep(const LemmaSweepConfig& config,
                                   Execution exec = Execution::parallel);

// ---------------------------------------------------------------------------
// Region checks on the Monte Carlo transform

struct HerglotzPoint {
  ComplexPoint z;
  cplx s_hat;
  cplx denominator;  // z + y s_hat + (y-1)/z
  cplx delta;        // s_hat + 1/denominator
  bool hypothesis = true;  // Im{y delta + z + (y-1)/z} >= 0
};

struct HerglotzReport {
  double y = 1.0;
  std::size_t n = 0, p = 0, replicates = 0;
  std::vector<HerglotzPoint> points;
  std::size_t positivity_violations = 0;     // Im denominator <= 0
  std::size_t below_inv_sqrt_y = 0;          // |D| < 1/sqrt y
  std::size_t below_inv_sqrt_y_slack = 0;    // |D| < 1/sqrt y - 0.05
  std::size_t below_sqrt_y = 0;              // |D| < sqrt y
  std::size_t hypothesis_excluded = 0;
  std::size_t below_one_given_hypothesis = 0;
  double min_modulus = 0.0;
  std::size_t law_below_inv_sqrt_y = 0;      // same counts with the exact law
  std::size_t law_below_sqrt_y = 0;
  double law_min_modulus = 0.0;
};

/// Requires v >= 2 sqrt(M4) n^{-1/2} at every grid point.
HerglotzReport herglotz_region_check(const EnsembleConfig& config,
                                     std::span<const ComplexPoint> grid, std::size_t replicates,
                                     Execution exec = Execution::parallel);

void to_json(nlohmann::json& j, const LemmaSweepRow& r);
void to_json(nlohmann::json& j, const HerglotzReport& r);
void to_json(nlohmann::json& j, const EpsilonEnsembleReport& r);

}  // namespace mpconv
