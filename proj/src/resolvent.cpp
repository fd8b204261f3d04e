#include "mpconv/resolvent.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <random>

#include "mpconv/errors.hpp"
#include "mpconv/spectral.hpp"

namespace mpconv {
namespace {

nlohmann::json cjson(cplx c) { return nlohmann::json::array({c.real(), c.imag()}); }

void check_spectral_bounds(const ComplexMatrix& r, ComplexPoint z) {
  const double bound = (1.0 / z.v) * (1.0 + 1e-10);
  cplx trace{};
  for (std::size_t j = 0; j < r.rows(); ++j) {
    if (std::abs(r(j, j)) > bound)
      throw IdentityViolation("|R_jj| exceeds 1/v at index " + std::to_string(j));
    trace += r(j, j);
  }
  if (!(trace.imag() > 0.0)) throw IdentityViolation("Im Tr R is not positive");
}

ComplexMatrix inverse_of(const RealMatrix& m, cplx z) { return ComplexLU(shift(m, z)).inverse(); }

double block_deviation(const ComplexMatrix& r, const ComplexMatrix& block, std::size_t r0,
                       std::size_t c0) {
  double dev = 0.0;
  for (std::size_t i = 0; i < block.rows(); ++i)
    for (std::size_t j = 0; j < block.cols(); ++j)
      dev = std::max(dev, std::abs(r(r0 + i, c0 + j) - block(i, j)));
  return dev;
}

cplx trace_over_eigenvalues(std::span<const double> mu, cplx z) {
  std::vector<cplx> terms(mu.size());
  for (std::size_t i = 0; i < mu.size(); ++i) terms[i] = 1.0 / (mu[i] - z);
  return kernels::compensated_sum(terms);
}

double mean(std::span<const double> v) {
  return v.empty() ? 0.0 : kernels::compensated_sum(v) / static_cast<double>(v.size());
}

cplx mean(std::span<const cplx> v) {
  return v.empty() ? cplx{} : kernels::compensated_sum(v) / static_cast<double>(v.size());
}

std::vector<double> covariance_eigenvalues(const SampleMatrix& x) {
  return covariance_spectrum(covariance_matrix(x, Execution::serial)).eigenvalues;
}

// Standardized row of X: raw entries divided by sqrt(p_n).
std::vector<double> standardized_row(const SampleMatrix& x, std::size_t j) {
  const double f = 1.0 / std::sqrt(x.config.sparsity_or_one());
  const auto r = x.entries.row(j);
  std::vector<double> out(r.size());
  for (std::size_t k = 0; k < r.size(); ++k) out[k] = r[k] * f;
  return out;
}

}  // namespace

ComplexMatrix resolvent_matrix(const RealMatrix& h, ComplexPoint z, double* residual) {
  z.require_upper();
  const ComplexMatrix shifted = shift(h, z.z());
  ComplexMatrix r = ComplexLU(shifted).inverse();
  const double res = identity_residual(shifted, r);
  if (!(res <= kInverseResidualTol))
    throw NumericalError("resolvent inverse residual " + std::to_string(res));
  check_spectral_bounds(r, z);
  if (residual) *residual = res;
  return r;
}

ResolventSample resolvent(const HermitizationMatrix& h, ComplexPoint z) {
  if (h.values.rows() != h.n + h.p) throw ContractError("Hermitization order mismatch");
  ResolventSample s;
  s.z = z;
  s.n = h.n;
  s.p = h.p;
  const ComplexMatrix r = resolvent_matrix(h.values, z, &s.inverse_residual);
  s.diag.resize(h.n + h.p);
  for (std::size_t j = 0; j < s.diag.size(); ++j) s.diag[j] = r(j, j);
  const std::span<const cplx> d(s.diag);
  s.trace_first = kernels::compensated_sum(d.first(h.n));
  s.trace_second = kernels::compensated_sum(d.subspan(h.n));
  s.trace = kernels::compensated_sum(d);
  return s;
}

double verify_block_formula(const SampleMatrix& x, ComplexPoint z) {
  z.require_upper();
  const HermitizationMatrix h = hermitization(x);
  const ComplexMatrix r = resolvent_matrix(h.values, z);
  const std::size_t n = h.n, p = h.p;
  const double scale = x.config.entry_scale();
  const cplx w = z.z();
  const cplx w2 = w * w;

  RealMatrix y(n, p);  // X^T scaled
  for (std::size_t i = 0; i < p; ++i)
    for (std::size_t k = 0; k < n; ++k) y(k, i) = x.entries(i, k) * scale;
  const RealMatrix yyt = kernels::gram(y, 1.0, Execution::serial);             // n x n
  const RealMatrix yty = kernels::gram(transpose(y), 1.0, Execution::serial);  // p x p
  const ComplexMatrix inv_n = inverse_of(yyt, w2);
  const ComplexMatrix inv_p = inverse_of(yty, w2);

  ComplexMatrix top_left(n, n), top_right(n, p), bottom_left(p, n), bottom_right(p, p);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) top_left(i, j) = w * inv_n(i, j);
  for (std::size_t i = 0; i < p; ++i)
    for (std::size_t j = 0; j < p; ++j) bottom_right(i, j) = w * inv_p(i, j);
  const ComplexMatrix yc = to_complex(y);
  top_right = multiply(yc, inv_p);
  bottom_left = multiply(inv_p, to_complex(transpose(y)));

  const double dev = std::max({block_deviation(r, top_left, 0, 0),
                               block_deviation(r, top_right, 0, n),
                               block_deviation(r, bottom_left, n, 0),
                               block_deviation(r, bottom_right, n, n)});
  if (!(dev <= kBlockFormulaTol))
    throw IdentityViolation("block inverse formula deviation " + std::to_string(dev));
  return dev;
}

TraceResiduals trace_identities(const ResolventSample& r, double y, ComplexPoint z) {
  z.require_upper();
  if (r.n == 0 || r.p == 0) throw ContractError("trace identities need both blocks");
  const cplx w = z.z();
  const double n = static_cast<double>(r.n), p = static_cast<double>(r.p);
  const cplx first_avg = r.trace_first / n;
  TraceResiduals out;
  out.first = std::abs(first_avg - (r.trace_second / n + (y - 1.0) / w));
  out.second = std::abs(r.trace_second / p - (first_avg / y + (1.0 - y) / (y * w)));
  if (!(out.first <= kTraceIdentityTol) || !(out.second <= kTraceIdentityTol))
    throw IdentityViolation("trace identity residual " +
                            std::to_string(std::max(out.first, out.second)));
  return out;
}

double schur_check(const HermitizationMatrix& h, ComplexPoint z, std::size_t j) {
  z.require_upper();
  const std::size_t order = h.values.rows();
  if (j >= order) throw ContractError("schur_check: index out of range");
  const cplx w = z.z();
  const cplx r_jj = ComplexLU(shift(h.values, w)).inverse_column(j)[j];

  std::vector<cplx> hj;
  hj.reserve(order - 1);
  for (std::size_t k = 0; k < order; ++k)
    if (k != j) hj.emplace_back(h.values(j, k));
  cplx quad{};
  if (order > 1) {
    const ComplexLU sub(shift(delete_row_col(h.values, j), w));
    const std::vector<cplx> sol = sub.solve(hj);
    for (std::size_t k = 0; k < hj.size(); ++k) quad += hj[k] * sol[k];
  }
  const cplx schur = h.values(j, j) - w - quad;
  const double res = std::abs(1.0 / r_jj - schur);
  if (!(res <= kSchurTol)) throw IdentityViolation("Schur residual " + std::to_string(res));
  return res;
}

InterlacingResult interlacing_check(const HermitizationMatrix& h, ComplexPoint z, std::size_t k) {
  z.require_upper();
  if (k >= h.values.rows()) throw ContractError("interlacing_check: index out of range");
  const Spectrum full = symmetric_eigenvalues(h.values);
  const cplx tr = trace_over_eigenvalues(full.eigenvalues, z.z());
  cplx tr_k{};
  if (h.values.rows() > 1) {
    const Spectrum sub = symmetric_eigenvalues(delete_row_col(h.values, k));
    tr_k = trace_over_eigenvalues(sub.eigenvalues, z.z());
  }
  InterlacingResult out{std::abs(tr - tr_k), 1.0 / z.v};
  if (out.lhs > out.bound + kInterlacingSlack)
    throw IdentityViolation("interlacing bound violated: " + std::to_string(out.lhs));
  return out;
}

cplx symmetrized_trace(std::span<const double> lambda, cplx z) {
  if (lambda.empty()) throw ContractError("empty spectrum");
  const cplx w2 = z * z;
  std::vector<cplx> terms(lambda.size());
  for (std::size_t i = 0; i < lambda.size(); ++i) terms[i] = z / (lambda[i] - w2);
  return kernels::compensated_sum(terms) / static_cast<double>(lambda.size());
}

EpsilonDecomposition epsilon_decomposition(const SampleMatrix& x, ComplexPoint z, cplx s_hat,
                                           std::span<const std::size_t> rows) {
  z.require_upper();
  const HermitizationMatrix h = hermitization(x);
  const std::size_t n = h.n, p = h.p;
  const double nd = static_cast<double>(n);
  const double y = x.config.y();
  const cplx w = z.z();

  const ComplexMatrix r = resolvent_matrix(h.values, z);
  std::vector<cplx> first(n), second(p);
  for (std::size_t k = 0; k < n; ++k) first[k] = r(k, k);
  for (std::size_t j = 0; j < p; ++j) second[j] = r(n + j, n + j);
  const cplx tr_first = kernels::compensated_sum(first);

  EpsilonDecomposition out;
  out.z = z;
  out.s_hat = s_hat;
  out.denominator = fixed_point_denominator(y, w, s_hat);
  out.sample_transform = mean(second);
  const cplx d = out.denominator;

  std::vector<cplx> weighted(p);
  for (std::size_t j = 0; j < p; ++j) weighted[j] = (d + 1.0 / second[j]) * second[j];
  out.delta_p = kernels::compensated_sum(weighted) / (static_cast<double>(p) * d);
  out.master_residual = s_hat + 1.0 / d - out.delta_p;

  const cplx eps4 = y * s_hat + (y - 1.0) / w - tr_first / nd;
  for (const std::size_t j : rows) {
    if (j >= p) throw ContractError("epsilon_decomposition: row out of range");
    const std::vector<double> xr = standardized_row(x, j);
    // First block of the resolvent of H with position n + j deleted.
    const ComplexLU sub(shift(delete_row_col(h.values, n + j), w));
    const std::size_t order = n + p - 1;
    std::vector<cplx> unit(order);
    std::vector<cplx> diag_sub(n);
    std::vector<cplx> cross(n);  // sum_{l != k} x_l R^(j)_{lk} x_k, per k
    for (std::size_t k = 0; k < n; ++k) {
      std::fill(unit.begin(), unit.end(), cplx{});
      unit[k] = 1.0;
      const std::vector<cplx> col = sub.solve(unit);
      diag_sub[k] = col[k];
      std::vector<cplx> terms;
      terms.reserve(n);
      for (std::size_t l = 0; l < n; ++l)
        if (l != k) terms.push_back(xr[l] * col[l]);
      cross[k] = kernels::compensated_sum(terms) * xr[k];
    }
    std::vector<cplx> var_terms(n);
    for (std::size_t k = 0; k < n; ++k) var_terms[k] = (xr[k] * xr[k] - 1.0) * diag_sub[k];

    EpsilonRow e;
    e.row = j;
    e.r_jj = second[j];
    e.eps1 = -kernels::compensated_sum(cross) / nd;
    e.eps2 = -kernels::compensated_sum(var_terms) / nd;
    e.eps3 = (tr_first - kernels::compensated_sum(diag_sub)) / nd;
    e.eps4 = eps4;
    e.eps_definition = d + 1.0 / e.r_jj;
    const cplx eps = e.eps1 + e.eps2 + e.eps3 + e.eps4;
    e.identity_residual = std::abs(e.r_jj + (1.0 - eps * e.r_jj) / d);
    e.decomposition_residual = std::abs(eps - e.eps_definition);
    out.max_identity_residual = std::max(out.max_identity_residual, e.identity_residual);
    out.max_decomposition_residual =
        std::max(out.max_decomposition_residual, e.decomposition_residual);
    if (!(e.identity_residual <= kRowIdentityTol))
      throw IdentityViolation("row identity residual " + std::to_string(e.identity_residual) +
                              " at row " + std::to_string(j));
    out.rows.push_back(e);
  }
  return out;
}

std::vector<std::size_t> audit_rows(const EnsembleConfig& config, std::uint64_t replicate,
                                    std::size_t count) {
  std::vector<std::size_t> all(config.p);
  for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
  count = std::min(count, all.size());
  std::mt19937_64 eng(stream_seed(config.base_seed, replicate, 2));
  // Partial Fisher-Yates with an explicit uniform draw for portability.
  for (std::size_t i = 0; i < count; ++i) {
    const std::uint64_t range = all.size() - i;
    const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                                std::numeric_limits<std::uint64_t>::max() % range;
    std::uint64_t draw;
    do draw = eng();
    while (draw >= limit);
    std::swap(all[i], all[i + draw % range]);
  }
  all.resize(count);
  std::sort(all.begin(), all.end());
  return all;
}

EpsilonEnsembleReport epsilon_ensemble(const EnsembleConfig& config, ComplexPoint z,
                                       std::size_t replicates, std::size_t audit_replicates,
                                       std::size_t rows_per_replicate, Execution exec) {
  config.validate();
  z.require_upper();
  if (replicates == 0) throw ConfigError("epsilon_ensemble needs replicates >= 1");
  const cplx w = z.z();
  const double y = config.y();

  std::vector<cplx> t1(replicates), t2(replicates);
  kernels::for_each_index(
      replicates,
      [&](std::size_t i) {
        t1[i] = symmetrized_trace(covariance_eigenvalues(sample_matrix(config, i)), w);
      },
      exec);

  EpsilonEnsembleReport rep;
  rep.z = z;
  rep.replicates = replicates;
  rep.s_hat = mean(t1);
  const cplx d = fixed_point_denominator(y, w, rep.s_hat);

  audit_replicates = std::min(audit_replicates, replicates);
  std::vector<EpsilonDecomposition> audits(audit_replicates);
  kernels::for_each_index(
      replicates,
      [&](std::size_t i) {
        const SampleMatrix x = sample_matrix(config, replicates + i);
        t2[i] = symmetrized_trace(covariance_eigenvalues(x), w);
        if (i < audit_replicates) {
          const auto rows = audit_rows(config, replicates + i, rows_per_replicate);
          audits[i] = epsilon_decomposition(x, z, rep.s_hat, rows);
        }
      },
      exec);

  rep.s_hat_heldout = mean(t2);
  std::vector<cplx> delta2(replicates), delta1(replicates);
  for (std::size_t i = 0; i < replicates; ++i) {
    delta2[i] = t2[i] + 1.0 / d;
    delta1[i] = t1[i] + 1.0 / d;
  }
  rep.mean_delta_p = mean(delta2);
  rep.master_residual = rep.s_hat + 1.0 / d - rep.mean_delta_p;
  rep.master_residual_same = rep.s_hat + 1.0 / d - mean(delta1);

  const double nv = static_cast<double>(config.n) * z.v;
  for (std::size_t i = 0; i < audit_replicates; ++i) {
    const auto& a = audits[i];
    rep.audited_rows += a.rows.size();
    rep.max_identity_residual = std::max(rep.max_identity_residual, a.max_identity_residual);
    rep.max_decomposition_residual =
        std::max(rep.max_decomposition_residual, a.max_decomposition_residual);
    for (const auto& e : a.rows)
      rep.max_eps3_scaled = std::max(rep.max_eps3_scaled, std::abs(e.eps3) * nv);
    rep.max_delta_route_gap =
        std::max(rep.max_delta_route_gap, std::abs(a.delta_p - (t2[i] + 1.0 / d)));
  }
  return rep;
}

// ---------------------------------------------------------------------------

DeletedRowEvaluator::DeletedRowEvaluator(const SampleMatrix& x)
    : n_(x.entries.cols()), p_(x.entries.rows()), scale_(x.config.entry_scale()),
      entries_(x.entries) {
  const RealMatrix g = kernels::gram(transpose(x.entries), scale_ * scale_, Execution::serial);
  EigenDecomposition eig = symmetric_eigen(g);
  lambda_ = std::move(eig.values);
  vectors_ = std::move(eig.vectors);
}

RowMoments DeletedRowEvaluator::row(std::size_t j, cplx z) const {
  if (j >= p_) throw ContractError("DeletedRowEvaluator: row out of range");
  const cplx w = z * z;
  const double nd = static_cast<double>(n_);
  const auto raw = entries_.row(j);
  std::vector<double> h(n_);
  for (std::size_t k = 0; k < n_; ++k) h[k] = raw[k] * scale_;

  std::vector<cplx> inv(n_), c_over(n_);
  cplx a{}, b2{};
  for (std::size_t i = 0; i < n_; ++i) {
    inv[i] = 1.0 / (lambda_[i] - w);
    const auto vi = vectors_.row(i);
    double c = 0.0;
    for (std::size_t k = 0; k < n_; ++k) c += vi[k] * h[k];
    c_over[i] = c * inv[i];
    a += c * c_over[i];
    b2 += c_over[i] * c_over[i];
  }
  const cplx one_minus_a = 1.0 - a;

  std::vector<cplx> kdiag(n_), kh(n_);
  for (std::size_t i = 0; i < n_; ++i) {
    const auto vi = vectors_.row(i);
    for (std::size_t k = 0; k < n_; ++k) {
      kdiag[k] += vi[k] * vi[k] * inv[i];
      kh[k] += vi[k] * c_over[i];
    }
  }

  // x_k^2 / n = h_k^2, so (x_k^2 - 1)/n = h_k^2 - 1/n.
  cplx diag_weighted{}, var_sum{};
  for (std::size_t k = 0; k < n_; ++k) {
    const cplx r_kk = z * (kdiag[k] + kh[k] * kh[k] / one_minus_a);
    diag_weighted += h[k] * h[k] * r_kk;
    var_sum += (h[k] * h[k] - 1.0 / nd) * r_kk;
  }
  RowMoments m;
  const cplx quad = z * a / one_minus_a;  // (1/n) x^T R^(j) x
  m.eps1 = -(quad - diag_weighted);
  m.eps2 = -var_sum;
  m.eps3 = -(z / nd) * b2 / one_minus_a;
  m.r_jj = -one_minus_a / z;
  return m;
}

double DeletedRowEvaluator::mean_first_block_diag_sq(cplx z) const {
  const cplx w = z * z;
  std::vector<cplx> kdiag(n_);
  for (std::size_t i = 0; i < n_; ++i) {
    const cplx inv = 1.0 / (lambda_[i] - w);
    const auto vi = vectors_.row(i);
    for (std::size_t k = 0; k < n_; ++k) kdiag[k] += vi[k] * vi[k] * inv;
  }
  std::vector<double> sq(n_);
  for (std::size_t k = 0; k < n_; ++k) sq[k] = std::norm(z * kdiag[k]);
  return mean(sq);
}

cplx DeletedRowEvaluator::symmetrized_trace(cplx z) const {
  const double y = static_cast<double>(p_) / static_cast<double>(n_);
  const cplx first = z * trace_over_eigenvalues(lambda_, z * z) / static_cast<double>(n_);
  return (first - (y - 1.0) / z) / y;
}

double LemmaSweepReport::max_band(double LemmaSweepRow::*field,
                                  std::optional<double> v_fixed) const {
  std::map<double, std::pair<double, double>> by_u;
  for (const auto& r : rows) {
    if (v_fixed ? (r.scaled_v || r.v != *v_fixed) : !r.scaled_v) continue;
    const double val = r.*field;
    auto [it, fresh] = by_u.try_emplace(r.u, val, val);
    if (!fresh) {
      it->second.first = std::min(it->second.first, val);
      it->second.second = std::max(it->second.second, val);
    }
  }
  double band = 1.0;
  for (const auto& [u, mm] : by_u) {
    if (!(mm.first > 0.0)) return std::numeric_limits<double>::infinity();
    band = std::max(band, mm.second / mm.first);
  }
  return band;
}

namespace {

struct GridPoint {
  double u, v;
  bool scaled;
};

struct ReplicateMoments {
  std::vector<cplx> t;            // per grid point
  std::vector<double> eps1_sq, eps2_sq, eps3_scaled, rkk_sq;
};

}  // namespace

LemmaSweepReport lemma_bound_sweep(const LemmaSweepConfig& cfg, Execution exec) {
  if (cfg.ns.empty()) throw ConfigError("lemma sweep: empty n grid");
  if (cfg.replicates < 2) throw ConfigError("lemma sweep: replicates must be >= 2");
  cfg.entry_dist.validate();
  const MPLaw law(cfg.y);
  std::vector<double> us = cfg.us;
  if (us.empty()) {
    const double lo = std::sqrt(law.a()), hi = std::sqrt(law.b());
    for (const double f : {0.25, 0.5, 0.75}) us.push_back(lo + (hi - lo) * f);
  }
  const double m4 = cfg.entry_dist.fourth_moment() / cfg.sparsity.value_or(1.0);
  const double c = cfg.v_scale.value_or(2.0 * std::sqrt(m4));

  LemmaSweepReport report;
  report.config = cfg;
  for (const std::size_t n : cfg.ns) {
    EnsembleConfig ec;
    ec.n = n;
    ec.p = static_cast<std::size_t>(std::llround(cfg.y * static_cast<double>(n)));
    ec.entry_dist = cfg.entry_dist;
    ec.sparsity = cfg.sparsity;
    ec.base_seed = cfg.base_seed;
    ec.validate();
    const double nd = static_cast<double>(n);
    const double y = ec.y();

    std::vector<GridPoint> grid;
    for (const double u : us) {
      grid.push_back({u, c / std::sqrt(nd), true});
      for (const double v : cfg.fixed_vs) grid.push_back({u, v, false});
    }
    const std::size_t g = grid.size();
    const bool row_mode = cfg.rows_per_replicate > 0;

    std::vector<ReplicateMoments> reps(cfg.replicates);
    kernels::for_each_index(
        cfg.replicates,
        [&](std::size_t i) {
          const SampleMatrix x = sample_matrix(ec, i);
          ReplicateMoments& m = reps[i];
          m.t.resize(g);
          if (!row_mode) {
            const auto lambda = covariance_eigenvalues(x);
            for (std::size_t k = 0; k < g; ++k)
              m.t[k] = symmetrized_trace(lambda, cplx(grid[k].u, grid[k].v));
            return;
          }
          const DeletedRowEvaluator ev(x);
          const auto rows = audit_rows(ec, i, cfg.rows_per_replicate);
          m.eps1_sq.resize(g);
          m.eps2_sq.resize(g);
          m.eps3_scaled.resize(g);
          m.rkk_sq.resize(g);
          for (std::size_t k = 0; k < g; ++k) {
            const cplx zk(grid[k].u, grid[k].v);
            m.t[k] = ev.symmetrized_trace(zk);
            m.rkk_sq[k] = ev.mean_first_block_diag_sq(zk);
            std::vector<double> e1(rows.size()), e2(rows.size());
            for (std::size_t r = 0; r < rows.size(); ++r) {
              const RowMoments rm = ev.row(rows[r], zk);
              e1[r] = std::norm(rm.eps1);
              e2[r] = std::norm(rm.eps2);
              m.eps3_scaled[k] = std::max(m.eps3_scaled[k], std::abs(rm.eps3) * nd * grid[k].v);
            }
            m.eps1_sq[k] = mean(e1);
            m.eps2_sq[k] = mean(e2);
          }
        },
        exec);

    for (std::size_t k = 0; k < g; ++k) {
      const std::size_t reps_n = cfg.replicates;
      std::vector<cplx> t(reps_n);
      for (std::size_t i = 0; i < reps_n; ++i) t[i] = reps[i].t[k];
      LemmaSweepRow row;
      row.n = n;
      row.p = ec.p;
      row.u = grid[k].u;
      row.v = grid[k].v;
      row.scaled_v = grid[k].scaled;
      row.row_moments = row_mode;
      row.s_hat = mean(t);
      std::vector<double> e4sq(reps_n), e4q(reps_n);
      for (std::size_t i = 0; i < reps_n; ++i) {
        // eps4 = y s_hat + (y-1)/z - (1/n)Tr_1 R = y (s_hat - t_i)
        const double a = std::norm(y * (row.s_hat - t[i]));
        e4sq[i] = a;
        e4q[i] = a * a;
      }
      row.e_eps4_sq = mean(e4sq);
      row.e_eps4_4th = mean(e4q);
      if (row_mode) {
        std::vector<double> a1(reps_n), a2(reps_n), rk(reps_n);
        for (std::size_t i = 0; i < reps_n; ++i) {
          a1[i] = reps[i].eps1_sq[k];
          a2[i] = reps[i].eps2_sq[k];
          rk[i] = reps[i].rkk_sq[k];
          row.max_eps3_scaled = std::max(row.max_eps3_scaled, reps[i].eps3_scaled[k]);
        }
        row.e_eps1_sq = mean(a1);
        row.e_eps2_sq = mean(a2);
        row.mean_rkk_sq = mean(rk);
      }
      const double v = row.v;
      const double s_abs = 1.0 + std::abs(row.s_hat);
      row.rate_eps12 = s_abs / (nd * v);
      row.bound_eps4 = 4.0 / (nd * v * v);
      row.rate_eps4 = m4 * s_abs / (nd * nd * v * v * v);
      row.rate_eps4_4th = m4 * s_abs / (nd * nd * nd * std::pow(v, 5));
      row.ratio_eps1 = row.e_eps1_sq / row.rate_eps12;
      row.ratio_eps2 = row.e_eps2_sq / row.rate_eps12;
      row.ratio_eps4_bound = row.e_eps4_sq / row.bound_eps4;
      row.ratio_eps4 = row.e_eps4_sq / row.rate_eps4;
      row.ratio_eps4_4th = row.e_eps4_4th / row.rate_eps4_4th;
      row.eps4_bound_holds = row.e_eps4_sq <= row.bound_eps4;
      report.rows.push_back(row);
    }
  }
  return report;
}

HerglotzReport herglotz_region_check(const EnsembleConfig& config,
                                     std::span<const ComplexPoint> grid, std::size_t replicates,
                                     Execution exec) {
  config.validate();
  if (replicates == 0) throw ConfigError("herglotz_region_check needs replicates >= 1");
  const double m4 = config.entry_dist.fourth_moment() / config.sparsity_or_one();
  const double v_min = 2.0 * std::sqrt(m4) / std::sqrt(static_cast<double>(config.n));
  for (const auto& z : grid) {
    z.require_upper();
    if (z.v < v_min)
      throw ContractError("grid point below v = 2 sqrt(M4) n^{-1/2}: v = " + std::to_string(z.v));
  }
  const double y = config.y();
  const MPLaw law(y);

  std::vector<std::vector<cplx>> t(replicates);
  kernels::for_each_index(
      replicates,
      [&](std::size_t i) {
        const auto lambda = covariance_eigenvalues(sample_matrix(config, i));
        t[i].resize(grid.size());
        for (std::size_t k = 0; k < grid.size(); ++k) t[i][k] = symmetrized_trace(lambda, grid[k].z());
      },
      exec);

  HerglotzReport rep;
  rep.y = y;
  rep.n = config.n;
  rep.p = config.p;
  rep.replicates = replicates;
  rep.min_modulus = std::numeric_limits<double>::infinity();
  rep.law_min_modulus = std::numeric_limits<double>::infinity();
  const double inv_sqrt_y = 1.0 / std::sqrt(y), sqrt_y = std::sqrt(y);
  for (std::size_t k = 0; k < grid.size(); ++k) {
    std::vector<cplx> col(replicates);
    for (std::size_t i = 0; i < replicates; ++i) col[i] = t[i][k];
    HerglotzPoint pt;
    pt.z = grid[k];
    const cplx w = grid[k].z();
    pt.s_hat = mean(col);
    pt.denominator = fixed_point_denominator(y, w, pt.s_hat);
    pt.delta = pt.s_hat + 1.0 / pt.denominator;
    pt.hypothesis = (y * pt.delta + w + (y - 1.0) / w).imag() >= 0.0;
    const double mod = std::abs(pt.denominator);
    rep.min_modulus = std::min(rep.min_modulus, mod);
    if (!(pt.denominator.imag() > 0.0)) ++rep.positivity_violations;
    if (mod < inv_sqrt_y) ++rep.below_inv_sqrt_y;
    if (mod < inv_sqrt_y - 0.05) ++rep.below_inv_sqrt_y_slack;
    if (mod < sqrt_y) ++rep.below_sqrt_y;
    if (!pt.hypothesis)
      ++rep.hypothesis_excluded;
    else if (mod < 1.0)
      ++rep.below_one_given_hypothesis;

    const cplx s_law = symmetrized_stieltjes(law, grid[k]).value;
    const double law_mod = std::abs(fixed_point_denominator(y, w, s_law));
    rep.law_min_modulus = std::min(rep.law_min_modulus, law_mod);
    if (law_mod < inv_sqrt_y) ++rep.law_below_inv_sqrt_y;
    if (law_mod < sqrt_y) ++rep.law_below_sqrt_y;
    rep.points.push_back(pt);
  }
  return rep;
}

void to_json(nlohmann::json& j, const LemmaSweepRow& r) {
  j = nlohmann::json{{"n", r.n},
                     {"p", r.p},
                     {"z", {{"u", r.u}, {"v", r.v}}},
                     {"scaled_v", r.scaled_v},
                     {"s_hat", cjson(r.s_hat)},
                     {"e_eps4_sq", r.e_eps4_sq},
                     {"e_eps4_4th", r.e_eps4_4th},
                     {"bound_eps4", r.bound_eps4},
                     {"eps4_bound_holds", r.eps4_bound_holds},
                     {"ratio_eps4_bound", r.ratio_eps4_bound},
                     {"ratio_eps4", r.ratio_eps4},
                     {"ratio_eps4_4th", r.ratio_eps4_4th}};
  if (r.row_moments) {
    j["e_eps1_sq"] = r.e_eps1_sq;
    j["e_eps2_sq"] = r.e_eps2_sq;
    j["max_eps3_nv"] = r.max_eps3_scaled;
    j["mean_rkk_sq"] = r.mean_rkk_sq;
    j["ratio_eps1"] = r.ratio_eps1;
    j["ratio_eps2"] = r.ratio_eps2;
  }
}

void to_json(nlohmann::json& j, const HerglotzReport& r) {
  nlohmann::json pts = nlohmann::json::array();
  for (const auto& p : r.points)
    pts.push_back({{"z", {{"u", p.z.u}, {"v", p.z.v}}},
                   {"s_hat", cjson(p.s_hat)},
                   {"denominator", cjson(p.denominator)},
                   {"delta", cjson(p.delta)},
                   {"hypothesis", p.hypothesis}});
  j = nlohmann::json{{"n", r.n},
                     {"p", r.p},
                     {"y", r.y},
                     {"replicates", r.replicates},
                     {"positivity_violations", r.positivity_violations},
                     {"below_inv_sqrt_y", r.below_inv_sqrt_y},
                     {"below_inv_sqrt_y_minus_0.05", r.below_inv_sqrt_y_slack},
                     {"below_sqrt_y", r.below_sqrt_y},
                     {"hypothesis_excluded", r.hypothesis_excluded},
                     {"below_one_given_hypothesis", r.below_one_given_hypothesis},
                     {"min_modulus", r.min_modulus},
                     {"law_below_inv_sqrt_y", r.law_below_inv_sqrt_y},
                     {"law_below_sqrt_y", r.law_below_sqrt_y},
                     {"law_min_modulus", r.law_min_modulus},
                     {"points", pts}};
}

void to_json(nlohmann::json& j, const EpsilonEnsembleReport& r) {
  j = nlohmann::json{{"z", {{"u", r.z.u}, {"v", r.z.v}}},
                     {"replicates", r.replicates},
                     {"s_hat", cjson(r.s_hat)},
                     {"s_hat_heldout", cjson(r.s_hat_heldout)},
                     {"mean_delta_p", cjson(r.mean_delta_p)},
                     {"master_residual", cjson(r.master_residual)},
                     {"master_residual_same_ensemble", cjson(r.master_residual_same)},
                     {"audited_rows", r.audited_rows},
                     {"identity_residuals",
                      {{"row_identity", r.max_identity_residual},
                       {"decomposition", r.max_decomposition_residual},
                       {"delta_route_gap", r.max_delta_route_gap}}},
                     {"max_eps3_nv", r.max_eps3_scaled}};
}

}  // namespace mpconv
