#include "mpconv/distance.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "mpconv/errors.hpp"
#include "mpconv/quadrature.hpp"

namespace mpconv {

namespace {

constexpr double kMonotoneSlack = 1e-12;
constexpr double kSmoothingTol = 1e-8;
constexpr double kHorizontalPad = 5.0;

void consider(KolmogorovResult& best, double diff, double x, Side side) {
  if (diff > best.delta) best = {diff, x, side};
}

double sample_sd(std::span<const double> v) {
  if (v.size() < 2) return 0.0;
  const double mean = kernels::compensated_sum(v) / static_cast<double>(v.size());
  std::vector<double> sq(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) sq[i] = (v[i] - mean) * (v[i] - mean);
  return std::sqrt(kernels::compensated_sum(sq) / static_cast<double>(v.size() - 1));
}

}  // namespace

CdfEvaluator mp_cdf_evaluator(const MPLaw& law) {
  CdfEvaluator g{[law](double x) { return mp_cdf(law, x); }, {}};
  if (law.atom_at_zero() > 0.0) g.atoms.push_back(0.0);
  return g;
}

CdfEvaluator symmetrized_mp_cdf_evaluator(const MPLaw& law) {
  CdfEvaluator g{[law](double x) { return symmetrized_mp_cdf(law, x); }, {}};
  if (law.atom_at_zero() > 0.0) g.atoms.push_back(0.0);
  return g;
}

KolmogorovResult kolmogorov_step_vs_cdf(const EmpiricalCDF& f, const CdfEvaluator& g) {
  KolmogorovResult best{0.0, f.jump_points().front(), Side::right_value};
  const auto jumps = f.jump_points();
  double prev_g = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < jumps.size(); ++i) {
    const double x = jumps[i];
    const double gx = g.cdf(x);
    if (gx < prev_g - kMonotoneSlack)
      throw ContractError("kolmogorov_step_vs_cdf: comparison CDF is not monotone");
    prev_g = gx;
    const double fr = f.cumulative_at(i);
    const double fl = i == 0 ? 0.0 : f.cumulative_at(i - 1);
    consider(best, std::abs(fr - gx), x, Side::right_value);
    double gl = gx;
    if (std::binary_search(g.atoms.begin(), g.atoms.end(), x))
      gl = g.cdf(std::nextafter(x, -std::numeric_limits<double>::infinity()));
    consider(best, std::abs(fl - gl), x, Side::left_limit);
  }
  for (double c : g.atoms) {
    const double gr = g.cdf(c);
    const double gl = g.cdf(std::nextafter(c, -std::numeric_limits<double>::infinity()));
    consider(best, std::abs(f(c) - gr), c, Side::right_value);
    consider(best, std::abs(f.left_limit(c) - gl), c, Side::left_limit);
  }
  return best;
}

KolmogorovResult kolmogorov_step_vs_step(const EmpiricalCDF& f, const EmpiricalCDF& g) {
  KolmogorovResult best{0.0, std::min(f.jump_points().front(), g.jump_points().front()),
                        Side::right_value};
  std::vector<double> points;
  points.reserve(f.size() + g.size());
  std::merge(f.jump_points().begin(), f.jump_points().end(), g.jump_points().begin(),
             g.jump_points().end(), std::back_inserter(points));
  points.erase(std::unique(points.begin(), points.end()), points.end());
  // Left limits at each point equal right values at the previous point.
  for (double x : points) consider(best, std::abs(f(x) - g(x)), x, Side::right_value);
  return best;
}

std::vector<Spectrum> sample_spectra(const EnsembleConfig& config, std::size_t count,
                                     std::size_t first, Execution exec) {
  config.validate();
  std::vector<Spectrum> out(count);
  kernels::for_each_index(
      count,
      [&](std::size_t i) {
        const auto x = sample_matrix(config, first + i);
        out[i] = covariance_spectrum(covariance_matrix(x, Execution::serial));
      },
      exec);
  return out;
}

std::vector<std::pair<std::size_t, std::size_t>> batch_ranges(std::size_t replicates) {
  const std::size_t batches = std::min<std::size_t>(replicates, 10);
  std::vector<std::pair<std::size_t, std::size_t>> r;
  for (std::size_t b = 0; b < batches; ++b)
    r.emplace_back(b * replicates / batches, (b + 1) * replicates / batches);
  return r;
}

DistanceSummary distances_from_spectra(std::span<const Spectrum> spectra, const MPLaw& law,
                                       Execution exec) {
  if (spectra.empty()) throw ContractError("distances_from_spectra: no replicates");
  const CdfEvaluator g = mp_cdf_evaluator(law);
  DistanceSummary out;
  out.delta_p = kolmogorov_step_vs_cdf(pooled_esd(spectra), g);

  out.per_replicate.resize(spectra.size());
  kernels::for_each_index(
      spectra.size(),
      [&](std::size_t i) { out.per_replicate[i] = kolmogorov_step_vs_cdf(esd(spectra[i]), g).delta; },
      exec);
  out.delta_p_star =
      kernels::compensated_sum(out.per_replicate) / static_cast<double>(spectra.size());

  const auto ranges = batch_ranges(spectra.size());
  std::vector<double> batch_p(ranges.size()), batch_star(ranges.size());
  kernels::for_each_index(
      ranges.size(),
      [&](std::size_t b) {
        const auto [lo, hi] = ranges[b];
        batch_p[b] = kolmogorov_step_vs_cdf(pooled_esd(spectra.subspan(lo, hi - lo)), g).delta;
        const std::span<const double> part(out.per_replicate.data() + lo, hi - lo);
        batch_star[b] = kernels::compensated_sum(part) / static_cast<double>(hi - lo);
      },
      exec);
  const double rb = std::sqrt(static_cast<double>(ranges.size()));
  out.se_p = sample_sd(batch_p) / rb;
  out.se_star = sample_sd(batch_star) / rb;
  return out;
}

std::pair<KolmogorovResult, double> delta_p_mc(const EnsembleConfig& config, std::size_t replicates,
                                               Execution exec) {
  if (replicates < 2) throw ContractError("delta_p_mc needs at least 2 replicates");
  const auto spectra = sample_spectra(config, replicates, 0, exec);
  const auto d = distances_from_spectra(spectra, MPLaw(config.y()), exec);
  return {d.delta_p, d.se_p};
}

McEstimate delta_p_star_mc(const EnsembleConfig& config, std::size_t replicates, Execution exec) {
  if (replicates < 1) throw ContractError("delta_p_star_mc needs at least 1 replicate");
  const auto spectra = sample_spectra(config, replicates, 0, exec);
  const auto d = distances_from_spectra(spectra, MPLaw(config.y()), exec);
  return {d.delta_p_star, d.se_star};
}

Transform symmetrized_empirical_transform(std::span<const Spectrum> spectra) {
  std::vector<double> pooled;
  for (const auto& s : spectra) pooled.insert(pooled.end(), s.eigenvalues.begin(), s.eigenvalues.end());
  return [pooled = std::move(pooled)](cplx z) {
    const cplx w = z * z;
    cplx acc{0.0, 0.0};
    for (double l : pooled) acc += 1.0 / (l - w);
    return z * acc / static_cast<double>(pooled.size());
  };
}

SmoothingReport smoothing_terms(const Transform& s_emp, const Transform& s_law, double v,
                                double V, double x_lo, double x_hi, std::size_t vertical_grid) {
  if (!(v > 0.0 && v < V)) throw ContractError("smoothing_terms requires 0 < v < V");
  if (!(x_lo < x_hi)) throw ContractError("smoothing_terms requires x_lo < x_hi");
  SmoothingReport r{v, V, x_lo, x_hi, 0.0, 0.0, 0.0, x_lo, v};

  auto gap = [&](cplx z) { return s_emp(z) - s_law(z); };
  const double u_lo = x_lo - kHorizontalPad, u_hi = x_hi + kHorizontalPad;
  r.term_horizontal = adaptive_simpson([&](double u) { return std::abs(gap({u, V})); }, u_lo, u_hi,
                                       kSmoothingTol, 64);
  // Both transforms behave like -1/z at infinity, so the gap decays like
  // c/u^2 and the tail integral beyond L is about |gap(L)| * |L - center|.
  const double center = 0.5 * (x_lo + x_hi);
  r.horizontal_tail = std::abs(gap({u_lo, V})) * std::abs(u_lo - center) +
                      std::abs(gap({u_hi, V})) * std::abs(u_hi - center);

  for (std::size_t i = 0; i < vertical_grid; ++i) {
    const double x =
        x_lo + (x_hi - x_lo) * static_cast<double>(i) / static_cast<double>(vertical_grid - 1);
    const double val = std::abs(
        adaptive_simpson([&](double u) { return gap({x, u}).real(); }, v, V, kSmoothingTol, 16));
    if (val > r.term_vertical) {
      r.term_vertical = val;
      r.vertical_arg_x = x;
    }
  }
  return r;
}

}  // namespace mpconv
