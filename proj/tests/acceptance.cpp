// Acceptance criteria 1-8. Each criterion prints one PASS/FAIL line; the
// exit status is nonzero if any selected criterion fails.
//
//   acceptance [--criterion N]... [--out DIR] [--cli PATH]

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <map>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "mpconv/distance.hpp"
#include "mpconv/errors.hpp"
#include "mpconv/harness.hpp"
#include "mpconv/io.hpp"
#include "mpconv/mp_law.hpp"
#include "mpconv/resolvent.hpp"
#include "mpconv/spectral.hpp"

using namespace mpconv;
namespace fs = std::filesystem;

namespace {

// Pinned tolerances and thresholds.
constexpr double kMassTol = 1e-8;
constexpr double kBranchTol = 1e-6;
constexpr double kFixedPointTol = 1e-10;
constexpr double kPairingRelTol = 1e-9;
constexpr double kBlockTol = 1e-8;
constexpr double kSchurTolA = 1e-8;
constexpr double kTraceTol = 1e-9;
constexpr double kRowIdentityTolA = 1e-8;
constexpr double kDenseSlopeMax = -0.45;
constexpr double kDenseR2Min = 0.95;
constexpr double kSparseSlopeMax = -0.4;
constexpr double kRatioBand = 3.0;
constexpr std::uint64_t kSeed = 1;
constexpr std::size_t kReplicates = 100;

const std::vector<double> kLawYs{0.1, 0.25, 0.5, 0.9, 1.0, 2.0};

struct Outcome {
  bool pass = true;
  std::string detail;
};

std::string fmt(const char* f, double a) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, a);
  return buf;
}

void note(Outcome& o, bool ok, const std::string& what) {
  o.pass = o.pass && ok;
  if (!o.detail.empty()) o.detail += "; ";
  o.detail += what + (ok ? "" : " [fail]");
}

std::vector<ComplexPoint> half_plane_grid(double u_lo, double u_hi, double v_lo, double v_hi) {
  std::vector<ComplexPoint> g;
  for (int i = 0; i < 20; ++i)
    for (int j = 0; j < 10; ++j)
      g.push_back({u_lo + (u_hi - u_lo) * i / 19.0, v_lo + (v_hi - v_lo) * j / 9.0});
  return g;
}

EnsembleConfig ensemble(std::size_t n, std::size_t p, EntryDist d, std::uint64_t seed = kSeed) {
  EnsembleConfig c;
  c.n = n;
  c.p = p;
  c.entry_dist = d;
  c.base_seed = seed;
  return c;
}

// 1. Law correctness
Outcome criterion1() {
  Outcome o;
  double worst_mass = 0, worst_branch = 0, worst_fixed = 0;
  const auto branch_grid = half_plane_grid(-1.0, 5.0, 0.05, 1.0);
  const auto sym_grid = half_plane_grid(-3.0, 3.0, 0.05, 1.0);
  std::string modulus_report;
  bool modulus_ok = true, sqrt_ok = true;
  for (double y : kLawYs) {
    const MPLaw law(y);
    worst_mass = std::max(worst_mass, std::abs(law.atom_at_zero() + mp_continuous_mass(law) - 1.0));
    for (const auto& z : branch_grid)
      worst_branch = std::max(worst_branch,
                              std::abs(mp_stieltjes(law, z).value - mp_stieltjes_quadrature(law, z)));
    double min_mod = std::numeric_limits<double>::infinity();
    for (const auto& z : sym_grid) {
      const cplx s = symmetrized_stieltjes(law, z).value;
      const cplx d = fixed_point_denominator(y, z.z(), s);
      worst_fixed = std::max(worst_fixed, std::abs(s + 1.0 / d));
      min_mod = std::min(min_mod, std::abs(d));
    }
    const bool ok = min_mod >= 1.0 / std::sqrt(y);
    modulus_ok = modulus_ok && ok;
    if (y <= 1.0) sqrt_ok = sqrt_ok && min_mod >= std::sqrt(y) * (1.0 - 1e-12);
    modulus_report += fmt(" y=%g:", y) + fmt("%.4f", min_mod) + fmt("/%.4f", 1.0 / std::sqrt(y)) +
                      (ok ? "" : "!");
  }
  note(o, worst_mass <= kMassTol, "mass err " + fmt("%.2e", worst_mass));
  note(o, worst_branch <= kBranchTol, "branch vs quadrature " + fmt("%.2e", worst_branch));
  note(o, worst_fixed <= kFixedPointTol, "fixed-point residual " + fmt("%.2e", worst_fixed));
  note(o, modulus_ok, "min|z+y s~+(y-1)/z| vs 1/sqrt(y):" + modulus_report);
  o.detail += std::string("; (reported) >= sqrt(y) bound for y <= 1 ") + (sqrt_ok ? "holds" : "violated");
  return o;
}

// 2. Spectral identities
Outcome criterion2() {
  Outcome o;
  double pairing = 0, block = 0, schur = 0, trace = 0, inter_margin = std::numeric_limits<double>::infinity();
  std::mt19937_64 eng(kSeed);
  std::uniform_real_distribution<double> uu(-2.5, 2.5), vv(0.02, 1.0);
  for (std::uint64_t k = 0; k < 20; ++k) {
    const std::size_t n = 16 + 4 * (k % 5), p = 8 + 2 * (k % 7);
    const SampleMatrix x = sample_matrix(ensemble(n, std::min(p, n), EntryDist::gaussian(), 100 + k), 0);
    const auto h = hermitization(x);
    const auto mu = symmetric_eigenvalues(h.values).eigenvalues;
    const auto lambda = covariance_spectrum(covariance_matrix(x)).eigenvalues;
    std::vector<double> sq;
    for (std::size_t i = mu.size() - lambda.size(); i < mu.size(); ++i) sq.push_back(mu[i] * mu[i]);
    const double norm = lambda.back();
    for (std::size_t i = 0; i < lambda.size(); ++i)
      pairing = std::max(pairing, std::abs(sq[i] - lambda[i]) / norm);
    for (std::size_t i = 0; i < lambda.size(); ++i)
      pairing = std::max(pairing, std::abs(mu[i] + mu[mu.size() - 1 - i]) / std::sqrt(norm));

    const ComplexPoint z{uu(eng), vv(eng)};
    block = std::max(block, verify_block_formula(x, z));
    const auto t = trace_identities(resolvent(h, z), x.config.y(), z);
    trace = std::max({trace, t.first, t.second});
  }
  for (std::uint64_t k = 0; k < 10; ++k) {
    const SampleMatrix x = sample_matrix(ensemble(24, 12, EntryDist::rademacher(), 200 + k), 0);
    const auto h = hermitization(x);
    schur = std::max(schur, schur_check(h, {uu(eng), vv(eng)}, eng() % 36));
  }
  for (std::uint64_t k = 0; k < 50; ++k) {
    const SampleMatrix x = sample_matrix(ensemble(20, 10 + k % 10, EntryDist::gaussian(), 300 + k), 0);
    const auto h = hermitization(x);
    const auto r = interlacing_check(h, {uu(eng), vv(eng)}, eng() % h.values.rows());
    inter_margin = std::min(inter_margin, r.bound - r.lhs);
  }
  note(o, pairing <= kPairingRelTol, "+-pairing rel " + fmt("%.2e", pairing));
  note(o, block <= kBlockTol, "block formula " + fmt("%.2e", block));
  note(o, schur <= kSchurTolA, "Schur " + fmt("%.2e", schur));
  note(o, inter_margin >= 0.0, "interlacing min(1/v - lhs) " + fmt("%.3e", inter_margin));
  note(o, trace <= kTraceTol, "trace identities " + fmt("%.2e", trace));
  return o;
}

// 3. Epsilon-decomposition exactness
Outcome criterion3() {
  Outcome o;
  const EnsembleConfig cfg = ensemble(128, 128, EntryDist::rademacher());
  const ComplexPoint z{1.0, 0.5};
  const auto small = epsilon_ensemble(cfg, z, 25, 25, 8);
  const auto large = epsilon_ensemble(cfg, z, 400, 25, 8);
  const double id = std::max(small.max_identity_residual, large.max_identity_residual);
  const double e3 = std::max(small.max_eps3_scaled, large.max_eps3_scaled);
  const double m25 = std::abs(small.master_residual), m400 = std::abs(large.master_residual);
  note(o, id <= kRowIdentityTolA,
       "row identity " + fmt("%.2e", id) + " over " + std::to_string(small.audited_rows + large.audited_rows) + " rows");
  note(o, e3 <= 1.0, "max |eps3| n v " + fmt("%.4f", e3));
  note(o, m400 < m25, "|master residual| 25 reps " + fmt("%.3e", m25) + " -> 400 reps " + fmt("%.3e", m400));
  return o;
}

// 4. E|eps4|^2 <= 4/(n v^2)
Outcome criterion4() {
  Outcome o;
  LemmaSweepConfig cfg;
  cfg.entry_dist = EntryDist::rademacher();
  cfg.ns = {64, 128, 256, 512};
  cfg.replicates = kReplicates;
  cfg.rows_per_replicate = 0;
  cfg.base_seed = kSeed;
  const auto rep = lemma_bound_sweep(cfg);
  std::size_t holds = 0;
  double worst = 0;
  for (const auto& r : rep.rows) {
    holds += r.eps4_bound_holds;
    worst = std::max(worst, r.ratio_eps4_bound);
  }
  note(o, holds == rep.rows.size(),
       std::to_string(holds) + "/" + std::to_string(rep.rows.size()) + " grid points, max E|eps4|^2 / (4/(n v^2)) " +
           fmt("%.3e", worst));
  return o;
}

// 5. Dense rate
Outcome criterion5(const fs::path& out) {
  Outcome o;
  ExperimentPlan plan;
  for (std::size_t n : {64u, 128u, 256u, 512u, 1024u}) plan.cases.push_back({n, n, EntryDist::rademacher(), {}});
  plan.replicates = kReplicates;
  plan.base_seed = kSeed;
  plan.output_path = out / "criterion5";
  const auto r = run_rate_sweep(plan);
  bool monotone = true;
  std::string deltas;
  for (std::size_t i = 0; i < r.cases.size(); ++i) {
    deltas += (i ? "," : "") + fmt("%.2e", r.cases[i].distances.delta_p.delta);
    if (i > 0 && !(r.cases[i].distances.delta_p.delta < r.cases[i - 1].distances.delta_p.delta)) monotone = false;
  }
  note(o, r.fit_delta_p.slope <= kDenseSlopeMax, "slope " + fmt("%.3f", r.fit_delta_p.slope));
  note(o, r.fit_delta_p.r_squared >= kDenseR2Min, "r2 " + fmt("%.3f", r.fit_delta_p.r_squared));
  note(o, monotone, "delta_p monotone [" + deltas + "]");
  o.detail += "; (reported) delta_p* slope " + fmt("%.3f", r.fit_delta_p_star.slope);
  return o;
}

// 6. Sparse rate
Outcome criterion6(const fs::path& out) {
  Outcome o;
  ExperimentPlan plan;
  for (double s : {1.0, 0.5, 0.25, 0.125}) plan.cases.push_back({512, 512, EntryDist::rademacher(), s});
  plan.replicates = kReplicates;
  plan.base_seed = kSeed;
  plan.output_path = out / "criterion6";
  const auto r = run_sparse_sweep(plan);
  note(o, r.fit_vs_law.slope <= kSparseSlopeMax,
       "slope over n p_n (vs F_y) " + fmt("%.3f", r.fit_vs_law.slope) + ", r2 " + fmt("%.3f", r.fit_vs_law.r_squared));
  if (r.fit_vs_dense) o.detail += "; (reported) slope vs dense ESD " + fmt("%.3f", r.fit_vs_dense->slope);
  return o;
}

// 7. Ratio boundedness at v = 0.5, n = 64 -> 256
Outcome criterion7() {
  Outcome o;
  LemmaSweepConfig cfg;
  cfg.entry_dist = EntryDist::gaussian();
  cfg.ns = {64, 128, 256};
  cfg.fixed_vs = {0.5};
  cfg.replicates = kReplicates;
  cfg.rows_per_replicate = 16;
  cfg.base_seed = kSeed;
  const auto rep = lemma_bound_sweep(cfg);
  const double b1 = rep.max_band(&LemmaSweepRow::ratio_eps1, 0.5);
  const double b2 = rep.max_band(&LemmaSweepRow::ratio_eps2, 0.5);
  const double br = rep.max_band(&LemmaSweepRow::mean_rkk_sq, 0.5);
  note(o, b1 <= kRatioBand, "E|eps1|^2 ratio band " + fmt("%.3f", b1));
  note(o, b2 <= kRatioBand, "E|eps2|^2 ratio band " + fmt("%.3f", b2));
  note(o, br <= kRatioBand, "(1/n)sum E|R_kk|^2 band " + fmt("%.3f", br));
  return o;
}

// 8. Determinism across thread counts
Outcome criterion8(const fs::path& out, const std::string& cli) {
  Outcome o;
  const fs::path dir = out / "criterion8";
  fs::remove_all(dir);
  io::write_text(dir / "rate.json", R"({"cases": [{"n": 64, "p": 64}, {"n": 128, "p": 128}, {"n": 256, "p": 256}],
  "replicates": 100, "base_seed": 1})");
  io::write_text(dir / "sparse.json", R"({"cases": [{"n": 128, "p": 128, "sparsity": 1.0},
  {"n": 128, "p": 128, "sparsity": 0.5}, {"n": 128, "p": 128, "sparsity": 0.25}], "replicates": 100, "base_seed": 1})");
  io::write_text(dir / "diag.json", R"({"ensemble": {"n": 64, "p": 64, "entry_dist": "gaussian", "base_seed": 1},
  "z": {"u": 1.0, "v": 0.5}, "replicates": 40, "audit_replicates": 4, "rows_per_replicate": 8,
  "herglotz": {"u_min": 0.1, "u_max": 1.9, "points": 19, "v": 0.5},
  "sweep": {"entry_dist": "gaussian", "ns": [32, 64], "replicates": 20, "rows_per_replicate": 8, "base_seed": 1}})");
  std::size_t compared = 0, differing = 0;
  bool ran = true;
  for (const std::string cmd : {"rate", "sparse", "diag"}) {
    for (const int threads : {1, 4}) {
      const fs::path target = dir / (cmd + "_t" + std::to_string(threads));
      const std::string line = cli + " " + cmd + " --config " + (dir / (cmd + ".json")).string() + " --out " +
                               target.string() + " --threads " + std::to_string(threads) + " >/dev/null";
      if (std::system(line.c_str()) != 0) ran = false;
    }
    const fs::path a = dir / (cmd + "_t1"), b = dir / (cmd + "_t4");
    if (!fs::exists(a)) continue;
    for (const auto& e : fs::directory_iterator(a)) {
      ++compared;
      const fs::path other = b / e.path().filename();
      if (!fs::exists(other) || io::read_text(e.path()) != io::read_text(other)) ++differing;
    }
  }
  note(o, ran, "CLI runs completed");
  note(o, compared > 0 && differing == 0,
       std::to_string(compared) + " result files compared at 1 vs 4 threads, " + std::to_string(differing) + " differ");
  return o;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"acceptance criteria"};
  std::vector<int> selected;
  std::string out = "acceptance_results";
  std::string cli = MPCONV_CLI;
  app.add_option("--criterion", selected, "criteria to run (default: all)")->check(CLI::Range(1, 8));
  app.add_option("--out", out, "directory for result files");
  app.add_option("--cli", cli, "path of the mpconv executable");
  CLI11_PARSE(app, argc, argv);
  if (selected.empty()) selected = {1, 2, 3, 4, 5, 6, 7, 8};

  const std::map<int, std::pair<std::string, std::function<Outcome()>>> criteria{
      {1, {"law correctness", criterion1}},
      {2, {"spectral identities", criterion2}},
      {3, {"epsilon-decomposition exactness", criterion3}},
      {4, {"E|eps4|^2 <= 4/(n v^2)", criterion4}},
      {5, {"dense rate", [&] { return criterion5(out); }}},
      {6, {"sparse rate", [&] { return criterion6(out); }}},
      {7, {"ratio boundedness", criterion7}},
      {8, {"determinism", [&] { return criterion8(out, cli); }}},
  };

  bool all = true;
  for (int c : selected) {
    const auto& [name, run] = criteria.at(c);
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::printf("criterion %d [PRIMARY] %s: %s (%s) [%.1f s]\n", c, name.c_str(), o.pass ? "PASS" : "FAIL",
                o.detail.c_str(), secs);
    std::fflush(stdout);
    all = all && o.pass;
  }
  return all ? 0 : 1;
}
